#pragma once

#include <complex>
#include <vector>

#include "beamnf/multi_index.hpp"

namespace beamnf {

using cplx = std::complex<double>;

// max(1, |j|)
inline int mode_scale(int j) {
  int a = j < 0 ? -j : j;
  return a < 1 ? 1 : a;
}
// max(2, |j|)
inline int weight_scale(int j) {
  int a = j < 0 ? -j : j;
  return a < 2 ? 2 : a;
}

// (ln(2 + max(1,|y|)))^q, q in (1,2].
double lambda(double y, double q);

struct Weight {
  enum class Kind { SubExp, Sobolev };

  Kind kind = Kind::Sobolev;
  double s = 0.0;
  double p = 1.0;
  double q = 2.0;
  int M = 1;

  static Weight subexp(double s, double p, double q, int M);
  static Weight sobolev(double p, int M);

  double log_at(int j) const;
  double at(int j) const;
  // Same family with exponents shifted (s += ds for SubExp, p += dp).
  Weight shifted(double ds, double dp) const;
};

// Truncated Fourier coefficients on the window [-M, M].
class SeqState {
 public:
  explicit SeqState(int M = 0);
  SeqState(int M, std::vector<cplx> coeffs);

  static SeqState unit(int M, int j);

  int cutoff() const { return M_; }
  cplx& operator[](int j) { return c_[j + M_]; }
  const cplx& operator[](int j) const { return c_[j + M_]; }
  std::vector<cplx>& data() { return c_; }
  const std::vector<cplx>& data() const { return c_; }

 private:
  int M_;
  std::vector<cplx> c_;
};

double seq_norm(const SeqState& u, const Weight& w);

// Convolution truncated to the common window.
SeqState convolve(const SeqState& f, const SeqState& g);

// Constant of the convolution estimate for the weight family of w.
double algebra_constant(const Weight& w);

// r^{|a|+|b|-2} w_j^2 / prod_i w_i^{a_i+b_i}, evaluated through logs.
double log_coeff_c(int j, const MultiIndex& alpha, const MultiIndex& beta, double r,
                   const Weight& w);
double coeff_c(int j, const MultiIndex& alpha, const MultiIndex& beta, double r,
               const Weight& w);

}  // namespace beamnf

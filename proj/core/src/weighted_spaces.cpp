#include "beamnf/weighted_spaces.hpp"

#include <cmath>

#include "beamnf/errors.hpp"

namespace beamnf {

double lambda(double y, double q) {
  if (!(q > 1.0 && q <= 2.0)) throw ParameterError("q must lie in (1,2]");
  double a = std::max(1.0, std::abs(y));
  return std::pow(std::log(2.0 + a), q);
}

Weight Weight::subexp(double s, double p, double q, int M) {
  if (s < 0) throw ParameterError("s must be nonnegative");
  if (!(p > 0.5)) throw ParameterError("p must exceed 1/2");
  if (!(q > 1.0 && q <= 2.0)) throw ParameterError("q must lie in (1,2]");
  if (M < 1) throw ParameterError("mode cutoff must be positive");
  return Weight{Kind::SubExp, s, p, q, M};
}

Weight Weight::sobolev(double p, int M) {
  if (!(p > 0.5)) throw ParameterError("p must exceed 1/2");
  if (M < 1) throw ParameterError("mode cutoff must be positive");
  return Weight{Kind::Sobolev, 0.0, p, 2.0, M};
}

double Weight::log_at(int j) const {
  double v = p * std::log(static_cast<double>(weight_scale(j)));
  if (kind == Kind::SubExp) v += s * lambda(j, q);
  return v;
}

double Weight::at(int j) const { return std::exp(log_at(j)); }

Weight Weight::shifted(double ds, double dp) const {
  Weight w = *this;
  w.p += dp;
  if (kind == Kind::SubExp) w.s += ds;
  return w;
}

SeqState::SeqState(int M) : M_(M), c_(2 * M + 1) {
  if (M < 0) throw ParameterError("negative mode cutoff");
}

SeqState::SeqState(int M, std::vector<cplx> coeffs) : M_(M), c_(std::move(coeffs)) {
  if (M < 0 || c_.size() != static_cast<size_t>(2 * M + 1))
    throw DimensionError("coefficient vector does not match the window");
}

SeqState SeqState::unit(int M, int j) {
  SeqState u(M);
  u[j] = 1.0;
  return u;
}

double seq_norm(const SeqState& u, const Weight& w) {
  if (u.cutoff() != w.M) throw DimensionError("state and weight cutoffs differ");
  double acc = 0.0;
  for (int j = -u.cutoff(); j <= u.cutoff(); ++j) acc += std::norm(u[j]) * std::exp(2 * w.log_at(j));
  return std::sqrt(acc);
}

SeqState convolve(const SeqState& f, const SeqState& g) {
  if (f.cutoff() != g.cutoff()) throw DimensionError("convolution of different windows");
  int M = f.cutoff();
  SeqState out(M);
  for (int a = -M; a <= M; ++a) {
    if (f[a] == 0.0) continue;
    int lo = std::max(-M, -M - a), hi = std::min(M, M - a);
    for (int b = lo; b <= hi; ++b) out[a + b] += f[a] * g[b];
  }
  return out;
}

double algebra_constant(const Weight& w) {
  if (w.kind == Weight::Kind::Sobolev) {
    double p = w.p;
    return std::sqrt(2.0) * std::sqrt(2.0 + (2 * p + 1) / (2 * p - 1));
  }
  // sum over Z of <i>^{-2p} = 1 + 2 zeta(2p)
  double sum = 1.0 + 2.0 * std::riemann_zeta(2.0 * w.p);
  return std::pow(8.0, w.p) * std::sqrt(sum);
}

double log_coeff_c(int j, const MultiIndex& alpha, const MultiIndex& beta, double r,
                   const Weight& w) {
  if (alpha[j] + beta[j] == 0) throw DomainError("mode j absent from the monomial");
  if (!(r > 0)) throw ParameterError("radius must be positive");
  int deg = alpha.total() + beta.total();
  double v = (deg - 2) * std::log(r) + 2 * w.log_at(j);
  for (const auto& [i, k] : alpha.entries()) v -= k * w.log_at(i);
  for (const auto& [i, k] : beta.entries()) v -= k * w.log_at(i);
  return v;
}

double coeff_c(int j, const MultiIndex& alpha, const MultiIndex& beta, double r,
               const Weight& w) {
  return std::exp(log_coeff_c(j, alpha, beta, r, w));
}

}  // namespace beamnf

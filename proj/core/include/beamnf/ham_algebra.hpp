#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "beamnf/multi_index.hpp"
#include "beamnf/weighted_spaces.hpp"

namespace beamnf {

inline constexpr int kMaxModeCutoff = 15;
inline constexpr int kMaxDegree = 13;
inline constexpr int kInfiniteDegree = std::numeric_limits<int>::max();

// Exponents of u^alpha ubar^beta packed four bits per variable.
// u_j lives in nibble j+15 of words 0-1, ubar_j in nibble j+15 of words 2-3.
struct MonoKey {
  std::array<std::uint64_t, 4> w{};

  static MonoKey from(const MultiIndex& alpha, const MultiIndex& beta);

  int u_exp(int j) const { return nibble(j + kMaxModeCutoff); }
  int ubar_exp(int j) const { return nibble(32 + j + kMaxModeCutoff); }
  void add_u(int j, int e) { add_nibble(j + kMaxModeCutoff, e); }
  void add_ubar(int j, int e) { add_nibble(32 + j + kMaxModeCutoff, e); }

  int degree() const;
  MonoKey conj() const { return MonoKey{{w[2], w[3], w[0], w[1]}}; }
  MultiIndex alpha() const;
  MultiIndex beta() const;
  int momentum() const;
  int max_abs_mode() const;

  friend bool operator==(const MonoKey&, const MonoKey&) = default;
  friend auto operator<=>(const MonoKey&, const MonoKey&) = default;

 private:
  int nibble(int slot) const {
    return static_cast<int>((w[slot >> 4] >> (4 * (slot & 15))) & 0xF);
  }
  void add_nibble(int slot, int e) {
    w[slot >> 4] += static_cast<std::uint64_t>(e) << (4 * (slot & 15));
  }
};

struct MonoKeyHash {
  std::size_t operator()(const MonoKey& k) const noexcept;
};

struct Monomial {
  MultiIndex alpha;
  MultiIndex beta;
  cplx coeff;
};

// Finite sum of monomials H_{a,b} u^a ubar^b on the window [-M, M].
class PolyHamiltonian {
 public:
  using Map = std::unordered_map<MonoKey, cplx, MonoKeyHash>;

  explicit PolyHamiltonian(int M = 1);

  int cutoff() const { return M_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  // c u^a ubar^b as given.
  void add(const MultiIndex& a, const MultiIndex& b, cplx c);
  // c u^a ubar^b + conj(c) u^b ubar^a; for a == b only Re(c) is added.
  void add_real(const MultiIndex& a, const MultiIndex& b, cplx c);
  void add_key(const MonoKey& k, cplx c);

  cplx coeff(const MultiIndex& a, const MultiIndex& b) const;
  cplx coeff(const MonoKey& k) const;

  const Map& terms() const { return terms_; }
  // Sorted by (degree, alpha, beta).
  std::vector<Monomial> monomials() const;
  std::vector<std::pair<MonoKey, cplx>> sorted_terms() const;

  bool is_real(double rel_tol = 1e-12) const;
  bool conserves_momentum() const;
  double max_abs_coeff() const;
  int max_degree() const;

  // Drop entries below rel * max |coeff|.
  void prune(double rel = 1e-15);

  cplx evaluate(const SeqState& u) const;

  PolyHamiltonian& operator+=(const PolyHamiltonian& o);
  PolyHamiltonian& operator-=(const PolyHamiltonian& o);
  PolyHamiltonian& operator*=(cplx c);
  friend PolyHamiltonian operator+(PolyHamiltonian a, const PolyHamiltonian& b) { return a += b; }
  friend PolyHamiltonian operator-(PolyHamiltonian a, const PolyHamiltonian& b) { return a -= b; }
  friend PolyHamiltonian operator*(cplx c, PolyHamiltonian a) { return a *= c; }

 private:
  void check_key(const MonoKey& k) const;
  int M_;
  Map terms_;
};

// Sum_j f(j) |u_j|^2 over the window.
PolyHamiltonian diagonal_quadratic(int M, const std::function<double(int)>& f);
// Sum_j j |u_j|^2.
PolyHamiltonian momentum_hamiltonian(int M);

// {H,G} = i sum_j (d_{u_j}G d_{ubar_j}H - d_{ubar_j}G d_{u_j}H).
// Monomials of total degree above max_degree are never formed.
PolyHamiltonian poisson_bracket(const PolyHamiltonian& H, const PolyHamiltonian& G,
                                int max_degree = kMaxDegree);

// Minimal d with a nonzero part of total degree d+2; kInfiniteDegree for 0.
int scaling_degree(const PolyHamiltonian& H);

enum class DegreeFilter { Equal, Greater };
PolyHamiltonian project_degree(const PolyHamiltonian& H, int d, DegreeFilter mode);
// Parts of total degree <= d+2.
PolyHamiltonian truncate_degree(const PolyHamiltonian& H, int d);

// A monomial is resonant when l = alpha - beta satisfies l_j + l_{-j} = 0 for
// every j >= 0, i.e. its divisor vanishes identically in the mass.
bool is_resonant(const MonoKey& k);
enum class ResonantPart { Kernel, Range };
PolyHamiltonian project_resonant(const PolyHamiltonian& H, ResonantPart part);

// X_H^(j) = -i dH/d ubar_j. With majorant, coefficients are replaced by their moduli.
SeqState vector_field(const PolyHamiltonian& H, const SeqState& u, bool majorant = false);

struct NormBracket {
  double lower = 0.0;
  double upper = 0.0;
};

struct MajorantOptions {
  int starts = 8;
  int iterations = 300;
  int samples = 16;
  std::uint64_t seed = 0x5eed;
  // Skip the search for the lower end (large polynomials, gates only).
  bool upper_only = false;
};

NormBracket majorant_norm(const PolyHamiltonian& H, double r, const Weight& w,
                          const MajorantOptions& opt = {});

// sum_k L_S^k H / k! with L_S H = {H,S}, keeping total degree <= cutoff + 2.
PolyHamiltonian lie_transform(const PolyHamiltonian& H, const PolyHamiltonian& S,
                              int degree_cutoff);

// Text form: one line per monomial "re im | j:e,... | j:e,...".
std::string to_text(const PolyHamiltonian& H);
PolyHamiltonian from_text(const std::string& text, int M);

// Flattened monomials for repeated evaluation of H and X_H.
class PolyEvaluator {
 public:
  explicit PolyEvaluator(const PolyHamiltonian& H, bool majorant = false);
  int cutoff() const { return M_; }
  cplx value(const std::vector<cplx>& u) const;
  // out[j+M] = -i dH/d ubar_j
  void field(const std::vector<cplx>& u, std::vector<cplx>& out) const;

 private:
  struct Factor {
    int var;  // 0..2M for u_{var-M}, 2M+1.. for ubar
    int exp;
  };
  // powers x^e of every variable, row stride max_exp_ + 1
  void power_table(const std::vector<cplx>& u, std::vector<cplx>& tab) const;

  int M_;
  int max_exp_ = 1;
  std::vector<cplx> coeff_;
  std::vector<int> start_;
  std::vector<Factor> factors_;
};

}  // namespace beamnf

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "beamnf/ham_algebra.hpp"

namespace beamnf {

// omega_j = sqrt(j^4 + m)
double frequency(int j, double m);

class FrequencyVector {
 public:
  FrequencyVector(double m, int M);
  double mass() const { return m_; }
  int cutoff() const { return M_; }
  double operator()(int j) const { return om_[j < 0 ? -j : j]; }

 private:
  double m_;
  int M_;
  std::vector<double> om_;
};

// Sparse integer vector, sorted by mode, zero entries never stored.
class LatticeVector {
 public:
  using Entry = std::pair<int, int>;

  LatticeVector() = default;
  LatticeVector(std::initializer_list<Entry> entries);
  explicit LatticeVector(std::vector<Entry> entries);
  // alpha - beta of a monomial key.
  static LatticeVector of(const MonoKey& k);

  const std::vector<Entry>& entries() const { return e_; }
  int operator[](int mode) const;
  int cardinality() const { return static_cast<int>(e_.size()); }
  int l1() const;
  int momentum() const;
  long quadratic_sum() const;  // sum l_j j^2
  bool is_zero() const { return e_.empty(); }
  std::string encode() const;  // "j:v;j:v"

  friend bool operator==(const LatticeVector&, const LatticeVector&) = default;
  friend auto operator<=>(const LatticeVector&, const LatticeVector&) = default;

 private:
  std::vector<Entry> e_;
};

inline int tau_exponent(int d) { return d * (d + 2); }

// sum_j l_j omega_j(m), summed from the largest |j| down.
double divisor(const LatticeVector& l, double m);

// Folds l_q and l_{-q} into the slot |q|; same divisor for every m.
LatticeVector reduce_superactions(const LatticeVector& l);
bool is_nonresonant_vector(const LatticeVector& l);

// log of prod_n gamma^d / (1 + l_n^2 <n>^2)^tau over the support of l.
// With reduced_tau, d in tau is taken from the folded vector.
double log_diophantine_bound(const LatticeVector& l, double gamma, bool reduced_tau = false);
double diophantine_bound(const LatticeVector& l, double gamma, bool reduced_tau = false);

// All momentum-conserving l in the nonresonant lattice with |l|_1 <= max_l1 and
// support in [-M, M], ordered by (|l|_1, l). Throws BudgetError above budget.
std::vector<LatticeVector> enumerate_nonresonant(int max_l1, int M, bool momentum = true,
                                                 double budget = 1e8);
// Number of integer points of the l1 ball scanned by the enumeration.
double enumeration_size(int max_l1, int M);

// Decimal rendering of 10^x that does not underflow, e.g. "3.2e-415".
std::string format_pow10(double log10_value);

struct AuditRow {
  LatticeVector l;
  int d = 0;
  int tau = 0;
  double min_abs = 0.0;  // |omega.l| at the audited mass
  // Bounds underflow for moderate d, so bound and ratio are kept as log10.
  double log10_bound = 0.0;
  double log10_ratio = 0.0;
  bool shortcut = false;
};

struct DiophantineReport {
  bool passed = true;
  LatticeVector worst;
  double worst_log10_ratio = 0.0;
  std::size_t checked = 0;
  std::size_t shortcuts = 0;
  std::vector<AuditRow> rows;
};

DiophantineReport check_diophantine(double m, double gamma, int max_l1, int M,
                                    bool keep_rows = false);

// k-th m-derivative of the divisor, k >= 1.
double derivative_divisor(int k, const LatticeVector& l, double m);
// (2k-3)!! / 2^k with sign (-1)^{k+1}; (-1)!! = 1.
double derivative_prefactor(int k);

std::vector<double> mass_grid(int n);

struct VanderReport {
  int k_star = 0;
  double min_abs = 0.0;
  double bound = 0.0;
  bool passed = false;
};

VanderReport vander_check(const LatticeVector& l, const std::vector<double>& m_grid);

struct MeasureEstimate {
  double fraction = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::size_t bad = 0;
};

// Monte Carlo fraction of m in [1,2] where some family member violates the
// Diophantine inequality. Streams are seeded per block of samples.
MeasureEstimate bad_set_measure(const std::vector<LatticeVector>& family, double gamma,
                                std::size_t samples, std::uint64_t seed = 1);

struct DichotomyAudit {
  std::size_t vectors = 0;
  std::size_t triggered = 0;
  std::size_t counterexamples = 0;
  double min_triggered = 0.0;
  LatticeVector worst;
};

// Scan of momentum-conserving l with d(l) <= max_d, 1 <= |l_j| <= max_entry,
// support in [-M, M]: when |sum l_j j^2| > 10 |l|_1 the divisor must stay >= 1.
DichotomyAudit dichotomy_audit(int max_d, int max_entry, int M, int grid);

}  // namespace beamnf

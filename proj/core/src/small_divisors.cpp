#include "beamnf/small_divisors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>

#include "beamnf/errors.hpp"

namespace beamnf {

namespace {

void check_mass(double m) {
  if (!(m >= 1.0 && m <= 2.0)) throw ParameterError("mass must lie in [1,2]");
}

double choose(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

}  // namespace

double frequency(int j, double m) {
  double a = static_cast<double>(j) * j;
  return std::sqrt(a * a + m);
}

FrequencyVector::FrequencyVector(double m, int M) : m_(m), M_(M) {
  check_mass(m);
  if (M < 0 || M > kMaxModeCutoff) throw DimensionError("mode cutoff outside [0, 15]");
  for (int j = 0; j <= M; ++j) om_.push_back(frequency(j, m));
}

LatticeVector::LatticeVector(std::initializer_list<Entry> entries)
    : LatticeVector(std::vector<Entry>(entries)) {}

LatticeVector::LatticeVector(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end());
  for (const auto& [j, v] : entries) {
    if (!e_.empty() && e_.back().first == j)
      e_.back().second += v;
    else
      e_.emplace_back(j, v);
  }
  std::erase_if(e_, [](const Entry& e) { return e.second == 0; });
}

LatticeVector LatticeVector::of(const MonoKey& k) {
  std::vector<Entry> e;
  for (int j = -kMaxModeCutoff; j <= kMaxModeCutoff; ++j)
    if (int v = k.u_exp(j) - k.ubar_exp(j)) e.emplace_back(j, v);
  return LatticeVector(std::move(e));
}

int LatticeVector::operator[](int mode) const {
  auto it = std::lower_bound(e_.begin(), e_.end(), Entry{mode, std::numeric_limits<int>::min()});
  return (it != e_.end() && it->first == mode) ? it->second : 0;
}

int LatticeVector::l1() const {
  int s = 0;
  for (const auto& e : e_) s += std::abs(e.second);
  return s;
}

int LatticeVector::momentum() const {
  int s = 0;
  for (const auto& [j, v] : e_) s += j * v;
  return s;
}

long LatticeVector::quadratic_sum() const {
  long s = 0;
  for (const auto& [j, v] : e_) s += static_cast<long>(v) * j * j;
  return s;
}

std::string LatticeVector::encode() const {
  std::string s;
  for (const auto& [j, v] : e_) {
    if (!s.empty()) s += ';';
    s += std::to_string(j) + ":" + std::to_string(v);
  }
  return s.empty() ? "0" : s;
}

double divisor(const LatticeVector& l, double m) {
  check_mass(m);
  std::vector<LatticeVector::Entry> e = l.entries();
  std::stable_sort(e.begin(), e.end(),
                   [](const auto& a, const auto& b) { return std::abs(a.first) > std::abs(b.first); });
  double s = 0.0;
  for (const auto& [j, v] : e) s += v * frequency(j, m);
  return s;
}

LatticeVector reduce_superactions(const LatticeVector& l) {
  std::vector<LatticeVector::Entry> out;
  for (const auto& [j, v] : l.entries()) {
    int partner = l[-j];
    if (j != 0 && partner != 0)
      out.emplace_back(std::abs(j), v);  // both of the pair land on +|j|
    else
      out.emplace_back(j, v);
  }
  return LatticeVector(std::move(out));
}

bool is_nonresonant_vector(const LatticeVector& l) { return !reduce_superactions(l).is_zero(); }

double log_diophantine_bound(const LatticeVector& l, double gamma, bool reduced_tau) {
  if (l.is_zero()) throw DomainError("Diophantine bound of the zero vector");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in (0,1)");
  int d = l.cardinality();
  int tau = tau_exponent(reduced_tau ? reduce_superactions(l).cardinality() : d);
  double v = d * std::log(gamma);
  for (const auto& [n, x] : l.entries()) {
    double s = mode_scale(n);
    v -= tau * std::log1p(static_cast<double>(x) * x * s * s);
  }
  return v;
}

double diophantine_bound(const LatticeVector& l, double gamma, bool reduced_tau) {
  return std::exp(log_diophantine_bound(l, gamma, reduced_tau));
}

double enumeration_size(int max_l1, int M) {
  int n = 2 * M + 1;
  double total = 0.0;
  for (int k = 0; k <= std::min(n, max_l1); ++k) total += choose(n, k) * choose(max_l1, k) * std::pow(2.0, k);
  return total;
}

std::vector<LatticeVector> enumerate_nonresonant(int max_l1, int M, bool momentum, double budget) {
  if (max_l1 < 1 || M < 0) throw ParameterError("enumeration needs max_l1 >= 1 and M >= 0");
  if (enumeration_size(max_l1, M) > budget) throw BudgetError("lattice enumeration over budget");
  std::vector<LatticeVector> out;
  std::vector<LatticeVector::Entry> cur;
  std::function<void(int, int)> rec = [&](int j, int left) {
    if (j > M) {
      if (cur.empty()) return;
      LatticeVector l(cur);
      if (momentum && l.momentum() != 0) return;
      if (!is_nonresonant_vector(l)) return;
      out.push_back(std::move(l));
      return;
    }
    rec(j + 1, left);
    for (int v = 1; v <= left; ++v) {
      for (int sgn : {1, -1}) {
        cur.emplace_back(j, sgn * v);
        rec(j + 1, left - v);
        cur.pop_back();
      }
    }
  };
  rec(-M, max_l1);
  std::sort(out.begin(), out.end(), [](const LatticeVector& a, const LatticeVector& b) {
    if (a.l1() != b.l1()) return a.l1() < b.l1();
    return a < b;
  });
  return out;
}

std::string format_pow10(double x) {
  if (!std::isfinite(x)) return x > 0 ? "inf" : "0";
  double e = std::floor(x);
  double mant = std::pow(10.0, x - e);
  if (mant >= 9.9995) {
    mant /= 10.0;
    e += 1.0;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4fe%+d", mant, static_cast<int>(e));
  return buf;
}

DiophantineReport check_diophantine(double m, double gamma, int max_l1, int M, bool keep_rows) {
  check_mass(m);
  DiophantineReport rep;
  bool have_worst = false;
  for (const auto& l : enumerate_nonresonant(max_l1, M, true)) {
    ++rep.checked;
    AuditRow row;
    row.l = l;
    row.d = l.cardinality();
    row.tau = tau_exponent(row.d);
    row.log10_bound = log_diophantine_bound(l, gamma) / std::log(10.0);
    // Far from the quadratic resonance the divisor is at least 1 > gamma >= bound.
    row.shortcut = std::abs(static_cast<double>(l.quadratic_sum())) > 10.0 * l.l1();
    if (row.shortcut) ++rep.shortcuts;
    row.min_abs = std::abs(divisor(l, m));
    row.log10_ratio = std::log10(row.min_abs) - row.log10_bound;
    if (row.log10_ratio < 0.0) rep.passed = false;
    if (!row.shortcut && (!have_worst || row.log10_ratio < rep.worst_log10_ratio)) {
      rep.worst = l;
      rep.worst_log10_ratio = row.log10_ratio;
      have_worst = true;
    }
    if (keep_rows) rep.rows.push_back(std::move(row));
  }
  return rep;
}

double derivative_prefactor(int k) {
  if (k <= 0) throw DomainError("derivative order must be positive");
  double df = 1.0;
  for (int i = 2 * k - 3; i > 1; i -= 2) df *= i;
  double sign = (k % 2 == 1) ? 1.0 : -1.0;  // (-1)^{k+1}
  return sign * df / std::pow(2.0, k);
}

double derivative_divisor(int k, const LatticeVector& l, double m) {
  double g = derivative_prefactor(k);
  check_mass(m);
  double s = 0.0;
  for (const auto& [j, v] : l.entries()) s += v * std::pow(frequency(j, m), 1 - 2 * k);
  return g * s;
}

std::vector<double> mass_grid(int n) {
  if (n < 2) throw ParameterError("mass grid needs at least two points");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = 1.0 + static_cast<double>(i) / (n - 1);
  g.back() = 2.0;
  return g;
}

VanderReport vander_check(const LatticeVector& l, const std::vector<double>& m_grid) {
  if (l.is_zero()) throw DomainError("zero vector has an identically vanishing divisor");
  for (const auto& [j, v] : l.entries())
    if (j != 0 && l[-j] != 0) throw DomainError("vector is not superaction-reduced: " + l.encode());
  int d = l.cardinality();
  if (d > 6) throw BudgetError("cardinality above 6");
  VanderReport rep;
  double logb = 0.0;
  for (const auto& [j, v] : l.entries()) {
    double s = mode_scale(j);
    logb -= d * std::log1p(static_cast<double>(v) * v * s * s);
  }
  rep.bound = std::exp(logb);
  rep.min_abs = -1.0;
  for (int k = 0; k < d; ++k) {
    double mn = std::numeric_limits<double>::infinity();
    for (double m : m_grid) {
      double v = k == 0 ? divisor(l, m) : derivative_divisor(k, l, m);
      mn = std::min(mn, std::abs(v));
    }
    if (mn > rep.min_abs) {
      rep.min_abs = mn;
      rep.k_star = k;
    }
  }
  rep.passed = rep.min_abs >= rep.bound;
  return rep;
}

MeasureEstimate bad_set_measure(const std::vector<LatticeVector>& family, double gamma,
                                std::size_t samples, std::uint64_t seed) {
  if (family.empty()) throw DomainError("empty lattice family");
  if (samples < 1000) throw ParameterError("at least 1000 samples required");
  std::vector<double> bound(family.size());
  for (size_t i = 0; i < family.size(); ++i) bound[i] = diophantine_bound(family[i], gamma);

  constexpr std::size_t kBlock = 1024;
  MeasureEstimate est;
  est.samples = samples;
  for (std::size_t start = 0; start < samples; start += kBlock) {
    std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(start / kBlock)};
    std::mt19937_64 rng(ss);
    std::uniform_real_distribution<double> unif(1.0, 2.0);
    std::size_t end = std::min(samples, start + kBlock);
    for (std::size_t s = start; s < end; ++s) {
      double m = unif(rng);
      for (size_t i = 0; i < family.size(); ++i) {
        if (std::abs(divisor(family[i], m)) < bound[i]) {
          ++est.bad;
          break;
        }
      }
    }
  }
  double p = static_cast<double>(est.bad) / samples;
  est.fraction = p;
  est.std_error = std::sqrt(p * (1.0 - p) / samples);
  return est;
}

DichotomyAudit dichotomy_audit(int max_d, int max_entry, int M, int grid) {
  DichotomyAudit audit;
  auto ms = mass_grid(grid);
  audit.min_triggered = std::numeric_limits<double>::infinity();
  std::vector<LatticeVector::Entry> cur;
  std::function<void(int)> rec = [&](int j) {
    if (!cur.empty()) {
      LatticeVector l(cur);
      if (l.momentum() == 0) {
        ++audit.vectors;
        if (std::abs(static_cast<double>(l.quadratic_sum())) > 10.0 * l.l1()) {
          ++audit.triggered;
          double mn = std::numeric_limits<double>::infinity();
          for (double m : ms) mn = std::min(mn, std::abs(divisor(l, m)));
          if (mn < audit.min_triggered) {
            audit.min_triggered = mn;
            audit.worst = l;
          }
          if (mn < 1.0) ++audit.counterexamples;
        }
      }
    }
    if (static_cast<int>(cur.size()) == max_d) return;
    for (int i = j; i <= M; ++i) {
      for (int v = -max_entry; v <= max_entry; ++v) {
        if (v == 0) continue;
        cur.emplace_back(i, v);
        rec(i + 1);
        cur.pop_back();
      }
    }
  };
  rec(-M);
  return audit;
}

}  // namespace beamnf

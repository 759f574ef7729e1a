#include "beamnf/ham_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "beamnf/errors.hpp"

namespace beamnf {

namespace {

constexpr cplx I{0.0, 1.0};

int nibble_sum(std::uint64_t x) {
  x = (x & 0x0F0F0F0F0F0F0F0FULL) + ((x >> 4) & 0x0F0F0F0F0F0F0F0FULL);
  return static_cast<int>((x * 0x0101010101010101ULL) >> 56);
}

// Modes present in a key together with their u / ubar exponents.
struct ModeExp {
  int j;
  int u;
  int ub;
};

std::vector<ModeExp> present_modes(const MonoKey& k, int M) {
  std::vector<ModeExp> out;
  for (int j = -M; j <= M; ++j) {
    int a = k.u_exp(j), b = k.ubar_exp(j);
    if (a || b) out.push_back({j, a, b});
  }
  return out;
}

}  // namespace

MonoKey MonoKey::from(const MultiIndex& alpha, const MultiIndex& beta) {
  MonoKey k;
  auto put = [&](const MultiIndex& m, bool bar) {
    for (const auto& [j, e] : m.entries()) {
      if (j < -kMaxModeCutoff || j > kMaxModeCutoff)
        throw DimensionError("mode outside the supported window");
      if (e > 15) throw BudgetError("exponent exceeds packed key capacity");
      if (bar)
        k.add_ubar(j, e);
      else
        k.add_u(j, e);
    }
  };
  put(alpha, false);
  put(beta, true);
  if (k.degree() > 15) throw BudgetError("degree exceeds packed key capacity");
  return k;
}

int MonoKey::degree() const {
  return nibble_sum(w[0]) + nibble_sum(w[1]) + nibble_sum(w[2]) + nibble_sum(w[3]);
}

MultiIndex MonoKey::alpha() const {
  std::vector<MultiIndex::Entry> e;
  for (int j = -kMaxModeCutoff; j <= kMaxModeCutoff; ++j)
    if (int x = u_exp(j)) e.emplace_back(j, x);
  return MultiIndex(std::move(e));
}

MultiIndex MonoKey::beta() const {
  std::vector<MultiIndex::Entry> e;
  for (int j = -kMaxModeCutoff; j <= kMaxModeCutoff; ++j)
    if (int x = ubar_exp(j)) e.emplace_back(j, x);
  return MultiIndex(std::move(e));
}

int MonoKey::momentum() const {
  int p = 0;
  for (int j = -kMaxModeCutoff; j <= kMaxModeCutoff; ++j) p += j * (u_exp(j) - ubar_exp(j));
  return p;
}

int MonoKey::max_abs_mode() const {
  int m = 0;
  for (int j = -kMaxModeCutoff; j <= kMaxModeCutoff; ++j)
    if (u_exp(j) || ubar_exp(j)) m = std::max(m, std::abs(j));
  return m;
}

std::size_t MonoKeyHash::operator()(const MonoKey& k) const noexcept {
  std::uint64_t h = 0x9E3779B97F4A7C15ULL;
  for (auto x : k.w) {
    h ^= x + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    h ^= h >> 31;
    h *= 0xBF58476D1CE4E5B9ULL;
  }
  return static_cast<std::size_t>(h ^ (h >> 29));
}

PolyHamiltonian::PolyHamiltonian(int M) : M_(M) {
  if (M < 0 || M > kMaxModeCutoff) throw DimensionError("mode cutoff outside [0, 15]");
}

void PolyHamiltonian::check_key(const MonoKey& k) const {
  if (k.max_abs_mode() > M_) throw DimensionError("monomial outside the mode window");
}

void PolyHamiltonian::add_key(const MonoKey& k, cplx c) {
  if (c == 0.0) return;
  auto [it, fresh] = terms_.try_emplace(k, c);
  if (!fresh) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

void PolyHamiltonian::add(const MultiIndex& a, const MultiIndex& b, cplx c) {
  MonoKey k = MonoKey::from(a, b);
  check_key(k);
  add_key(k, c);
}

void PolyHamiltonian::add_real(const MultiIndex& a, const MultiIndex& b, cplx c) {
  if (a == b) {
    add(a, b, c.real());
    return;
  }
  add(a, b, c);
  add(b, a, std::conj(c));
}

cplx PolyHamiltonian::coeff(const MonoKey& k) const {
  auto it = terms_.find(k);
  return it == terms_.end() ? cplx{} : it->second;
}

cplx PolyHamiltonian::coeff(const MultiIndex& a, const MultiIndex& b) const {
  return coeff(MonoKey::from(a, b));
}

std::vector<std::pair<MonoKey, cplx>> PolyHamiltonian::sorted_terms() const {
  std::vector<std::pair<MonoKey, cplx>> v(terms_.begin(), terms_.end());
  std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) {
    int dx = x.first.degree(), dy = y.first.degree();
    if (dx != dy) return dx < dy;
    return x.first < y.first;
  });
  return v;
}

std::vector<Monomial> PolyHamiltonian::monomials() const {
  std::vector<Monomial> out;
  for (const auto& [k, c] : sorted_terms()) out.push_back({k.alpha(), k.beta(), c});
  return out;
}

bool PolyHamiltonian::is_real(double rel_tol) const {
  double scale = max_abs_coeff();
  for (const auto& [k, c] : terms_) {
    cplx partner = coeff(k.conj());
    if (std::abs(c - std::conj(partner)) > rel_tol * scale) return false;
  }
  return true;
}

bool PolyHamiltonian::conserves_momentum() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const auto& t) { return t.first.momentum() == 0; });
}

double PolyHamiltonian::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& t : terms_) m = std::max(m, std::abs(t.second));
  return m;
}

int PolyHamiltonian::max_degree() const {
  int d = 0;
  for (const auto& t : terms_) d = std::max(d, t.first.degree());
  return d;
}

void PolyHamiltonian::prune(double rel) {
  double cut = rel * max_abs_coeff();
  std::erase_if(terms_, [cut](const auto& t) { return std::abs(t.second) < cut; });
}

cplx PolyHamiltonian::evaluate(const SeqState& u) const {
  if (u.cutoff() != M_) throw DimensionError("state and Hamiltonian cutoffs differ");
  return PolyEvaluator(*this).value(u.data());
}

PolyHamiltonian& PolyHamiltonian::operator+=(const PolyHamiltonian& o) {
  if (o.M_ != M_) throw DimensionError("sum of Hamiltonians on different windows");
  for (const auto& [k, c] : o.terms_) add_key(k, c);
  return *this;
}

PolyHamiltonian& PolyHamiltonian::operator-=(const PolyHamiltonian& o) {
  if (o.M_ != M_) throw DimensionError("difference of Hamiltonians on different windows");
  for (const auto& [k, c] : o.terms_) add_key(k, -c);
  return *this;
}

PolyHamiltonian& PolyHamiltonian::operator*=(cplx c) {
  if (c == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& t : terms_) t.second *= c;
  return *this;
}

PolyHamiltonian diagonal_quadratic(int M, const std::function<double(int)>& f) {
  PolyHamiltonian H(M);
  for (int j = -M; j <= M; ++j) H.add(MultiIndex::unit(j), MultiIndex::unit(j), f(j));
  return H;
}

PolyHamiltonian momentum_hamiltonian(int M) {
  return diagonal_quadratic(M, [](int j) { return static_cast<double>(j); });
}

PolyHamiltonian poisson_bracket(const PolyHamiltonian& H, const PolyHamiltonian& G,
                                int max_degree) {
  if (H.cutoff() != G.cutoff()) throw DimensionError("bracket of different windows");
  const int M = H.cutoff();
  PolyHamiltonian out(M);
  if (H.is_zero() || G.is_zero()) return out;

  struct Term {
    MonoKey key;
    cplx c;
    int deg;
    std::vector<ModeExp> modes;
  };
  auto flatten = [M](const PolyHamiltonian& P) {
    std::vector<Term> v;
    v.reserve(P.size());
    for (const auto& [k, c] : P.sorted_terms()) v.push_back({k, c, k.degree(), present_modes(k, M)});
    return v;
  };
  const auto hs = flatten(H);
  const auto gs = flatten(G);

  // value and sum of |contributions|: exact cancellations must come out as zero
  std::unordered_map<MonoKey, std::pair<cplx, double>, MonoKeyHash> acc;
  acc.reserve(hs.size() + gs.size());
  for (const auto& h : hs) {
    for (const auto& g : gs) {
      int deg = h.deg + g.deg - 2;
      if (deg > max_degree) continue;
      if (h.deg + g.deg > 15) throw BudgetError("bracket degree exceeds packed key capacity");
      bool have_sum = false;
      MonoKey sum;
      for (const auto& m : g.modes) {
        int n = m.u * h.key.ubar_exp(m.j) - m.ub * h.key.u_exp(m.j);
        if (n == 0) continue;
        if (!have_sum) {
          for (int w = 0; w < 4; ++w) sum.w[w] = h.key.w[w] + g.key.w[w];
          have_sum = true;
        }
        MonoKey k = sum;
        k.add_u(m.j, -1);
        k.add_ubar(m.j, -1);
        cplx c = I * h.c * g.c * static_cast<double>(n);
        auto& [v, mag] = acc[k];
        v += c;
        mag += std::abs(c);
      }
    }
  }
  constexpr double cancel = 16 * std::numeric_limits<double>::epsilon();
  for (const auto& [k, vm] : acc)
    if (std::abs(vm.first) > cancel * vm.second) out.add_key(k, vm.first);
  out.prune();
  return out;
}

int scaling_degree(const PolyHamiltonian& H) {
  if (H.is_zero()) return kInfiniteDegree;
  int d = kInfiniteDegree;
  for (const auto& t : H.terms()) d = std::min(d, t.first.degree() - 2);
  return d;
}

PolyHamiltonian project_degree(const PolyHamiltonian& H, int d, DegreeFilter mode) {
  if (d < 0) throw DomainError("negative scaling degree");
  PolyHamiltonian out(H.cutoff());
  for (const auto& [k, c] : H.terms()) {
    int sd = k.degree() - 2;
    if ((mode == DegreeFilter::Equal && sd == d) || (mode == DegreeFilter::Greater && sd > d))
      out.add_key(k, c);
  }
  return out;
}

PolyHamiltonian truncate_degree(const PolyHamiltonian& H, int d) {
  PolyHamiltonian out(H.cutoff());
  for (const auto& [k, c] : H.terms())
    if (k.degree() <= d + 2) out.add_key(k, c);
  return out;
}

bool is_resonant(const MonoKey& k) {
  if (k.u_exp(0) != k.ubar_exp(0)) return false;
  for (int j = 1; j <= kMaxModeCutoff; ++j) {
    int l = k.u_exp(j) - k.ubar_exp(j) + k.u_exp(-j) - k.ubar_exp(-j);
    if (l != 0) return false;
  }
  return true;
}

PolyHamiltonian project_resonant(const PolyHamiltonian& H, ResonantPart part) {
  PolyHamiltonian out(H.cutoff());
  bool want = part == ResonantPart::Kernel;
  for (const auto& [k, c] : H.terms())
    if (is_resonant(k) == want) out.add_key(k, c);
  return out;
}

SeqState vector_field(const PolyHamiltonian& H, const SeqState& u, bool majorant) {
  if (u.cutoff() != H.cutoff()) throw DimensionError("state and Hamiltonian cutoffs differ");
  SeqState out(u.cutoff());
  PolyEvaluator(H, majorant).field(u.data(), out.data());
  return out;
}

PolyHamiltonian lie_transform(const PolyHamiltonian& H, const PolyHamiltonian& S,
                              int degree_cutoff) {
  if (S.is_zero()) return truncate_degree(H, degree_cutoff);
  int ds = scaling_degree(S);
  if (ds < 1) throw DomainError("generator of scaling degree 0 gives a non-terminating series");
  int hd = scaling_degree(H);
  if (hd != kInfiniteDegree && degree_cutoff < hd)
    throw DomainError("degree cutoff below the scaling degree of H");
  PolyHamiltonian result = truncate_degree(H, degree_cutoff);
  PolyHamiltonian term = result;
  for (int k = 1; !term.is_zero(); ++k) {
    term = poisson_bracket(term, S, degree_cutoff + 2);
    term *= 1.0 / k;
    result += term;
  }
  result.prune();
  return result;
}

std::string to_text(const PolyHamiltonian& H) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "# modes " << H.cutoff() << "\n";
  auto put = [&os](const MultiIndex& m) {
    bool first = true;
    for (const auto& [j, e] : m.entries()) {
      if (!first) os << ",";
      os << j << ":" << e;
      first = false;
    }
  };
  for (const auto& mono : H.monomials()) {
    os << mono.coeff.real() << " " << mono.coeff.imag() << " | ";
    put(mono.alpha);
    os << " | ";
    put(mono.beta);
    os << "\n";
  }
  return os.str();
}

PolyHamiltonian from_text(const std::string& text, int M) {
  PolyHamiltonian H(M);
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  auto parse_index = [&lineno](const std::string& s) {
    std::vector<MultiIndex::Entry> e;
    std::istringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto first = item.find_first_not_of(" \t");
      if (first == std::string::npos) continue;
      auto colon = item.find(':');
      if (colon == std::string::npos)
        throw DomainError("line " + std::to_string(lineno) + ": expected j:exp");
      auto to_int = [&](const std::string& t) {
        int v = 0;
        std::istringstream ts(t);
        if (!(ts >> v) || !(ts >> std::ws).eof())
          throw DomainError("line " + std::to_string(lineno) + ": bad integer '" + t + "'");
        return v;
      };
      e.emplace_back(to_int(item.substr(0, colon)), to_int(item.substr(colon + 1)));
    }
    return MultiIndex(std::move(e));
  };
  while (std::getline(is, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto b1 = line.find('|');
    auto b2 = b1 == std::string::npos ? b1 : line.find('|', b1 + 1);
    if (b2 == std::string::npos)
      throw DomainError("line " + std::to_string(lineno) + ": expected two '|' separators");
    std::istringstream cs(line.substr(0, b1));
    double re = 0, im = 0;
    if (!(cs >> re >> im)) throw DomainError("line " + std::to_string(lineno) + ": bad coefficient");
    H.add(parse_index(line.substr(b1 + 1, b2 - b1 - 1)), parse_index(line.substr(b2 + 1)),
          cplx(re, im));
  }
  return H;
}

PolyEvaluator::PolyEvaluator(const PolyHamiltonian& H, bool majorant) : M_(H.cutoff()) {
  const int n = 2 * M_ + 1;
  for (const auto& [k, c] : H.sorted_terms()) {
    coeff_.push_back(majorant ? cplx(std::abs(c)) : c);
    start_.push_back(static_cast<int>(factors_.size()));
    // u factors first, so a monomial with any ubar ends with one
    for (int j = -M_; j <= M_; ++j)
      if (int e = k.u_exp(j)) factors_.push_back({j + M_, e});
    for (int j = -M_; j <= M_; ++j)
      if (int e = k.ubar_exp(j)) factors_.push_back({n + j + M_, e});
  }
  start_.push_back(static_cast<int>(factors_.size()));
  for (const auto& f : factors_) max_exp_ = std::max(max_exp_, f.exp);
}

void PolyEvaluator::power_table(const std::vector<cplx>& u, std::vector<cplx>& tab) const {
  const int n = 2 * M_ + 1, E = max_exp_ + 1;
  if (u.size() != static_cast<size_t>(n)) throw DimensionError("state size mismatch");
  tab.resize(2 * n * E);
  for (int v = 0; v < 2 * n; ++v) {
    cplx x = v < n ? u[v] : std::conj(u[v - n]);
    cplx* row = &tab[v * E];
    row[0] = 1.0;
    for (int e = 1; e < E; ++e) row[e] = row[e - 1] * x;
  }
}

cplx PolyEvaluator::value(const std::vector<cplx>& u) const {
  const int E = max_exp_ + 1;
  std::vector<cplx> tab;
  power_table(u, tab);
  cplx total = 0.0;
  for (size_t m = 0; m < coeff_.size(); ++m) {
    cplx v = coeff_[m];
    for (int f = start_[m]; f < start_[m + 1]; ++f) v *= tab[factors_[f].var * E + factors_[f].exp];
    total += v;
  }
  return total;
}

void PolyEvaluator::field(const std::vector<cplx>& u, std::vector<cplx>& out) const {
  const int n = 2 * M_ + 1, E = max_exp_ + 1;
  std::vector<cplx> tab;
  power_table(u, tab);
  out.assign(n, 0.0);
  cplx pw[16], pre[17], suf[17];
  for (size_t m = 0; m < coeff_.size(); ++m) {
    const int b = start_[m], k = start_[m + 1] - b;
    if (k == 0 || factors_[b + k - 1].var < n) continue;  // no ubar factor
    for (int f = 0; f < k; ++f) pw[f] = tab[factors_[b + f].var * E + factors_[b + f].exp];
    pre[0] = coeff_[m];
    for (int f = 0; f < k; ++f) pre[f + 1] = pre[f] * pw[f];
    suf[k] = 1.0;
    for (int f = k - 1; f >= 0; --f) suf[f] = suf[f + 1] * pw[f];
    for (int f = 0; f < k; ++f) {
      const auto& fa = factors_[b + f];
      if (fa.var < n) continue;
      cplx d = static_cast<double>(fa.exp) * tab[fa.var * E + fa.exp - 1];
      out[fa.var - n] += cplx(0.0, -1.0) * d * pre[f] * suf[f + 1];
    }
  }
}

}  // namespace beamnf

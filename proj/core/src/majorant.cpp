#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "beamnf/errors.hpp"
#include "beamnf/ham_algebra.hpp"

namespace beamnf {

namespace {

// One summand a * y^eta of the component Y^(j); indices are local slots.
struct YTerm {
  int j;
  double a;
  std::vector<std::pair<int, int>> eta;
};

struct YMap {
  int n = 0;
  std::vector<YTerm> terms;

  std::vector<double> eval(const std::vector<double>& y) const {
    std::vector<double> Y(n, 0.0);
    for (const auto& t : terms) {
      double v = t.a;
      for (const auto& [i, e] : t.eta) v *= std::pow(y[i], e);
      Y[t.j] += v;
    }
    return Y;
  }

  double objective(const std::vector<double>& y) const {
    double s = 0.0;
    for (double v : eval(y)) s += v * v;
    return s;
  }

  std::vector<double> gradient(const std::vector<double>& y) const {
    auto Y = eval(y);
    std::vector<double> g(n, 0.0);
    for (const auto& t : terms) {
      for (size_t f = 0; f < t.eta.size(); ++f) {
        auto [i, e] = t.eta[f];
        double v = t.a * e * std::pow(y[i], e - 1);
        for (size_t h = 0; h < t.eta.size(); ++h)
          if (h != f) v *= std::pow(y[t.eta[h].first], t.eta[h].second);
        g[i] += 2.0 * Y[t.j] * v;
      }
    }
    return g;
  }
};

bool project_to_sphere(std::vector<double>& y) {
  double s = 0.0;
  for (double& v : y) {
    v = std::max(v, 0.0);
    s += v * v;
  }
  if (s <= 0.0) return false;
  s = std::sqrt(s);
  for (double& v : y) v /= s;
  return true;
}

double ascend(const YMap& Y, std::vector<double> y, int iterations) {
  if (!project_to_sphere(y)) return 0.0;
  double f = Y.objective(y);
  double step = 1.0;
  for (int it = 0; it < iterations && step > 1e-14; ++it) {
    auto g = Y.gradient(y);
    double gn = 0.0;
    for (double v : g) gn += v * v;
    gn = std::sqrt(gn);
    if (gn == 0.0) break;
    bool moved = false;
    while (step > 1e-14) {
      std::vector<double> z(y);
      for (int i = 0; i < Y.n; ++i) z[i] += step * g[i] / gn;
      if (project_to_sphere(z)) {
        double fz = Y.objective(z);
        if (fz > f) {
          y = std::move(z);
          f = fz;
          step *= 1.5;
          moved = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return std::sqrt(f);
}

// Exact sup over the unit sphere of |Y| when every monomial shares the same
// exponent profile gamma. With t = y^2 this maximizes sum_i b_i t^{gamma-e_i}
// on the simplex; interior critical points solve D t_i^2 - gamma_i t_i + b_i h = 0
// with D = |gamma| - 1 and a common h > 0.
double single_profile_sup(const std::vector<int>& gamma, const std::vector<double>& a) {
  const int k = static_cast<int>(gamma.size());
  int total = 0;
  for (int g : gamma) total += g;
  const int D = total - 1;
  std::vector<double> b(k);
  for (int i = 0; i < k; ++i) b[i] = a[i] * a[i];
  if (k == 1) return a[0];

  auto F = [&](const std::vector<double>& t) {
    double s = 0.0;
    for (int j = 0; j < k; ++j) {
      double v = b[j];
      for (int i = 0; i < k; ++i) v *= std::pow(t[i], gamma[i] - (i == j ? 1 : 0));
      s += v;
    }
    return s;
  };

  double best = 0.0;
  for (int i = 0; i < k; ++i) {
    if (gamma[i] != 1) continue;
    double v = b[i];
    for (int l = 0; l < k; ++l)
      if (l != i) v *= std::pow(static_cast<double>(gamma[l]) / D, gamma[l]);
    best = std::max(best, v);
  }

  double hmax = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) hmax = std::min(hmax, gamma[i] * gamma[i] / (4.0 * D * b[i]));
  auto tvec = [&](double h, unsigned signs) {
    std::vector<double> t(k);
    for (int i = 0; i < k; ++i) {
      double disc = std::max(0.0, gamma[i] * gamma[i] - 4.0 * D * b[i] * h);
      double sq = std::sqrt(disc);
      t[i] = (gamma[i] + ((signs >> i) & 1u ? -sq : sq)) / (2.0 * D);
    }
    return t;
  };
  auto excess = [&](double h, unsigned signs) {
    double s = -1.0;
    for (double v : tvec(h, signs)) s += v;
    return s;
  };

  const int grid = 2000;
  std::vector<double> hs;
  for (int g = 0; g <= grid; ++g) {
    double x = static_cast<double>(g) / grid;
    hs.push_back(hmax * std::pow(10.0, -14.0 * (1.0 - x)));
    hs.push_back(hmax * x);
  }
  std::sort(hs.begin(), hs.end());
  hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
  if (!hs.empty() && hs.front() <= 0.0) hs.erase(hs.begin());

  for (unsigned signs = 0; signs < (1u << k); ++signs) {
    double prev_h = hs[0], prev_e = excess(prev_h, signs);
    for (size_t g = 1; g < hs.size(); ++g) {
      double h = hs[g], e = excess(h, signs);
      if ((prev_e <= 0.0) != (e <= 0.0)) {
        double lo = prev_h, hi = h, elo = prev_e;
        for (int it = 0; it < 200; ++it) {
          double mid = 0.5 * (lo + hi);
          double em = excess(mid, signs);
          if ((em <= 0.0) == (elo <= 0.0)) {
            lo = mid;
            elo = em;
          } else {
            hi = mid;
          }
        }
        auto t = tvec(0.5 * (lo + hi), signs);
        double s = 0.0;
        for (double v : t) s += v;
        for (double& v : t) v /= s;
        if (std::all_of(t.begin(), t.end(), [](double v) { return v > 0.0; }))
          best = std::max(best, F(t));
      }
      prev_h = h;
      prev_e = e;
    }
  }
  return std::sqrt(best);
}

}  // namespace

NormBracket majorant_norm(const PolyHamiltonian& H, double r, const Weight& w,
                          const MajorantOptions& opt) {
  if (!(r > 0.0)) throw ParameterError("radius must be positive");
  if (w.M != H.cutoff()) throw DimensionError("weight and Hamiltonian cutoffs differ");
  if (H.is_zero()) return {0.0, 0.0};
  const int M = H.cutoff();

  // Slots for the modes that occur.
  std::vector<int> slot(2 * M + 1, -1), mode_of;
  std::map<std::vector<int>, double> profiles;
  for (const auto& [k, c] : H.sorted_terms()) {
    std::vector<int> g(2 * M + 1, 0);
    for (int j = -M; j <= M; ++j) g[j + M] = k.u_exp(j) + k.ubar_exp(j);
    profiles[g] += std::abs(c);
  }
  for (const auto& [g, A] : profiles)
    for (int j = -M; j <= M; ++j)
      if (g[j + M] && slot[j + M] < 0) {
        slot[j + M] = static_cast<int>(mode_of.size());
        mode_of.push_back(j);
      }

  YMap Y;
  Y.n = static_cast<int>(mode_of.size());
  std::vector<double> U(Y.n, 0.0);
  for (const auto& [g, A] : profiles) {
    int deg = 0;
    double logw = 0.0;
    for (int j = -M; j <= M; ++j) {
      deg += g[j + M];
      logw += g[j + M] * w.log_at(j);
    }
    for (int j = -M; j <= M; ++j) {
      if (!g[j + M]) continue;
      double logc = (deg - 2) * std::log(r) + 2.0 * w.log_at(j) - logw;
      YTerm t{slot[j + M], A * 0.5 * g[j + M] * std::exp(logc), {}};
      int eta_total = deg - 1;
      double logP = 0.0;
      for (int i = -M; i <= M; ++i) {
        int e = g[i + M] - (i == j ? 1 : 0);
        if (e <= 0) continue;
        t.eta.emplace_back(slot[i + M], e);
        logP += 0.5 * e * std::log(static_cast<double>(e) / eta_total);
      }
      U[t.j] += t.a * std::exp(logP);
      Y.terms.push_back(std::move(t));
    }
  }

  NormBracket out;
  double up = 0.0;
  for (double v : U) up += v * v;
  out.upper = std::sqrt(up);
  if (opt.upper_only) return out;

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double lower = ascend(Y, std::vector<double>(Y.n, 1.0), opt.iterations);
  for (int s = 0; s < opt.starts; ++s) {
    std::vector<double> y(Y.n);
    for (double& v : y) v = unif(rng);
    lower = std::max(lower, ascend(Y, y, opt.iterations));
  }
  for (int i = 0; i < Y.n; ++i) {
    std::vector<double> y(Y.n, 0.0);
    y[i] = 1.0;
    lower = std::max(lower, std::sqrt(Y.objective(y)));
  }

  if (H.is_real()) {
    std::normal_distribution<double> gauss;
    for (int s = 0; s < opt.samples; ++s) {
      SeqState u(M);
      for (int j : mode_of) u[j] = cplx(gauss(rng), gauss(rng));
      double n = seq_norm(u, w);
      if (n == 0.0) continue;
      for (auto& v : u.data()) v *= r / n;
      lower = std::max(lower, seq_norm(vector_field(H, u, true), w) / r);
    }
  }

  if (profiles.size() == 1 && Y.n <= 10) {
    const auto& g = profiles.begin()->first;
    std::vector<int> gamma(Y.n);
    std::vector<double> a(Y.n);
    for (int i = 0; i < Y.n; ++i) gamma[i] = g[mode_of[i] + M];
    for (const auto& t : Y.terms) a[t.j] = t.a;
    double exact = std::max(single_profile_sup(gamma, a), lower);
    out.lower = exact;
    if (exact <= out.upper * (1.0 + 1e-9)) out.upper = exact;
    return out;
  }
  out.lower = lower;
  return out;
}

}  // namespace beamnf

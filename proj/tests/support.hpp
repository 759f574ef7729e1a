#pragma once

// Test helpers: random generators and a slow, independent polynomial model
// used as an oracle for the packed-key algebra.

#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "beamnf/ham_algebra.hpp"
#include "beamnf/small_divisors.hpp"

namespace testsupport {

using beamnf::cplx;
using beamnf::MultiIndex;
using beamnf::PolyHamiltonian;

using Key = std::pair<MultiIndex, MultiIndex>;
using NaivePoly = std::map<Key, cplx>;

inline NaivePoly to_naive(const PolyHamiltonian& H) {
  NaivePoly p;
  for (const auto& m : H.monomials()) p[{m.alpha, m.beta}] += m.coeff;
  return p;
}

inline PolyHamiltonian from_naive(const NaivePoly& p, int M) {
  PolyHamiltonian H(M);
  for (const auto& [k, c] : p) H.add(k.first, k.second, c);
  return H;
}

// d/du_j (bar = false) or d/dubar_j (bar = true) of one monomial.
inline NaivePoly derive(const NaivePoly& p, int j, bool bar) {
  NaivePoly out;
  for (const auto& [k, c] : p) {
    const MultiIndex& e = bar ? k.second : k.first;
    int n = e[j];
    if (n == 0) continue;
    Key nk = bar ? Key{k.first, k.second.minus_unit(j)} : Key{k.first.minus_unit(j), k.second};
    out[nk] += c * static_cast<double>(n);
  }
  return out;
}

inline NaivePoly multiply(const NaivePoly& a, const NaivePoly& b) {
  NaivePoly out;
  for (const auto& [ka, ca] : a)
    for (const auto& [kb, cb] : b) out[{ka.first + kb.first, ka.second + kb.second}] += ca * cb;
  return out;
}

inline void axpy(NaivePoly& y, cplx a, const NaivePoly& x) {
  for (const auto& [k, c] : x) y[k] += a * c;
}

// {H,G} = i sum_j (G_u H_ubar - G_ubar H_u), straight from the definition.
inline NaivePoly naive_bracket(const NaivePoly& H, const NaivePoly& G, int M) {
  NaivePoly out;
  const cplx I{0.0, 1.0};
  for (int j = -M; j <= M; ++j) {
    axpy(out, I, multiply(derive(G, j, false), derive(H, j, true)));
    axpy(out, -I, multiply(derive(G, j, true), derive(H, j, false)));
  }
  return out;
}

// max |a - b| over the union of keys, relative to the largest coefficient.
inline double rel_diff(const NaivePoly& a, const NaivePoly& b) {
  double scale = 0.0, diff = 0.0;
  NaivePoly d = a;
  for (const auto& [k, c] : b) d[k] -= c;
  for (const auto& [k, c] : a) scale = std::max(scale, std::abs(c));
  for (const auto& [k, c] : b) scale = std::max(scale, std::abs(c));
  for (const auto& [k, c] : d) diff = std::max(diff, std::abs(c));
  return scale == 0.0 ? diff : diff / scale;
}

inline double rel_diff(const PolyHamiltonian& a, const PolyHamiltonian& b) {
  return rel_diff(to_naive(a), to_naive(b));
}

// Random momentum-conserving (alpha, beta) of total degree deg on [-M, M].
inline std::pair<MultiIndex, MultiIndex> random_momentum_pair(std::mt19937_64& g, int deg, int M) {
  std::uniform_int_distribution<int> mode(-M, M), split(0, deg);
  for (;;) {
    int na = split(g);
    std::vector<std::pair<int, int>> a, b;
    int mom = 0;
    for (int i = 0; i < deg; ++i) {
      int j = mode(g);
      if (i < na) {
        a.push_back({j, 1});
        mom += j;
      } else {
        b.push_back({j, 1});
        mom -= j;
      }
    }
    if (mom == 0) return {MultiIndex(a), MultiIndex(b)};
  }
}

// Real, momentum-conserving random Hamiltonian with terms of the given degrees.
inline PolyHamiltonian random_hamiltonian(std::mt19937_64& g, int M, std::vector<int> degrees,
                                          int terms) {
  PolyHamiltonian H(M);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<std::size_t> pick(0, degrees.size() - 1);
  for (int t = 0; t < terms; ++t) {
    auto [a, b] = random_momentum_pair(g, degrees[pick(g)], M);
    H.add_real(a, b, cplx(nd(g), nd(g)));
  }
  return H;
}

// Momentum-conserving resonant monomials built from pairs u_j ubar_j or u_j ubar_{-j}.
inline PolyHamiltonian random_resonant(std::mt19937_64& g, int M, int pairs, int terms) {
  PolyHamiltonian H(M);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> mode(-M, M), flip(0, 1);
  for (int t = 0; t < terms;) {
    std::vector<std::pair<int, int>> a, b;
    int mom = 0;
    for (int k = 0; k < pairs; ++k) {
      int j = mode(g), jb = flip(g) ? j : -j;
      a.push_back({j, 1});
      b.push_back({jb, 1});
      mom += j - jb;
    }
    if (mom != 0) continue;
    H.add_real(MultiIndex(a), MultiIndex(b), cplx(nd(g), nd(g)));
    ++t;
  }
  return H;
}

inline double max_abs(const PolyHamiltonian& H) { return H.max_abs_coeff(); }

}  // namespace testsupport

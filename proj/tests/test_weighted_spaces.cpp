#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "beamnf/errors.hpp"
#include "beamnf/weighted_spaces.hpp"

using namespace beamnf;

TEST(Lambda, ValueAtZero) {
  // (ln 3)^2
  EXPECT_NEAR(lambda(0, 2.0), 1.206948960812582, 1e-14);
  EXPECT_NEAR(lambda(0, 2.0), 1.20695, 1e-5);
}

TEST(Lambda, EvenAndRejectsBadQ) {
  for (int j = 0; j < 50; ++j)
    for (double q : {1.1, 1.5, 2.0}) EXPECT_EQ(lambda(j, q), lambda(-j, q));
  EXPECT_THROW(lambda(1, 1.0), ParameterError);
  EXPECT_THROW(lambda(1, 2.5), ParameterError);
  EXPECT_NO_THROW(lambda(1, 2.0));
}

TEST(Lambda, SubLinear) {
  std::mt19937_64 g(11);
  std::uniform_int_distribution<long> d(1, 1000000);
  std::uniform_real_distribution<double> qd(1.0001, 2.0);
  for (int i = 0; i < 20000; ++i) {
    double a = d(g), b = d(g), q = qd(g);
    EXPECT_LE(lambda(a + b, q), lambda(a, q) + lambda(b, q) * (1 + 1e-14));
  }
}

TEST(Weight, Invariants) {
  for (const Weight& w : {Weight::subexp(0.7, 1.5, 1.3, 12), Weight::sobolev(2.0, 12)}) {
    for (int j = 0; j <= 12; ++j) {
      EXPECT_EQ(w.at(j), w.at(-j));
      EXPECT_GE(w.at(j), std::pow(2.0, w.p) * (1 - 1e-15));
      if (j > 0) EXPECT_GE(w.at(j), w.at(j - 1));
    }
  }
  EXPECT_THROW(Weight::sobolev(0.5, 3), ParameterError);
  EXPECT_THROW(Weight::subexp(-1.0, 1.0, 1.5, 3), ParameterError);
  EXPECT_THROW(Weight::subexp(1.0, 1.0, 1.0, 3), ParameterError);
}

TEST(SeqNorm, Examples) {
  EXPECT_EQ(seq_norm(SeqState(3), Weight::sobolev(1.0, 3)), 0.0);
  for (double p : {0.75, 1.0, 2.5})
    EXPECT_NEAR(seq_norm(SeqState::unit(3, 1), Weight::sobolev(p, 3)), std::pow(2.0, p), 1e-13);
  SeqState u(4);
  std::mt19937_64 g(3);
  std::normal_distribution<double> nd;
  for (auto& c : u.data()) c = cplx(nd(g), nd(g));
  Weight w = Weight::subexp(0.3, 1.0, 1.5, 4);
  EXPECT_EQ(seq_norm(u, w), seq_norm(u, w));
  EXPECT_THROW(seq_norm(u, Weight::sobolev(1.0, 3)), DimensionError);
}

TEST(SeqNorm, MatchesDirectSum) {
  Weight w = Weight::subexp(0.4, 1.2, 1.7, 5);
  SeqState u(5);
  for (int j = -5; j <= 5; ++j) u[j] = cplx(j * 0.1, 1.0 / (2 + j * j));
  double acc = 0;
  for (int j = -5; j <= 5; ++j) {
    double fl = std::max(2, std::abs(j));
    double wj = std::pow(fl, 1.2) * std::exp(0.4 * std::pow(std::log(2.0 + std::max(1, std::abs(j))), 1.7));
    acc += wj * wj * std::norm(u[j]);
  }
  EXPECT_NEAR(seq_norm(u, w), std::sqrt(acc), 1e-12 * std::sqrt(acc));
}

TEST(Convolve, Examples) {
  const int M = 5;
  SeqState g(M);
  for (int j = -M; j <= M; ++j) g[j] = cplx(j, 1 - j);
  SeqState id = convolve(SeqState::unit(M, 0), g);
  for (int j = -M; j <= M; ++j) EXPECT_EQ(id[j], g[j]);
  SeqState e3 = convolve(SeqState::unit(M, 1), SeqState::unit(M, 2));
  for (int j = -M; j <= M; ++j) EXPECT_EQ(e3[j], j == 3 ? cplx(1) : cplx(0));
  // truncation to the window
  SeqState out = convolve(SeqState::unit(M, 3), SeqState::unit(M, 4));
  for (int j = -M; j <= M; ++j) EXPECT_EQ(out[j], cplx(0));
  EXPECT_THROW(convolve(SeqState(2), SeqState(3)), DimensionError);
}

TEST(Convolve, BilinearCommutative) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  auto rnd = [&] {
    SeqState s(6);
    for (auto& c : s.data()) c = cplx(nd(gen), nd(gen));
    return s;
  };
  for (int t = 0; t < 50; ++t) {
    SeqState f = rnd(), g = rnd(), h = rnd();
    cplx a(nd(gen), nd(gen));
    SeqState fg = convolve(f, g), gf = convolve(g, f);
    SeqState lin(6);
    for (int j = -6; j <= 6; ++j) lin[j] = a * f[j] + h[j];
    SeqState l1 = convolve(lin, g), fg2 = convolve(h, g);
    for (int j = -6; j <= 6; ++j) {
      EXPECT_NEAR(std::abs(fg[j] - gf[j]), 0.0, 1e-12);
      EXPECT_NEAR(std::abs(l1[j] - (a * fg[j] + fg2[j])), 0.0, 1e-11);
    }
  }
}

TEST(Convolve, AlgebraBound) {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> nd;
  for (const Weight& w : {Weight::sobolev(2.0, 8), Weight::sobolev(0.8, 8),
                          Weight::subexp(0.5, 1.0, 1.5, 8), Weight::subexp(1.0, 0.7, 2.0, 8)}) {
    double C = algebra_constant(w);
    for (int t = 0; t < 500; ++t) {
      SeqState f(8), g(8);
      double sc = std::exp(3 * nd(gen));
      for (int j = -8; j <= 8; ++j) {
        f[j] = cplx(nd(gen), nd(gen)) * (t % 2 ? 1.0 : sc / (1 + j * j));
        g[j] = cplx(nd(gen), nd(gen)) / (1.0 + std::abs(j) * (t % 3));
      }
      EXPECT_LE(seq_norm(convolve(f, g), w), C * seq_norm(f, w) * seq_norm(g, w));
    }
  }
}

TEST(Convolve, SobolevConstant) {
  double p = 2.0;
  EXPECT_NEAR(algebra_constant(Weight::sobolev(p, 4)),
              std::sqrt(2.0) * std::sqrt(2.0 + (2 * p + 1) / (2 * p - 1)), 1e-14);
}

TEST(CoeffC, Examples) {
  MultiIndex e1 = MultiIndex::unit(1);
  for (double r : {0.1, 1.0, 7.0})
    EXPECT_NEAR(coeff_c(1, e1, e1, r, Weight::subexp(0.5, 1.0, 1.5, 3)), 1.0, 1e-14);
  MultiIndex a{{1, 2}, {-2, 1}}, b{{0, 1}, {3, 1}};
  Weight w = Weight::sobolev(1.5, 4);
  for (double t : {0.5, 2.0, 3.0}) {
    double base = coeff_c(1, a, b, 0.3, w);
    EXPECT_NEAR(coeff_c(1, a, b, 0.3 * t, w), base * std::pow(t, 3.0), 1e-12 * base * std::pow(t, 3.0));
  }
  EXPECT_THROW(coeff_c(2, a, b, 1.0, w), DomainError);
  EXPECT_THROW(coeff_c(1, a, b, 0.0, w), ParameterError);
}

TEST(CoeffC, MatchesFormula) {
  MultiIndex a{{1, 2}, {-2, 1}}, b{{0, 1}, {3, 1}};
  Weight w = Weight::subexp(0.6, 1.2, 1.4, 4);
  double r = 0.37;
  double prod = std::pow(w.at(1), 2) * w.at(-2) * w.at(0) * w.at(3);
  double expect = std::pow(r, 3) * w.at(-2) * w.at(-2) / prod;
  EXPECT_NEAR(coeff_c(-2, a, b, r, w), expect, 1e-13 * expect);
}

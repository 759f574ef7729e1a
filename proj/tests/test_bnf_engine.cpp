#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <random>

#include "beamnf/beam_dynamics.hpp"
#include "beamnf/bnf_engine.hpp"
#include "beamnf/errors.hpp"
#include "support.hpp"

using namespace beamnf;
using namespace testsupport;

namespace {

const cplx I{0.0, 1.0};

double omega_dot(const MultiIndex& a, const MultiIndex& b, double m) {
  double s = 0.0;
  for (auto [j, e] : a.entries()) s += e * std::sqrt(std::pow(double(j), 4) + m);
  for (auto [j, e] : b.entries()) s -= e * std::sqrt(std::pow(double(j), 4) + m);
  return s;
}

bool resonant(const MultiIndex& a, const MultiIndex& b) {
  // l_0 = 0 and l_j + l_{-j} = 0
  for (int j = 0; j <= kMaxModeCutoff; ++j) {
    int lj = a[j] - b[j], lm = a[-j] - b[-j];
    if (j == 0 ? lj != 0 : lj + lm != 0) return false;
  }
  return true;
}

// e^{L_S} H = sum_k L_S^k H / k! with naive brackets, kept to total degree <= max_total.
NaivePoly naive_lie(const NaivePoly& H, const NaivePoly& S, int M, int max_total) {
  auto cut = [&](NaivePoly p) {
    for (auto it = p.begin(); it != p.end();)
      it = it->first.first.total() + it->first.second.total() > max_total ? p.erase(it) : std::next(it);
    return p;
  };
  NaivePoly acc = cut(H), term = acc;
  for (int k = 1; k <= max_total && !term.empty(); ++k) {
    term = cut(naive_bracket(term, S, M));
    for (auto& [key, c] : term) c /= k;
    axpy(acc, 1.0, term);
  }
  return acc;
}

ParamSchedule small_schedule(int K, int M, double r0) {
  ParamSchedule s;
  s.K = K;
  s.M = M;
  s.r0 = r0;
  s.rbar = 2 * r0;
  return s;
}

StepOptions forced() {
  StepOptions o;
  o.override_gates = true;
  return o;
}

}  // namespace

TEST(Homological, Zero) {
  FrequencyVector f(1.37, 3);
  EXPECT_TRUE(solve_homological(PolyHamiltonian(3), f).is_zero());
}

TEST(Homological, SingleMonomial) {
  FrequencyVector f(1.0, 2);
  PolyHamiltonian R(2);
  MultiIndex a{{1, 1}, {-1, 1}}, b{{0, 2}};
  R.add(a, b, 1.0);
  PolyHamiltonian S = solve_homological(R, f);
  double d = 2 * std::sqrt(2.0) - 2;
  EXPECT_NEAR(d, 0.82843, 1e-5);
  cplx expect = 1.0 / (-I * d);
  EXPECT_LE(std::abs(S.coeff(a, b) - expect), 1e-15 * std::abs(expect));
  EXPECT_EQ(S.size(), 1u);
}

TEST(Homological, RoundTripOracle) {
  std::mt19937_64 g(41);
  std::uniform_real_distribution<double> um(1.0, 2.0);
  for (int t = 0; t < 100; ++t) {
    double m = um(g);
    FrequencyVector f(m, 4);
    PolyHamiltonian R = project_resonant(random_hamiltonian(g, 4, {3, 4, 5}, 8), ResonantPart::Range);
    PolyHamiltonian S = solve_homological(R, f);
    EXPECT_TRUE(S.is_real());
    EXPECT_TRUE(S.conserves_momentum());
    // independent multiplier
    for (const auto& mono : S.monomials()) {
      cplx back = -I * omega_dot(mono.alpha, mono.beta, m) * mono.coeff;
      cplx want = R.coeff(mono.alpha, mono.beta);
      EXPECT_LE(std::abs(back - want), 1e-12 * std::abs(want));
    }
    EXPECT_LE(rel_diff(adjoint_action(S, f), R), 1e-12);
    EXPECT_EQ(S.size(), R.size());
  }
}

TEST(Homological, ResonantWitness) {
  FrequencyVector f(1.5, 3);
  PolyHamiltonian R(3);
  R.add_real(MultiIndex{{1, 1}, {2, 1}}, MultiIndex{{1, 1}, {2, 1}}, 1.0);
  try {
    solve_homological(R, f);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("u^[1:1,2:1] ubar^[1:1,2:1]"), std::string::npos) << e.what();
  }
}

TEST(AdjointAction, MatchesBracketWithD) {
  std::mt19937_64 g(42);
  FrequencyVector f(1.37, 3);
  PolyHamiltonian D = frequency_hamiltonian(f);
  for (int t = 0; t < 20; ++t) {
    PolyHamiltonian H = random_hamiltonian(g, 3, {3, 4}, 6);
    EXPECT_LE(rel_diff(to_naive(adjoint_action(H, f)), naive_bracket(to_naive(H), to_naive(D), 3)), 1e-13);
  }
}

TEST(J0Bound, Examples) {
  double g = 0.01;
  EXPECT_NEAR(log_j0_bound(Weight::Kind::Sobolev, 1296.0, 1, g, 1.5), 1296 - 4 * std::log(g), 1e-10);
  EXPECT_NEAR(log_j0_bound(Weight::Kind::Sobolev, 1296.0 * 4, 2, 1.0 - 1e-300, 1.5), 1296.0 * 4, 1e-9);
  // gamma factor: gamma^{-4N}
  double a = log_j0_bound(Weight::Kind::SubExp, 2.0, 1, 0.5, 1.5), b = log_j0_bound(Weight::Kind::SubExp, 2.0, 1, 0.25, 1.5);
  EXPECT_NEAR(b - a, 4 * std::log(2.0), 1e-10);
  EXPECT_GT(log_j0_bound(Weight::Kind::SubExp, 1.0, 1, g, 1.5), log_j0_bound(Weight::Kind::SubExp, 2.0, 1, g, 1.5));
  EXPECT_GT(log_j0_bound(Weight::Kind::SubExp, 1.0, 2, g, 1.5), log_j0_bound(Weight::Kind::SubExp, 1.0, 1, g, 1.5));
  EXPECT_GT(log_j0_bound(Weight::Kind::Sobolev, 36.0 * 36 * 4, 2, g, 1.5),
            log_j0_bound(Weight::Kind::Sobolev, 36.0 * 36 * 4, 1, g, 1.5));
  // the double exponential leaves double range quickly
  EXPECT_TRUE(std::isinf(j0_bound(Weight::Kind::SubExp, 0.01, 2, g, 1.5)));
  EXPECT_THROW(log_j0_bound(Weight::Kind::Sobolev, 1000.0, 1, g, 1.5), ParameterError);
}

TEST(Schedule, Identities) {
  for (int K : {1, 2, 3, 5}) {
    ParamSchedule s = small_schedule(K, 4, 0.3);
    s.s0 = 0.7;
    EXPECT_EQ(s.r(K), s.r0 / 2);
    EXPECT_EQ(s.s(K), 1.5 * s.s0);
    EXPECT_EQ(s.r(0), s.r0);
    for (int k = 0; k < K; ++k) {
      EXPECT_NEAR(s.delta(k), (s.r(k) - s.r(k + 1)) / (16 * std::exp(1.0) * s.r(k)), 1e-16);
      EXPECT_GT(s.r(k), s.r(k + 1));
    }
    EXPECT_EQ(s.zeta(2), 36.0 * 36 * 4);
  }
  ParamSchedule bad = small_schedule(0, 4, 0.1);
  EXPECT_THROW(bad.validate(), ParameterError);
}

TEST(BnfStep, ResonantOnlyInput) {
  const int M = 3;
  FrequencyVector f(1.37, M);
  std::mt19937_64 g(43);
  PolyHamiltonian Z2 = random_resonant(g, M, 2, 5);
  NormalFormState st = make_state(Z2, f, 2, 0);
  ParamSchedule sch = small_schedule(2, M, 0.1);
  PolyHamiltonian S;
  StepRecord rec;
  NormalFormState s1 = bnf_step(st, sch, forced(), &rec, &S);
  EXPECT_TRUE(S.is_zero());
  EXPECT_EQ(s1.k, 1);
  NormalFormState s2 = bnf_step(s1, sch, forced(), nullptr, &S);
  EXPECT_TRUE(S.is_zero());
  ASSERT_TRUE(s2.Z.count(2));
  EXPECT_LE(rel_diff(s2.Z.at(2), Z2), 0.0);
}

TEST(BnfStep, OddNonresonantHasNoKernel) {
  const int M = 3;
  FrequencyVector f(1.37, M);
  std::mt19937_64 g(44);
  PolyHamiltonian R1 = random_hamiltonian(g, M, {3}, 6);
  ASSERT_TRUE(project_resonant(R1, ResonantPart::Kernel).is_zero());
  NormalFormState s1 = bnf_step(make_state(R1, f, 2, 0), small_schedule(2, M, 0.1), forced());
  EXPECT_TRUE(!s1.Z.count(1) || s1.Z.at(1).is_zero());
  PolyHamiltonian H1 = s1.hamiltonian();
  EXPECT_TRUE(project_degree(H1, 1, DegreeFilter::Equal).is_zero());
}

TEST(BnfStep, MatchesLieSeriesOracle) {
  const int M = 3, K = 2, buffer = 1;
  const double m = 1.37;
  FrequencyVector f(m, M);
  PolyHamiltonian R0 = build_R0(NonlinearitySpec::cubic(), m, M, 3);
  NormalFormState st = make_state(R0, f, K, buffer);
  PolyHamiltonian S;
  NormalFormState s1 = bnf_step(st, small_schedule(K, M, 0.1), forced(), nullptr, &S);

  // generator solves the homological equation for the cubic part
  for (const auto& mono : S.monomials()) {
    ASSERT_FALSE(resonant(mono.alpha, mono.beta));
    cplx back = -I * omega_dot(mono.alpha, mono.beta, m) * mono.coeff;
    EXPECT_LE(std::abs(back - R0.coeff(mono.alpha, mono.beta)), 1e-12 * std::abs(back));
  }
  EXPECT_EQ(S.size(), R0.size());

  const int max_total = st.cutoff_degree() + 2;
  NaivePoly H = to_naive(frequency_hamiltonian(f) + R0);
  NaivePoly oracle = naive_lie(H, to_naive(S), M, max_total);
  EXPECT_LE(rel_diff(to_naive(s1.hamiltonian()), oracle), 1e-12);

  // quartic part = 1/2 {R1, S}
  PolyHamiltonian quartic = project_degree(s1.hamiltonian(), 2, DegreeFilter::Equal);
  NaivePoly half = naive_bracket(to_naive(R0), to_naive(S), M);
  for (auto& [k, c] : half) c *= 0.5;
  EXPECT_LE(rel_diff(to_naive(quartic), half), 1e-12);
  EXPECT_TRUE(project_degree(s1.hamiltonian(), 1, DegreeFilter::Equal).is_zero());
}

TEST(BnfStep, EliminatesNonresonantAtEachDegree) {
  const int M = 3;
  FrequencyVector f(1.37, M);
  std::mt19937_64 g(45);
  PolyHamiltonian H0 = random_hamiltonian(g, M, {3, 4, 5}, 12) + random_resonant(g, M, 2, 3);
  NormalFormState st = make_state(H0, f, 3, 1);
  ParamSchedule sch = small_schedule(3, M, 0.05);
  std::map<int, PolyHamiltonian> fixed;
  for (int N = 1; N <= 3; ++N) {
    StepRecord rec;
    st = bnf_step(st, sch, forced(), &rec);
    PolyHamiltonian HN = project_degree(st.hamiltonian(), N, DegreeFilter::Equal);
    double scale = std::max(1.0, H0.max_abs_coeff());
    PolyHamiltonian left = project_resonant(HN, ResonantPart::Range);
    EXPECT_LE(left.is_zero() ? 0.0 : left.max_abs_coeff(), 1e-12 * scale);
    EXPECT_LE(rec.residual, 1e-12);
    // earlier kernel terms never change
    for (const auto& [d, z] : fixed) EXPECT_LE(rel_diff(st.Z.at(d), z), 0.0);
    if (st.Z.count(N)) fixed.emplace(N, st.Z.at(N));
    for (const auto& [d, z] : st.Z) EXPECT_LE(rel_diff(project_resonant(z, ResonantPart::Kernel), z), 0.0);
  }
}

TEST(BnfStep, GateRejects) {
  const int M = 3;
  FrequencyVector f(1.37, M);
  PolyHamiltonian R0 = build_R0(NonlinearitySpec::cubic(), 1.37, M, 3);
  NormalFormState st = make_state(R0, f, 2, 0);
  ParamSchedule sch = small_schedule(2, M, 0.5);
  StepRecord rec;
  EXPECT_THROW(bnf_step(st, sch, {}, &rec), StepRejected);
  NormalFormState ok = bnf_step(st, sch, forced(), &rec);
  EXPECT_TRUE(rec.overridden);
  EXPECT_FALSE(rec.gate_empirical);
  EXPECT_EQ(ok.k, 1);
}

TEST(BnfIterate, ZeroHamiltonian) {
  FrequencyVector f(1.37, 3);
  BnfResult r = bnf_iterate(PolyHamiltonian(3), f, small_schedule(2, 3, 1e-3));
  EXPECT_TRUE(r.report.completed);
  EXPECT_TRUE(r.state.nonlinear().is_zero());
  for (const auto& S : r.generators) EXPECT_TRUE(S.is_zero());
}

TEST(BnfIterate, BeamCubicK2) {
  const int M = 4;
  FrequencyVector f(1.37, M);
  PolyHamiltonian R0 = build_R0(NonlinearitySpec::cubic(), 1.37, M, 3);
  BnfResult r = bnf_iterate(R0, f, small_schedule(2, M, 1e-3), {}, 2);
  ASSERT_TRUE(r.report.completed) << r.report.error;
  EXPECT_EQ(r.generators.size(), 2u);
  EXPECT_EQ(r.report.steps.size(), 2u);
  PolyHamiltonian H = r.state.hamiltonian();
  EXPECT_TRUE(project_degree(H, 1, DegreeFilter::Equal).is_zero());
  PolyHamiltonian nr = project_resonant(project_degree(H, 2, DegreeFilter::Equal), ResonantPart::Range);
  EXPECT_LE(nr.is_zero() ? 0.0 : nr.max_abs_coeff(), 1e-12 * R0.max_abs_coeff());
  for (const auto& [d, z] : r.state.Z) {
    if (d % 2) EXPECT_TRUE(z.is_zero());
    EXPECT_TRUE(z.is_real());
    EXPECT_TRUE(z.conserves_momentum());
  }
  EXPECT_GT(r.state.Z.at(2).size(), 0u);
  EXPECT_GE(scaling_degree(r.state.tail), 3);
  for (const auto& st : r.report.steps) EXPECT_TRUE(st.gate_empirical);

  auto j = nlohmann::json::parse(report_to_json(r.report));
  EXPECT_EQ(j["steps"].size(), 2u);
  EXPECT_TRUE(j.contains("schedule"));
}

TEST(BnfIterate, PartialOnRejection) {
  const int M = 3;
  FrequencyVector f(1.37, M);
  PolyHamiltonian R0 = build_R0(NonlinearitySpec::cubic(), 1.37, M, 3);
  BnfResult r = bnf_iterate(R0, f, small_schedule(2, M, 0.5));
  EXPECT_FALSE(r.report.completed);
  EXPECT_FALSE(r.report.error.empty());
  // the rejected step keeps its record
  ASSERT_EQ(r.report.steps.size(), r.generators.size() + 1);
  EXPECT_FALSE(r.report.steps.back().gate_empirical);
  EXPECT_EQ(r.state.k, static_cast<int>(r.generators.size()));
}

TEST(PredictedTimes, SobolevShapeAndMonotone) {
  LifespanInputs in;
  in.p = 2.0;
  in.c = 1.0;
  in.F_R = 1.0;
  PredictedTimes at = predicted_times(1.0, in);
  double thr = at.log_delta_sobolev;
  EXPECT_NEAR(thr, std::log(in.R / 32.0) + in.c * in.p * std::log(in.gamma), 1e-14);
  PredictedTimes b = predicted_times(std::exp(thr), in);
  ASSERT_TRUE(b.log_T_sobolev.has_value());
  EXPECT_TRUE(std::isfinite(*b.log_T_sobolev));
  EXPECT_FALSE(predicted_times(std::exp(thr) * 1.01, in).log_T_sobolev.has_value());
  double prev = -1e300, shape0 = 0;
  for (int k = 0; k < 10; ++k) {
    double ld = thr - 1.0 - 3.0 * (9 - k);  // increasing delta
    double d = std::exp(ld);
    PredictedTimes p = predicted_times(d, in);
    ASSERT_TRUE(p.log_T_sobolev.has_value());
    if (k) EXPECT_LT(*p.log_T_sobolev, prev);
    prev = *p.log_T_sobolev;
    // log T + log delta - (p-1)^{1/3}/c log(delta_S/delta) is constant
    double shape = *p.log_T_sobolev + ld - std::cbrt(in.p - 1) / in.c * std::log(p.delta_S / d);
    if (k == 0) shape0 = shape;
    EXPECT_NEAR(shape, shape0, 1e-9);
  }
}

TEST(PredictedTimes, SubexpAndOptimalP) {
  LifespanInputs in;
  in.s = 1.0;
  in.q = 1.5;
  in.gamma = 0.5;
  PredictedTimes p = predicted_times(1e-3, in);
  EXPECT_NEAR(std::exp(p.log_delta_subexp), subexp_threshold(in), 1e-12);
  ASSERT_TRUE(p.log_T_subexp.has_value());
  PredictedTimes edge = predicted_times(subexp_threshold(in), in);
  ASSERT_TRUE(edge.log_T_subexp.has_value());
  EXPECT_NEAR(*edge.log_T_subexp, std::log(in.C3), 1e-9);
  EXPECT_GT(*predicted_times(1e-4, in).log_T_subexp, *p.log_T_subexp);

  // default c puts the optimal-p threshold far outside double range
  EXPECT_FALSE(p.log_T_optp.has_value());
  EXPECT_LT(p.log_delta_optp, -1e6);
  in.c = 1e-4;
  PredictedTimes q = predicted_times(1e-3, in);
  double thr = q.log_delta_optp;
  ASSERT_GT(thr, -700.0);
  PredictedTimes c1 = predicted_times(std::exp(thr - 1.0), in), c2 = predicted_times(std::exp(thr - 5.0), in);
  ASSERT_TRUE(c1.log_T_optp && c2.log_T_optp);
  EXPECT_GT(*c2.log_T_optp, *c1.log_T_optp);
}

TEST(PredictedTimes, OptimalP) {
  double dS = 1.0 / 32, g = 0.01, c = 1.0;
  double prev = 1.0;
  for (double d : {1e-3, 1e-5, 1e-10, 1e-50, 1e-200}) {
    double p = optimal_p(d, g, dS, c);
    EXPECT_GT(p, prev);
    prev = p;
    EXPECT_NEAR(std::log(delta_of_p(p, g, dS, c)), std::log(d), 1e-9 * std::abs(std::log(d)));
  }
  EXPECT_THROW(optimal_p(1.0, g, dS, c), DomainError);
  EXPECT_THROW(delta_of_p(1.0, g, dS, c), DomainError);
}

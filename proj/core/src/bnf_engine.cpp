#include "beamnf/bnf_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "beamnf/errors.hpp"

namespace beamnf {

namespace {

constexpr cplx I{0.0, 1.0};

double log_sum(const std::map<int, double>& eps) {
  double s = 0.0;
  for (const auto& e : eps) s += e.second;
  return s > 0.0 ? std::log(s) : -std::numeric_limits<double>::infinity();
}

}  // namespace

PolyHamiltonian frequency_hamiltonian(const FrequencyVector& freq) {
  return diagonal_quadratic(freq.cutoff(), [&freq](int j) { return freq(j); });
}

double key_divisor(const MonoKey& k, const FrequencyVector& freq) {
  double s = 0.0;
  for (int a = freq.cutoff(); a >= 0; --a) {
    int l = k.u_exp(a) - k.ubar_exp(a);
    if (a > 0) l += k.u_exp(-a) - k.ubar_exp(-a);
    if (l) s += l * freq(a);
  }
  return s;
}

PolyHamiltonian adjoint_action(const PolyHamiltonian& H, const FrequencyVector& freq) {
  if (H.cutoff() != freq.cutoff()) throw DimensionError("frequency and Hamiltonian cutoffs differ");
  PolyHamiltonian out(H.cutoff());
  for (const auto& [k, c] : H.sorted_terms()) out.add_key(k, -I * key_divisor(k, freq) * c);
  return out;
}

namespace {

std::string monomial_label(const MonoKey& k) {
  auto part = [](const MultiIndex& e) {
    std::string s;
    for (auto [j, n] : e.entries()) s += (s.empty() ? "" : ",") + std::to_string(j) + ":" + std::to_string(n);
    return "[" + s + "]";
  };
  return "u^" + part(k.alpha()) + " ubar^" + part(k.beta());
}

}  // namespace

PolyHamiltonian solve_homological(const PolyHamiltonian& R, const FrequencyVector& freq) {
  if (R.cutoff() != freq.cutoff()) throw DimensionError("frequency and Hamiltonian cutoffs differ");
  PolyHamiltonian S(R.cutoff());
  for (const auto& [k, c] : R.sorted_terms()) {
    if (is_resonant(k))
      throw DomainError("resonant monomial in homological equation: " + monomial_label(k) +
                        " (alpha-beta = " + LatticeVector::of(k).encode() + ")");
    S.add_key(k, c / (-I * key_divisor(k, freq)));
  }
  return S;
}

double log_j0_bound(Weight::Kind kind, double sigma_or_zeta, int N, double gamma, double q,
                    double C) {
  if (N < 1) throw ParameterError("step index must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ParameterError("gamma must lie in (0,1]");
  double g = -4.0 * N * std::log(gamma);
  if (kind == Weight::Kind::Sobolev) {
    if (sigma_or_zeta < 36.0 * 36.0 * N * N) throw ParameterError("zeta below (36N)^2");
    return g + C * sigma_or_zeta;
  }
  if (!(sigma_or_zeta > 0.0)) throw ParameterError("sigma must be positive");
  if (!(q > 1.0 && q <= 2.0)) throw ParameterError("q must lie in (1,2]");
  return g + std::exp(std::pow(N * N * C / sigma_or_zeta, 1.0 / (q - 1.0)));
}

double j0_bound(Weight::Kind kind, double sigma_or_zeta, int N, double gamma, double q, double C) {
  return std::exp(log_j0_bound(kind, sigma_or_zeta, N, gamma, q, C));
}

void ParamSchedule::validate() const {
  if (K < 1) throw ParameterError("K must be at least 1");
  if (!(r0 > 0.0)) throw ParameterError("r0 must be positive");
  if (!(rbar >= r0)) throw ParameterError("rbar must be at least r0");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in (0,1)");
  if (!(p > 0.5)) throw ParameterError("p must exceed 1/2");
  if (kind == Weight::Kind::SubExp) {
    if (!(q > 1.0 && q <= 2.0)) throw ParameterError("q must lie in (1,2]");
    if (!(s0 > 0.0)) throw ParameterError("s0 must be positive");
  }
  if (M < 1 || M > kMaxModeCutoff) throw ParameterError("mode cutoff outside [1, 15]");
}

double ParamSchedule::delta(int k) const {
  return (r(k) - r(k + 1)) / (16.0 * std::numbers::e * r(k));
}

double ParamSchedule::zeta_sum(int k) const {
  double s = 0.0;
  for (int i = 1; i <= k; ++i) s += zeta(i);
  return s;
}

Weight ParamSchedule::weight(int k) const {
  if (kind == Weight::Kind::SubExp) return Weight::subexp(s(k), p, q, M);
  return Weight::sobolev(p + zeta_sum(k), M);
}

double ParamSchedule::log_J(int k) const {
  if (kind == Weight::Kind::SubExp) return log_j0_bound(kind, sigma(k), k, gamma, q, C);
  return log_j0_bound(kind, zeta_sum(k), k, gamma, q, C);
}

PolyHamiltonian NormalFormState::nonlinear() const {
  PolyHamiltonian H(freq.cutoff());
  for (const auto& z : Z) H += z.second;
  for (const auto& r : R) H += r.second;
  H += tail;
  return H;
}

PolyHamiltonian NormalFormState::hamiltonian() const {
  return frequency_hamiltonian(freq) + nonlinear();
}

NormalFormState make_state(const PolyHamiltonian& H0, const FrequencyVector& freq, int K,
                           int buffer) {
  if (H0.cutoff() != freq.cutoff()) throw DimensionError("frequency and Hamiltonian cutoffs differ");
  if (K < 1) throw ParameterError("K must be at least 1");
  if (buffer < 0) throw ParameterError("negative tail buffer");
  if (scaling_degree(H0) < 1) throw DomainError("perturbation must have scaling degree >= 1");
  NormalFormState st(freq, K, buffer);
  for (int d = 1; d <= K; ++d) st.R.emplace(d, project_degree(H0, d, DegreeFilter::Equal));
  st.tail = truncate_degree(project_degree(H0, K, DegreeFilter::Greater), st.cutoff_degree());
  return st;
}

NormalFormState bnf_step(const NormalFormState& state, const ParamSchedule& schedule,
                         const StepOptions& opt, StepRecord* record, PolyHamiltonian* generator) {
  const int N = state.k + 1;
  if (N > state.K) throw DomainError("all normal form steps already taken");
  const int M = state.freq.cutoff();
  StepRecord rec;
  rec.N = N;
  rec.r = schedule.r(N - 1);
  rec.r_next = schedule.r(N);
  rec.delta = schedule.delta(N - 1);
  const Weight w = schedule.weight(N - 1);

  const PolyHamiltonian& RN = state.R.at(N);
  for (int d = N; d <= state.K; ++d) rec.eps[d] = majorant_norm(state.R.at(d), rec.r, w, opt.norms).upper;
  rec.eps[state.K + 1] = majorant_norm(state.tail, rec.r, w, opt.norms).upper;
  for (const auto& e : rec.eps) rec.eps_sum += e.second;

  const PolyHamiltonian Q = project_resonant(RN, ResonantPart::Range);
  rec.min_divisor = std::numeric_limits<double>::infinity();
  for (const auto& t : Q.terms()) rec.min_divisor = std::min(rec.min_divisor, std::abs(key_divisor(t.first, state.freq)));
  rec.J_empirical = Q.is_zero() ? 0.0 : 1.0 / rec.min_divisor;
  rec.log_J_theory = schedule.log_J(N);
  rec.gate_theory = rec.log_J_theory + log_sum(rec.eps) <= std::log(rec.delta);
  rec.gate_empirical = rec.J_empirical * rec.eps_sum <= rec.delta;
  rec.overridden = !rec.gate_empirical && opt.override_gates;
  if (!rec.gate_empirical && !opt.override_gates) {
    if (record) *record = rec;
    throw StepRejected("step " + std::to_string(N) + " rejected: J_emp * eps = " +
                       std::to_string(rec.J_empirical * rec.eps_sum) + " > delta = " +
                       std::to_string(rec.delta));
  }

  const PolyHamiltonian S = solve_homological(Q, state.freq);
  rec.generator_norm = majorant_norm(S, rec.r, w, opt.norms).upper;
  const int cut = state.cutoff_degree();

  // e^{L_S}(D + H) with {D,S} = -Q, so the degree-N range part cancels exactly.
  PolyHamiltonian H = state.nonlinear();
  PolyHamiltonian next = H - Q;
  PolyHamiltonian h = H, q = Q;
  for (int k = 1; !(h.is_zero() && q.is_zero()); ++k) {
    if (!h.is_zero()) {
      h = poisson_bracket(h, S, cut + 2);
      h *= 1.0 / k;
      next += h;
    }
    if (!q.is_zero()) {
      q = poisson_bracket(q, S, cut + 2);
      q *= 1.0 / (k + 1);
      next -= q;
    }
  }
  next.prune();

  if (!S.is_zero()) {
    int dH = scaling_degree(H);
    int hmin = (cut + 1 - dH + N - 1) / N;
    double ratio = rec.generator_norm / (2.0 * rec.delta);
    double Hn = majorant_norm(H, rec.r, w, opt.norms).upper;
    rec.truncation_loss = 2.0 * Hn * std::pow(ratio, hmin);
  }

  NormalFormState out(state.freq, state.K, state.buffer);
  out.k = N;
  out.Z = state.Z;
  out.Z[N] = project_resonant(RN, ResonantPart::Kernel);
  for (int d = N + 1; d <= state.K; ++d) out.R.emplace(d, project_degree(next, d, DegreeFilter::Equal));
  for (int d = 1; d <= N; ++d) out.R.emplace(d, PolyHamiltonian(M));
  out.tail = truncate_degree(project_degree(next, state.K, DegreeFilter::Greater), cut);

  const PolyHamiltonian leftover = project_resonant(project_degree(next, N, DegreeFilter::Equal), ResonantPart::Range);
  double scale = std::max(RN.max_abs_coeff(), 1e-300);
  rec.residual = leftover.max_abs_coeff() / scale;
  rec.monomials = out.nonlinear().size();
  if (record) *record = rec;
  if (generator) *generator = S;
  return out;
}

BnfResult bnf_iterate(const PolyHamiltonian& H0, const FrequencyVector& freq,
                      const ParamSchedule& schedule, const StepOptions& opt, int buffer) {
  schedule.validate();
  if (schedule.M != freq.cutoff()) throw DimensionError("schedule and frequency cutoffs differ");
  BnfResult res{make_state(H0, freq, schedule.K, buffer), {}, {}};
  BnfReport& rep = res.report;
  rep.schedule = schedule;
  const int K = schedule.K;
  rep.R0_norm = majorant_norm(H0, schedule.rbar, schedule.weight(0), opt.norms).upper;
  rep.log_J_K = schedule.log_J(K);
  const double logR0 = rep.R0_norm > 0 ? std::log(rep.R0_norm) : -std::numeric_limits<double>::infinity();
  const double log4 = std::log(4.0), l16eK = std::log(16.0 * std::numbers::e * K);
  rep.iteration_gate = logR0 + (K + 3) * log4 + rep.log_J_K + std::log(schedule.r0 / schedule.rbar) <=
                       std::log(schedule.delta(0));
  rep.log_C2 = l16eK + logR0 + (K + 1) * log4 + rep.log_J_K - 2.0 * std::log(schedule.rbar);
  rep.log_C3 = logR0 + K * (l16eK + (K + 2) * log4) + K * rep.log_J_K - (K + 1) * std::log(schedule.rbar);
  rep.log_Z_bound = rep.log_C2 + 2.0 * std::log(schedule.r0);
  rep.log_R_bound = rep.log_C3 + (K + 1) * std::log(schedule.r0);

  try {
    for (int k = 1; k <= K; ++k) {
      StepRecord rec;
      PolyHamiltonian S(freq.cutoff());
      try {
        res.state = bnf_step(res.state, schedule, opt, &rec, &S);
      } catch (const StepRejected&) {
        rep.steps.push_back(rec);
        throw;
      }
      rep.steps.push_back(rec);
      res.generators.push_back(std::move(S));
    }
    rep.completed = true;
  } catch (const StepRejected& e) {
    rep.error = e.what();
  }

  const Weight wf = schedule.weight(res.state.k);
  const double rf = schedule.r(res.state.k);
  PolyHamiltonian Zall(freq.cutoff()), Rall(freq.cutoff());
  for (const auto& z : res.state.Z) Zall += z.second;
  for (const auto& r : res.state.R) Rall += r.second;
  Rall += res.state.tail;
  rep.Z_norm = majorant_norm(Zall, rf, wf, opt.norms).upper;
  rep.R_norm = majorant_norm(Rall, rf, wf, opt.norms).upper;
  return res;
}

std::string report_to_json(const BnfReport& rep, int indent) {
  using nlohmann::json;
  const auto& s = rep.schedule;
  auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["schedule"] = {{"kind", s.kind == Weight::Kind::SubExp ? "subexp" : "sobolev"},
                   {"r0", s.r0},   {"rbar", s.rbar}, {"s0", s.s0}, {"p", s.p},
                   {"q", s.q},     {"gamma", s.gamma}, {"K", s.K}, {"M", s.M},
                   {"C", s.C}};
  json radii = json::array(), deltas = json::array(), logJ = json::array();
  for (int k = 0; k <= s.K; ++k) {
    radii.push_back(s.r(k));
    if (k < s.K) deltas.push_back(s.delta(k));
    if (k >= 1) logJ.push_back(finite_or_null(s.log_J(k)));
  }
  j["schedule"]["r_k"] = radii;
  j["schedule"]["delta_k"] = deltas;
  j["log_J"] = logJ;
  json steps = json::array();
  for (const auto& st : rep.steps) {
    json e = json::object();
    for (const auto& [d, v] : st.eps) e[std::to_string(d)] = v;
    steps.push_back({{"N", st.N},
                     {"r", st.r},
                     {"r_next", st.r_next},
                     {"delta", st.delta},
                     {"eps", e},
                     {"eps_sum", st.eps_sum},
                     {"log_J_theory", finite_or_null(st.log_J_theory)},
                     {"J_empirical", st.J_empirical},
                     {"min_divisor", finite_or_null(st.min_divisor)},
                     {"gate_theory", st.gate_theory},
                     {"gate_empirical", st.gate_empirical},
                     {"overridden", st.overridden},
                     {"generator_norm", st.generator_norm},
                     {"residual", st.residual},
                     {"truncation_loss", finite_or_null(st.truncation_loss)},
                     {"monomials", st.monomials}});
  }
  j["steps"] = steps;
  j["completed"] = rep.completed;
  if (!rep.error.empty()) j["error"] = rep.error;
  j["R0_norm"] = rep.R0_norm;
  j["log_J_K"] = finite_or_null(rep.log_J_K);
  j["iteration_gate"] = rep.iteration_gate;
  j["log_C2"] = finite_or_null(rep.log_C2);
  j["log_C3"] = finite_or_null(rep.log_C3);
  j["log_Z_bound"] = finite_or_null(rep.log_Z_bound);
  j["log_R_bound"] = finite_or_null(rep.log_R_bound);
  j["Z_norm"] = rep.Z_norm;
  j["R_norm"] = rep.R_norm;
  return j.dump(indent);
}

}  // namespace beamnf

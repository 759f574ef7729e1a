#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "beamnf/ham_algebra.hpp"
#include "beamnf/small_divisors.hpp"
#include "beamnf/weighted_spaces.hpp"

namespace beamnf {

// D_omega = sum_j omega_j |u_j|^2
PolyHamiltonian frequency_hamiltonian(const FrequencyVector& freq);

// L_omega H = {H, D_omega}: multiplies H_{a,b} by -i omega.(a-b).
PolyHamiltonian adjoint_action(const PolyHamiltonian& H, const FrequencyVector& freq);

// omega.(a-b) summed from the largest |j| down.
double key_divisor(const MonoKey& k, const FrequencyVector& freq);

// S with L_omega S = R; every monomial of R must be nonresonant.
PolyHamiltonian solve_homological(const PolyHamiltonian& R, const FrequencyVector& freq);

// log of the divisor-loss constant: gamma^{-4N} exp exp((N^2 C/sigma)^{1/(q-1)})
// for SubExp, gamma^{-4N} e^{C zeta} for Sobolev (zeta >= (36N)^2).
double log_j0_bound(Weight::Kind kind, double sigma_or_zeta, int N, double gamma, double q,
                    double C = 1.0);
double j0_bound(Weight::Kind kind, double sigma_or_zeta, int N, double gamma, double q,
                double C = 1.0);

struct ParamSchedule {
  Weight::Kind kind = Weight::Kind::SubExp;
  double r0 = 1e-3;
  double rbar = 2e-3;
  double s0 = 0.5;
  double p = 1.0;
  double q = 1.5;
  double gamma = 1e-2;
  int K = 2;
  int M = 4;
  double C = 1.0;

  void validate() const;
  double r(int k) const { return r0 * (1.0 - static_cast<double>(k) / (2.0 * K)); }
  double delta(int k) const;
  double s(int k) const { return s0 * (1.0 + static_cast<double>(k) / (2.0 * K)); }
  double sigma(int k) const { return s0 * static_cast<double>(k) / (2.0 * K); }
  double zeta(int k) const { return 36.0 * 36.0 * k * k; }
  double zeta_sum(int k) const;
  Weight weight(int k) const;
  double log_J(int k) const;
};

struct NormalFormState {
  NormalFormState(const FrequencyVector& f, int K, int buffer) : freq(f), K(K), buffer(buffer) {}

  FrequencyVector freq;
  int K;
  int buffer;
  int k = 0;  // completed steps
  std::map<int, PolyHamiltonian> Z;
  std::map<int, PolyHamiltonian> R;
  PolyHamiltonian tail{freq.cutoff()};

  int cutoff_degree() const { return K + 1 + buffer; }
  PolyHamiltonian nonlinear() const;
  PolyHamiltonian hamiltonian() const;
};

// Split a perturbation of scaling degree >= 1 into the state's degree slots.
NormalFormState make_state(const PolyHamiltonian& H0, const FrequencyVector& freq, int K,
                           int buffer = 2);

struct StepOptions {
  bool override_gates = false;
  MajorantOptions norms{.upper_only = true};
};

struct StepRecord {
  int N = 0;
  double r = 0.0;
  double r_next = 0.0;
  double delta = 0.0;
  std::map<int, double> eps;  // degree -> upper norm, K+1 holds the tail
  double eps_sum = 0.0;
  double log_J_theory = 0.0;
  double J_empirical = 0.0;
  double min_divisor = 0.0;
  bool gate_theory = false;
  bool gate_empirical = false;
  bool overridden = false;
  double generator_norm = 0.0;
  double residual = 0.0;
  double truncation_loss = 0.0;
  std::size_t monomials = 0;
};

NormalFormState bnf_step(const NormalFormState& state, const ParamSchedule& schedule,
                         const StepOptions& opt = {}, StepRecord* record = nullptr,
                         PolyHamiltonian* generator = nullptr);

struct BnfReport {
  ParamSchedule schedule;
  std::vector<StepRecord> steps;
  bool completed = false;
  std::string error;
  double R0_norm = 0.0;  // upper norm of H0 at rbar with the initial weight
  double log_J_K = 0.0;
  bool iteration_gate = false;
  double log_C2 = 0.0;
  double log_C3 = 0.0;
  double log_Z_bound = 0.0;  // log(C2 r0^2)
  double log_R_bound = 0.0;  // log(C3 r0^{K+1})
  double Z_norm = 0.0;       // measured, at r0/2 with the final weight
  double R_norm = 0.0;
};

struct BnfResult {
  NormalFormState state;
  BnfReport report;
  std::vector<PolyHamiltonian> generators;
};

BnfResult bnf_iterate(const PolyHamiltonian& H0, const FrequencyVector& freq,
                      const ParamSchedule& schedule, const StepOptions& opt = {}, int buffer = 2);

std::string report_to_json(const BnfReport& report, int indent = 2);

// Inputs of the lifespan lower bounds; c, C1..C3 are unquantified constants.
struct LifespanInputs {
  double R = 1.0;
  double F_R = 1.0;  // sum |F^(d)| R^d
  double gamma = 1e-2;
  double s = 1.0;
  double q = 1.5;
  double p = 2.0;
  double c = 1.0;
  double C1 = 1.0;
  double C2 = 1.0;
  double C3 = 1.0;
};

// Logs of the predicted times; empty when delta is above the threshold.
struct PredictedTimes {
  std::optional<double> log_T_subexp;
  std::optional<double> log_T_sobolev;
  std::optional<double> log_T_optp;
  std::optional<double> p_of_delta;
  // Thresholds as logs; the optimal-p one is far below double range.
  double log_delta_subexp = 0.0;
  double log_delta_sobolev = 0.0;  // delta_S gamma^{c p}
  double log_delta_optp = 0.0;     // delta_S gamma^b
  double delta_S = 0.0;
};

double subexp_threshold(const LifespanInputs& in);
double sobolev_scale(const LifespanInputs& in);  // R / (2^5 |F|_R)
PredictedTimes predicted_times(double delta, const LifespanInputs& in);

// 1 + (ln(delta_S/delta) / (24 c^2 ln(1/gamma)))^{3/5}
double optimal_p(double delta, double gamma, double delta_S, double c);
// Inverse relation: delta_S exp(-24 c^2 (p-1)^{5/3} ln(1/gamma))
double delta_of_p(double p, double gamma, double delta_S, double c);

}  // namespace beamnf

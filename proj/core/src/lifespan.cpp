#include <algorithm>
#include <cmath>

#include "beamnf/bnf_engine.hpp"
#include "beamnf/errors.hpp"

namespace beamnf {

namespace {

void check_inputs(const LifespanInputs& in) {
  if (!(in.R > 0.0)) throw ParameterError("R must be positive");
  if (!(in.F_R > 0.0)) throw ParameterError("|F|_R must be positive");
  if (!(in.gamma > 0.0 && in.gamma < 1.0)) throw ParameterError("gamma must lie in (0,1)");
  if (!(in.c > 0.0)) throw ParameterError("c must be positive");
  if (!(in.C1 > 0.0 && in.C2 > 0.0 && in.C3 > 0.0)) throw ParameterError("constants must be positive");
}

// 24 c^2 [2^6 36^2]^{5/3}
double optp_exponent(double c) { return 24.0 * c * c * std::pow(64.0 * 36.0 * 36.0, 5.0 / 3.0); }

// delta at the threshold up to rounding of exp(log threshold) still counts
bool below(double log_delta, double log_threshold) {
  return log_delta <= log_threshold + 1e-12 * std::max(1.0, std::abs(log_threshold));
}

}  // namespace

double subexp_threshold(const LifespanInputs& in) {
  check_inputs(in);
  if (!(in.s > 0.0)) throw ParameterError("s must be positive");
  if (!(in.q > 1.0 && in.q <= 2.0)) throw ParameterError("q must lie in (1,2]");
  double g4s = std::pow(in.gamma, 4) * in.s;
  // exp exp(-(c / (gamma^4 s))^{1/(q-1)}), read literally
  double inner = std::exp(-std::pow(in.c / g4s, 1.0 / (in.q - 1.0)));
  double a = std::exp(inner) / (in.C1 * in.F_R);
  double b = 1.0 / (in.C2 * in.F_R);
  return std::min(a, b);
}

double sobolev_scale(const LifespanInputs& in) {
  check_inputs(in);
  return in.R / (32.0 * in.F_R);
}

PredictedTimes predicted_times(double delta, const LifespanInputs& in) {
  if (!(delta > 0.0)) throw ParameterError("delta must be positive");
  PredictedTimes out;
  const double dS = sobolev_scale(in);
  const double lng = std::log(in.gamma);
  out.delta_S = dS;

  const double dsE = subexp_threshold(in);
  out.log_delta_subexp = std::log(dsE);
  if (below(std::log(delta), out.log_delta_subexp)) {
    double L = std::max(0.0, std::log(dsE / delta));
    double lnL = std::max(0.0, std::log(L));
    double g4s = std::pow(in.gamma, 4) * in.s;
    out.log_T_subexp = std::log(in.C3) + L + 0.5 * L * std::pow(g4s / in.c * lnL, (in.q - 1.0) / 2.0);
  }

  if (!(in.p > 1.0)) throw ParameterError("p must exceed 1");
  out.log_delta_sobolev = std::log(dS) + in.c * in.p * lng;
  if (below(std::log(delta), out.log_delta_sobolev)) {
    out.log_T_sobolev = std::log(in.R) + in.c * in.p * in.p * lng - std::log(2.0 * in.F_R * delta) +
                        std::cbrt(in.p - 1.0) / in.c * std::log(dS / delta);
  }

  out.log_delta_optp = std::log(dS) + optp_exponent(in.c) * lng;
  if (below(std::log(delta), out.log_delta_optp)) {
    double k = std::pow(24.0 * in.c * in.c, 6.0 / 5.0);
    out.log_T_optp = std::log(in.R / (2.0 * in.F_R * delta)) +
                     in.c * std::pow(-lng, -0.2) / k * std::pow(std::log(dS / delta), 1.2);
  }
  if (delta < dS) out.p_of_delta = optimal_p(delta, in.gamma, dS, in.c);
  return out;
}

double optimal_p(double delta, double gamma, double delta_S, double c) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in (0,1)");
  if (!(c > 0.0)) throw ParameterError("c must be positive");
  if (!(delta > 0.0 && delta < delta_S)) throw DomainError("delta must lie in (0, delta_S)");
  return 1.0 + std::pow(std::log(delta_S / delta) / (24.0 * c * c * std::log(1.0 / gamma)), 0.6);
}

double delta_of_p(double p, double gamma, double delta_S, double c) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in (0,1)");
  if (!(c > 0.0)) throw ParameterError("c must be positive");
  if (!(p > 1.0)) throw DomainError("p must exceed 1");
  return delta_S * std::exp(-24.0 * c * c * std::pow(p - 1.0, 5.0 / 3.0) * std::log(1.0 / gamma));
}

}  // namespace beamnf

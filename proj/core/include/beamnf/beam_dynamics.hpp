#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "beamnf/ham_algebra.hpp"
#include "beamnf/small_divisors.hpp"
#include "beamnf/weighted_spaces.hpp"

namespace beamnf {

// F(y) = sum_{d>=3} F^(d) y^d, with f = F'.
struct NonlinearitySpec {
  std::map<int, double> coeffs;  // d -> F^(d)
  double R = 1.0;

  static NonlinearitySpec cubic(double a = 1.0, double R = 1.0);
  void validate() const;
  int max_degree() const;  // 0 when F = 0
  double norm_R() const;   // sum |F^(d)| R^d
};

struct BeamState {
  SeqState u;
  double m = 1.0;
  double t = 0.0;
};

// u_j = (w^{1/2} psi_j + i w^{-1/2} v_j)/sqrt2 for real psi, v.
BeamState complexify(const SeqState& psi, const SeqState& v, double m);
void realify(const BeamState& s, SeqState& psi, SeqState& v);

// Momentum-conserving real polynomial int F(psi) dx in the u variables, degrees 3..degree_cutoff.
PolyHamiltonian build_R0(const NonlinearitySpec& spec, double m, int M, int degree_cutoff);

// psi_j = w_j^{-1/2}(u_j + conj u_{-j})/sqrt2
SeqState beam_position(const SeqState& u, const FrequencyVector& freq);
// -(i/sqrt2) w_j^{-1/2} [f(psi)]_j through untruncated convolution powers.
SeqState nonlinear_field(const SeqState& u, const NonlinearitySpec& spec,
                         const FrequencyVector& freq);
double beam_energy(const SeqState& u, const NonlinearitySpec& spec, const FrequencyVector& freq);
double momentum(const SeqState& u);  // sum_j j |u_j|^2

enum class Scheme { StrangSplit, RK4Interaction };

BeamState step(const BeamState& s, const NonlinearitySpec& spec, double dt,
               Scheme scheme = Scheme::StrangSplit);

// H = D_omega + P for an arbitrary polynomial P; used for normalized systems.
class PolySystem {
 public:
  PolySystem(const FrequencyVector& freq, const PolyHamiltonian& nonlinear);
  const FrequencyVector& frequencies() const { return freq_; }
  void step(SeqState& u, double dt) const;  // rotation / implicit midpoint kick / rotation
  double energy(const SeqState& u) const;

 private:
  FrequencyVector freq_;
  PolyEvaluator eval_;
};

struct TrajectorySample {
  double t = 0.0;
  double norm_w = 0.0;
  double energy = 0.0;
  double momentum = 0.0;
};

struct EscapeOptions {
  int sample_every = 10;
  Scheme scheme = Scheme::StrangSplit;
};

struct EscapeResult {
  double T_escape = 0.0;  // horizon when censored
  bool censored = false;
  std::vector<TrajectorySample> trajectory;
};

// First sampled time with norm_w > 2 delta.
EscapeResult stability_time(const BeamState& u0, const NonlinearitySpec& spec, double delta,
                            const Weight& w, double horizon, double dt,
                            const EscapeOptions& opt = {});
EscapeResult stability_time(const SeqState& u0, const PolySystem& sys, double delta,
                            const Weight& w, double horizon, double dt, int sample_every = 10);

struct FlowOptions {
  double rtol = 1e-12;
  double atol = 1e-15;
  double max_abs = 1.0;  // flow domain: every |u_j| must stay below this
};

// Time-1 flow of direction * X_S.
SeqState apply_generator_flow(const SeqState& u, const PolyHamiltonian& S, int direction,
                              const FlowOptions& opt = {});
BeamState apply_generator_flow(const BeamState& u, const PolyHamiltonian& S, int direction,
                               const FlowOptions& opt = {});

// Gaussian coefficients on |j| <= active, rescaled to seq_norm = norm.
SeqState random_state(int M, double norm, const Weight& w, std::uint64_t seed, int active = -1);

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectorySample>& tr);

// Little-endian: "BEAMNF01", int64 M, f64 m, f64 t, then (re, im) for j = -M..M.
void write_checkpoint(std::ostream& os, const BeamState& s);
BeamState read_checkpoint(std::istream& is);

}  // namespace beamnf

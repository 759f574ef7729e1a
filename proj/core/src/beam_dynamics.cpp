#include "beamnf/beam_dynamics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <random>

#include <boost/numeric/odeint.hpp>

#include "beamnf/errors.hpp"

namespace beamnf {

namespace {

constexpr cplx I{0.0, 1.0};
const double kSqrt2 = std::sqrt(2.0);

std::vector<cplx> conv_full(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  std::vector<cplx> out(a.size() + b.size() - 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t k = 0; k < b.size(); ++k) out[i + k] += a[i] * b[k];
  }
  return out;
}

// [f(psi)]_j for |j| <= M and (F(psi))_0.
void spectral_f(const SeqState& psi, const NonlinearitySpec& spec, std::vector<cplx>* f,
                double* F0) {
  const int M = psi.cutoff();
  if (f) f->assign(2 * M + 1, 0.0);
  if (F0) *F0 = 0.0;
  int D = spec.max_degree();
  if (D < 3) return;
  std::vector<cplx> pw = psi.data();  // psi^{*k}, centered at k*M
  for (int k = 1; k <= D; ++k) {
    if (k > 1) pw = conv_full(pw, psi.data());
    int c = k * M;
    if (f) {
      auto it = spec.coeffs.find(k + 1);
      if (it != spec.coeffs.end() && it->second != 0.0)
        for (int j = -M; j <= M; ++j) (*f)[j + M] += (k + 1) * it->second * pw[c + j];
    }
    if (F0) {
      auto it = spec.coeffs.find(k);
      if (it != spec.coeffs.end()) *F0 += it->second * pw[c].real();
    }
  }
}

void rotate(SeqState& u, const FrequencyVector& freq, double h) {
  for (int j = -u.cutoff(); j <= u.cutoff(); ++j) u[j] *= std::polar(1.0, -freq(j) * h);
}

bool all_finite(const SeqState& u) {
  for (const auto& c : u.data())
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

// u1 = u0 + dt N((u0+u1)/2) by fixed point iteration.
template <class Field>
void midpoint_kick(SeqState& u, double dt, Field&& N) {
  const int n = static_cast<int>(u.data().size());
  SeqState u0 = u, mid = u, k(u.cutoff());
  double scale = 0.0;
  for (const auto& c : u0.data()) scale = std::max(scale, std::abs(c));
  double last = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 60; ++it) {
    N(mid, k);
    double change = 0.0;
    for (int i = 0; i < n; ++i) {
      cplx next = u0.data()[i] + dt * k.data()[i];
      change = std::max(change, std::abs(next - u.data()[i]));
      u.data()[i] = next;
      mid.data()[i] = 0.5 * (u0.data()[i] + next);
    }
    // stop at roundoff level, or once the iteration stalls there
    if (!(change > 4e-16 * scale) || (change >= last && change < 1e-12 * scale)) break;
    last = change;
  }
}

void write_le(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

std::uint64_t read_le(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw DomainError("truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

constexpr char kMagic[9] = "BEAMNF01";

}  // namespace

NonlinearitySpec NonlinearitySpec::cubic(double a, double R) {
  NonlinearitySpec s;
  s.coeffs[3] = a;
  s.R = R;
  return s;
}

void NonlinearitySpec::validate() const {
  if (!(R > 0.0) || !std::isfinite(R)) throw ParameterError("radius R must be positive");
  for (const auto& [d, c] : coeffs) {
    if (d < 3) throw ParameterError("Taylor coefficients start at degree 3");
    if (!std::isfinite(c)) throw ParameterError("non-finite Taylor coefficient");
  }
}

int NonlinearitySpec::max_degree() const {
  int D = 0;
  for (const auto& [d, c] : coeffs)
    if (c != 0.0) D = std::max(D, d);
  return D;
}

double NonlinearitySpec::norm_R() const {
  double s = 0.0;
  for (const auto& [d, c] : coeffs) s += std::abs(c) * std::pow(R, d);
  return s;
}

BeamState complexify(const SeqState& psi, const SeqState& v, double m) {
  if (psi.cutoff() != v.cutoff()) throw DimensionError("position and velocity cutoffs differ");
  const int M = psi.cutoff();
  for (const SeqState* x : {&psi, &v}) {
    double scale = 0.0;
    for (const auto& c : x->data()) scale = std::max(scale, std::abs(c));
    for (int j = 0; j <= M; ++j)
      if (std::abs((*x)[j] - std::conj((*x)[-j])) > 1e-12 * scale)
        throw DomainError("input is not the spectrum of a real function");
  }
  FrequencyVector freq(m, M);
  BeamState s{SeqState(M), m, 0.0};
  for (int j = -M; j <= M; ++j) {
    double om = freq(j);
    s.u[j] = (std::sqrt(om) * psi[j] + I * v[j] / std::sqrt(om)) / kSqrt2;
  }
  return s;
}

void realify(const BeamState& s, SeqState& psi, SeqState& v) {
  const int M = s.u.cutoff();
  FrequencyVector freq(s.m, M);
  psi = SeqState(M);
  v = SeqState(M);
  for (int j = -M; j <= M; ++j) {
    double om = freq(j);
    cplx a = s.u[j], b = std::conj(s.u[-j]);
    psi[j] = (a + b) / (kSqrt2 * std::sqrt(om));
    v[j] = std::sqrt(om) * (a - b) / (I * kSqrt2);
  }
}

PolyHamiltonian build_R0(const NonlinearitySpec& spec, double m, int M, int degree_cutoff) {
  if (degree_cutoff < 3) throw DomainError("degree cutoff below 3");
  spec.validate();
  FrequencyVector freq(m, M);
  PolyHamiltonian H(M);
  const int n = 2 * M + 1;
  // variable v < n is u_{v-M}, v >= n is ubar_{v-n-M}
  std::vector<double> isq(2 * n);
  std::vector<int> mode(2 * n), sign(2 * n);
  for (int v = 0; v < 2 * n; ++v) {
    mode[v] = (v < n ? v : v - n) - M;
    sign[v] = v < n ? 1 : -1;
    isq[v] = 1.0 / std::sqrt(freq(mode[v]));
  }
  std::vector<double> fact(16, 1.0);
  for (int i = 1; i < 16; ++i) fact[i] = fact[i - 1] * i;

  for (const auto& [d, Fd] : spec.coeffs) {
    if (d > degree_cutoff || Fd == 0.0) continue;
    if (d > 15) throw BudgetError("degree exceeds packed key capacity");
    const double base = Fd / std::pow(2.0, 0.5 * d) * fact[d];
    std::vector<int> cnt(2 * n, 0);
    // multisets of size d over the variables with zero momentum
    auto rec = [&](auto&& self, int v, int left, int mom, double w) -> void {
      if (left == 0) {
        if (mom != 0) return;
        MonoKey k;
        for (int x = 0; x < 2 * n; ++x) {
          if (!cnt[x]) continue;
          if (x < n)
            k.add_u(mode[x], cnt[x]);
          else
            k.add_ubar(mode[x], cnt[x]);
        }
        H.add_key(k, base * w);
        return;
      }
      if (v == 2 * n) return;
      if (std::abs(mom) > left * M) return;
      double wv = w;
      for (int e = 0; e <= left; ++e) {
        cnt[v] = e;
        self(self, v + 1, left - e, mom + e * sign[v] * mode[v], wv / fact[e]);
        wv *= isq[v];
      }
      cnt[v] = 0;
    };
    rec(rec, 0, d, 0, 1.0);
  }
  H.prune(0.0);
  return H;
}

SeqState beam_position(const SeqState& u, const FrequencyVector& freq) {
  const int M = u.cutoff();
  SeqState psi(M);
  for (int j = -M; j <= M; ++j) psi[j] = (u[j] + std::conj(u[-j])) / (kSqrt2 * std::sqrt(freq(j)));
  return psi;
}

SeqState nonlinear_field(const SeqState& u, const NonlinearitySpec& spec,
                         const FrequencyVector& freq) {
  if (u.cutoff() != freq.cutoff()) throw DimensionError("state and frequency cutoffs differ");
  const int M = u.cutoff();
  std::vector<cplx> f;
  spectral_f(beam_position(u, freq), spec, &f, nullptr);
  SeqState out(M);
  for (int j = -M; j <= M; ++j) out[j] = -I / kSqrt2 / std::sqrt(freq(j)) * f[j + M];
  return out;
}

double beam_energy(const SeqState& u, const NonlinearitySpec& spec, const FrequencyVector& freq) {
  if (u.cutoff() != freq.cutoff()) throw DimensionError("state and frequency cutoffs differ");
  double e = 0.0;
  for (int j = -u.cutoff(); j <= u.cutoff(); ++j) e += freq(j) * std::norm(u[j]);
  double F0 = 0.0;
  spectral_f(beam_position(u, freq), spec, nullptr, &F0);
  return e + F0;
}

double momentum(const SeqState& u) {
  double s = 0.0;
  for (int j = -u.cutoff(); j <= u.cutoff(); ++j) s += j * std::norm(u[j]);
  return s;
}

BeamState step(const BeamState& s, const NonlinearitySpec& spec, double dt, Scheme scheme) {
  if (!(dt > 0.0) && !(dt < 0.0)) throw ParameterError("time step must be nonzero");
  FrequencyVector freq(s.m, s.u.cutoff());
  BeamState out = s;
  auto N = [&](const SeqState& x, SeqState& k) { k = nonlinear_field(x, spec, freq); };
  if (scheme == Scheme::StrangSplit) {
    rotate(out.u, freq, 0.5 * dt);
    midpoint_kick(out.u, dt, N);
    rotate(out.u, freq, 0.5 * dt);
  } else {
    // v(tau) = e^{i omega tau} u(tau), RK4 on v' = e^{i omega tau} N(e^{-i omega tau} v)
    auto g = [&](double tau, const SeqState& v) {
      SeqState x = v;
      rotate(x, freq, tau);
      SeqState k = nonlinear_field(x, spec, freq);
      rotate(k, freq, -tau);
      return k;
    };
    const int n = static_cast<int>(s.u.data().size());
    auto axpy = [n](const SeqState& x, double a, const SeqState& y) {
      SeqState r = x;
      for (int i = 0; i < n; ++i) r.data()[i] += a * y.data()[i];
      return r;
    };
    const SeqState& v0 = s.u;
    SeqState k1 = g(0.0, v0);
    SeqState k2 = g(0.5 * dt, axpy(v0, 0.5 * dt, k1));
    SeqState k3 = g(0.5 * dt, axpy(v0, 0.5 * dt, k2));
    SeqState k4 = g(dt, axpy(v0, dt, k3));
    for (int i = 0; i < n; ++i)
      out.u.data()[i] = v0.data()[i] + dt / 6.0 *
                        (k1.data()[i] + 2.0 * k2.data()[i] + 2.0 * k3.data()[i] + k4.data()[i]);
    rotate(out.u, freq, dt);
  }
  if (!all_finite(out.u)) throw BlowUpError("non-finite state", s.t);
  out.t = s.t + dt;
  return out;
}

PolySystem::PolySystem(const FrequencyVector& freq, const PolyHamiltonian& nonlinear)
    : freq_(freq), eval_(nonlinear) {
  if (nonlinear.cutoff() != freq.cutoff()) throw DimensionError("frequency and Hamiltonian cutoffs differ");
}

void PolySystem::step(SeqState& u, double dt) const {
  rotate(u, freq_, 0.5 * dt);
  midpoint_kick(u, dt, [this](const SeqState& x, SeqState& k) { eval_.field(x.data(), k.data()); });
  rotate(u, freq_, 0.5 * dt);
}

double PolySystem::energy(const SeqState& u) const {
  double e = 0.0;
  for (int j = -u.cutoff(); j <= u.cutoff(); ++j) e += freq_(j) * std::norm(u[j]);
  return e + eval_.value(u.data()).real();
}

namespace {

template <class Stepper, class Energy>
EscapeResult run_escape(SeqState u, double delta, const Weight& w, double horizon, double dt,
                        int sample_every, Stepper&& stepper, Energy&& energy) {
  if (!(delta > 0.0)) throw ParameterError("delta must be positive");
  if (!(horizon > 0.0) || !(dt > 0.0)) throw ParameterError("horizon and dt must be positive");
  if (sample_every < 1) throw ParameterError("sampling interval must be at least 1");
  double n0 = seq_norm(u, w);
  if (n0 > delta * (1.0 + 1e-12)) throw DomainError("initial norm exceeds delta");
  EscapeResult res;
  auto sample = [&](double t) {
    double nw = seq_norm(u, w);
    res.trajectory.push_back({t, nw, energy(u), momentum(u)});
    return nw;
  };
  sample(0.0);
  const long long steps = static_cast<long long>(std::ceil(horizon / dt - 1e-9));
  double t = 0.0;
  for (long long i = 1; i <= steps; ++i) {
    stepper(u, dt);
    if (!all_finite(u)) throw BlowUpError("non-finite state", t);
    t = i * dt;
    if (i % sample_every == 0 || i == steps) {
      if (sample(t) > 2.0 * delta) {
        res.T_escape = t;
        return res;
      }
    }
  }
  res.T_escape = t;
  res.censored = true;
  return res;
}

}  // namespace

EscapeResult stability_time(const BeamState& u0, const NonlinearitySpec& spec, double delta,
                            const Weight& w, double horizon, double dt, const EscapeOptions& opt) {
  FrequencyVector freq(u0.m, u0.u.cutoff());
  double m = u0.m;
  return run_escape(
      u0.u, delta, w, horizon, dt, opt.sample_every,
      [&](SeqState& u, double h) { u = step(BeamState{u, m, 0.0}, spec, h, opt.scheme).u; },
      [&](const SeqState& u) { return beam_energy(u, spec, freq); });
}

EscapeResult stability_time(const SeqState& u0, const PolySystem& sys, double delta,
                            const Weight& w, double horizon, double dt, int sample_every) {
  return run_escape(
      u0, delta, w, horizon, dt, sample_every, [&](SeqState& u, double h) { sys.step(u, h); },
      [&](const SeqState& u) { return sys.energy(u); });
}

SeqState apply_generator_flow(const SeqState& u, const PolyHamiltonian& S, int direction,
                              const FlowOptions& opt) {
  if (direction != 1 && direction != -1) throw ParameterError("direction must be +1 or -1");
  if (S.cutoff() != u.cutoff()) throw DimensionError("generator and state cutoffs differ");
  for (const auto& c : u.data())
    if (!(std::abs(c) < opt.max_abs)) throw FlowDomainError("initial point outside the flow domain");
  if (S.is_zero()) return u;
  namespace ode = boost::numeric::odeint;
  using State = std::vector<cplx>;
  PolyEvaluator ev(S);
  const double sgn = direction;
  auto rhs = [&](const State& x, State& dx, double) {
    for (const auto& c : x)
      if (!(std::abs(c) < opt.max_abs)) throw FlowDomainError("flow left its domain");
    ev.field(x, dx);
    if (sgn < 0)
      for (auto& c : dx) c = -c;
  };
  State x = u.data();
  try {
    auto stepper = ode::make_controlled(opt.atol, opt.rtol, ode::runge_kutta_dopri5<State>());
    ode::integrate_adaptive(stepper, rhs, x, 0.0, 1.0, 1e-2);
  } catch (const ode::step_adjustment_error& e) {
    throw FlowDomainError(std::string("step size underflow: ") + e.what());
  } catch (const ode::no_progress_error& e) {
    throw FlowDomainError(std::string("no progress: ") + e.what());
  }
  return SeqState(u.cutoff(), std::move(x));
}

BeamState apply_generator_flow(const BeamState& u, const PolyHamiltonian& S, int direction,
                               const FlowOptions& opt) {
  return BeamState{apply_generator_flow(u.u, S, direction, opt), u.m, u.t};
}

SeqState random_state(int M, double norm, const Weight& w, std::uint64_t seed, int active) {
  if (active < 0 || active > M) active = M;
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  SeqState u(M);
  for (int j = -active; j <= active; ++j) u[j] = cplx(nd(gen), nd(gen));
  double n = seq_norm(u, w);
  for (auto& c : u.data()) c *= norm / n;
  return u;
}

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectorySample>& tr) {
  os << "t,norm_w,energy,momentum\n";
  char buf[160];
  for (const auto& s : tr) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", s.t, s.norm_w, s.energy, s.momentum);
    os << buf;
  }
}

void write_checkpoint(std::ostream& os, const BeamState& s) {
  os.write(kMagic, 8);
  write_le(os, static_cast<std::uint64_t>(static_cast<std::int64_t>(s.u.cutoff())));
  write_le(os, std::bit_cast<std::uint64_t>(s.m));
  write_le(os, std::bit_cast<std::uint64_t>(s.t));
  for (const auto& c : s.u.data()) {
    write_le(os, std::bit_cast<std::uint64_t>(c.real()));
    write_le(os, std::bit_cast<std::uint64_t>(c.imag()));
  }
}

BeamState read_checkpoint(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw DomainError("not a checkpoint");
  auto M = static_cast<std::int64_t>(read_le(is));
  if (M < 0 || M > kMaxModeCutoff) throw DomainError("bad checkpoint cutoff");
  BeamState s{SeqState(static_cast<int>(M)), 0.0, 0.0};
  s.m = std::bit_cast<double>(read_le(is));
  s.t = std::bit_cast<double>(read_le(is));
  for (auto& c : s.u.data()) {
    double re = std::bit_cast<double>(read_le(is));
    double im = std::bit_cast<double>(read_le(is));
    c = cplx(re, im);
  }
  return s;
}

}  // namespace beamnf

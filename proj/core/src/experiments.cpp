#include "beamnf/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <unistd.h>

#include "beamnf/errors.hpp"

namespace beamnf {

namespace pt = boost::property_tree;
using nlohmann::json;

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string digest_hex(const EVP_MD* md, const std::string& data) {
  unsigned char out[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out, &len, md, nullptr) != 1)
    throw Error("digest computation failed");
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < len; ++i) {
    s.push_back(hex[out[i] >> 4]);
    s.push_back(hex[out[i] & 15]);
  }
  return s;
}

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ParameterError("bad number in list: " + item);
    }
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
  return s;
}

const char* weight_name(Weight::Kind k) { return k == Weight::Kind::SubExp ? "subexp" : "sobolev"; }
const char* scheme_name(Scheme s) { return s == Scheme::StrangSplit ? "strang" : "rk4"; }

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(n);
  std::size_t nt = std::min<std::size_t>(threads, n);
  for (std::size_t t = 0; t < nt; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += nt) {
        try {
          fn(i);
        } catch (...) {
          errs[i] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

// Output files are collected first and written at the end of run().
struct Outputs {
  std::vector<std::pair<std::string, std::string>> files;
  void add(std::string name, std::string data) { files.emplace_back(std::move(name), std::move(data)); }
};

void run_divisor_audit(const ExperimentConfig& cfg, json& out, Outputs& files) {
  auto rep = check_diophantine(cfg.m, cfg.gamma, cfg.max_l1, cfg.M, true);
  std::ostringstream csv;
  csv << "l,d,tau,min_abs,log10_bound,log10_ratio,shortcut,pass\n";
  for (const auto& r : rep.rows)
    csv << '"' << r.l.encode() << "\"," << r.d << ',' << r.tau << ',' << num(r.min_abs) << ','
        << num(r.log10_bound) << ',' << num(r.log10_ratio) << ',' << (r.shortcut ? 1 : 0) << ','
        << (r.log10_ratio >= 0.0 ? 1 : 0) << '\n';
  files.add("divisor_audit.csv", csv.str());
  out["passed"] = rep.passed;
  out["checked"] = rep.checked;
  out["shortcuts"] = rep.shortcuts;
  out["worst"] = rep.worst.encode();
  out["worst_log10_ratio"] = rep.worst_log10_ratio;
}

void run_mass_scan(const ExperimentConfig& cfg, json& out, Outputs& files) {
  const int n = cfg.m_points;
  std::vector<double> ms(n);
  for (int i = 0; i < n; ++i)
    ms[i] = n == 1 ? cfg.m_min : cfg.m_min + (cfg.m_max - cfg.m_min) * i / (n - 1);
  std::vector<DiophantineReport> reps(n);
  parallel_for(n, cfg.threads, [&](std::size_t i) { reps[i] = check_diophantine(ms[i], cfg.gamma, cfg.max_l1, cfg.M); });
  std::ostringstream csv;
  csv << "m,passed,worst,worst_log10_ratio\n";
  int good = 0;
  for (int i = 0; i < n; ++i) {
    good += reps[i].passed;
    csv << num(ms[i]) << ',' << (reps[i].passed ? 1 : 0) << ",\"" << reps[i].worst.encode() << "\","
        << num(reps[i].worst_log10_ratio) << '\n';
  }
  files.add("mass_scan.csv", csv.str());
  out["grid_points"] = n;
  out["grid_pass_fraction"] = static_cast<double>(good) / n;
  auto family = enumerate_nonresonant(cfg.max_l1, cfg.M);
  auto est = bad_set_measure(family, cfg.gamma, cfg.samples, cfg.seed);
  out["family_size"] = family.size();
  out["bad_fraction"] = est.fraction;
  out["bad_std_error"] = est.std_error;
  out["samples"] = est.samples;
}

void run_bnf(const ExperimentConfig& cfg, json& out, Outputs& files, RunRecord& rec) {
  auto spec = cfg.nonlinearity_spec();
  auto sched = cfg.schedule();
  sched.validate();
  PolyHamiltonian H0 = build_R0(spec, cfg.m, cfg.M, sched.K + 2 + cfg.buffer);
  FrequencyVector freq(cfg.m, cfg.M);
  StepOptions opt;
  opt.override_gates = cfg.override_gates;
  auto res = bnf_iterate(H0, freq, sched, opt, cfg.buffer);
  out["report"] = json::parse(report_to_json(res.report, -1));
  out["generators"] = res.generators.size();
  std::ostringstream csv;
  csv << "N,r,delta,eps_sum,J_empirical,log_J_theory,gate_empirical,gate_theory,overridden,"
         "generator_norm,residual,monomials\n";
  for (const auto& s : res.report.steps)
    csv << s.N << ',' << num(s.r) << ',' << num(s.delta) << ',' << num(s.eps_sum) << ','
        << num(s.J_empirical) << ',' << num(s.log_J_theory) << ',' << s.gate_empirical << ','
        << s.gate_theory << ',' << s.overridden << ',' << num(s.generator_norm) << ','
        << num(s.residual) << ',' << s.monomials << '\n';
  files.add("bnf_steps.csv", csv.str());
  files.add("bnf_report.json", report_to_json(res.report, 2) + "\n");
  files.add("bnf_hamiltonian.txt", to_text(res.state.nonlinear()));
  if (!res.report.completed) {
    rec.error_class = ErrorClass::Other;
    rec.error = res.report.error;
  }
}

void run_lifespan(const ExperimentConfig& cfg, json& out, Outputs& files) {
  auto spec = cfg.nonlinearity_spec();
  Weight w = cfg.weight_at(cfg.M);
  const std::size_t n = cfg.deltas.size();
  std::vector<EscapeResult> res(n);
  EscapeOptions opt;
  opt.sample_every = cfg.sample_every;
  opt.scheme = cfg.scheme;
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    BeamState s{random_state(cfg.M, cfg.deltas[i], w, cfg.seed + i, cfg.active), cfg.m, 0.0};
    res[i] = stability_time(s, spec, cfg.deltas[i], w, cfg.horizon, cfg.dt, opt);
  });
  std::ostringstream csv;
  csv << "delta,T_escape,censored\n";
  json pts = json::array();
  std::vector<SeriesPoint> series;
  for (std::size_t i = 0; i < n; ++i) {
    csv << num(cfg.deltas[i]) << ',' << num(res[i].T_escape) << ',' << (res[i].censored ? 1 : 0) << '\n';
    pts.push_back({{"delta", cfg.deltas[i]}, {"T_escape", res[i].T_escape}, {"censored", res[i].censored}});
    series.push_back({cfg.deltas[i], res[i].T_escape, res[i].censored});
    std::ostringstream tr;
    write_trajectory_csv(tr, res[i].trajectory);
    files.add("trajectory_" + std::to_string(i) + ".csv", tr.str());
  }
  files.add("lifespan.csv", csv.str());
  out["points"] = pts;
  try {
    auto fit = fit_exponent(series);
    out["fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}, {"used", fit.used}};
  } catch (const InsufficientData&) {
    out["fit"] = nullptr;
  }
}

void run_fit(const ExperimentConfig& cfg, json& out, Outputs& files) {
  if (cfg.series.empty()) throw ParameterError("fit needs a series file");
  auto series = read_series_csv(cfg.series);
  auto fit = fit_exponent(series);
  out["slope"] = fit.slope;
  out["intercept"] = fit.intercept;
  out["r2"] = fit.r2;
  out["used"] = fit.used;
  out["excluded"] = fit.excluded.size();
  std::ostringstream csv;
  csv << "slope,intercept,r2,used,excluded\n"
      << num(fit.slope) << ',' << num(fit.intercept) << ',' << num(fit.r2) << ',' << fit.used << ','
      << fit.excluded.size() << '\n';
  files.add("fit.csv", csv.str());
}

void run_predict(const ExperimentConfig& cfg, json& out, Outputs& files) {
  auto spec = cfg.nonlinearity_spec();
  LifespanInputs in;
  in.R = cfg.R;
  in.F_R = spec.norm_R();
  in.gamma = cfg.gamma;
  in.s = cfg.s;
  in.q = cfg.q;
  in.p = cfg.p;
  in.c = cfg.c;
  in.C1 = cfg.C1;
  in.C2 = cfg.C2;
  in.C3 = cfg.C3;
  std::ostringstream csv;
  csv << "delta,log_T_subexp,log_T_sobolev,log_T_optp,p_of_delta\n";
  auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
  auto optj = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json pts = json::array();
  PredictedTimes last;
  for (double d : cfg.deltas) {
    last = predicted_times(d, in);
    csv << num(d) << ',' << opt(last.log_T_subexp) << ',' << opt(last.log_T_sobolev) << ','
        << opt(last.log_T_optp) << ',' << opt(last.p_of_delta) << '\n';
    pts.push_back({{"delta", d},
                   {"log_T_subexp", optj(last.log_T_subexp)},
                   {"log_T_sobolev", optj(last.log_T_sobolev)},
                   {"log_T_optp", optj(last.log_T_optp)},
                   {"p_of_delta", optj(last.p_of_delta)}});
  }
  files.add("predict_times.csv", csv.str());
  out["points"] = pts;
  out["delta_S"] = last.delta_S;
  out["log_delta_subexp"] = last.log_delta_subexp;
  out["log_delta_sobolev"] = last.log_delta_sobolev;
  out["log_delta_optp"] = last.log_delta_optp;
}

}  // namespace

std::string kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::DivisorAudit: return "divisor-audit";
    case ExperimentKind::MassScan: return "mass-scan";
    case ExperimentKind::Bnf: return "bnf";
    case ExperimentKind::Lifespan: return "lifespan";
    case ExperimentKind::Fit: return "fit";
    case ExperimentKind::PredictTimes: return "predict-times";
  }
  return "?";
}

ExperimentKind parse_kind(const std::string& s) {
  for (auto k : {ExperimentKind::DivisorAudit, ExperimentKind::MassScan, ExperimentKind::Bnf,
                 ExperimentKind::Lifespan, ExperimentKind::Fit, ExperimentKind::PredictTimes})
    if (kind_name(k) == s) return k;
  throw ParameterError("unknown experiment kind: " + s);
}

NonlinearitySpec ExperimentConfig::nonlinearity_spec() const {
  NonlinearitySpec spec;
  spec.R = R;
  std::stringstream ss(nonlinearity);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    auto colon = item.find(':');
    if (colon == std::string::npos) throw ParameterError("nonlinearity entries are d:F_d");
    try {
      spec.coeffs[std::stoi(item.substr(0, colon))] = std::stod(item.substr(colon + 1));
    } catch (const std::logic_error&) {
      throw ParameterError("bad nonlinearity entry: " + item);
    }
  }
  spec.validate();
  return spec;
}

ParamSchedule ExperimentConfig::schedule() const {
  ParamSchedule s;
  s.kind = weight;
  s.r0 = r0;
  s.rbar = rbar;
  s.s0 = this->s;
  s.p = p;
  s.q = q;
  s.gamma = gamma;
  s.K = K;
  s.M = M;
  s.C = C;
  return s;
}

Weight ExperimentConfig::weight_at(int modes) const {
  return weight == Weight::Kind::SubExp ? Weight::subexp(s, p, q, modes) : Weight::sobolev(p, modes);
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  const std::map<std::string, std::vector<std::string>> known{
      {"experiment", {"kind", "seed", "out", "threads"}},
      {"model", {"M", "m", "gamma", "nonlinearity", "R"}},
      {"weight", {"kind", "s", "p", "q"}},
      {"divisors", {"max_l1", "m_min", "m_max", "m_points", "samples"}},
      {"bnf", {"K", "r0", "rbar", "C", "buffer", "override_gates"}},
      {"lifespan", {"deltas", "dt", "horizon", "sample_every", "active", "scheme"}},
      {"fit", {"series"}},
      {"bounds", {"c", "C1", "C2", "C3"}}};
  for (const auto& [sec, body] : tree) {
    auto it = known.find(sec);
    if (it == known.end()) throw ParameterError("unknown config section [" + sec + "]");
    if (body.empty() && !body.data().empty()) throw ParameterError("key outside a section: " + sec);
    for (const auto& kv : body)
      if (std::find(it->second.begin(), it->second.end(), kv.first) == it->second.end())
        throw ParameterError("unknown key " + sec + "." + kv.first);
  }
  auto get = [&](const std::string& path, auto& field) {
    using T = std::decay_t<decltype(field)>;
    auto v = tree.get_optional<std::string>(path);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, std::string>) {
        field = *v;
      } else if constexpr (std::is_same_v<T, bool>) {
        field = tree.get<bool>(path);
      } else {
        field = tree.get<T>(path);
      }
    } catch (const pt::ptree_error&) {
      throw ParameterError("bad value for " + path + ": " + *v);
    }
  };
  if (auto v = tree.get_optional<std::string>("experiment.kind")) c.kind = parse_kind(*v);
  get("experiment.seed", c.seed);
  get("experiment.out", c.out);
  get("experiment.threads", c.threads);
  get("model.M", c.M);
  get("model.m", c.m);
  get("model.gamma", c.gamma);
  get("model.nonlinearity", c.nonlinearity);
  get("model.R", c.R);
  if (auto v = tree.get_optional<std::string>("weight.kind")) {
    if (*v == "subexp")
      c.weight = Weight::Kind::SubExp;
    else if (*v == "sobolev")
      c.weight = Weight::Kind::Sobolev;
    else
      throw ParameterError("weight.kind must be subexp or sobolev");
  }
  get("weight.s", c.s);
  get("weight.p", c.p);
  get("weight.q", c.q);
  get("divisors.max_l1", c.max_l1);
  get("divisors.m_min", c.m_min);
  get("divisors.m_max", c.m_max);
  get("divisors.m_points", c.m_points);
  get("divisors.samples", c.samples);
  get("bnf.K", c.K);
  get("bnf.r0", c.r0);
  get("bnf.rbar", c.rbar);
  get("bnf.C", c.C);
  get("bnf.buffer", c.buffer);
  get("bnf.override_gates", c.override_gates);
  if (auto v = tree.get_optional<std::string>("lifespan.deltas")) c.deltas = parse_list(*v);
  get("lifespan.dt", c.dt);
  get("lifespan.horizon", c.horizon);
  get("lifespan.sample_every", c.sample_every);
  get("lifespan.active", c.active);
  if (auto v = tree.get_optional<std::string>("lifespan.scheme")) {
    if (*v == "strang")
      c.scheme = Scheme::StrangSplit;
    else if (*v == "rk4")
      c.scheme = Scheme::RK4Interaction;
    else
      throw ParameterError("lifespan.scheme must be strang or rk4");
  }
  get("fit.series", c.series);
  get("bounds.c", c.c);
  get("bounds.C1", c.C1);
  get("bounds.C2", c.C2);
  get("bounds.C3", c.C3);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "[experiment]\nkind = " << kind_name(c.kind) << "\nseed = " << c.seed << "\nout = " << c.out
     << "\nthreads = " << c.threads << "\n\n";
  os << "[model]\nM = " << c.M << "\nm = " << num(c.m) << "\ngamma = " << num(c.gamma)
     << "\nnonlinearity = " << c.nonlinearity << "\nR = " << num(c.R) << "\n\n";
  os << "[weight]\nkind = " << weight_name(c.weight) << "\ns = " << num(c.s) << "\np = " << num(c.p)
     << "\nq = " << num(c.q) << "\n\n";
  os << "[divisors]\nmax_l1 = " << c.max_l1 << "\nm_min = " << num(c.m_min) << "\nm_max = "
     << num(c.m_max) << "\nm_points = " << c.m_points << "\nsamples = " << c.samples << "\n\n";
  os << "[bnf]\nK = " << c.K << "\nr0 = " << num(c.r0) << "\nrbar = " << num(c.rbar)
     << "\nC = " << num(c.C) << "\nbuffer = " << c.buffer
     << "\noverride_gates = " << (c.override_gates ? "true" : "false") << "\n\n";
  os << "[lifespan]\ndeltas = " << join(c.deltas) << "\ndt = " << num(c.dt) << "\nhorizon = "
     << num(c.horizon) << "\nsample_every = " << c.sample_every << "\nactive = " << c.active
     << "\nscheme = " << scheme_name(c.scheme) << "\n\n";
  os << "[fit]\nseries = " << c.series << "\n\n";
  os << "[bounds]\nc = " << num(c.c) << "\nC1 = " << num(c.C1) << "\nC2 = " << num(c.C2)
     << "\nC3 = " << num(c.C3) << "\n";
  return os.str();
}

void validate(const ExperimentConfig& c) {
  auto need = [](bool ok, const char* msg) {
    if (!ok) throw ParameterError(msg);
  };
  need(c.M >= 1 && c.M <= kMaxModeCutoff, "M must lie in [1, 15]");
  need(c.m >= 1.0 && c.m <= 2.0, "m must lie in [1,2]");
  need(c.gamma > 0.0 && c.gamma < 1.0, "gamma must lie in (0,1)");
  need(c.q > 1.0 && c.q <= 2.0, "q must lie in (1,2]");
  need(c.p > 0.5, "p must exceed 1/2");
  need(c.s > 0.0, "s must be positive");
  need(c.threads >= 1, "threads must be at least 1");
  need(c.max_l1 >= 1, "max_l1 must be at least 1");
  need(c.m_min >= 1.0 && c.m_max <= 2.0 && c.m_min <= c.m_max, "mass grid must lie in [1,2]");
  need(c.m_points >= 1, "m_points must be at least 1");
  need(c.K >= 1, "K must be at least 1");
  need(c.r0 > 0.0 && c.rbar >= c.r0, "need 0 < r0 <= rbar");
  need(c.buffer >= 0, "buffer must be nonnegative");
  need(c.dt > 0.0 && c.horizon > 0.0, "dt and horizon must be positive");
  need(c.sample_every >= 1, "sample_every must be at least 1");
  need(c.active >= 0 && c.active <= c.M, "active must lie in [0, M]");
  for (double d : c.deltas) need(d > 0.0, "deltas must be positive");
  need(c.c > 0.0 && c.C1 > 0.0 && c.C2 > 0.0 && c.C3 > 0.0, "bound constants must be positive");
  need(c.R > 0.0, "R must be positive");
  c.nonlinearity_spec();
}

std::string RunRecord::to_json(int indent) const {
  json j;
  j["schema"] = schema;
  j["kind"] = kind;
  j["config_hash"] = config_hash;
  j["input_digest"] = input_digest;
  j["started"] = started;
  j["finished"] = finished;
  j["tool_version"] = tool_version;
  j["config"] = config_text;
  j["payload"] = payload.empty() ? json(nullptr) : json::parse(payload);
  j["payload_digest"] = payload_digest;
  j["files"] = files;
  static const char* names[] = {"none", "validation", "budget", "blow-up", "other"};
  j["error_class"] = names[static_cast<int>(error_class)];
  if (!error.empty()) j["error"] = error;
  return j.dump(indent);
}

RunRecord run(const ExperimentConfig& cfg) {
  RunRecord rec;
  rec.kind = kind_name(cfg.kind);
  rec.config_text = config_to_text(cfg);
  rec.config_hash = sha256_hex(rec.config_text);
  rec.input_digest = git_blob_sha1(rec.config_text);
  rec.started = utc_now();
  json payload = json::object();
  Outputs files;
  try {
    validate(cfg);
    switch (cfg.kind) {
      case ExperimentKind::DivisorAudit: run_divisor_audit(cfg, payload, files); break;
      case ExperimentKind::MassScan: run_mass_scan(cfg, payload, files); break;
      case ExperimentKind::Bnf: run_bnf(cfg, payload, files, rec); break;
      case ExperimentKind::Lifespan: run_lifespan(cfg, payload, files); break;
      case ExperimentKind::Fit: run_fit(cfg, payload, files); break;
      case ExperimentKind::PredictTimes: run_predict(cfg, payload, files); break;
    }
  } catch (const BudgetError& e) {
    rec.error_class = ErrorClass::Budget;
    rec.error = e.what();
  } catch (const BlowUpError& e) {
    rec.error_class = ErrorClass::BlowUp;
    rec.error = e.what();
    payload["blow_up_time"] = e.last_time();
  } catch (const FlowDomainError& e) {
    rec.error_class = ErrorClass::BlowUp;
    rec.error = e.what();
  } catch (const ParameterError& e) {
    rec.error_class = ErrorClass::Validation;
    rec.error = e.what();
  } catch (const DimensionError& e) {
    rec.error_class = ErrorClass::Validation;
    rec.error = e.what();
  } catch (const DomainError& e) {
    rec.error_class = ErrorClass::Validation;
    rec.error = e.what();
  } catch (const InsufficientData& e) {
    rec.error_class = ErrorClass::Validation;
    rec.error = e.what();
  } catch (const Error& e) {
    rec.error_class = ErrorClass::Other;
    rec.error = e.what();
  }
  rec.payload = payload.dump(2);
  rec.payload_digest = sha256_hex(rec.payload);
  std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);
  for (const auto& [name, data] : files.files) {
    write_atomic(dir / name, data);
    rec.files.push_back(name);
  }
  rec.finished = utc_now();
  write_atomic(dir / "record.json", rec.to_json() + "\n");
  return rec;
}

FitResult fit_exponent(const std::vector<SeriesPoint>& series) {
  FitResult fr;
  std::vector<double> x, y;
  for (const auto& p : series) {
    if (p.censored || !(p.delta > 0.0) || !(p.T > 0.0)) {
      fr.excluded.push_back(p);
      continue;
    }
    x.push_back(std::log(p.delta));
    y.push_back(std::log(p.T));
  }
  const std::size_t n = x.size();
  if (n < 3) throw InsufficientData("need at least 3 uncensored points, have " + std::to_string(n));
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InsufficientData("all deltas coincide");
  double b = sxy / sxx;
  fr.slope = -b;
  fr.intercept = my - b * mx;
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - (fr.intercept + b * x[i]);
    sse += r * r;
  }
  fr.r2 = syy == 0.0 ? 1.0 : 1.0 - sse / syy;
  fr.used = n;
  return fr;
}

std::vector<SeriesPoint> read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read series " + path.string());
  std::vector<SeriesPoint> out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      if (line.find("delta") != std::string::npos) continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (cells.size() < 2) throw ParameterError("series rows need delta,T");
    auto v = parse_list(cells[0] + "," + cells[1]);
    bool censored = false;
    if (cells.size() > 2) {
      std::string c = cells[2];
      std::erase_if(c, [](char ch) { return std::isspace(static_cast<unsigned char>(ch)); });
      if (c == "true")
        censored = true;
      else if (c != "false" && !c.empty())
        censored = parse_list(c).at(0) != 0.0;
    }
    out.push_back({v[0], v[1], censored});
  }
  return out;
}

std::string sha256_hex(const std::string& data) { return digest_hex(EVP_sha256(), data); }

std::string git_blob_sha1(const std::string& data) {
  std::string blob = "blob " + std::to_string(data.size());
  blob.push_back('\0');
  return digest_hex(EVP_sha1(), blob + data);
}

void write_atomic(const std::filesystem::path& path, const std::string& data) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp.string());
    os.write(data.data(), static_cast<std::streamsize>(data.size()));
    os.flush();
    if (!os) {
      std::filesystem::remove(tmp);
      throw Error("write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace beamnf

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "beamnf/beam_dynamics.hpp"
#include "beamnf/bnf_engine.hpp"

namespace beamnf {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kRecordSchema = 1;

enum class ExperimentKind { DivisorAudit, MassScan, Bnf, Lifespan, Fit, PredictTimes };

std::string kind_name(ExperimentKind k);       // "divisor-audit", ...
ExperimentKind parse_kind(const std::string& s);

// Every knob of every experiment kind. Ini sections in brackets.
struct ExperimentConfig {
  // [experiment]
  ExperimentKind kind = ExperimentKind::DivisorAudit;
  std::uint64_t seed = 1;
  std::string out = "out";
  int threads = 1;
  // [model]
  int M = 4;
  double m = 1.37;
  double gamma = 1e-2;
  std::string nonlinearity = "3:1";  // "d:F_d,d:F_d"
  double R = 1.0;
  // [weight]
  Weight::Kind weight = Weight::Kind::SubExp;
  double s = 0.5;
  double p = 1.0;
  double q = 1.5;
  // [divisors]
  int max_l1 = 4;
  double m_min = 1.0;
  double m_max = 2.0;
  int m_points = 101;
  std::size_t samples = 10000;
  // [bnf]
  int K = 2;
  double r0 = 1e-3;
  double rbar = 2e-3;
  double C = 1.0;
  int buffer = 2;
  bool override_gates = false;
  // [lifespan]
  std::vector<double> deltas{0.05, 0.02, 0.01};
  double dt = 1e-2;
  double horizon = 1e3;
  int sample_every = 10;
  int active = 2;  // populated modes |j| <= active
  Scheme scheme = Scheme::StrangSplit;
  // [fit]
  std::string series;  // csv with delta,T[,censored]
  // [bounds]
  double c = 1.0;
  double C1 = 1.0;
  double C2 = 1.0;
  double C3 = 1.0;

  NonlinearitySpec nonlinearity_spec() const;
  ParamSchedule schedule() const;
  Weight weight_at(int M) const;
};

// Ini text. Unknown sections or keys are rejected.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
// Canonical ini text with every default written out.
std::string config_to_text(const ExperimentConfig& cfg);
// Throws ParameterError for out of range values.
void validate(const ExperimentConfig& cfg);

enum class ErrorClass { None, Validation, Budget, BlowUp, Other };

struct RunRecord {
  int schema = kRecordSchema;
  std::string kind;
  std::string config_hash;   // sha256 of the canonical config text
  std::string input_digest;  // git blob sha1 of the canonical config text
  std::string started;
  std::string finished;
  std::string tool_version = kToolVersion;
  std::string config_text;
  std::string payload;  // json
  std::string payload_digest;
  std::vector<std::string> files;
  ErrorClass error_class = ErrorClass::None;
  std::string error;

  bool ok() const { return error_class == ErrorClass::None; }
  std::string to_json(int indent = 2) const;
};

// Executes the experiment and writes record.json plus csv series under cfg.out.
RunRecord run(const ExperimentConfig& cfg);

struct SeriesPoint {
  double delta = 0.0;
  double T = 0.0;
  bool censored = false;
};

struct FitResult {
  double slope = 0.0;      // a in T = C delta^{-a}
  double intercept = 0.0;  // ln C
  double r2 = 0.0;
  std::size_t used = 0;
  std::vector<SeriesPoint> excluded;
};

FitResult fit_exponent(const std::vector<SeriesPoint>& series);
std::vector<SeriesPoint> read_series_csv(const std::filesystem::path& path);

std::string sha256_hex(const std::string& data);
std::string git_blob_sha1(const std::string& data);
// Write to a sibling temp file, then rename over the target.
void write_atomic(const std::filesystem::path& path, const std::string& data);

}  // namespace beamnf

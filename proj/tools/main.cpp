#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "beamnf/errors.hpp"
#include "beamnf/experiments.hpp"

using namespace beamnf;

namespace {

int exit_code(ErrorClass c) {
  switch (c) {
    case ErrorClass::None: return 0;
    case ErrorClass::Validation: return 2;
    case ErrorClass::Budget: return 3;
    case ErrorClass::BlowUp: return 4;
    case ErrorClass::Other: return 1;
  }
  return 1;
}

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  bool override_gates = false;
};

ExperimentConfig make_config(const Common& o, CLI::App* sub, ExperimentKind kind) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  cfg.kind = kind;
  if (sub->count("--seed")) cfg.seed = o.seed;
  if (!o.out.empty()) cfg.out = o.out;
  if (o.override_gates) cfg.override_gates = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Birkhoff normal form engine and beam equation simulator"};
  app.require_subcommand(1);
  Common opt;
  const std::pair<const char*, ExperimentKind> verbs[] = {
      {"audit-divisors", ExperimentKind::DivisorAudit}, {"scan-mass", ExperimentKind::MassScan},
      {"bnf", ExperimentKind::Bnf},                     {"lifespan", ExperimentKind::Lifespan},
      {"fit", ExperimentKind::Fit},                     {"predict-times", ExperimentKind::PredictTimes}};
  std::vector<std::pair<CLI::App*, ExperimentKind>> subs;
  auto add_common = [&opt](CLI::App* s) {
    s->add_option("--config", opt.config, "ini config file")->check(CLI::ExistingFile);
    s->add_option("--seed", opt.seed, "random seed override");
    s->add_option("--out", opt.out, "output directory");
    s->add_flag("--override-gates", opt.override_gates, "accept normal form steps whose gate fails");
  };
  for (const auto& [name, kind] : verbs) {
    auto* s = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    add_common(s);
    subs.emplace_back(s, kind);
  }
  auto* dump = app.add_subcommand("dump-hamiltonian", "print the expanded beam nonlinearity");
  add_common(dump);
  int degree = 3;
  dump->add_option("--degree", degree, "maximal total degree")->check(CLI::Range(3, 15));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (dump->parsed()) {
      auto cfg = make_config(opt, dump, ExperimentKind::Bnf);
      validate(cfg);
      std::cout << to_text(build_R0(cfg.nonlinearity_spec(), cfg.m, cfg.M, degree));
      return 0;
    }
    for (const auto& [s, kind] : subs) {
      if (!s->parsed()) continue;
      auto cfg = make_config(opt, s, kind);
      RunRecord rec = run(cfg);
      std::cout << rec.to_json() << "\n";
      if (!rec.ok()) std::cerr << "error: " << rec.error << "\n";
      return exit_code(rec.error_class);
    }
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

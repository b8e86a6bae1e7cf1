#pragma once

// Versioned JSON experiment configuration. A run is fully determined by the
// config file plus the CLI overrides; there is no hidden state.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lipreg/io.hpp"
#include "lipreg/risklab.hpp"

namespace lipreg {

enum class Command {
  Simulate,
  Estimate,
  RiskSweep,
  CovDiag,
  Packing,
  Minimax,
};

inline std::string command_name(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Estimate: return "estimate";
    case Command::RiskSweep: return "risk-sweep";
    case Command::CovDiag: return "covdiag";
    case Command::Packing: return "packing";
    case Command::Minimax: return "minimax";
  }
  throw ConfigError("unknown command");
}

inline Command command_from_name(const std::string& s) {
  if (s == "simulate") return Command::Simulate;
  if (s == "estimate") return Command::Estimate;
  if (s == "risk-sweep") return Command::RiskSweep;
  if (s == "covdiag") return Command::CovDiag;
  if (s == "packing") return Command::Packing;
  if (s == "minimax") return Command::Minimax;
  throw ConfigError("unknown command: " + s);
}

struct TargetSpec {
  std::string kind = "euclidean-norm-centered";
  bool centered = true;                  // subtract the MC mean
  std::vector<double> point;             // distance-to-point
  std::vector<double> theta;             // linear
  double beta = 2.0;                     // soft-min
  std::vector<int> alpha;                // basis-polynomial (one-hot index)
};

// The paper's universal constants, exposed with documented defaults.
struct Constants {
  double c0 = 1.0;        // Theorem 1.5 regime-1 range constant
  double C0 = 1.0;        // Theorem 1.5 alpha constant
  double eta = 0.25;      // entropy range exponent (product case 1/4)
  double c = 1.0;         // minimax lower-bound constant
  int proj_offset = 4;    // Theorem 1.2 regime-1 offset (4 or 12)
};

struct Caps {
  std::uint64_t max_indices = kDefaultIndexCap;
  std::int64_t max_n_mc = 100'000'000;
  std::int64_t max_rows = 10'000'000;
};

struct ExperimentConfig {
  int schema = 1;
  Command command = Command::RiskSweep;
  MeasureSpec measure = MeasureSpec::gaussian(2);
  TargetSpec target;
  std::vector<std::int64_t> n_grid{1000};
  std::vector<int> m_grid{2};
  std::vector<double> sigma_grid{0.0};
  std::vector<std::string> estimators{"projection"};
  std::string degree_rule;  // "", "projection", or "ls": auto degree selection
  std::int64_t n_eval = 100'000;
  std::int64_t n_mc = 200'000;
  int replications = 20;
  Seed seed = 1;
  int threads = 1;
  bool strict = false;
  bool design_only = false;  // simulate: dump the design CSV without y
  Constants constants;
  Caps caps;
  std::string out_dir = ".";
  std::string prefix = "lipreg";

  // covdiag sub-diagnostics to run.
  std::vector<std::string> diagnostics{"opnorm-curve", "lambda-min"};

  // packing parameters (negative -> defaults).
  int packing_n = -1;
  double packing_lambda = -1.0;
  double packing_t = -1.0;

  // minimax parameters.
  double kappa = 0.0;
};

inline TargetFunction build_target(const TargetSpec& spec, const MeasureSpec& measure) {
  const int d = measure.dimension;
  TargetFunction t;
  if (spec.kind == "euclidean-norm-centered") {
    return target_centered(TargetFunction::euclidean_norm(d), measure);
  } else if (spec.kind == "max-coordinate") {
    t = TargetFunction::max_coordinate(d);
  } else if (spec.kind == "distance-to-point") {
    if (static_cast<int>(spec.point.size()) != d)
      throw ConfigError("target: point must have dimension d");
    t = TargetFunction::distance_to_point(Eigen::Map<const Eigen::VectorXd>(
        spec.point.data(), static_cast<Eigen::Index>(spec.point.size())));
  } else if (spec.kind == "soft-min") {
    if (!(spec.beta > 0.0)) throw ConfigError("target: soft-min beta must be > 0");
    t = TargetFunction::soft_min(d, spec.beta);
  } else if (spec.kind == "linear") {
    if (static_cast<int>(spec.theta.size()) != d)
      throw ConfigError("target: theta must have dimension d");
    t = TargetFunction::linear(Eigen::Map<const Eigen::VectorXd>(
        spec.theta.data(), static_cast<Eigen::Index>(spec.theta.size())));
  } else if (spec.kind == "basis-polynomial") {
    if (static_cast<int>(spec.alpha.size()) != d)
      throw ConfigError("target: alpha must have dimension d");
    int deg = 0;
    for (int a : spec.alpha) {
      if (a < 0) throw ConfigError("target: alpha entries must be >= 0");
      deg += a;
    }
    auto indices = enumerate_indices(d, deg);
    std::vector<std::uint8_t> key(spec.alpha.begin(), spec.alpha.end());
    const std::size_t pos = indices->find(key);
    if (pos == indices->size()) throw ConfigError("target: alpha not found");
    return TargetFunction::basis_polynomial(unit_poly(measure, indices, pos));
  } else {
    throw ConfigError("unsupported target kind: " + spec.kind);
  }
  if (spec.centered && spec.kind != "linear")
    return target_centered(t, measure);
  return t;
}

inline Json target_spec_to_json(const TargetSpec& t) {
  Json j;
  j["kind"] = t.kind;
  j["centered"] = t.centered;
  if (!t.point.empty()) j["point"] = t.point;
  if (!t.theta.empty()) j["theta"] = t.theta;
  if (t.kind == "soft-min") j["beta"] = t.beta;
  if (!t.alpha.empty()) j["alpha"] = t.alpha;
  return j;
}

inline TargetSpec target_spec_from_json(const Json& j) {
  TargetSpec t;
  t.kind = j.at("kind").get<std::string>();
  t.centered = j.value("centered", true);
  if (j.contains("point")) t.point = j.at("point").get<std::vector<double>>();
  if (j.contains("theta")) t.theta = j.at("theta").get<std::vector<double>>();
  t.beta = j.value("beta", 2.0);
  if (j.contains("alpha")) t.alpha = j.at("alpha").get<std::vector<int>>();
  return t;
}

inline Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["schema"] = c.schema;
  j["command"] = command_name(c.command);
  j["measure"] = measure_to_json(c.measure);
  j["target"] = target_spec_to_json(c.target);
  j["grid"] = Json{{"n", c.n_grid}, {"m", c.m_grid}, {"sigma", c.sigma_grid}};
  j["estimators"] = c.estimators;
  if (!c.degree_rule.empty()) j["degree_rule"] = c.degree_rule;
  j["n_eval"] = c.n_eval;
  j["n_mc"] = c.n_mc;
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["strict"] = c.strict;
  j["design_only"] = c.design_only;
  j["constants"] = Json{{"c0", c.constants.c0},
                        {"C0", c.constants.C0},
                        {"eta", c.constants.eta},
                        {"c", c.constants.c},
                        {"proj_offset", c.constants.proj_offset}};
  j["caps"] = Json{{"max_indices", c.caps.max_indices},
                   {"max_n_mc", c.caps.max_n_mc},
                   {"max_rows", c.caps.max_rows}};
  j["output"] = Json{{"dir", c.out_dir}, {"prefix", c.prefix}};
  j["diagnostics"] = c.diagnostics;
  j["packing"] = Json{{"N", c.packing_n},
                      {"lambda", c.packing_lambda},
                      {"t", c.packing_t}};
  j["kappa"] = c.kappa;
  return j;
}

inline void validate_config(const ExperimentConfig& c);

inline ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  if (j.value("schema", 0) != 1) throw ConfigError("config: schema must be 1");
  c.command = command_from_name(j.at("command").get<std::string>());
  if (j.contains("measure")) c.measure = measure_from_json(j.at("measure"));
  if (j.contains("target")) c.target = target_spec_from_json(j.at("target"));
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    if (g.contains("n")) c.n_grid = g.at("n").get<std::vector<std::int64_t>>();
    if (g.contains("m")) c.m_grid = g.at("m").get<std::vector<int>>();
    if (g.contains("sigma")) c.sigma_grid = g.at("sigma").get<std::vector<double>>();
  }
  if (j.contains("estimators"))
    c.estimators = j.at("estimators").get<std::vector<std::string>>();
  c.degree_rule = j.value("degree_rule", std::string{});
  c.n_eval = j.value("n_eval", c.n_eval);
  c.n_mc = j.value("n_mc", c.n_mc);
  c.replications = j.value("replications", c.replications);
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
  c.strict = j.value("strict", c.strict);
  c.design_only = j.value("design_only", false);
  if (j.contains("constants")) {
    const auto& k = j.at("constants");
    c.constants.c0 = k.value("c0", c.constants.c0);
    c.constants.C0 = k.value("C0", c.constants.C0);
    c.constants.eta = k.value("eta", c.constants.eta);
    c.constants.c = k.value("c", c.constants.c);
    c.constants.proj_offset = k.value("proj_offset", c.constants.proj_offset);
  }
  if (j.contains("caps")) {
    const auto& k = j.at("caps");
    c.caps.max_indices = k.value("max_indices", c.caps.max_indices);
    c.caps.max_n_mc = k.value("max_n_mc", c.caps.max_n_mc);
    c.caps.max_rows = k.value("max_rows", c.caps.max_rows);
  }
  if (j.contains("output")) {
    c.out_dir = j.at("output").value("dir", c.out_dir);
    c.prefix = j.at("output").value("prefix", c.prefix);
  }
  if (j.contains("diagnostics"))
    c.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
  if (j.contains("packing")) {
    const auto& p = j.at("packing");
    c.packing_n = p.value("N", c.packing_n);
    c.packing_lambda = p.value("lambda", c.packing_lambda);
    c.packing_t = p.value("t", c.packing_t);
  }
  c.kappa = j.value("kappa", 0.0);
  validate_config(c);
  return c;
}

inline void validate_config(const ExperimentConfig& c) {
  if (c.measure.dimension < 1) throw ConfigError("config: dimension must be >= 1");
  for (double s : c.sigma_grid)
    if (s < 0.0) throw ConfigError("config: sigma must be >= 0");
  for (auto n : c.n_grid)
    if (n < 1) throw ConfigError("config: n must be >= 1");
  for (auto n : c.n_grid)
    if (n > c.caps.max_rows) throw CapacityError("config: n exceeds max_rows cap");
  for (int m : c.m_grid)
    if (m < 0) throw ConfigError("config: m must be >= 0");
  if (c.n_grid.empty() || c.m_grid.empty() || c.sigma_grid.empty())
    throw ConfigError("config: empty grid");
  if (c.replications < 1) throw ConfigError("config: replications must be >= 1");
  if (c.threads < 1) throw ConfigError("config: threads must be >= 1");
  if (c.n_mc > c.caps.max_n_mc || c.n_eval > c.caps.max_n_mc)
    throw CapacityError("config: Monte Carlo budget exceeds cap");
  for (const auto& e : c.estimators)
    if (e != "projection" && e != "least-squares")
      throw ConfigError("config: unknown estimator " + e);
  if (!c.degree_rule.empty() && c.degree_rule != "projection" && c.degree_rule != "ls")
    throw ConfigError("config: degree_rule must be 'projection' or 'ls'");
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace lipreg

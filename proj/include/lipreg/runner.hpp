#pragma once

// Binds the modules into config-driven runs: dataset simulation, estimation,
// sweeps, diagnostics, packing, minimax tables. All outputs are written
// atomically and are byte-identical for a fixed config regardless of the
// thread count.

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "lipreg/config.hpp"
#include "lipreg/covdiag.hpp"
#include "lipreg/entropylab.hpp"
#include "lipreg/estimators.hpp"
#include "lipreg/io.hpp"
#include "lipreg/risklab.hpp"

namespace lipreg {

struct RunOverrides {
  std::optional<Seed> seed;
  std::optional<int> threads;
  std::optional<bool> strict;
  std::optional<std::string> out_dir;
};

inline ExperimentConfig apply_overrides(ExperimentConfig cfg,
                                        const RunOverrides& ov) {
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.threads) cfg.threads = *ov.threads;
  if (ov.strict) cfg.strict = *ov.strict;
  if (ov.out_dir) cfg.out_dir = *ov.out_dir;
  validate_config(cfg);
  return cfg;
}

// Exit codes: 0 success, 2 validation error, 3 capacity error,
// 4 certification failure (packing, --strict).
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitCapacity = 3;
inline constexpr int kExitCertification = 4;

namespace detail {

inline std::filesystem::path out_path(const ExperimentConfig& cfg,
                                      const std::string& suffix) {
  return std::filesystem::path(cfg.out_dir) / (cfg.prefix + "_" + suffix);
}

inline int chosen_degree(const ExperimentConfig& cfg, std::int64_t n) {
  if (cfg.degree_rule == "projection")
    return select_degree_projection(static_cast<std::uint64_t>(n),
                                    cfg.measure.dimension,
                                    cfg.constants.proj_offset)
        .m;
  if (cfg.degree_rule == "ls")
    return select_degree_ls(static_cast<std::uint64_t>(n), cfg.measure.dimension,
                            cfg.constants.c0, cfg.constants.C0)
        .m;
  return cfg.m_grid.front();
}

inline int run_simulate(const ExperimentConfig& cfg, std::ostream& log) {
  const TargetFunction target = build_target(cfg.target, cfg.measure);
  const Dataset data = make_dataset(cfg.measure, target, cfg.n_grid.front(),
                                    cfg.sigma_grid.front(), cfg.seed, cfg.threads);
  const auto csv_path = out_path(cfg, "dataset.csv");
  write_atomic(csv_path, dataset_to_csv(data, cfg.design_only));
  const auto sidecar_path = out_path(cfg, "dataset.json");
  write_atomic(sidecar_path, dataset_sidecar(data).dump(2) + "\n");
  log << "simulate: wrote " << csv_path.string() << " (" << data.n() << " rows)\n";
  return kExitOk;
}

inline int run_estimate(const ExperimentConfig& cfg, std::ostream& log) {
  const TargetFunction target = build_target(cfg.target, cfg.measure);
  const std::int64_t n = cfg.n_grid.front();
  const double sigma = cfg.sigma_grid.front();
  const int m = chosen_degree(cfg, n);
  const Dataset data = make_dataset(cfg.measure, target, n, sigma, cfg.seed,
                                    cfg.threads);
  Json j;
  j["schema"] = 1;
  j["n"] = n;
  j["m"] = m;
  j["sigma"] = sigma;
  for (const auto& name : cfg.estimators) {
    if (name == "projection") {
      ProjectionOptions opt;
      opt.threads = cfg.threads;
      opt.index_cap = cfg.caps.max_indices;
      const EstimatorReport rep = projection_estimate(data, m, opt);
      Json e;
      e["ahat"] = rep.ahat;
      e["estimate"] = poly_to_json(rep.estimate);
      e["elapsed_seconds"] = rep.diagnostics.elapsed_seconds;
      j["projection"] = e;
    } else {
      LsOptions opt;
      opt.threads = cfg.threads;
      opt.index_cap = cfg.caps.max_indices;
      const EstimatorReport rep = ls_estimate(data, m, opt);
      Json e;
      e["ahat"] = rep.ahat;
      e["estimate"] = poly_to_json(rep.estimate);
      e["lambda_min"] = rep.diagnostics.lambda_min;
      e["opnorm_deviation"] = rep.diagnostics.opnorm_deviation;
      e["condition_number"] = rep.diagnostics.condition_number;
      e["rank_deficient"] = rep.diagnostics.rank_deficient;
      e["underdetermined"] = rep.diagnostics.underdetermined;
      e["elapsed_seconds"] = rep.diagnostics.elapsed_seconds;
      j["least-squares"] = e;
    }
  }
  const auto path = out_path(cfg, "estimate.json");
  write_atomic(path, j.dump(2) + "\n");
  log << "estimate: wrote " << path.string() << " (m = " << m << ")\n";
  return kExitOk;
}

inline int run_risk_sweep(const ExperimentConfig& cfg, std::ostream& log) {
  RiskSweepConfig sweep;
  sweep.measure = cfg.measure;
  sweep.target = build_target(cfg.target, cfg.measure);
  sweep.estimators.clear();
  for (const auto& name : cfg.estimators)
    sweep.estimators.push_back(name == "projection" ? EstimatorKind::Projection
                                                    : EstimatorKind::LeastSquares);
  sweep.n_grid = cfg.n_grid;
  sweep.m_grid = cfg.m_grid;
  sweep.sigma_grid = cfg.sigma_grid;
  sweep.n_eval = cfg.n_eval;
  sweep.approx_n_mc = cfg.n_mc;
  sweep.replications = cfg.replications;
  sweep.seed = cfg.seed;
  sweep.threads = cfg.threads;
  sweep.index_cap = cfg.caps.max_indices;
  const auto rows = risk_sweep(sweep);
  CsvBuilder csv({"estimator", "n", "d", "m", "sigma", "risk", "stderr",
                  "approx_err", "reps"});
  for (const auto& r : rows)
    csv.append_row({r.estimator, std::to_string(r.n), std::to_string(r.d),
                    std::to_string(r.m), format_double(r.sigma),
                    format_double(r.risk), format_double(r.stderr),
                    format_double(r.approx_err), std::to_string(r.reps)});
  const auto path = out_path(cfg, "sweep.csv");
  write_atomic(path, csv.str());
  log << "risk-sweep: wrote " << path.string() << " (" << rows.size()
      << " rows)\n";
  return kExitOk;
}

inline int run_covdiag(const ExperimentConfig& cfg, std::ostream& log) {
  const int m = cfg.m_grid.front();
  for (const auto& diag : cfg.diagnostics) {
    if (diag == "opnorm-curve") {
      const OpnormCurve curve = opnorm_deviation_curve(
          cfg.measure, m, cfg.n_grid, cfg.replications, cfg.seed, cfg.threads);
      CsvBuilder csv({"n", "median_opnorm_dev", "q25", "q75", "reps"});
      for (const auto& pt : curve.points)
        csv.append_row({std::to_string(pt.n), format_double(pt.median_dev),
                        format_double(pt.q25), format_double(pt.q75),
                        std::to_string(pt.reps)});
      const auto path = out_path(cfg, "opnorm.csv");
      write_atomic(path, csv.str());
      log << "covdiag/opnorm-curve: wrote " << path.string() << " (slope "
          << format_double(curve.slope) << ")\n";
    } else if (diag == "lambda-min") {
      const LambdaMinTail tail = lambda_min_tail(
          cfg.measure, m, cfg.n_grid.back(), cfg.replications, cfg.seed,
          cfg.threads);
      CsvBuilder csv({"rep", "lambda_min"});
      for (std::size_t i = 0; i < tail.values.size(); ++i)
        csv.append_row({std::to_string(i), format_double(tail.values[i])});
      const auto path = out_path(cfg, "lambda_min.csv");
      write_atomic(path, csv.str());
      log << "covdiag/lambda-min: wrote " << path.string()
          << " (fraction below 1/2: " << format_double(tail.fraction_below_half)
          << ")\n";
    } else if (diag == "small-ball") {
      // Degree-m basis polynomial of the first coordinate, unit norm.
      auto indices = enumerate_indices(cfg.measure.dimension, m);
      std::vector<std::uint8_t> key(static_cast<std::size_t>(cfg.measure.dimension), 0);
      key[0] = static_cast<std::uint8_t>(m);
      const std::size_t pos = indices->find(key);
      const PolyInBasis poly = unit_poly(cfg.measure, indices, pos);
      const auto grid = log_grid(1e-3, 1.0, 13);
      const SmallBallResult res = small_ball_check(poly, cfg.measure, grid,
                                                   cfg.n_mc, cfg.seed, cfg.threads);
      CsvBuilder csv({"t", "prob", "prob_stderr", "bound", "ratio"});
      for (const auto& row : res.rows)
        csv.append_row({format_double(row.t), format_double(row.prob),
                        format_double(row.prob_stderr), format_double(row.bound),
                        format_double(row.ratio)});
      const auto path = out_path(cfg, "small_ball.csv");
      write_atomic(path, csv.str());
      log << "covdiag/small-ball: wrote " << path.string() << " (max ratio "
          << format_double(res.max_ratio) << ")\n";
    } else if (diag == "moment-growth") {
      auto indices = enumerate_indices(cfg.measure.dimension, m);
      std::vector<std::uint8_t> key(static_cast<std::size_t>(cfg.measure.dimension), 0);
      key[0] = static_cast<std::uint8_t>(m);
      const PolyInBasis poly = unit_poly(cfg.measure, indices, indices->find(key));
      const std::vector<double> q_grid{2, 3, 4, 6, 8, 12, 16};
      const MomentGrowthResult res = moment_growth_check(
          poly, cfg.measure, q_grid, cfg.n_mc, cfg.seed, cfg.threads);
      CsvBuilder csv({"q", "ratio"});
      for (const auto& row : res.rows)
        csv.append_row({format_double(row.q), format_double(row.ratio)});
      const auto path = out_path(cfg, "moment_growth.csv");
      write_atomic(path, csv.str());
      log << "covdiag/moment-growth: wrote " << path.string() << " (exponent "
          << format_double(res.growth_exponent) << ")\n";
    } else {
      throw ConfigError("covdiag: unknown diagnostic " + diag);
    }
  }
  return kExitOk;
}

inline int run_packing(const ExperimentConfig& cfg, std::ostream& log) {
  PackingConfig pc;
  pc.d = cfg.measure.dimension;
  pc.m = cfg.m_grid.front();
  pc.n_family = cfg.packing_n;
  pc.lambda = cfg.packing_lambda;
  pc.t = cfg.packing_t;
  pc.seed = cfg.seed;
  pc.threads = cfg.threads;
  const PackingResult result = build_packing(pc);
  const auto json_path = out_path(cfg, "packing.json");
  write_atomic(json_path, packing_to_json(result).dump(2) + "\n");
  const auto csv_path = out_path(cfg, "packing_pairs.csv");
  write_atomic(csv_path, packing_pairs_csv(result));
  log << "packing: wrote " << json_path.string() << " (all_ok "
      << (result.all_ok ? "true" : "false") << ")\n";
  if (cfg.strict && !result.all_ok) return kExitCertification;
  return kExitOk;
}

inline int run_minimax(const ExperimentConfig& cfg, std::ostream& log) {
  CsvBuilder csv({"n", "d", "sigma", "kappa", "eta", "c", "delta2", "applicable",
                  "noise_in_range"});
  for (const auto n : cfg.n_grid)
    for (const double sigma : cfg.sigma_grid) {
      const MinimaxBound b = minimax_lower_bound(
          static_cast<std::uint64_t>(n), cfg.measure.dimension, sigma, cfg.kappa,
          cfg.constants.eta, cfg.constants.c);
      csv.append_row({std::to_string(n), std::to_string(cfg.measure.dimension),
                      format_double(sigma), format_double(cfg.kappa),
                      format_double(cfg.constants.eta), format_double(cfg.constants.c),
                      format_double(b.delta2), b.applicable ? "1" : "0",
                      b.noise_in_range ? "1" : "0"});
    }
  const auto path = out_path(cfg, "minimax.csv");
  write_atomic(path, csv.str());
  log << "minimax: wrote " << path.string() << "\n";
  return kExitOk;
}

}  // namespace detail

// Executes a validated config; returns the process exit code and writes the
// resolved-config manifest next to the outputs.
inline int run_config(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
  std::filesystem::create_directories(cfg.out_dir);
  const auto manifest = detail::out_path(cfg, "manifest.json");
  write_atomic(manifest, config_to_json(cfg).dump(2) + "\n");
  switch (cfg.command) {
    case Command::Simulate: return detail::run_simulate(cfg, log);
    case Command::Estimate: return detail::run_estimate(cfg, log);
    case Command::RiskSweep: return detail::run_risk_sweep(cfg, log);
    case Command::CovDiag: return detail::run_covdiag(cfg, log);
    case Command::Packing: return detail::run_packing(cfg, log);
    case Command::Minimax: return detail::run_minimax(cfg, log);
  }
  throw ConfigError("unknown command");
}

struct ValidationReport {
  std::vector<std::string> lines;
  bool capacity_ok = true;
};

// Regime labels, predicted D, and memory footprint for each grid cell,
// without running anything.
inline ValidationReport validate_report(const ExperimentConfig& cfg) {
  ValidationReport report;
  const int d = cfg.measure.dimension;
  for (const auto n : cfg.n_grid) {
    std::ostringstream line;
    if (n >= 2 && d >= 2) {
      const DegreeSelection proj = select_degree_projection(
          static_cast<std::uint64_t>(n), d, cfg.constants.proj_offset);
      const DegreeSelection ls = select_degree_ls(static_cast<std::uint64_t>(n), d,
                                                  cfg.constants.c0, cfg.constants.C0);
      line << "n=" << n << " d=" << d << ": " << degree_regime_name(proj.regime)
           << " m0=" << proj.m0 << " m=" << proj.m
           << (proj.clamped ? " (clamped)" : "") << "; "
           << degree_regime_name(ls.regime) << " m=" << ls.m
           << (ls.clamped ? " (clamped)" : "");
      const std::uint64_t dsz = total_degree_cardinality(d, proj.m);
      line << "; D=" << dsz;
      const double mem_mb = static_cast<double>(dsz) * static_cast<double>(n) * 8.0 /
                            (1024.0 * 1024.0);
      line << " design-matrix~" << format_double(mem_mb) << "MB";
      if (dsz > cfg.caps.max_indices) {
        line << " [CAPACITY: D exceeds cap " << cfg.caps.max_indices << "]";
        report.capacity_ok = false;
      }
      if (proj.regime == DegreeRegime::OutOfRange)
        line << " [WARNING: outside theorem range]";
    } else {
      line << "n=" << n << " d=" << d << ": degree rules need n, d >= 2";
    }
    report.lines.push_back(line.str());
  }
  for (const int m : cfg.m_grid) {
    const std::uint64_t dsz = total_degree_cardinality(d, m);
    std::ostringstream line;
    line << "m=" << m << ": D=" << dsz;
    if (dsz > cfg.caps.max_indices) {
      line << " [CAPACITY: D exceeds cap " << cfg.caps.max_indices << "]";
      report.capacity_ok = false;
    }
    report.lines.push_back(line.str());
  }
  return report;
}

}  // namespace lipreg

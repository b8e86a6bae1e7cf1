#pragma once

// Monte Carlo L2(mu) risk, the empirical approximation-rate oracle E_m^2, and
// grid sweeps over (n, m, sigma) for both estimators.

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "lipreg/estimators.hpp"

namespace lipreg {

struct RiskEstimate {
  double value = 0.0;
  double stderr = 0.0;
  std::int64_t n_eval = 0;
  int replications = 1;
};

// Fresh-sample Monte Carlo average of (f(x) - fhat(x))^2.
inline RiskEstimate l2_risk(const PolyInBasis& fhat, const TargetFunction& target,
                            const MeasureSpec& measure, std::int64_t n_eval,
                            Seed seed, int threads = 1) {
  require(n_eval >= 1000, "l2_risk: n_eval must be >= 1e3");
  TensorBasis basis(measure, fhat.indices);
  const std::size_t block = 8192;
  const std::size_t n_blocks = (static_cast<std::size_t>(n_eval) + block - 1) / block;
  std::vector<double> sums(n_blocks, 0.0), sqsums(n_blocks, 0.0);
  const double scale = measure.coord_scale(), shift = measure.coord_shift();
  parallel_for(n_blocks, threads, [&](std::size_t bi) {
    double s = 0.0, s2 = 0.0;
    std::vector<double> x(static_cast<std::size_t>(measure.dimension));
    const std::int64_t lo = static_cast<std::int64_t>(bi * block);
    const std::int64_t hi = std::min<std::int64_t>(n_eval, lo + static_cast<std::int64_t>(block));
    for (std::int64_t i = lo; i < hi; ++i) {
      RandomStream rs(derive_seed(seed, StreamPurpose::Eval,
                                  static_cast<std::uint64_t>(i)));
      for (int j = 0; j < measure.dimension; ++j)
        x[static_cast<std::size_t>(j)] =
            scale * detail::draw_raw_coordinate(measure.kind, rs) + shift;
      const double diff = target(x) - fhat.eval(basis, x);
      s += diff * diff;
      s2 += diff * diff * diff * diff;
    }
    sums[bi] = s;
    sqsums[bi] = s2;
  });
  double total = 0.0, total2 = 0.0;
  for (std::size_t bi = 0; bi < n_blocks; ++bi) {
    total += sums[bi];
    total2 += sqsums[bi];
  }
  RiskEstimate est;
  est.n_eval = n_eval;
  const double n = static_cast<double>(n_eval);
  est.value = total / n;
  const double var = std::max(0.0, total2 / n - est.value * est.value);
  est.stderr = std::sqrt(var / n);
  return est;
}

struct ApproxEstimate {
  double e2 = 0.0;       // estimate of E_m^2
  double stderr = 0.0;   // across-replication standard error
  bool clamped = false;  // negative bias-corrected value clamped to 0
  int m = 0;
};

// Empirical E_m^2 = ||f||^2 - sum_{|alpha|<=m} fhat_alpha^2, with the plug-in
// bias removed by subtracting each coefficient's Monte Carlo variance. One
// pass serves every m from 0 to m_max (cumulative degree blocks).
template <class F>
std::vector<ApproxEstimate> approx_oracle_curve(F&& f, const MeasureSpec& measure,
                                                int m_max, std::int64_t n_mc,
                                                Seed seed, int replications = 10,
                                                int threads = 1) {
  require(n_mc >= 1000, "approx_oracle: n_mc must be >= 1e3");
  require(replications >= 2, "approx_oracle: need >= 2 replications");
  TensorBasis basis(measure, m_max);
  const std::size_t dsz = basis.size();
  const std::int64_t per_rep = n_mc / replications;
  require(per_rep >= 100, "approx_oracle: too few samples per replication");

  // Per-replication estimates of E_m^2 for every m.
  std::vector<std::vector<double>> rep_e2(
      static_cast<std::size_t>(replications),
      std::vector<double>(static_cast<std::size_t>(m_max) + 1, 0.0));
  parallel_for(static_cast<std::size_t>(replications), threads, [&](std::size_t rep) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dsz));
    Eigen::VectorXd s2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dsz));
    double f2 = 0.0;
    std::vector<double> x(static_cast<std::size_t>(measure.dimension));
    std::vector<double> row(dsz);
    const double scale = measure.coord_scale(), shift = measure.coord_shift();
    const Seed rep_seed = derive_seed(seed, StreamPurpose::Replication, rep);
    for (std::int64_t i = 0; i < per_rep; ++i) {
      RandomStream rs(derive_seed(rep_seed, StreamPurpose::Projection,
                                  static_cast<std::uint64_t>(i)));
      for (int j = 0; j < measure.dimension; ++j)
        x[static_cast<std::size_t>(j)] =
            scale * detail::draw_raw_coordinate(measure.kind, rs) + shift;
      basis.eval_point(x, row);
      const double fx = f(std::span<const double>(x));
      f2 += fx * fx;
      for (std::size_t k = 0; k < dsz; ++k) {
        const double v = fx * row[k];
        s(static_cast<Eigen::Index>(k)) += v;
        s2(static_cast<Eigen::Index>(k)) += v * v;
      }
    }
    const double n = static_cast<double>(per_rep);
    f2 /= n;
    double captured = 0.0;
    for (int m = 0; m <= m_max; ++m) {
      const std::size_t lo = basis.indices().degree_offset(m);
      const std::size_t hi = basis.indices().degree_offset(m + 1);
      for (std::size_t k = lo; k < hi; ++k) {
        const double mu = s(static_cast<Eigen::Index>(k)) / n;
        const double var =
            std::max(0.0, s2(static_cast<Eigen::Index>(k)) / n - mu * mu) /
            std::max(1.0, n - 1.0);
        captured += mu * mu - var;  // unbiased for f_k^2
      }
      rep_e2[rep][static_cast<std::size_t>(m)] = f2 - captured;
    }
  });

  std::vector<ApproxEstimate> out(static_cast<std::size_t>(m_max) + 1);
  std::vector<double> vals(static_cast<std::size_t>(replications));
  for (int m = 0; m <= m_max; ++m) {
    for (int r = 0; r < replications; ++r)
      vals[static_cast<std::size_t>(r)] = rep_e2[static_cast<std::size_t>(r)]
                                                [static_cast<std::size_t>(m)];
    ApproxEstimate est;
    est.m = m;
    est.e2 = mean(vals);
    est.stderr = stderr_of_mean(vals);
    if (est.e2 < 0.0) {
      est.e2 = 0.0;
      est.clamped = true;
    }
    out[static_cast<std::size_t>(m)] = est;
  }
  return out;
}

template <class F>
ApproxEstimate approx_oracle(F&& f, const MeasureSpec& measure, int m,
                             std::int64_t n_mc, Seed seed, int replications = 10,
                             int threads = 1) {
  return approx_oracle_curve(std::forward<F>(f), measure, m, n_mc, seed,
                             replications, threads)
      .back();
}

enum class EstimatorKind { Projection, LeastSquares };

inline std::string estimator_kind_name(EstimatorKind k) {
  return k == EstimatorKind::Projection ? "projection" : "least-squares";
}

struct RiskSweepConfig {
  MeasureSpec measure;
  TargetFunction target;
  std::vector<EstimatorKind> estimators{EstimatorKind::Projection};
  std::vector<std::int64_t> n_grid;
  std::vector<int> m_grid;
  std::vector<double> sigma_grid;
  std::int64_t n_eval = 100'000;
  std::int64_t approx_n_mc = 200'000;
  int replications = 20;
  Seed seed = 1;
  int threads = 1;
  std::uint64_t index_cap = kDefaultIndexCap;
};

struct RiskSweepRow {
  std::string estimator;
  std::int64_t n = 0;
  int d = 0;
  int m = 0;
  double sigma = 0.0;
  double risk = 0.0;
  double stderr = 0.0;
  double approx_err = 0.0;
  int reps = 0;
};

// One row per (estimator, n, m, sigma) cell. Each replication derives its
// seeds from (master seed, cell coordinates, rep), so cells are independent
// and the table is deterministic for any thread count.
inline std::vector<RiskSweepRow> risk_sweep(const RiskSweepConfig& cfg) {
  require(!cfg.n_grid.empty() && !cfg.m_grid.empty() && !cfg.sigma_grid.empty(),
          "risk_sweep: empty grid");
  require(cfg.replications >= 2, "risk_sweep: need >= 2 replications");

  // E_m^2 per m, shared across cells.
  std::map<int, ApproxEstimate> approx;
  for (int m : cfg.m_grid)
    if (!approx.count(m))
      approx[m] = approx_oracle(cfg.target, cfg.measure, m, cfg.approx_n_mc,
                                derive_seed(cfg.seed, StreamPurpose::Generic,
                                            static_cast<std::uint64_t>(m)),
                                10, cfg.threads);

  struct Cell {
    EstimatorKind est;
    std::int64_t n;
    int m;
    double sigma;
    std::size_t flat;
  };
  std::vector<Cell> cells;
  std::size_t flat = 0;
  for (const auto est : cfg.estimators)
    for (const auto n : cfg.n_grid)
      for (const int m : cfg.m_grid)
        for (const double sigma : cfg.sigma_grid)
          cells.push_back(Cell{est, n, m, sigma, flat++});

  std::vector<RiskSweepRow> rows(cells.size());
  parallel_for(cells.size(), cfg.threads, [&](std::size_t ci) {
    const Cell& cell = cells[ci];
    std::vector<double> risks(static_cast<std::size_t>(cfg.replications));
    for (int rep = 0; rep < cfg.replications; ++rep) {
      const Seed rep_seed =
          derive_seed(cfg.seed, StreamPurpose::Replication, cell.flat,
                      static_cast<std::uint64_t>(rep));
      Dataset data = make_dataset(cfg.measure, cfg.target, cell.n, cell.sigma,
                                  rep_seed);
      EstimatorReport report;
      if (cell.est == EstimatorKind::Projection) {
        ProjectionOptions opt;
        opt.index_cap = cfg.index_cap;
        report = projection_estimate(data, cell.m, opt);
      } else {
        LsOptions opt;
        opt.index_cap = cfg.index_cap;
        opt.compute_diagnostics = false;
        report = ls_estimate(data, cell.m, opt);
      }
      const RiskEstimate risk =
          l2_risk(report.estimate, cfg.target, cfg.measure, cfg.n_eval,
                  derive_seed(rep_seed, StreamPurpose::Eval));
      risks[static_cast<std::size_t>(rep)] = risk.value;
    }
    RiskSweepRow row;
    row.estimator = estimator_kind_name(cell.est);
    row.n = cell.n;
    row.d = cfg.measure.dimension;
    row.m = cell.m;
    row.sigma = cell.sigma;
    row.risk = mean(risks);
    row.stderr = stderr_of_mean(risks);
    row.approx_err = approx.at(cell.m).e2;
    row.reps = cfg.replications;
    rows[ci] = row;
  });
  return rows;
}

}  // namespace lipreg

#pragma once

// Random-design linear algebra diagnostics: concentration of the empirical
// Gram matrix C_n = (1/n) A^T A, smallest-eigenvalue tails, small-ball
// (anti-concentration) behavior, and polynomial moment growth.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "lipreg/basis.hpp"
#include "lipreg/stats.hpp"

namespace lipreg {

struct CovarianceDiagnostics {
  std::int64_t n = 0;
  int d = 0;
  int m = 0;
  std::size_t D = 0;
  double opnorm_deviation = 0.0;
  double lambda_min = 0.0;
  double condition_number = 0.0;
};

struct EmpiricalCovariance {
  Eigen::MatrixXd c_n;
  CovarianceDiagnostics diagnostics;
};

inline EmpiricalCovariance empirical_covariance(const SampleMatrix& x,
                                                const MeasureSpec& measure, int m,
                                                int threads = 1,
                                                std::uint64_t cap = kDefaultIndexCap) {
  TensorBasis basis(measure, m, cap);
  const Eigen::MatrixXd a = basis.eval_matrix(x.x, threads);
  EmpiricalCovariance out;
  out.c_n = a.transpose() * a / static_cast<double>(x.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.c_n);
  const auto& ev = es.eigenvalues();
  double dev = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    dev = std::max(dev, std::abs(ev(i) - 1.0));
  out.diagnostics.n = x.rows();
  out.diagnostics.d = measure.dimension;
  out.diagnostics.m = m;
  out.diagnostics.D = basis.size();
  out.diagnostics.opnorm_deviation = dev;
  out.diagnostics.lambda_min = ev(0);
  out.diagnostics.condition_number =
      ev(0) > 0.0 ? ev(ev.size() - 1) / ev(0)
                  : std::numeric_limits<double>::infinity();
  return out;
}

struct OpnormCurvePoint {
  std::int64_t n = 0;
  double median_dev = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  int reps = 0;
};

struct OpnormCurve {
  std::vector<OpnormCurvePoint> points;
  double slope = 0.0;  // log median deviation vs log n
};

// Median ||C_n - I||_op across replications for each n; medians rather than
// means because rare ill-conditioned draws dominate means at small R.
inline OpnormCurve opnorm_deviation_curve(const MeasureSpec& measure, int m,
                                          std::span<const std::int64_t> n_grid,
                                          int reps, Seed seed, int threads = 1) {
  require(n_grid.size() >= 2, "opnorm_deviation_curve: need >= 2 grid points");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    require(n_grid[i] > n_grid[i - 1], "opnorm_deviation_curve: grid must increase");
  OpnormCurve curve;
  curve.points.resize(n_grid.size());
  struct Unit {
    std::size_t grid_idx;
    int rep;
  };
  std::vector<Unit> units;
  for (std::size_t gi = 0; gi < n_grid.size(); ++gi)
    for (int r = 0; r < reps; ++r) units.push_back(Unit{gi, r});
  std::vector<double> devs(units.size());
  parallel_for(units.size(), threads, [&](std::size_t ui) {
    const Unit& u = units[ui];
    const Seed s = derive_seed(seed, StreamPurpose::Replication, u.grid_idx,
                               static_cast<std::uint64_t>(u.rep));
    const SampleMatrix x = sample(measure, n_grid[u.grid_idx], s);
    devs[ui] = empirical_covariance(x, measure, m).diagnostics.opnorm_deviation;
  });
  std::vector<double> log_n, log_med;
  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    std::vector<double> vals;
    for (std::size_t ui = 0; ui < units.size(); ++ui)
      if (units[ui].grid_idx == gi) vals.push_back(devs[ui]);
    std::sort(vals.begin(), vals.end());
    OpnormCurvePoint pt;
    pt.n = n_grid[gi];
    pt.median_dev = quantile_sorted(vals, 0.5);
    pt.q25 = quantile_sorted(vals, 0.25);
    pt.q75 = quantile_sorted(vals, 0.75);
    pt.reps = reps;
    curve.points[gi] = pt;
    if (pt.median_dev > 0.0) {
      log_n.push_back(std::log(static_cast<double>(pt.n)));
      log_med.push_back(std::log(pt.median_dev));
    }
  }
  curve.slope = log_n.size() >= 2 ? ls_slope(log_n, log_med) : 0.0;
  return curve;
}

struct LambdaMinTail {
  std::vector<double> values;  // sorted ascending
  double q05 = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double fraction_below_half = 0.0;
};

inline LambdaMinTail lambda_min_tail(const MeasureSpec& measure, int m,
                                     std::int64_t n, int reps, Seed seed,
                                     int threads = 1) {
  const std::uint64_t dsz = total_degree_cardinality(measure.dimension, m);
  require(static_cast<std::uint64_t>(n) >= dsz, "lambda_min_tail: need n >= D");
  LambdaMinTail out;
  out.values.resize(static_cast<std::size_t>(reps));
  parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
    const Seed s = derive_seed(seed, StreamPurpose::Replication, r);
    const SampleMatrix x = sample(measure, n, s);
    out.values[r] = empirical_covariance(x, measure, m).diagnostics.lambda_min;
  });
  std::sort(out.values.begin(), out.values.end());
  out.q05 = quantile_sorted(out.values, 0.05);
  out.q25 = quantile_sorted(out.values, 0.25);
  out.median = quantile_sorted(out.values, 0.5);
  std::size_t below = 0;
  for (double v : out.values)
    if (v < 0.5) ++below;
  out.fraction_below_half =
      static_cast<double>(below) / static_cast<double>(out.values.size());
  return out;
}

struct SmallBallRow {
  double t = 0.0;
  double prob = 0.0;       // empirical P(|P(X)| <= t)
  double prob_stderr = 0.0;
  double bound = 0.0;      // m * t^{1/m}
  double ratio = 0.0;      // prob / bound, the empirical constant at t
};

struct SmallBallResult {
  std::vector<SmallBallRow> rows;
  double max_ratio = 0.0;  // empirical Carbery-Wright constant
  double norm_estimate = 0.0;
};

inline std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    g[static_cast<std::size_t>(i)] =
        std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i /
                                    std::max(1, count - 1));
  return g;
}

// Empirical P(|P(X)| <= t) on a t-grid, with the ratio to the
// Carbery-Wright envelope m t^{1/m}. P must be normalized: the Monte Carlo
// L2 norm has to be within 1% of 1.
inline SmallBallResult small_ball_check(const PolyInBasis& poly,
                                        const MeasureSpec& measure,
                                        std::span<const double> t_grid,
                                        std::int64_t n_mc, Seed seed,
                                        int threads = 1) {
  const int m = std::max(1, poly.degree());
  TensorBasis basis(measure, poly.indices);
  std::vector<double> sorted_t(t_grid.begin(), t_grid.end());
  std::sort(sorted_t.begin(), sorted_t.end());
  require(!sorted_t.empty() && sorted_t.front() > 0.0,
          "small_ball_check: t grid must be positive");

  const std::size_t block = 8192;
  const std::size_t n_blocks = (static_cast<std::size_t>(n_mc) + block - 1) / block;
  std::vector<std::vector<std::int64_t>> counts(
      n_blocks, std::vector<std::int64_t>(sorted_t.size(), 0));
  std::vector<double> norm2(n_blocks, 0.0);
  const double scale = measure.coord_scale(), shift = measure.coord_shift();
  parallel_for(n_blocks, threads, [&](std::size_t bi) {
    std::vector<double> x(static_cast<std::size_t>(measure.dimension));
    const std::int64_t lo = static_cast<std::int64_t>(bi * block);
    const std::int64_t hi = std::min<std::int64_t>(n_mc, lo + static_cast<std::int64_t>(block));
    for (std::int64_t i = lo; i < hi; ++i) {
      RandomStream rs(derive_seed(seed, StreamPurpose::Eval,
                                  static_cast<std::uint64_t>(i)));
      for (int j = 0; j < measure.dimension; ++j)
        x[static_cast<std::size_t>(j)] =
            scale * detail::draw_raw_coordinate(measure.kind, rs) + shift;
      const double v = std::abs(poly.eval(basis, x));
      norm2[bi] += v * v;
      for (std::size_t ti = 0; ti < sorted_t.size(); ++ti)
        if (v <= sorted_t[ti]) ++counts[bi][ti];
    }
  });
  double total_norm2 = 0.0;
  std::vector<std::int64_t> total(sorted_t.size(), 0);
  for (std::size_t bi = 0; bi < n_blocks; ++bi) {
    total_norm2 += norm2[bi];
    for (std::size_t ti = 0; ti < sorted_t.size(); ++ti) total[ti] += counts[bi][ti];
  }
  SmallBallResult out;
  out.norm_estimate = std::sqrt(total_norm2 / static_cast<double>(n_mc));
  if (std::abs(out.norm_estimate - 1.0) > 0.01)
    throw InputError("small_ball_check: polynomial is not normalized (MC norm " +
                     std::to_string(out.norm_estimate) + ")");
  for (std::size_t ti = 0; ti < sorted_t.size(); ++ti) {
    SmallBallRow row;
    row.t = sorted_t[ti];
    row.prob = static_cast<double>(total[ti]) / static_cast<double>(n_mc);
    row.prob_stderr =
        std::sqrt(std::max(0.0, row.prob * (1.0 - row.prob)) /
                  static_cast<double>(n_mc));
    row.bound = m * std::pow(row.t, 1.0 / m);
    row.ratio = row.prob / row.bound;
    out.rows.push_back(row);
    out.max_ratio = std::max(out.max_ratio, row.ratio);
  }
  return out;
}

// Log-log slope of the empirical small-ball probability against t, over the
// sub-grid [t_lo, t_hi].
inline double small_ball_slope(const SmallBallResult& result, double t_lo,
                               double t_hi) {
  std::vector<double> ts, ps;
  for (const auto& row : result.rows)
    if (row.t >= t_lo * (1 - 1e-12) && row.t <= t_hi * (1 + 1e-12) && row.prob > 0.0) {
      ts.push_back(row.t);
      ps.push_back(row.prob);
    }
  require(ts.size() >= 2, "small_ball_slope: not enough positive points");
  return loglog_slope(ts, ps);
}

struct MomentGrowthRow {
  double q = 0.0;
  double ratio = 0.0;  // ||P||_q / ||P||_2
};

struct MomentGrowthResult {
  std::vector<MomentGrowthRow> rows;
  double growth_exponent = 0.0;  // slope of log ratio vs log q
};

inline MomentGrowthResult moment_growth_check(const PolyInBasis& poly,
                                              const MeasureSpec& measure,
                                              std::span<const double> q_grid,
                                              std::int64_t n_mc, Seed seed,
                                              int threads = 1) {
  for (double q : q_grid)
    require(q >= 2.0 && q <= 16.0, "moment_growth_check: q must be in [2,16]");
  TensorBasis basis(measure, poly.indices);
  const std::size_t block = 8192;
  const std::size_t n_blocks = (static_cast<std::size_t>(n_mc) + block - 1) / block;
  std::vector<std::vector<double>> sums(n_blocks,
                                        std::vector<double>(q_grid.size() + 1, 0.0));
  const double scale = measure.coord_scale(), shift = measure.coord_shift();
  parallel_for(n_blocks, threads, [&](std::size_t bi) {
    std::vector<double> x(static_cast<std::size_t>(measure.dimension));
    const std::int64_t lo = static_cast<std::int64_t>(bi * block);
    const std::int64_t hi = std::min<std::int64_t>(n_mc, lo + static_cast<std::int64_t>(block));
    for (std::int64_t i = lo; i < hi; ++i) {
      RandomStream rs(derive_seed(seed, StreamPurpose::Eval,
                                  static_cast<std::uint64_t>(i)));
      for (int j = 0; j < measure.dimension; ++j)
        x[static_cast<std::size_t>(j)] =
            scale * detail::draw_raw_coordinate(measure.kind, rs) + shift;
      const double v = std::abs(poly.eval(basis, x));
      sums[bi][0] += v * v;
      for (std::size_t qi = 0; qi < q_grid.size(); ++qi)
        sums[bi][qi + 1] += std::pow(v, q_grid[qi]);
    }
  });
  std::vector<double> total(q_grid.size() + 1, 0.0);
  for (std::size_t bi = 0; bi < n_blocks; ++bi)
    for (std::size_t k = 0; k < total.size(); ++k) total[k] += sums[bi][k];
  const double n = static_cast<double>(n_mc);
  const double norm2 = std::sqrt(total[0] / n);
  MomentGrowthResult out;
  std::vector<double> lq, lr;
  for (std::size_t qi = 0; qi < q_grid.size(); ++qi) {
    MomentGrowthRow row;
    row.q = q_grid[qi];
    row.ratio = std::pow(total[qi + 1] / n, 1.0 / row.q) / norm2;
    out.rows.push_back(row);
    if (row.ratio > 0.0) {
      lq.push_back(std::log(row.q));
      lr.push_back(std::log(row.ratio));
    }
  }
  out.growth_exponent = lq.size() >= 2 ? ls_slope(lq, lr) : 0.0;
  return out;
}

}  // namespace lipreg

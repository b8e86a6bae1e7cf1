#pragma once

// The two learning procedures and their degree-selection rules. The
// projection estimator averages (Y_i - ahat) p_alpha(X_i); the least-squares
// estimator minimizes the empirical squared error over the degree-m space.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>

#include "lipreg/basis.hpp"
#include "lipreg/dataset.hpp"

namespace lipreg {

enum class DegreeRegime {
  ProjRegime1,
  ProjRegime2,
  LsRegime1,
  LsRegime2,
  OutOfRange,
};

inline std::string degree_regime_name(DegreeRegime r) {
  switch (r) {
    case DegreeRegime::ProjRegime1: return "proj-regime-1";
    case DegreeRegime::ProjRegime2: return "proj-regime-2";
    case DegreeRegime::LsRegime1: return "ls-regime-1";
    case DegreeRegime::LsRegime2: return "ls-regime-2";
    case DegreeRegime::OutOfRange: return "out-of-range";
  }
  return "out-of-range";
}

struct DegreeSelection {
  int m0 = 0;
  DegreeRegime regime = DegreeRegime::OutOfRange;
  int m = 0;
  bool clamped = false;              // m was pulled back into [0, m0]
  double alpha = 0.0;                // ls-regime-2 exponent
};

namespace detail {
// Exact-rational boundaries like n = d^5 must not flip on the last IEEE ulp;
// floors/ceilings in the degree rules carry a 1e-9 nudge.
inline constexpr double kDegreeEps = 1e-9;
inline int floor_eps(double x) { return static_cast<int>(std::floor(x + kDegreeEps)); }
inline int ceil_eps(double x) { return static_cast<int>(std::ceil(x - kDegreeEps)); }

inline int clamp_degree(int m, int m0, bool* clamped) {
  int out = m;
  if (out < 0) out = 0;
  if (out > m0) out = m0;
  *clamped = (out != m);
  return out;
}
}  // namespace detail

// Degree rule for the projection estimator. Regime 1: d^5 <= n <= e^{sqrt(d)
// log d} gives m = m0 - offset. Regime 2: e^{sqrt(d) log d} <= n <= e^{d log
// d / 2} gives m = m0 - ceil(4 log m0 / log(d/m0)). Outside both ranges the
// result is labeled out-of-range with m = max(m0 - offset, 0).
inline DegreeSelection select_degree_projection(std::uint64_t n, int d,
                                                int offset = 4) {
  require(n >= 2 && d >= 2, "select_degree_projection: need n, d >= 2");
  const double log_n = std::log(static_cast<double>(n));
  const double log_d = std::log(static_cast<double>(d));
  DegreeSelection sel;
  sel.m0 = detail::floor_eps(log_n / log_d);
  const bool lower_ok = 5.0 * log_d <= log_n + detail::kDegreeEps;
  const double r1_hi = std::sqrt(static_cast<double>(d)) * log_d;
  const double r2_hi = 0.5 * d * log_d;
  if (lower_ok && log_n <= r1_hi + detail::kDegreeEps) {
    sel.regime = DegreeRegime::ProjRegime1;
    sel.m = detail::clamp_degree(sel.m0 - offset, sel.m0, &sel.clamped);
  } else if (log_n + detail::kDegreeEps >= r1_hi && log_n <= r2_hi + detail::kDegreeEps &&
             sel.m0 >= 1 && d > sel.m0) {
    sel.regime = DegreeRegime::ProjRegime2;
    const double p = 4.0 * std::log(static_cast<double>(sel.m0)) /
                     std::log(static_cast<double>(d) / sel.m0);
    sel.m = detail::clamp_degree(sel.m0 - detail::ceil_eps(p), sel.m0, &sel.clamped);
  } else {
    sel.regime = DegreeRegime::OutOfRange;
    sel.m = detail::clamp_degree(sel.m0 - offset, sel.m0, &sel.clamped);
  }
  return sel;
}

// Degree rule for the least-squares estimator, with the theorem's universal
// constants c0, C0 supplied by configuration. Regime 1: d^5 <= n <=
// e^{c0 log^2 d / log log d} gives m = m0 - 4. Otherwise, with alpha =
// log(C0 log n)/log d < 1/2, regime 2 gives m = m0 - 4 - floor(2 alpha m0);
// alpha >= 1/2 is labeled out-of-range.
inline DegreeSelection select_degree_ls(std::uint64_t n, int d, double c0 = 1.0,
                                        double C0 = 1.0) {
  require(n >= 2 && d >= 2, "select_degree_ls: need n, d >= 2");
  require(c0 > 0.0 && C0 > 0.0, "select_degree_ls: constants must be > 0");
  const double log_n = std::log(static_cast<double>(n));
  const double log_d = std::log(static_cast<double>(d));
  DegreeSelection sel;
  sel.m0 = detail::floor_eps(log_n / log_d);
  sel.alpha = std::log(C0 * log_n) / log_d;
  const bool lower_ok = 5.0 * log_d <= log_n + detail::kDegreeEps;
  const double loglog_d = std::log(log_d);
  const bool regime1 = lower_ok && loglog_d > 0.0 &&
                       log_n <= c0 * log_d * log_d / loglog_d + detail::kDegreeEps;
  if (regime1) {
    sel.regime = DegreeRegime::LsRegime1;
    sel.m = detail::clamp_degree(sel.m0 - 4, sel.m0, &sel.clamped);
  } else if (sel.alpha < 0.5) {
    sel.regime = DegreeRegime::LsRegime2;
    const int drop = detail::floor_eps(2.0 * sel.alpha * sel.m0);
    sel.m = detail::clamp_degree(sel.m0 - 4 - drop, sel.m0, &sel.clamped);
  } else {
    sel.regime = DegreeRegime::OutOfRange;
    sel.m = detail::clamp_degree(sel.m0 - 4, sel.m0, &sel.clamped);
  }
  return sel;
}

struct EstimatorDiagnostics {
  double lambda_min = std::numeric_limits<double>::quiet_NaN();
  double opnorm_deviation = std::numeric_limits<double>::quiet_NaN();
  double condition_number = std::numeric_limits<double>::quiet_NaN();
  bool rank_deficient = false;
  bool underdetermined = false;  // D > n
  double elapsed_seconds = 0.0;
};

struct EstimatorReport {
  PolyInBasis estimate;
  double ahat = 0.0;
  EstimatorDiagnostics diagnostics;
};

struct ProjectionOptions {
  // When false, uses the naive uncentered coefficients (1/n) sum Y_i p_k(X_i)
  // for every k; exposed for variance A/B experiments.
  bool centered = true;
  int threads = 1;
  std::uint64_t index_cap = kDefaultIndexCap;
};

inline EstimatorReport projection_estimate(const Dataset& data, int m,
                                           const ProjectionOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  TensorBasis basis(data.measure, m, opt.index_cap);
  const std::size_t dsz = basis.size();
  const Eigen::Index n = data.n();
  const double ahat = data.y.mean();

  // Fixed-size row blocks with an ordered reduction keep the result
  // independent of the thread count.
  const std::size_t block = 8192;
  const std::size_t n_blocks = (static_cast<std::size_t>(n) + block - 1) / block;
  std::vector<Eigen::VectorXd> partial(n_blocks);
  parallel_for(n_blocks, opt.threads, [&](std::size_t bi) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dsz));
    std::vector<double> x(static_cast<std::size_t>(data.dimension()));
    std::vector<double> row(dsz);
    const Eigen::Index lo = static_cast<Eigen::Index>(bi * block);
    const Eigen::Index hi = std::min<Eigen::Index>(n, lo + static_cast<Eigen::Index>(block));
    for (Eigen::Index i = lo; i < hi; ++i) {
      for (int j = 0; j < data.dimension(); ++j)
        x[static_cast<std::size_t>(j)] = data.x.x(i, j);
      basis.eval_point(x, row);
      const double w = opt.centered ? data.y(i) - ahat : data.y(i);
      for (std::size_t k = 0; k < dsz; ++k)
        acc(static_cast<Eigen::Index>(k)) += w * row[k];
    }
    partial[bi] = std::move(acc);
  });
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dsz));
  for (std::size_t bi = 0; bi < n_blocks; ++bi) coeffs += partial[bi];
  coeffs /= static_cast<double>(n);
  if (opt.centered) coeffs(0) = ahat;

  EstimatorReport report;
  report.estimate.measure = data.measure;
  report.estimate.indices = basis.indices_ptr();
  report.estimate.coeffs = std::move(coeffs);
  report.ahat = ahat;
  report.diagnostics.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

struct LsOptions {
  int threads = 1;
  double rank_tolerance = 1e-10;  // relative to the largest singular value
  bool compute_diagnostics = true;
  std::uint64_t index_cap = kDefaultIndexCap;
};

// Least squares over the degree-m polynomial space. With full column rank the
// result is the unique minimizer (Householder QR); otherwise the minimum-norm
// minimizer via SVD, with the rank deficiency flagged.
inline EstimatorReport ls_estimate(const Dataset& data, int m,
                                   const LsOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  TensorBasis basis(data.measure, m, opt.index_cap);
  const Eigen::Index dsz = static_cast<Eigen::Index>(basis.size());
  const Eigen::Index n = data.n();

  Eigen::MatrixXd a = basis.eval_matrix(data.x.x, opt.threads);
  EstimatorReport report;
  report.diagnostics.underdetermined = dsz > n;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(opt.rank_tolerance);
  Eigen::VectorXd coeffs;
  if (!report.diagnostics.underdetermined && qr.rank() == dsz) {
    coeffs = qr.solve(data.y);
  } else {
    report.diagnostics.rank_deficient = true;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(opt.rank_tolerance);
    coeffs = svd.solve(data.y);
  }

  if (opt.compute_diagnostics) {
    const Eigen::MatrixXd cn = a.transpose() * a / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cn);
    const auto& ev = es.eigenvalues();
    report.diagnostics.lambda_min = ev(0);
    double dev = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      dev = std::max(dev, std::abs(ev(i) - 1.0));
    report.diagnostics.opnorm_deviation = dev;
    report.diagnostics.condition_number =
        ev(0) > 0.0 ? ev(ev.size() - 1) / ev(0)
                    : std::numeric_limits<double>::infinity();
  }

  report.estimate.measure = data.measure;
  report.estimate.indices = basis.indices_ptr();
  report.estimate.coeffs = std::move(coeffs);
  report.ahat = report.estimate.coeffs(0);
  report.diagnostics.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

// Least squares over arbitrary user-supplied features; used to verify that
// the minimizer is a property of the subspace, not of the basis chosen to
// represent it.
inline Eigen::VectorXd ls_solve_features(const Eigen::MatrixXd& features,
                                         const Eigen::VectorXd& y,
                                         double rank_tolerance = 1e-10) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(features);
  qr.setThreshold(rank_tolerance);
  if (qr.rank() == features.cols()) return qr.solve(y);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(features,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(rank_tolerance);
  return svd.solve(y);
}

}  // namespace lipreg

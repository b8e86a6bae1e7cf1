#pragma once

// Tensorized orthonormal polynomial basis: evaluation through per-coordinate
// recurrences, Monte Carlo coefficient projection, and the Ornstein-Uhlenbeck
// semigroup (exact on coefficients, Monte Carlo pointwise).

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "lipreg/measures.hpp"
#include "lipreg/multiindex.hpp"
#include "lipreg/parallel.hpp"
#include "lipreg/stats.hpp"

namespace lipreg {

class TensorBasis {
 public:
  TensorBasis(MeasureSpec measure, std::shared_ptr<const MultiIndexSet> indices)
      : measure_(measure),
        indices_(std::move(indices)),
        rec_(coordinate_recurrence(measure, indices_->max_degree())) {
    require(indices_->dimension() == measure_.dimension,
            "TensorBasis: index dimension does not match measure");
  }

  TensorBasis(MeasureSpec measure, int max_degree,
              std::uint64_t cap = kDefaultIndexCap)
      : TensorBasis(measure, enumerate_indices(measure.dimension, max_degree, cap)) {}

  const MeasureSpec& measure() const { return measure_; }
  const MultiIndexSet& indices() const { return *indices_; }
  std::shared_ptr<const MultiIndexSet> indices_ptr() const { return indices_; }
  std::size_t size() const { return indices_->size(); }
  int dimension() const { return measure_.dimension; }
  int max_degree() const { return indices_->max_degree(); }

  // p_alpha(x) for every alpha, written to out[0..size).
  void eval_point(std::span<const double> x, std::span<double> out) const {
    const int d = dimension();
    const int m = max_degree();
    require(static_cast<int>(x.size()) == d, "eval_point: wrong point dimension");
    for (double v : x)
      if (!std::isfinite(v)) throw InputError("eval_point: non-finite coordinate");
    thread_local std::vector<double> table;
    table.resize(static_cast<std::size_t>(d) * (static_cast<std::size_t>(m) + 1));
    for (int j = 0; j < d; ++j)
      rec_.eval(x[static_cast<std::size_t>(j)], m,
                table.data() + static_cast<std::size_t>(j) * (m + 1));
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
      double prod = 1.0;
      for (const auto& t : indices_->terms(i))
        prod *= table[static_cast<std::size_t>(t.coord) * (m + 1) + t.exponent];
      out[i] = prod;
    }
  }

  std::vector<double> eval_point(std::span<const double> x) const {
    std::vector<double> out(size());
    eval_point(x, out);
    return out;
  }

  // Design matrix A with A(i,k) = p_k(X_i).
  Eigen::MatrixXd eval_matrix(const Eigen::MatrixXd& points, int threads = 1) const {
    const Eigen::Index n = points.rows();
    require(points.cols() == dimension(), "eval_matrix: wrong dimension");
    Eigen::MatrixXd a(n, static_cast<Eigen::Index>(size()));
    const std::size_t block = 2048;
    const std::size_t n_blocks = (static_cast<std::size_t>(n) + block - 1) / block;
    parallel_for(n_blocks, threads, [&](std::size_t bi) {
      std::vector<double> x(static_cast<std::size_t>(dimension()));
      std::vector<double> row(size());
      const Eigen::Index lo = static_cast<Eigen::Index>(bi * block);
      const Eigen::Index hi = std::min<Eigen::Index>(n, lo + static_cast<Eigen::Index>(block));
      for (Eigen::Index i = lo; i < hi; ++i) {
        for (int j = 0; j < dimension(); ++j) x[static_cast<std::size_t>(j)] = points(i, j);
        eval_point(x, row);
        for (std::size_t k = 0; k < size(); ++k)
          a(i, static_cast<Eigen::Index>(k)) = row[k];
      }
    });
    return a;
  }

 private:
  MeasureSpec measure_;
  std::shared_ptr<const MultiIndexSet> indices_;
  CoordinateRecurrence rec_;
};

// Coefficient vector over a MultiIndexSet in the orthonormal basis of a
// measure. By Parseval, the L2(mu) norm equals coeffs.norm().
struct PolyInBasis {
  MeasureSpec measure;
  std::shared_ptr<const MultiIndexSet> indices;
  Eigen::VectorXd coeffs;
  Eigen::VectorXd coeff_stderr;  // empty unless Monte Carlo estimated

  int degree() const {
    int deg = 0;
    for (std::size_t i = 0; i < indices->size(); ++i)
      if (coeffs(static_cast<Eigen::Index>(i)) != 0.0)
        deg = std::max(deg, indices->degree_of(i));
    return deg;
  }

  double l2_norm() const { return coeffs.norm(); }

  double eval(const TensorBasis& basis, std::span<const double> x) const {
    thread_local std::vector<double> row;
    row.resize(basis.size());
    basis.eval_point(x, row);
    double s = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k)
      s += coeffs(static_cast<Eigen::Index>(k)) * row[k];
    return s;
  }
};

inline PolyInBasis zero_poly(const MeasureSpec& measure,
                             std::shared_ptr<const MultiIndexSet> indices) {
  PolyInBasis p;
  p.measure = measure;
  p.indices = std::move(indices);
  p.coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.indices->size()));
  return p;
}

inline PolyInBasis unit_poly(const MeasureSpec& measure,
                             std::shared_ptr<const MultiIndexSet> indices,
                             std::size_t position) {
  PolyInBasis p = zero_poly(measure, std::move(indices));
  require(position < p.indices->size(), "unit_poly: position out of range");
  p.coeffs(static_cast<Eigen::Index>(position)) = 1.0;
  return p;
}

// Convenience form of basis evaluation matching the spec operation: all
// p_alpha(x) for the total-degree index set of the measure.
inline std::vector<double> eval_basis(std::span<const double> x,
                                      const MultiIndexSet& idx,
                                      const MeasureSpec& measure) {
  TensorBasis basis(measure,
                    std::make_shared<const MultiIndexSet>(idx));
  return basis.eval_point(x);
}

// Monte Carlo orthogonal projection: coefficient k estimates <f, p_k> by a
// sample mean; per-coefficient standard errors are reported alongside.
template <class F>
PolyInBasis project_mc(F&& f, const MeasureSpec& measure, int m,
                       std::int64_t n_mc, Seed seed, int threads = 1,
                       std::uint64_t cap = kDefaultIndexCap) {
  require(n_mc >= 1000, "project_mc: n_mc must be >= 1e3");
  TensorBasis basis(measure, m, cap);
  const std::size_t dsz = basis.size();
  const std::size_t block = 8192;
  const std::size_t n_blocks = (static_cast<std::size_t>(n_mc) + block - 1) / block;
  std::vector<Eigen::VectorXd> sums(n_blocks), sqsums(n_blocks);
  parallel_for(n_blocks, threads, [&](std::size_t bi) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dsz));
    Eigen::VectorXd s2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dsz));
    std::vector<double> x(static_cast<std::size_t>(measure.dimension));
    std::vector<double> row(dsz);
    const std::int64_t lo = static_cast<std::int64_t>(bi * block);
    const std::int64_t hi = std::min<std::int64_t>(n_mc, lo + static_cast<std::int64_t>(block));
    const double scale = measure.coord_scale(), shift = measure.coord_shift();
    for (std::int64_t i = lo; i < hi; ++i) {
      RandomStream rs(derive_seed(seed, StreamPurpose::Projection,
                                  static_cast<std::uint64_t>(i)));
      for (int j = 0; j < measure.dimension; ++j)
        x[static_cast<std::size_t>(j)] =
            scale * detail::draw_raw_coordinate(measure.kind, rs) + shift;
      basis.eval_point(x, row);
      const double fx = f(std::span<const double>(x));
      for (std::size_t k = 0; k < dsz; ++k) {
        const double v = fx * row[k];
        s(static_cast<Eigen::Index>(k)) += v;
        s2(static_cast<Eigen::Index>(k)) += v * v;
      }
    }
    sums[bi] = std::move(s);
    sqsums[bi] = std::move(s2);
  });
  Eigen::VectorXd total = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dsz));
  Eigen::VectorXd total2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dsz));
  for (std::size_t bi = 0; bi < n_blocks; ++bi) {
    total += sums[bi];
    total2 += sqsums[bi];
  }
  PolyInBasis p;
  p.measure = measure;
  p.indices = basis.indices_ptr();
  const double n = static_cast<double>(n_mc);
  p.coeffs = total / n;
  p.coeff_stderr.resize(static_cast<Eigen::Index>(dsz));
  for (std::size_t k = 0; k < dsz; ++k) {
    const double mu = p.coeffs(static_cast<Eigen::Index>(k));
    const double var =
        std::max(0.0, (total2(static_cast<Eigen::Index>(k)) / n - mu * mu)) *
        n / std::max(1.0, n - 1.0);
    p.coeff_stderr(static_cast<Eigen::Index>(k)) = std::sqrt(var / n);
  }
  return p;
}

// T_t in coefficient space: multiplies the coefficient at alpha by
// e^{-t|alpha|}. Exact for the Gaussian measure, whose basis polynomials are
// the semigroup's eigenfunctions.
inline PolyInBasis ou_apply(const PolyInBasis& p, double t) {
  if (p.measure.kind != MeasureKind::StandardGaussian)
    throw UnsupportedOperationError("ou_apply: only the Gaussian measure is supported");
  require(t >= 0.0, "ou_apply: t must be >= 0");
  PolyInBasis out = p;
  out.coeff_stderr.resize(0);
  for (std::size_t i = 0; i < p.indices->size(); ++i)
    out.coeffs(static_cast<Eigen::Index>(i)) *=
        std::exp(-t * p.indices->degree_of(i));
  return out;
}

// Pointwise Mehler form, Monte Carlo: averages f(e^{-t} x + sqrt(1-e^{-2t}) g)
// over standard Gaussian draws g. The inner draws depend only on the seed, so
// calls at different x with the same seed share them (useful for difference
// quotients).
template <class F>
double ou_smooth_eval(F&& f, double t, std::span<const double> x,
                      std::int64_t n_mc, Seed seed) {
  require(t > 0.0, "ou_smooth_eval: t must be > 0");
  require(n_mc >= 1, "ou_smooth_eval: n_mc must be >= 1");
  const double decay = std::exp(-t);
  const double sigma = std::sqrt(std::max(0.0, 1.0 - decay * decay));
  const std::size_t d = x.size();
  std::vector<double> y(d);
  double sum = 0.0;
  for (std::int64_t i = 0; i < n_mc; ++i) {
    RandomStream rs(derive_seed(seed, StreamPurpose::Smoothing,
                                static_cast<std::uint64_t>(i)));
    for (std::size_t j = 0; j < d; ++j)
      y[j] = decay * x[j] + sigma * rs.next_normal();
    sum += f(std::span<const double>(y));
  }
  return sum / static_cast<double>(n_mc);
}

// Gauss-Legendre value of the classical identity
//   int_{-1}^{1} P_n'(x) P_m'(x) (1-x^2) dx = 2n(n+1)/(2n+1) delta_nm,
// for the unnormalized Legendre polynomials.
inline double legendre_derivative_identity_check(int n, int m) {
  require(n >= 0 && m >= 0 && n <= 40 && m <= 40,
          "legendre_derivative_identity_check: degrees must be in [0,40]");
  const int deg = std::max(n, m);
  const QuadratureRule rule = gauss_legendre(deg + 2);
  // P_k by the standard recurrence, P_k' by P'_{k+1} = P'_{k-1} + (2k+1) P_k.
  auto derivative_at = [&](int k, double x) {
    if (k == 0) return 0.0;
    std::vector<double> p(static_cast<std::size_t>(k) + 1),
        dp(static_cast<std::size_t>(k) + 1);
    p[0] = 1.0;
    dp[0] = 0.0;
    if (k >= 1) {
      p[1] = x;
      dp[1] = 1.0;
    }
    for (int j = 1; j < k; ++j) {
      p[static_cast<std::size_t>(j) + 1] =
          ((2.0 * j + 1.0) * x * p[static_cast<std::size_t>(j)] -
           j * p[static_cast<std::size_t>(j) - 1]) /
          (j + 1.0);
      dp[static_cast<std::size_t>(j) + 1] =
          dp[static_cast<std::size_t>(j) - 1] +
          (2.0 * j + 1.0) * p[static_cast<std::size_t>(j)];
    }
    return dp[static_cast<std::size_t>(k)];
  };
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes[i];
    acc += rule.weights[i] * derivative_at(n, x) * derivative_at(m, x) *
           (1.0 - x * x);
  }
  return acc;
}

}  // namespace lipreg

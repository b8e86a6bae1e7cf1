#pragma once

// The four product measures used throughout: standard Gaussian, two-sided
// exponential (Laplace), one-sided exponential, and the uniform cube. Each
// provides i.i.d. sampling and the three-term recurrence of its orthonormal
// per-coordinate polynomial basis. With the isotropic flag set, coordinates
// are affinely rescaled to mean 0 and variance 1.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lipreg/common.hpp"
#include "lipreg/parallel.hpp"
#include "lipreg/quadrature.hpp"
#include "lipreg/rng.hpp"

namespace lipreg {

enum class MeasureKind {
  StandardGaussian,
  TwoSidedExponential,
  OneSidedExponential,
  UniformCube,
};

inline std::string measure_kind_name(MeasureKind k) {
  switch (k) {
    case MeasureKind::StandardGaussian: return "standard-gaussian";
    case MeasureKind::TwoSidedExponential: return "two-sided-exponential";
    case MeasureKind::OneSidedExponential: return "one-sided-exponential";
    case MeasureKind::UniformCube: return "uniform-cube";
  }
  throw ConfigError("unknown measure kind");
}

inline MeasureKind measure_kind_from_name(const std::string& s) {
  if (s == "standard-gaussian") return MeasureKind::StandardGaussian;
  if (s == "two-sided-exponential") return MeasureKind::TwoSidedExponential;
  if (s == "one-sided-exponential") return MeasureKind::OneSidedExponential;
  if (s == "uniform-cube") return MeasureKind::UniformCube;
  throw ConfigError("unsupported measure kind: " + s);
}

struct SupportInterval {
  double lo;
  double hi;
};

struct MeasureSpec {
  MeasureKind kind = MeasureKind::StandardGaussian;
  int dimension = 1;
  bool isotropic = true;

  static MeasureSpec gaussian(int d) {
    return MeasureSpec{MeasureKind::StandardGaussian, d, true};
  }
  static MeasureSpec two_sided_exponential(int d, bool iso = true) {
    return MeasureSpec{MeasureKind::TwoSidedExponential, d, iso};
  }
  static MeasureSpec one_sided_exponential(int d, bool iso = true) {
    return MeasureSpec{MeasureKind::OneSidedExponential, d, iso};
  }
  static MeasureSpec uniform_cube(int d, bool iso = true) {
    return MeasureSpec{MeasureKind::UniformCube, d, iso};
  }

  bool operator==(const MeasureSpec&) const = default;

  // Affine map from the raw per-coordinate variable y to the working
  // variable x = scale*y + shift.
  double coord_scale() const {
    if (!isotropic) return 1.0;
    switch (kind) {
      case MeasureKind::StandardGaussian: return 1.0;
      case MeasureKind::TwoSidedExponential: return 1.0 / std::sqrt(2.0);
      case MeasureKind::OneSidedExponential: return 1.0;
      case MeasureKind::UniformCube: return std::sqrt(3.0);
    }
    return 1.0;
  }
  double coord_shift() const {
    return (isotropic && kind == MeasureKind::OneSidedExponential) ? -1.0 : 0.0;
  }

  // Support of one working coordinate.
  SupportInterval coord_support() const {
    const double inf = std::numeric_limits<double>::infinity();
    switch (kind) {
      case MeasureKind::StandardGaussian:
      case MeasureKind::TwoSidedExponential:
        return {-inf, inf};
      case MeasureKind::OneSidedExponential:
        return {coord_shift(), inf};
      case MeasureKind::UniformCube: {
        const double s = isotropic ? std::sqrt(3.0) : 1.0;
        return {-s, s};
      }
    }
    return {-inf, inf};
  }

  // True when the per-coordinate recurrence comes from the Stieltjes
  // moment construction rather than a closed form.
  bool moment_generated_basis() const {
    return kind == MeasureKind::TwoSidedExponential ||
           kind == MeasureKind::OneSidedExponential;
  }
};

struct SampleMatrix {
  Eigen::MatrixXd x;  // n rows, d columns
  Seed seed = 0;

  Eigen::Index rows() const { return x.rows(); }
  Eigen::Index cols() const { return x.cols(); }
};

namespace detail {

inline double draw_raw_coordinate(MeasureKind kind, RandomStream& rs) {
  switch (kind) {
    case MeasureKind::StandardGaussian:
      return rs.next_normal();
    case MeasureKind::TwoSidedExponential: {
      const double e = rs.next_exponential();
      return rs.next_uniform() < 0.5 ? -e : e;
    }
    case MeasureKind::OneSidedExponential:
      return rs.next_exponential();
    case MeasureKind::UniformCube:
      return 2.0 * rs.next_uniform() - 1.0;
  }
  throw ConfigError("unsupported measure kind");
}

}  // namespace detail

// Draws n i.i.d. rows from the product measure. Each row owns a derived
// stream, so the result is independent of evaluation order.
inline SampleMatrix sample(const MeasureSpec& measure, std::int64_t n, Seed seed,
                           int threads = 1) {
  require(n >= 1, "sample: n must be >= 1");
  require(measure.dimension >= 1, "sample: dimension must be >= 1");
  const int d = measure.dimension;
  const double scale = measure.coord_scale();
  const double shift = measure.coord_shift();
  SampleMatrix out;
  out.seed = seed;
  out.x.resize(n, d);
  const std::size_t block = 4096;
  const std::size_t n_blocks = (static_cast<std::size_t>(n) + block - 1) / block;
  parallel_for(n_blocks, threads, [&](std::size_t bi) {
    const std::int64_t lo = static_cast<std::int64_t>(bi * block);
    const std::int64_t hi = std::min<std::int64_t>(n, lo + static_cast<std::int64_t>(block));
    for (std::int64_t i = lo; i < hi; ++i) {
      RandomStream rs(derive_seed(seed, StreamPurpose::Design, static_cast<std::uint64_t>(i)));
      for (int j = 0; j < d; ++j)
        out.x(i, j) = scale * detail::draw_raw_coordinate(measure.kind, rs) + shift;
    }
  });
  return out;
}

// Three-term recurrence of an orthonormal polynomial family:
//   x p_k = beta[k+1] p_{k+1} + alpha[k] p_k + beta[k] p_{k-1},
// with p_{-1} = 0 and p_0 = 1 (probability measures).
struct CoordinateRecurrence {
  std::vector<double> alpha;  // indices 0..K
  std::vector<double> beta;   // indices 0..K; beta[0] unused

  int max_degree() const { return static_cast<int>(alpha.size()) - 1; }

  // Evaluates p_0..p_m at x into out[0..m].
  void eval(double x, int m, double* out) const {
    require(m <= max_degree(), "recurrence: degree beyond table");
    out[0] = 1.0;
    if (m == 0) return;
    out[1] = (x - alpha[0]) / beta[1];
    for (int k = 1; k < m; ++k)
      out[static_cast<std::size_t>(k) + 1] =
          ((x - alpha[static_cast<std::size_t>(k)]) * out[k] -
           beta[static_cast<std::size_t>(k)] * out[k - 1]) /
          beta[static_cast<std::size_t>(k) + 1];
  }

  // Recurrence of the pushforward under x -> scale*x + shift.
  CoordinateRecurrence affine(double scale, double shift) const {
    CoordinateRecurrence r = *this;
    for (auto& a : r.alpha) a = scale * a + shift;
    for (auto& b : r.beta) b *= scale;
    return r;
  }
};

namespace detail {

inline CoordinateRecurrence hermite_recurrence(int max_degree) {
  CoordinateRecurrence r;
  r.alpha.assign(static_cast<std::size_t>(max_degree) + 1, 0.0);
  r.beta.resize(static_cast<std::size_t>(max_degree) + 1);
  for (int k = 0; k <= max_degree; ++k)
    r.beta[static_cast<std::size_t>(k)] = std::sqrt(static_cast<double>(k));
  return r;
}

inline CoordinateRecurrence legendre_recurrence(int max_degree) {
  CoordinateRecurrence r;
  r.alpha.assign(static_cast<std::size_t>(max_degree) + 1, 0.0);
  r.beta.assign(static_cast<std::size_t>(max_degree) + 1, 0.0);
  for (int k = 1; k <= max_degree; ++k)
    r.beta[static_cast<std::size_t>(k)] =
        static_cast<double>(k) / std::sqrt(4.0 * static_cast<double>(k) * k - 1.0);
  return r;
}

// Stieltjes procedure on a discretized measure, long-double accumulation.
inline CoordinateRecurrence stieltjes(const QuadratureRule& rule, int max_degree) {
  const std::size_t n = rule.nodes.size();
  std::vector<long double> w(n), x(n), p_prev(n, 0.0L), p_cur(n);
  long double mass = 0.0L;
  for (std::size_t j = 0; j < n; ++j) {
    w[j] = static_cast<long double>(rule.weights[j]);
    x[j] = static_cast<long double>(rule.nodes[j]);
    mass += w[j];
  }
  const long double inv_sqrt_mass = 1.0L / std::sqrt(mass);
  for (std::size_t j = 0; j < n; ++j) p_cur[j] = inv_sqrt_mass;

  CoordinateRecurrence r;
  r.alpha.resize(static_cast<std::size_t>(max_degree) + 1);
  r.beta.assign(static_cast<std::size_t>(max_degree) + 1, 0.0);
  std::vector<long double> resid(n);
  for (int k = 0; k <= max_degree; ++k) {
    long double a = 0.0L;
    for (std::size_t j = 0; j < n; ++j) a += w[j] * x[j] * p_cur[j] * p_cur[j];
    r.alpha[static_cast<std::size_t>(k)] = static_cast<double>(a);
    if (k == max_degree) break;
    long double norm2 = 0.0L;
    const long double bk =
        k > 0 ? static_cast<long double>(r.beta[static_cast<std::size_t>(k)]) : 0.0L;
    for (std::size_t j = 0; j < n; ++j) {
      resid[j] = (x[j] - a) * p_cur[j] - bk * p_prev[j];
      norm2 += w[j] * resid[j] * resid[j];
    }
    const long double b_next = std::sqrt(norm2);
    if (!(b_next > 0.0L) || !std::isfinite(static_cast<double>(b_next)))
      throw DegradationError("stieltjes: recurrence lost positivity at degree " +
                             std::to_string(k + 1));
    r.beta[static_cast<std::size_t>(k) + 1] = static_cast<double>(b_next);
    for (std::size_t j = 0; j < n; ++j) {
      p_prev[j] = p_cur[j];
      p_cur[j] = resid[j] / b_next;
    }
  }
  return r;
}

inline CoordinateRecurrence one_sided_exponential_raw_recurrence(int max_degree) {
  // e^{-x} on [0, T]; tail mass beyond T is negligible for degrees <= 60.
  const auto breaks = uniform_breaks(0.0, 400.0, 10);
  const auto rule = composite_density_rule(breaks, 200,
                                           [](double x) { return std::exp(-x); });
  return stieltjes(rule, max_degree);
}

inline CoordinateRecurrence two_sided_exponential_raw_recurrence(int max_degree) {
  const auto breaks = uniform_breaks(-400.0, 400.0, 20);
  const auto rule = composite_density_rule(
      breaks, 200, [](double x) { return 0.5 * std::exp(-std::abs(x)); });
  return stieltjes(rule, max_degree);
}

}  // namespace detail

// Moment-generated bases are refused above this degree rather than silently
// degraded.
inline constexpr int kMaxMomentBasisDegree = 60;

inline CoordinateRecurrence coordinate_recurrence(const MeasureSpec& measure,
                                                  int max_degree) {
  require(max_degree >= 0, "coordinate_recurrence: degree must be >= 0");
  if (measure.moment_generated_basis() && max_degree > kMaxMomentBasisDegree)
    throw DegradationError(
        "coordinate_recurrence: moment-generated basis limited to degree " +
        std::to_string(kMaxMomentBasisDegree));
  CoordinateRecurrence raw;
  switch (measure.kind) {
    case MeasureKind::StandardGaussian:
      raw = detail::hermite_recurrence(max_degree);
      break;
    case MeasureKind::UniformCube:
      raw = detail::legendre_recurrence(max_degree);
      break;
    case MeasureKind::OneSidedExponential:
      raw = detail::one_sided_exponential_raw_recurrence(max_degree);
      break;
    case MeasureKind::TwoSidedExponential:
      raw = detail::two_sided_exponential_raw_recurrence(max_degree);
      break;
  }
  const double s = measure.coord_scale();
  const double c = measure.coord_shift();
  if (s == 1.0 && c == 0.0) return raw;
  return raw.affine(s, c);
}

}  // namespace lipreg

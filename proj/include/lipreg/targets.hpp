#pragma once

// Library of regression targets with known Lipschitz constants. All built-in
// kinds except basis-polynomial are 1-Lipschitz; targets that exceed 1 carry
// an explicit override flag.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>

#include "lipreg/basis.hpp"
#include "lipreg/measures.hpp"

namespace lipreg {

enum class TargetKind {
  EuclideanNormCentered,
  MaxCoordinate,
  DistanceToPoint,
  SoftMin,
  Linear,
  BasisPolynomial,
  Custom,
};

inline std::string target_kind_name(TargetKind k) {
  switch (k) {
    case TargetKind::EuclideanNormCentered: return "euclidean-norm-centered";
    case TargetKind::MaxCoordinate: return "max-coordinate";
    case TargetKind::DistanceToPoint: return "distance-to-point";
    case TargetKind::SoftMin: return "soft-min";
    case TargetKind::Linear: return "linear";
    case TargetKind::BasisPolynomial: return "basis-polynomial";
    case TargetKind::Custom: return "custom";
  }
  throw ConfigError("unknown target kind");
}

struct CenteringInfo {
  double mean_estimate = 0.0;
  double stderr = 0.0;
  std::int64_t n_mc = 0;
};

class TargetFunction {
 public:
  TargetFunction() = default;

  static TargetFunction euclidean_norm(int d) {
    TargetFunction t;
    t.kind_ = TargetKind::EuclideanNormCentered;
    t.dimension_ = d;
    t.lipschitz_ = 1.0;
    return t;
  }

  static TargetFunction max_coordinate(int d) {
    TargetFunction t;
    t.kind_ = TargetKind::MaxCoordinate;
    t.dimension_ = d;
    t.lipschitz_ = 1.0;
    return t;
  }

  static TargetFunction distance_to_point(Eigen::VectorXd point) {
    TargetFunction t;
    t.kind_ = TargetKind::DistanceToPoint;
    t.dimension_ = static_cast<int>(point.size());
    t.vec_ = std::move(point);
    t.lipschitz_ = 1.0;
    return t;
  }

  // -(1/beta) log sum_i e^{-beta x_i}; the gradient is a probability vector,
  // so the Euclidean Lipschitz constant is at most 1.
  static TargetFunction soft_min(int d, double beta) {
    require(beta > 0.0, "soft_min: beta must be > 0");
    TargetFunction t;
    t.kind_ = TargetKind::SoftMin;
    t.dimension_ = d;
    t.beta_ = beta;
    t.lipschitz_ = 1.0;
    return t;
  }

  static TargetFunction linear(Eigen::VectorXd theta) {
    TargetFunction t;
    t.kind_ = TargetKind::Linear;
    t.dimension_ = static_cast<int>(theta.size());
    t.lipschitz_ = theta.norm();
    t.lipschitz_override_ = t.lipschitz_ > 1.0;
    t.vec_ = std::move(theta);
    return t;
  }

  // Generally not 1-Lipschitz; carries the override flag.
  static TargetFunction basis_polynomial(PolyInBasis poly) {
    TargetFunction t;
    t.kind_ = TargetKind::BasisPolynomial;
    t.dimension_ = poly.measure.dimension;
    t.poly_ = std::make_shared<const PolyInBasis>(std::move(poly));
    t.poly_basis_ = std::make_shared<const TensorBasis>(t.poly_->measure,
                                                        t.poly_->indices);
    t.lipschitz_ = std::numeric_limits<double>::quiet_NaN();
    t.lipschitz_override_ = true;
    return t;
  }

  static TargetFunction custom(int d, std::function<double(std::span<const double>)> fn,
                               double lipschitz, std::string label = "custom") {
    TargetFunction t;
    t.kind_ = TargetKind::Custom;
    t.dimension_ = d;
    t.fn_ = std::move(fn);
    t.lipschitz_ = lipschitz;
    t.lipschitz_override_ = lipschitz > 1.0;
    t.label_ = std::move(label);
    return t;
  }

  TargetKind kind() const { return kind_; }
  int dimension() const { return dimension_; }
  double lipschitz_constant() const { return lipschitz_; }
  bool lipschitz_override() const { return lipschitz_override_; }
  double offset() const { return offset_; }
  std::string label() const {
    return label_.empty() ? target_kind_name(kind_) : label_;
  }

  double operator()(std::span<const double> x) const {
    require(static_cast<int>(x.size()) == dimension_, "target: wrong dimension");
    double v = 0.0;
    switch (kind_) {
      case TargetKind::EuclideanNormCentered: {
        double s = 0.0;
        for (double xi : x) s += xi * xi;
        v = std::sqrt(s);
        break;
      }
      case TargetKind::MaxCoordinate: {
        v = x[0];
        for (double xi : x) v = std::max(v, xi);
        break;
      }
      case TargetKind::DistanceToPoint: {
        double s = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
          const double dxt = x[j] - vec_(static_cast<Eigen::Index>(j));
          s += dxt * dxt;
        }
        v = std::sqrt(s);
        break;
      }
      case TargetKind::SoftMin: {
        // Stabilized around the minimum coordinate.
        double mn = x[0];
        for (double xi : x) mn = std::min(mn, xi);
        double s = 0.0;
        for (double xi : x) s += std::exp(-beta_ * (xi - mn));
        v = mn - std::log(s) / beta_;
        break;
      }
      case TargetKind::Linear: {
        double s = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j)
          s += vec_(static_cast<Eigen::Index>(j)) * x[j];
        v = s;
        break;
      }
      case TargetKind::BasisPolynomial:
        v = poly_->eval(*poly_basis_, x);
        break;
      case TargetKind::Custom:
        v = fn_(x);
        break;
    }
    return v - offset_;
  }

  double eval(std::span<const double> x) const { return (*this)(x); }

  // Returns a copy with `c` added to the subtracted constant.
  TargetFunction shifted_by(double c) const {
    TargetFunction t = *this;
    t.offset_ += c;
    return t;
  }

 private:
  TargetKind kind_ = TargetKind::Custom;
  int dimension_ = 1;
  double lipschitz_ = 1.0;
  bool lipschitz_override_ = false;
  double offset_ = 0.0;
  double beta_ = 2.0;
  Eigen::VectorXd vec_;
  std::shared_ptr<const PolyInBasis> poly_;
  std::shared_ptr<const TensorBasis> poly_basis_;
  std::function<double(std::span<const double>)> fn_;
  std::string label_;
};

inline double target_eval(const TargetFunction& target, std::span<const double> x) {
  return target(x);
}

// Fixed internal seed for centering, part of the reproducibility contract.
inline constexpr Seed kCenteringSeed = 0x11c3a57ab1f0c2edULL;

// Subtracts a Monte Carlo estimate of E_mu f (1e6 samples, fixed internal
// seed) and records the estimate with its standard error.
inline TargetFunction target_centered(const TargetFunction& target,
                                      const MeasureSpec& measure,
                                      CenteringInfo* info = nullptr,
                                      std::int64_t n_mc = 1'000'000) {
  require(target.dimension() == measure.dimension,
          "target_centered: dimension mismatch");
  RunningStats stats;
  std::vector<double> x(static_cast<std::size_t>(measure.dimension));
  const double scale = measure.coord_scale(), shift = measure.coord_shift();
  for (std::int64_t i = 0; i < n_mc; ++i) {
    RandomStream rs(derive_seed(kCenteringSeed, StreamPurpose::Centering,
                                static_cast<std::uint64_t>(i)));
    for (int j = 0; j < measure.dimension; ++j)
      x[static_cast<std::size_t>(j)] =
          scale * detail::draw_raw_coordinate(measure.kind, rs) + shift;
    stats.add(target(x));
  }
  if (info != nullptr) {
    info->mean_estimate = stats.mean();
    info->stderr = stats.stderr_of_mean();
    info->n_mc = n_mc;
  }
  return target.shifted_by(stats.mean());
}

}  // namespace lipreg

#pragma once

// Regression data Y_i = f(X_i) + xi_i with Gaussian noise. The design and
// noise streams are derived independently from the dataset seed, so swapping
// one never perturbs the other.

#include <Eigen/Dense>

#include "lipreg/measures.hpp"
#include "lipreg/targets.hpp"

namespace lipreg {

struct Dataset {
  MeasureSpec measure;
  SampleMatrix x;
  Eigen::VectorXd y;
  double sigma = 0.0;
  TargetFunction target;
  Seed seed = 0;

  Eigen::Index n() const { return x.rows(); }
  int dimension() const { return static_cast<int>(x.cols()); }
};

inline Dataset make_dataset(const MeasureSpec& measure, const TargetFunction& target,
                            std::int64_t n, double sigma, Seed design_seed,
                            Seed noise_seed, int threads = 1) {
  require(sigma >= 0.0, "make_dataset: sigma must be >= 0");
  require(target.dimension() == measure.dimension,
          "make_dataset: target dimension mismatch");
  Dataset data;
  data.measure = measure;
  data.x = sample(measure, n, design_seed, threads);
  data.sigma = sigma;
  data.target = target;
  data.seed = design_seed;
  data.y.resize(n);
  std::vector<double> xi(static_cast<std::size_t>(measure.dimension));
  for (std::int64_t i = 0; i < n; ++i) {
    for (int j = 0; j < measure.dimension; ++j)
      xi[static_cast<std::size_t>(j)] = data.x.x(i, j);
    double noise = 0.0;
    if (sigma > 0.0) {
      RandomStream rs(derive_seed(noise_seed, StreamPurpose::Noise,
                                  static_cast<std::uint64_t>(i)));
      noise = sigma * rs.next_normal();
    }
    data.y(i) = target(xi) + noise;
  }
  return data;
}

inline Dataset make_dataset(const MeasureSpec& measure, const TargetFunction& target,
                            std::int64_t n, double sigma, Seed seed,
                            int threads = 1) {
  return make_dataset(measure, target, n, sigma,
                      derive_seed(seed, StreamPurpose::Design),
                      derive_seed(seed, StreamPurpose::Noise), threads);
}

}  // namespace lipreg

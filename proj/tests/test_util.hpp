#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "lipreg/measures.hpp"
#include "lipreg/stats.hpp"

namespace lipreg::test {

inline double opnorm_minus_identity(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      a - Eigen::MatrixXd::Identity(a.rows(), a.cols()));
  double dev = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    dev = std::max(dev, std::abs(es.eigenvalues()(i)));
  return dev;
}

// Gram matrix of the recurrence's polynomials up to max_degree under a
// quadrature rule for the same measure.
inline Eigen::MatrixXd gram_by_quadrature(const CoordinateRecurrence& rec,
                                          const QuadratureRule& rule,
                                          int max_degree) {
  const int k = max_degree + 1;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(k, k);
  std::vector<double> vals(static_cast<std::size_t>(k));
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    rec.eval(rule.nodes[q], max_degree, vals.data());
    for (int i = 0; i < k; ++i)
      for (int j = 0; j <= i; ++j)
        gram(i, j) += rule.weights[q] * vals[static_cast<std::size_t>(i)] *
                      vals[static_cast<std::size_t>(j)];
  }
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) gram(i, j) = gram(j, i);
  return gram;
}

// Monte Carlo Gram check: every entry of E[p_i p_j] - delta_ij within
// band_sigmas standard errors. Returns the worst |z| score.
inline double gram_mc_worst_z(const MeasureSpec& measure, int max_degree,
                              std::int64_t n_mc, Seed seed) {
  const CoordinateRecurrence rec = coordinate_recurrence(measure, max_degree);
  const int k = max_degree + 1;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(k, k);
  Eigen::MatrixXd sum2 = Eigen::MatrixXd::Zero(k, k);
  std::vector<double> vals(static_cast<std::size_t>(k));
  MeasureSpec one_d = measure;
  one_d.dimension = 1;
  const SampleMatrix x = sample(one_d, n_mc, seed);
  for (std::int64_t s = 0; s < n_mc; ++s) {
    rec.eval(x.x(s, 0), max_degree, vals.data());
    for (int i = 0; i < k; ++i)
      for (int j = 0; j <= i; ++j) {
        const double v = vals[static_cast<std::size_t>(i)] *
                         vals[static_cast<std::size_t>(j)];
        sum(i, j) += v;
        sum2(i, j) += v * v;
      }
  }
  double worst = 0.0;
  const double n = static_cast<double>(n_mc);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j <= i; ++j) {
      const double mu = sum(i, j) / n;
      const double var = std::max(0.0, sum2(i, j) / n - mu * mu);
      const double se = std::sqrt(var / n);
      const double target = i == j ? 1.0 : 0.0;
      if (se > 0.0) worst = std::max(worst, std::abs(mu - target) / se);
    }
  return worst;
}

}  // namespace lipreg::test

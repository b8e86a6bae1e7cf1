#pragma once

// Gauss quadrature machinery: Golub-Welsch on a symmetric tridiagonal Jacobi
// matrix, plus composite panel rules used to discretize densities for the
// Stieltjes construction of orthonormal-polynomial recurrences.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "lipreg/common.hpp"

namespace lipreg {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss rule for the measure whose orthonormal polynomials satisfy
//   x p_k = beta[k+1] p_{k+1} + alpha[k] p_k + beta[k] p_{k-1}.
// `mass` is the total mass of the measure (1 for probability measures,
// 2 for Lebesgue measure on [-1,1]).
inline QuadratureRule golub_welsch(std::span<const double> alpha,
                                   std::span<const double> beta, int n_nodes,
                                   double mass = 1.0) {
  require(n_nodes >= 1, "golub_welsch: need >= 1 node");
  require(alpha.size() >= static_cast<std::size_t>(n_nodes) &&
              beta.size() >= static_cast<std::size_t>(n_nodes),
          "golub_welsch: recurrence too short");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n_nodes, n_nodes);
  for (int k = 0; k < n_nodes; ++k) {
    jacobi(k, k) = alpha[static_cast<std::size_t>(k)];
    if (k + 1 < n_nodes) {
      const double b = beta[static_cast<std::size_t>(k) + 1];
      jacobi(k, k + 1) = b;
      jacobi(k + 1, k) = b;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n_nodes));
  rule.weights.resize(static_cast<std::size_t>(n_nodes));
  for (int k = 0; k < n_nodes; ++k) {
    rule.nodes[static_cast<std::size_t>(k)] = es.eigenvalues()(k);
    const double v0 = es.eigenvectors()(0, k);
    rule.weights[static_cast<std::size_t>(k)] = mass * v0 * v0;
  }
  return rule;
}

// Gauss-Legendre on [-1,1] w.r.t. Lebesgue measure (weights sum to 2).
inline QuadratureRule gauss_legendre(int n_nodes) {
  std::vector<double> alpha(static_cast<std::size_t>(n_nodes), 0.0);
  std::vector<double> beta(static_cast<std::size_t>(n_nodes) + 1, 0.0);
  for (int k = 1; k <= n_nodes; ++k)
    beta[static_cast<std::size_t>(k)] =
        static_cast<double>(k) / std::sqrt(4.0 * k * k - 1.0);
  return golub_welsch(alpha, beta, n_nodes, 2.0);
}

// Gauss-Hermite for the standard normal density (probabilists' convention).
inline QuadratureRule gauss_hermite(int n_nodes) {
  std::vector<double> alpha(static_cast<std::size_t>(n_nodes), 0.0);
  std::vector<double> beta(static_cast<std::size_t>(n_nodes) + 1, 0.0);
  for (int k = 1; k <= n_nodes; ++k)
    beta[static_cast<std::size_t>(k)] = std::sqrt(static_cast<double>(k));
  return golub_welsch(alpha, beta, n_nodes, 1.0);
}

// Composite rule: `nodes_per_panel`-point Gauss-Legendre on each panel
// [breaks[i], breaks[i+1]], with the density folded into the weights.
inline QuadratureRule composite_density_rule(
    std::span<const double> breaks, int nodes_per_panel,
    const std::function<double(double)>& density) {
  require(breaks.size() >= 2, "composite rule: need >= 1 panel");
  const QuadratureRule base = gauss_legendre(nodes_per_panel);
  QuadratureRule rule;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double lo = breaks[p], hi = breaks[p + 1];
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (std::size_t j = 0; j < base.nodes.size(); ++j) {
      const double x = mid + half * base.nodes[j];
      rule.nodes.push_back(x);
      rule.weights.push_back(half * base.weights[j] * density(x));
    }
  }
  return rule;
}

inline std::vector<double> uniform_breaks(double lo, double hi, int panels) {
  std::vector<double> b(static_cast<std::size_t>(panels) + 1);
  for (int i = 0; i <= panels; ++i)
    b[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / panels;
  return b;
}

}  // namespace lipreg

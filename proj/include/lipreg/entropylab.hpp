#pragma once

// The lower-bound construction: random multilinear polynomial packings,
// truncation, Ornstein-Uhlenbeck smoothing, separation certification, and the
// KL / minimax calculators.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "lipreg/basis.hpp"
#include "lipreg/measures.hpp"
#include "lipreg/stats.hpp"

namespace lipreg {

// Multilinear monomials X_alpha = prod_{i in alpha} x_i over all size-m
// subsets of {1..d}, in lexicographic subset order.
class MultilinearBasis {
 public:
  static MultilinearBasis enumerate(int d, int m) {
    require(d >= 1 && m >= 1, "MultilinearBasis: need d, m >= 1");
    if (static_cast<long long>(m) * m > d)
      throw InputError("MultilinearBasis: requires m^2 <= d");
    MultilinearBasis b;
    b.d_ = d;
    b.m_ = m;
    std::vector<std::uint16_t> cur(static_cast<std::size_t>(m));
    b.emit(cur, 0, 0);
    return b;
  }

  int dimension() const { return d_; }
  int degree() const { return m_; }
  std::size_t size() const { return subsets_.size() / static_cast<std::size_t>(m_); }

  std::span<const std::uint16_t> subset(std::size_t s) const {
    return {subsets_.data() + s * static_cast<std::size_t>(m_),
            static_cast<std::size_t>(m_)};
  }

  // P_theta(x) = sum_alpha theta_alpha X_alpha(x).
  double eval(std::span<const double> theta, std::span<const double> x) const {
    require(theta.size() == size(), "multilinear eval: wrong theta length");
    require(static_cast<int>(x.size()) == d_, "multilinear eval: wrong point dim");
    double acc = 0.0;
    for (std::size_t s = 0; s < size(); ++s) {
      double prod = theta[s];
      for (auto c : subset(s)) prod *= x[c];
      acc += prod;
    }
    return acc;
  }

  // Monomial matrix M(i, s) = X_{alpha_s}(points row i).
  void monomials(const Eigen::MatrixXd& points, Eigen::MatrixXd& out) const {
    const Eigen::Index rows = points.rows();
    out.resize(rows, static_cast<Eigen::Index>(size()));
    for (std::size_t s = 0; s < size(); ++s) {
      const auto sub = subset(s);
      for (Eigen::Index i = 0; i < rows; ++i) {
        double prod = 1.0;
        for (auto c : sub) prod *= points(i, c);
        out(i, static_cast<Eigen::Index>(s)) = prod;
      }
    }
  }

  // |grad P_theta|^2 at x.
  double gradient_sq(std::span<const double> theta, std::span<const double> x) const {
    std::vector<double> grad(static_cast<std::size_t>(d_), 0.0);
    for (std::size_t s = 0; s < size(); ++s) {
      const auto sub = subset(s);
      for (std::size_t drop = 0; drop < sub.size(); ++drop) {
        double prod = theta[s];
        for (std::size_t j = 0; j < sub.size(); ++j)
          if (j != drop) prod *= x[sub[j]];
        grad[sub[drop]] += prod;
      }
    }
    double acc = 0.0;
    for (double g : grad) acc += g * g;
    return acc;
  }

 private:
  void emit(std::vector<std::uint16_t>& cur, std::size_t pos, int start) {
    if (pos == cur.size()) {
      subsets_.insert(subsets_.end(), cur.begin(), cur.end());
      return;
    }
    for (int c = start; c <= d_ - static_cast<int>(cur.size() - pos); ++c) {
      cur[pos] = static_cast<std::uint16_t>(c);
      emit(cur, pos + 1, c + 1);
    }
  }

  int d_ = 0;
  int m_ = 0;
  std::vector<std::uint16_t> subsets_;
};

inline double multilinear_eval(std::span<const double> theta,
                               std::span<const double> x,
                               const MultilinearBasis& basis) {
  return basis.eval(theta, x);
}

// N Gaussian vectors with covariance (1/D0) I, one derived stream per vector.
inline Eigen::MatrixXd sample_thetas(std::size_t d0, int n_vectors, Seed seed) {
  require(n_vectors >= 1, "sample_thetas: need N >= 1");
  require(d0 >= 1, "sample_thetas: need D0 >= 1");
  Eigen::MatrixXd thetas(n_vectors, static_cast<Eigen::Index>(d0));
  const double sd = 1.0 / std::sqrt(static_cast<double>(d0));
  for (int i = 0; i < n_vectors; ++i) {
    RandomStream rs(derive_seed(seed, StreamPurpose::Theta,
                                static_cast<std::uint64_t>(i)));
    for (std::size_t k = 0; k < d0; ++k)
      thetas(i, static_cast<Eigen::Index>(k)) = sd * rs.next_normal();
  }
  return thetas;
}

struct FourthMomentResult {
  std::vector<double> per_theta;  // MC estimate of E P_theta^4 per vector
  double average = 0.0;
  double stderr = 0.0;  // across-theta standard error of the average
};

// E P_theta^4 per theta (independent draws per theta) and the average.
inline FourthMomentResult fourth_moment_check(const Eigen::MatrixXd& thetas,
                                              const MeasureSpec& measure,
                                              const MultilinearBasis& basis,
                                              std::int64_t n_mc_per_theta, Seed seed,
                                              int threads = 1) {
  require(n_mc_per_theta >= 100, "fourth_moment_check: n_mc too small");
  const int n_thetas = static_cast<int>(thetas.rows());
  FourthMomentResult out;
  out.per_theta.assign(static_cast<std::size_t>(n_thetas), 0.0);
  parallel_for(static_cast<std::size_t>(n_thetas), threads, [&](std::size_t ti) {
    const SampleMatrix x = sample(measure, n_mc_per_theta,
                                  derive_seed(seed, StreamPurpose::Replication, ti));
    std::vector<double> theta(static_cast<std::size_t>(thetas.cols()));
    for (Eigen::Index k = 0; k < thetas.cols(); ++k)
      theta[static_cast<std::size_t>(k)] = thetas(static_cast<Eigen::Index>(ti), k);
    std::vector<double> pt(static_cast<std::size_t>(measure.dimension));
    double acc = 0.0;
    for (std::int64_t i = 0; i < n_mc_per_theta; ++i) {
      for (int j = 0; j < measure.dimension; ++j)
        pt[static_cast<std::size_t>(j)] = x.x(i, j);
      const double v = basis.eval(theta, pt);
      acc += v * v * v * v;
    }
    out.per_theta[ti] = acc / static_cast<double>(n_mc_per_theta);
  });
  out.average = mean(out.per_theta);
  out.stderr = stderr_of_mean(out.per_theta);
  return out;
}

// P restricted to {|P| <= lambda}; zero outside.
template <class F>
auto truncate(F f, double lambda) {
  require(lambda > 0.0, "truncate: lambda must be > 0");
  return [f = std::move(f), lambda](std::span<const double> x) {
    const double v = f(x);
    return std::abs(v) <= lambda ? v : 0.0;
  };
}

inline double truncate_value(double v, double lambda) {
  return std::abs(v) <= lambda ? v : 0.0;
}

// Monte Carlo ||f - f|_lambda||_{L2(mu)} = sqrt(E[f^2 1{|f|>lambda}]).
template <class F>
double truncation_l2_distance(F&& f, double lambda, const MeasureSpec& measure,
                              std::int64_t n_mc, Seed seed) {
  const SampleMatrix x = sample(measure, n_mc, seed);
  std::vector<double> pt(static_cast<std::size_t>(measure.dimension));
  double acc = 0.0;
  for (std::int64_t i = 0; i < n_mc; ++i) {
    for (int j = 0; j < measure.dimension; ++j)
      pt[static_cast<std::size_t>(j)] = x.x(i, j);
    const double v = f(std::span<const double>(pt));
    if (std::abs(v) > lambda) acc += v * v;
  }
  return std::sqrt(acc / static_cast<double>(n_mc));
}

struct KlEstimate {
  double value = 0.0;
  double stderr = 0.0;
};

// KL divergence between the observation laws of two regression functions at
// fixed design law and Gaussian noise: (n / 2 sigma^2) ||f1 - f2||^2_{L2(mu)}.
template <class F1, class F2>
KlEstimate kl_observations(F1&& f1, F2&& f2, std::int64_t n, double sigma,
                           const MeasureSpec& measure, std::int64_t n_mc,
                           Seed seed) {
  if (!(sigma > 0.0))
    throw InputError("kl_observations: sigma must be > 0 (KL infinite)");
  require(n >= 1, "kl_observations: n must be >= 1");
  require(n_mc >= 1000, "kl_observations: n_mc must be >= 1e3");
  const SampleMatrix x = sample(measure, n_mc, seed);
  std::vector<double> pt(static_cast<std::size_t>(measure.dimension));
  RunningStats stats;
  for (std::int64_t i = 0; i < n_mc; ++i) {
    for (int j = 0; j < measure.dimension; ++j)
      pt[static_cast<std::size_t>(j)] = x.x(i, j);
    const double diff = f1(std::span<const double>(pt)) -
                        f2(std::span<const double>(pt));
    stats.add(diff * diff);
  }
  const double factor = static_cast<double>(n) / (2.0 * sigma * sigma);
  return KlEstimate{factor * stats.mean(), factor * stats.stderr_of_mean()};
}

struct MinimaxBound {
  double delta2 = 0.0;
  bool applicable = false;
  bool noise_in_range = false;
};

// Fano/Yang-Barron lower bound calculator: delta^2 = c log d / ((1+kappa)
// log n), applicable while n <= exp(c d^{2 eta} log d / (1+kappa)) and the
// noise satisfies n^{-kappa} <= sigma^2 <= n.
inline MinimaxBound minimax_lower_bound(std::uint64_t n, int d, double sigma,
                                        double kappa, double eta = 0.25,
                                        double c = 1.0) {
  require(n >= 2 && d >= 2, "minimax_lower_bound: need n, d >= 2");
  require(sigma > 0.0, "minimax_lower_bound: sigma must be > 0");
  require(kappa >= 0.0 && eta > 0.0 && c > 0.0,
          "minimax_lower_bound: kappa >= 0, eta > 0, c > 0");
  const double log_n = std::log(static_cast<double>(n));
  const double log_d = std::log(static_cast<double>(d));
  MinimaxBound out;
  const double log_sigma2 = 2.0 * std::log(sigma);
  out.noise_in_range = (-kappa * log_n <= log_sigma2 + 1e-12) &&
                       (log_sigma2 <= log_n + 1e-12);
  out.delta2 = c * log_d / ((1.0 + kappa) * log_n);
  const double range = c * std::pow(static_cast<double>(d), 2.0 * eta) * log_d /
                       (1.0 + kappa);
  out.applicable = out.noise_in_range && log_n <= range + 1e-12;
  return out;
}

struct PackingConfig {
  int d = 40;
  int m = 2;
  int n_family = -1;        // N; -1 -> min(ceil(e^{D0/256}), 50)
  double lambda = -1.0;     // -1 -> 16 sqrt(2) sqrt(C0_hat)
  double t = -1.0;          // -1 -> 1/(32 m)
  Seed seed = 1;
  std::int64_t n_mc_fourth = 20'000;  // per theta
  std::int64_t n_outer = 400;         // outer x draws for pair distances
  std::int64_t n_inner = 400;         // Mehler draws per outer point
  std::int64_t n_pairs_lip = 1000;    // random pairs for Lipschitz quotients
  std::int64_t n_inner_lip = 128;     // Mehler draws per quotient endpoint
  int threads = 1;
};

struct PairDistance {
  int i = 0;
  int j = 0;
  double theta_dist = 0.0;
  double smoothed_dist = 0.0;
  double smoothed_stderr = 0.0;
};

struct PackingResult {
  PackingConfig config;       // resolved values
  std::size_t d0 = 0;         // binom(d, m)
  double c0_hat = 0.0;        // measured averaged fourth moment
  double c0_hat_stderr = 0.0;
  double lambda = 0.0;
  double t = 0.0;
  double lipschitz_bound = 0.0;  // lambda / sqrt(t)
  Eigen::MatrixXd thetas;
  std::vector<PairDistance> pairs;
  double min_theta_dist = 0.0;
  double min_smoothed_dist = 0.0;       // over pairs
  double min_smoothed_dist_margin = 0.0;  // dist - 4 stderr, minimized
  double max_lip_quotient = 0.0;
  bool theta_separation_ok = false;
  bool distance_ok = false;
  bool lipschitz_ok = false;
  bool lipschitz_skipped = false;  // t = 0: no smoothing, quotient unbounded
  bool degenerate = false;         // N < 2: pairwise checks vacuous
  double implied_epsilon = 0.0;    // separation of the 1-Lipschitz rescaling
  double log_family_size = 0.0;
  bool entropy_ok = false;
  bool all_ok = false;
};

// Executes the construction f_i = T_t(P_i|_lambda) for Gaussian mu and
// certifies (a) pairwise theta separation > 1, (b) pairwise smoothed L2
// distance >= 1/5 within Monte Carlo bands, (c) empirical Lipschitz quotients
// <= lambda/sqrt(t). Certification failures are recorded as flags.
inline PackingResult build_packing(const PackingConfig& cfg_in) {
  PackingConfig cfg = cfg_in;
  const MultilinearBasis basis = MultilinearBasis::enumerate(cfg.d, cfg.m);
  const std::size_t d0 = basis.size();
  const MeasureSpec measure = MeasureSpec::gaussian(cfg.d);

  PackingResult out;
  if (cfg.n_family < 0) {
    const double suggested = std::exp(static_cast<double>(d0) / 256.0);
    cfg.n_family = static_cast<int>(
        std::min(50.0, std::max(2.0, std::ceil(suggested))));
  }
  if (cfg.t < 0.0) cfg.t = 1.0 / (32.0 * cfg.m);
  const int n_family = cfg.n_family;
  out.d0 = d0;

  out.thetas = sample_thetas(d0, n_family, cfg.seed);

  // Measured fourth-moment constant drives the truncation level.
  const FourthMomentResult fourth = fourth_moment_check(
      out.thetas, measure, basis, cfg.n_mc_fourth,
      derive_seed(cfg.seed, StreamPurpose::Generic, 4), cfg.threads);
  out.c0_hat = fourth.average;
  out.c0_hat_stderr = fourth.stderr;
  if (cfg.lambda < 0.0)
    cfg.lambda = 16.0 * std::sqrt(2.0) * std::sqrt(std::max(out.c0_hat, 1e-12));
  out.config = cfg;
  out.lambda = cfg.lambda;
  out.t = cfg.t;
  out.lipschitz_bound =
      cfg.t > 0.0 ? cfg.lambda / std::sqrt(cfg.t)
                  : std::numeric_limits<double>::infinity();

  out.degenerate = n_family < 2;

  // (a) pairwise theta distances.
  out.min_theta_dist = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_family; ++i)
    for (int j = i + 1; j < n_family; ++j) {
      PairDistance pd;
      pd.i = i;
      pd.j = j;
      pd.theta_dist = (out.thetas.row(i) - out.thetas.row(j)).norm();
      out.min_theta_dist = std::min(out.min_theta_dist, pd.theta_dist);
      out.pairs.push_back(pd);
    }
  out.theta_separation_ok = out.degenerate ? false : out.min_theta_dist > 1.0;

  // (b) pairwise smoothed distances with common random numbers: the same
  // outer x draws and the same Mehler draws serve every pair, and the inner
  // Monte Carlo variance is subtracted so the squared-distance estimate is
  // unbiased.
  const double decay = std::exp(-cfg.t);
  const double noise_sd = std::sqrt(std::max(0.0, 1.0 - decay * decay));
  const std::int64_t n_outer = cfg.n_outer;
  const std::int64_t n_inner = cfg.t > 0.0 ? cfg.n_inner : 1;
  if (!out.degenerate) {
    // Truncated values of every function at every smoothed point, kept per
    // outer draw: values[ix] is (n_inner x N).
    std::vector<Eigen::MatrixXd> values(static_cast<std::size_t>(n_outer));
    const Seed outer_seed = derive_seed(cfg.seed, StreamPurpose::Eval);
    const Seed inner_seed = derive_seed(cfg.seed, StreamPurpose::Smoothing);
    parallel_for(static_cast<std::size_t>(n_outer), cfg.threads, [&](std::size_t ix) {
      Eigen::MatrixXd pts(n_inner, cfg.d);
      std::vector<double> x(static_cast<std::size_t>(cfg.d));
      RandomStream rx(derive_seed(outer_seed, StreamPurpose::Eval, ix));
      for (int j = 0; j < cfg.d; ++j) x[static_cast<std::size_t>(j)] = rx.next_normal();
      for (std::int64_t k = 0; k < n_inner; ++k) {
        RandomStream rg(derive_seed(inner_seed, StreamPurpose::Smoothing, ix,
                                    static_cast<std::uint64_t>(k)));
        for (int j = 0; j < cfg.d; ++j)
          pts(k, j) = cfg.t > 0.0
                          ? decay * x[static_cast<std::size_t>(j)] +
                                noise_sd * rg.next_normal()
                          : x[static_cast<std::size_t>(j)];
      }
      Eigen::MatrixXd mono;
      basis.monomials(pts, mono);
      Eigen::MatrixXd v = mono * out.thetas.transpose();  // n_inner x N
      for (Eigen::Index r = 0; r < v.rows(); ++r)
        for (Eigen::Index c = 0; c < v.cols(); ++c)
          v(r, c) = truncate_value(v(r, c), cfg.lambda);
      values[ix] = std::move(v);
    });

    out.min_smoothed_dist = std::numeric_limits<double>::infinity();
    out.min_smoothed_dist_margin = std::numeric_limits<double>::infinity();
    for (auto& pd : out.pairs) {
      RunningStats per_x;  // unbiased per-outer estimates of (f_i - f_j)^2(x)
      for (std::int64_t ix = 0; ix < n_outer; ++ix) {
        const auto& v = values[static_cast<std::size_t>(ix)];
        RunningStats inner;
        for (std::int64_t k = 0; k < n_inner; ++k)
          inner.add(v(k, pd.i) - v(k, pd.j));
        const double correction =
            n_inner > 1 ? inner.variance() / static_cast<double>(n_inner) : 0.0;
        per_x.add(inner.mean() * inner.mean() - correction);
      }
      const double est2 = per_x.mean();
      const double se2 = per_x.stderr_of_mean();
      pd.smoothed_dist = std::sqrt(std::max(0.0, est2));
      pd.smoothed_stderr =
          pd.smoothed_dist > 1e-12 ? se2 / (2.0 * pd.smoothed_dist) : std::sqrt(se2);
      out.min_smoothed_dist = std::min(out.min_smoothed_dist, pd.smoothed_dist);
      out.min_smoothed_dist_margin =
          std::min(out.min_smoothed_dist_margin,
                   pd.smoothed_dist + 4.0 * pd.smoothed_stderr);
    }
    out.distance_ok = out.min_smoothed_dist_margin >= 0.2;
  }

  // (c) empirical Lipschitz quotients of the smoothed functions, common
  // Mehler draws at both endpoints of each pair.
  if (cfg.t <= 0.0) {
    out.lipschitz_skipped = true;
  } else if (!out.degenerate) {
    const Seed pair_seed = derive_seed(cfg.seed, StreamPurpose::Pairs);
    const std::int64_t n_pairs = cfg.n_pairs_lip;
    const std::int64_t k_lip = cfg.n_inner_lip;
    std::vector<double> max_quot(static_cast<std::size_t>(n_pairs), 0.0);
    parallel_for(static_cast<std::size_t>(n_pairs), cfg.threads, [&](std::size_t q) {
      RandomStream rp(derive_seed(pair_seed, StreamPurpose::Pairs, q));
      std::vector<double> x(static_cast<std::size_t>(cfg.d)),
          y(static_cast<std::size_t>(cfg.d));
      for (int j = 0; j < cfg.d; ++j) x[static_cast<std::size_t>(j)] = rp.next_normal();
      // Separation scale log-uniform over two decades.
      const double delta = std::exp(std::log(0.05) +
                                    rp.next_uniform() * (std::log(5.0) - std::log(0.05)));
      double norm = 0.0;
      for (int j = 0; j < cfg.d; ++j) {
        y[static_cast<std::size_t>(j)] = rp.next_normal();
        norm += y[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(j)];
      }
      norm = std::sqrt(norm);
      for (int j = 0; j < cfg.d; ++j)
        y[static_cast<std::size_t>(j)] =
            x[static_cast<std::size_t>(j)] + delta * y[static_cast<std::size_t>(j)] / norm;

      Eigen::MatrixXd pts(2 * k_lip, cfg.d);
      for (std::int64_t k = 0; k < k_lip; ++k) {
        RandomStream rg(derive_seed(pair_seed, StreamPurpose::Smoothing, q,
                                    static_cast<std::uint64_t>(k)));
        for (int j = 0; j < cfg.d; ++j) {
          const double g = rg.next_normal();
          pts(k, j) = decay * x[static_cast<std::size_t>(j)] + noise_sd * g;
          pts(k_lip + k, j) = decay * y[static_cast<std::size_t>(j)] + noise_sd * g;
        }
      }
      Eigen::MatrixXd mono;
      basis.monomials(pts, mono);
      Eigen::MatrixXd v = mono * out.thetas.transpose();
      double worst = 0.0;
      for (int i = 0; i < n_family; ++i) {
        double sx = 0.0, sy = 0.0;
        for (std::int64_t k = 0; k < k_lip; ++k) {
          sx += truncate_value(v(k, i), cfg.lambda);
          sy += truncate_value(v(k_lip + k, i), cfg.lambda);
        }
        worst = std::max(worst, std::abs(sx - sy) /
                                    (static_cast<double>(k_lip) * delta));
      }
      max_quot[q] = worst;
    });
    for (double v : max_quot) out.max_lip_quotient = std::max(out.max_lip_quotient, v);
    out.lipschitz_ok = out.max_lip_quotient <= out.lipschitz_bound;
  }

  // Entropy bookkeeping for the rescaled 1-Lipschitz family.
  out.log_family_size = std::log(static_cast<double>(n_family));
  if (std::isfinite(out.lipschitz_bound) && out.lipschitz_bound > 0.0)
    out.implied_epsilon = out.min_smoothed_dist / out.lipschitz_bound;
  const bool flags_ok =
      out.theta_separation_ok && out.distance_ok &&
      (out.lipschitz_ok || out.lipschitz_skipped) && !out.degenerate;
  out.entropy_ok =
      out.log_family_size >= (flags_ok ? static_cast<double>(d0) / 256.0 : 0.0);
  out.all_ok = flags_ok && !out.lipschitz_skipped;
  return out;
}

}  // namespace lipreg

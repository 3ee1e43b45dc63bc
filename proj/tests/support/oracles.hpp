// Independent reference implementations used as test oracles.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include <Eigen/Dense>

namespace oracle {

using Vec = Eigen::VectorXd;
using Row = Eigen::RowVectorXd;

inline Vec central_diff(const std::function<double(const Vec&)>& fn, const Vec& x, double h) {
  Vec g(x.size());
  Vec probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    probe(k) = x(k) + h;
    const double up = fn(probe);
    probe(k) = x(k) - h;
    const double down = fn(probe);
    probe(k) = x(k);
    g(k) = (up - down) / (2.0 * h);
  }
  return g;
}

inline double rel_l2(const Vec& a, const Vec& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

/// Euclidean simplex projection by bisection on the threshold tau with
/// sum(max(v - tau, 0)) = 1.
inline Row bisect_simplex_projection(const Row& v) {
  double lo = v.minCoeff() - 1.0;
  double hi = v.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double mass = (v.array() - mid).max(0.0).sum();
    (mass > 1.0 ? lo : hi) = mid;
  }
  return (v.array() - 0.5 * (lo + hi)).max(0.0).matrix();
}

/// Objective of one pseudo-label row: alpha_p CE(h, nu) + alpha_r KL(nu, uniform).
inline double pseudo_label_objective(const Row& nu, const Row& h, double alpha_p, double alpha_r) {
  const double log_c = std::log(static_cast<double>(h.size()));
  double v = 0.0;
  for (Eigen::Index c = 0; c < h.size(); ++c) {
    v -= alpha_p * nu(c) * std::log(h(c));
    if (nu(c) > 0.0) v += alpha_r * nu(c) * (std::log(nu(c)) + log_c);
  }
  return v;
}

/// Euclidean projection onto {nu : nu >= floor, sum(nu) = 1}, by bisection on
/// tau with sum(max(v - tau, floor)) = 1.
inline Row bisect_floored_projection(const Row& v, double floor) {
  double lo = v.minCoeff() - 1.0;
  double hi = v.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double mass = (v.array() - mid).max(floor).sum();
    (mass > 1.0 ? lo : hi) = mid;
  }
  return (v.array() - 0.5 * (lo + hi)).max(floor).matrix();
}

/// Projected gradient descent, run until the gradient mapping at a fixed
/// reference step falls below `tol`. Iterates live on the simplex with every
/// entry at least `floor`, where the entropy term is smooth; `floor` must sit
/// below the minimizer's smallest entry. Steps backtrack on the local
/// Lipschitz test <grad(next) - grad(nu), d> <= |d|^2 / step, which stays
/// well conditioned near the minimizer where objective differences do not.
inline Row projected_gradient_pseudo_label(const Row& h, double alpha_p, double alpha_r,
                                           double tol = 1e-8, double floor = 1e-10,
                                           int max_iter = 1'000'000) {
  const Eigen::Index C = h.size();
  const double log_c = std::log(static_cast<double>(C));
  const auto gradient = [&](const Row& nu) {
    Row g(C);
    for (Eigen::Index c = 0; c < C; ++c) {
      g(c) = -alpha_p * std::log(h(c)) + alpha_r * (std::log(nu(c)) + log_c + 1.0);
    }
    return g;
  };
  const double reference_step = 1e-2;
  Row nu = Row::Constant(C, 1.0 / static_cast<double>(C));
  Row g = gradient(nu);
  double step = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    const Row probe = bisect_floored_projection(nu - reference_step * g, floor);
    if ((probe - nu).lpNorm<Eigen::Infinity>() / reference_step < tol) break;
    step *= 2.0;
    Row next;
    Row g_next;
    for (;;) {
      next = bisect_floored_projection(nu - step * g, floor);
      g_next = gradient(next);
      const Row d = next - nu;
      if ((g_next - g).dot(d) <= d.squaredNorm() / step) break;
      step *= 0.5;
    }
    nu = next;
    g = g_next;
  }
  return nu;
}

/// Row drawn uniformly from the simplex with every entry at least `floor`.
inline Row random_simplex_row(std::mt19937_64& rng, Eigen::Index C, double floor = 0.0) {
  std::exponential_distribution<double> e(1.0);
  Row r(C);
  for (Eigen::Index c = 0; c < C; ++c) r(c) = e(rng);
  r /= r.sum();
  return (r.array() * (1.0 - floor * static_cast<double>(C)) + floor).matrix();
}

}  // namespace oracle

#pragma once

// Brute-force reference for the length-controlled fit. It shares no code
// with the library: the objective, the standardization and the search are
// written out here from the model definition.

#include <cmath>
#include <cstddef>
#include <vector>

namespace skillmix::testing {

struct OracleFit {
  double theta0 = 0.0;
  double theta_len = 0.0;
  double lc_wr = 0.0;
};

inline double oracle_loglik(const std::vector<int>& y, const std::vector<double>& x, double a, double b,
                            double lambda) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double z = a + b * x[i];
    const double p = 1.0 / (1.0 + std::exp(-z));
    // Clamp keeps log finite far from the optimum; it never binds near it.
    const double q = y[i] ? p : 1.0 - p;
    s += std::log(q > 1e-300 ? q : 1e-300);
  }
  return s - 0.5 * lambda * b * b;
}

/// Zooming 2-D grid search. Each level evaluates a 41x41 grid, recenters
/// on the best point, and shrinks the window unless the best point sits on
/// the boundary, in which case the window grows instead.
inline OracleFit oracle_fit(const std::vector<int>& y, const std::vector<double>& diffs, double lambda = 1e-4) {
  double ss = 0.0;
  for (double d : diffs) ss += d * d;
  const double scale = ss > 0 ? std::sqrt(ss / static_cast<double>(diffs.size())) : 1.0;
  std::vector<double> x;
  for (double d : diffs) x.push_back(d / scale);

  constexpr int kHalf = 20;
  double ca = 0.0, cb = 0.0, wa = 8.0, wb = 8.0;
  for (int level = 0; level < 400 && (wa > 1e-10 || wb > 1e-10); ++level) {
    double best = -INFINITY;
    int bi = 0, bj = 0;
    for (int i = -kHalf; i <= kHalf; ++i) {
      for (int j = -kHalf; j <= kHalf; ++j) {
        const double v = oracle_loglik(y, x, ca + wa * i / kHalf, cb + wb * j / kHalf, lambda);
        if (v > best) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    }
    ca += wa * bi / kHalf;
    cb += wb * bj / kHalf;
    wa = (bi == -kHalf || bi == kHalf) ? wa * 2.0 : wa / 4.0;
    wb = (bj == -kHalf || bj == kHalf) ? wb * 2.0 : wb / 4.0;
  }
  return {ca, cb, 100.0 / (1.0 + std::exp(-ca))};
}

/// Coordinate-ascent MLE: alternately solves each coordinate's first-order
/// condition by bisection (each is monotone because the objective is
/// concave) until a full sweep moves neither coordinate by more than 1e-13.
inline OracleFit oracle_fit_coordinate(const std::vector<int>& y, const std::vector<double>& diffs,
                                       double lambda = 1e-4) {
  double ss = 0.0;
  for (double d : diffs) ss += d * d;
  const double scale = ss > 0 ? std::sqrt(ss / static_cast<double>(diffs.size())) : 1.0;
  std::vector<double> x;
  for (double d : diffs) x.push_back(d / scale);

  auto d_a = [&](double a, double b) {
    double g = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) g += y[i] - 1.0 / (1.0 + std::exp(-(a + b * x[i])));
    return g;
  };
  auto d_b = [&](double a, double b) {
    double g = -lambda * b;
    for (std::size_t i = 0; i < y.size(); ++i) g += (y[i] - 1.0 / (1.0 + std::exp(-(a + b * x[i])))) * x[i];
    return g;
  };
  // Root of a decreasing function on [-64, 64].
  auto solve = [](auto&& f) {
    double lo = -64.0, hi = 64.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) > 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };

  double a = 0.0, b = 0.0;
  for (int sweep = 0; sweep < 5000; ++sweep) {
    const double a_new = solve([&](double t) { return d_a(t, b); });
    const double b_new = solve([&](double t) { return d_b(a_new, t); });
    const double moved = std::fabs(a_new - a) + std::fabs(b_new - b);
    a = a_new;
    b = b_new;
    if (moved < 1e-13) break;
  }
  return {a, b, 100.0 / (1.0 + std::exp(-a))};
}

}  // namespace skillmix::testing

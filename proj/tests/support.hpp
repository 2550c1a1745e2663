#pragma once

// Shared oracles and fixtures for the test suite.  Everything here computes
// expectations by an independent route (finite differences, dense grid
// search, closed forms) so the library paths are checked against math, not
// against themselves.

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lossbal/common.hpp"
#include "lossbal/dataset.hpp"
#include "lossbal/synthetic.hpp"

namespace testsup {

using lossbal::Index;
using lossbal::Matrix;
using lossbal::Vector;

// Central finite differences, step h.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& w,
                          double h = 1e-4) {
  Vector g(w.size());
  for (Index i = 0; i < w.size(); ++i) {
    Vector wp = w, wm = w;
    wp(i) += h;
    wm(i) -= h;
    g(i) = (f(wp) - f(wm)) / (2.0 * h);
  }
  return g;
}

inline Matrix fd_hessian(const std::function<double(const Vector&)>& f, const Vector& w,
                         double h = 1e-4) {
  Matrix out(w.size(), w.size());
  for (Index i = 0; i < w.size(); ++i) {
    auto gi = [&](const Vector& x) {
      Vector xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      return (f(xp) - f(xm)) / (2.0 * h);
    };
    out.row(i) = fd_gradient(gi, w, h);
  }
  return ((out + out.transpose()) / 2.0).eval();
}

// Dense grid minimization of `objective` over a box subject to `feasible`.
struct GridResult {
  Vector w;
  double value = 0.0;
  bool found = false;
};

inline GridResult grid_minimize(const std::function<double(const Vector&)>& objective,
                                const std::function<bool(const Vector&)>& feasible,
                                const Vector& lo, const Vector& hi, int points_per_dim) {
  const Index d = lo.size();
  GridResult best;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  Vector w(d);
  for (;;) {
    for (Index k = 0; k < d; ++k)
      w(k) = lo(k) + (hi(k) - lo(k)) * idx[static_cast<std::size_t>(k)] /
                         static_cast<double>(points_per_dim - 1);
    if (feasible(w)) {
      const double v = objective(w);
      if (!best.found || v < best.value) best = {w, v, true};
    }
    Index k = 0;
    while (k < d && ++idx[static_cast<std::size_t>(k)] == points_per_dim) {
      idx[static_cast<std::size_t>(k)] = 0;
      ++k;
    }
    if (k == d) break;
  }
  return best;
}

// The 1-D pair L0 = (w-1)^2, L1 = (w+1)^2 used by the worked examples.
inline lossbal::SyntheticQuadratic unit_pair(double p0, double d0 = 0.0, double d1 = 0.0) {
  Vector c0(1), c1(1);
  c0 << 1.0;
  c1 << -1.0;
  Matrix q(1, 1);
  q << 1.0;
  return lossbal::SyntheticQuadratic(lossbal::QuadraticLoss(c0, q, d0),
                                     lossbal::QuadraticLoss(c1, q, d1), p0, 1.0 - p0);
}

// Random regression / classification datasets with a group-dependent signal.
inline lossbal::GroupedDataset random_dataset(Index n, Index d, std::uint64_t seed,
                                              bool binary_targets,
                                              double group1_fraction = 0.35) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix x(n, d);
  Vector y(n);
  std::vector<int> groups(static_cast<std::size_t>(n));
  Vector w0(d), w1(d);
  for (Index j = 0; j < d; ++j) {
    w0(j) = gauss(rng);
    w1(j) = gauss(rng);
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) x(i, j) = gauss(rng);
    const int a = unif(rng) < group1_fraction ? 1 : 0;
    groups[static_cast<std::size_t>(i)] = a;
    const double s = x.row(i).dot(a ? w1 : w0) + 0.4 * gauss(rng);
    y(i) = binary_targets ? (s > 0.0 ? 1.0 : 0.0) : s;
  }
  // ensure both groups exist even for tiny n
  groups[0] = 0;
  groups[static_cast<std::size_t>(n - 1)] = 1;
  return lossbal::GroupedDataset(std::move(x), std::move(y), std::move(groups));
}

// Spearman rank correlation with average ranks for ties.
inline double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  auto ranks = [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(xs), ry = ranks(ys);
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double num = 0.0, dx = 0.0, dy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  if (dx == 0.0 || dy == 0.0) return 0.0;
  return num / std::sqrt(dx * dy);
}

}  // namespace testsup

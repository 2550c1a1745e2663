#pragma once

// Three reference trainers the balance algorithms are compared against.
//
// penalty_train: minimize  L(w) + t * max(0, |L0 - L1| - gamma)^2  by
// full-batch Adam, doubling t on a fixed schedule, stopping when the
// objective change falls below stop_delta.
//
// linear_relaxation_train: replace the loss-difference band with an affine
// surrogate band
//   squared error:  mean_{A=0}(y - w'x) - mean_{A=1}(y - w'x) in [-g, +g]
//   logistic:       mean_{A=0}((y-1/2) w'x) - mean_{A=1}((y-1/2) w'x) in [-g, +g]
// The two half-spaces are parallel, so at most one side binds; the bound side
// is solved exactly via a scalar dual root-find (same monotone-bisection
// pattern as the level solver, with an affine constraint).
//
// fairbatch_train: mini-batch Adam where each batch slot first draws a group
// from sampling rates SR (initialized to the empirical fractions) and then a
// uniform sample within the group.  After every epoch SR shifts by alpha
// toward the group whose full-sample loss exceeds the other's by more than
// gamma, clipped to [0.05, 0.95] and renormalized.

#include <chrono>
#include <random>
#include <vector>

#include "lossbal/common.hpp"
#include "lossbal/el.hpp"
#include "lossbal/loss.hpp"
#include "lossbal/report.hpp"
#include "lossbal/solver.hpp"

namespace lossbal {

// Per-coordinate adaptive first-order step (decay 0.9/0.999, eps 1e-8).
class AdamOptimizer {
 public:
  AdamOptimizer(Index dim, double lr)
      : lr_(lr), m_(Vector::Zero(dim)), v_(Vector::Zero(dim)) {}

  void step(Vector& w, const Vector& g) {
    ++t_;
    m_ = 0.9 * m_ + 0.1 * g;
    v_ = 0.999 * v_.array() + 0.001 * g.array().square();
    const double bc1 = 1.0 - std::pow(0.9, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(0.999, static_cast<double>(t_));
    w.array() -= lr_ * (m_.array() / bc1) /
                 ((v_.array() / bc2).sqrt() + 1e-8);
  }

 private:
  double lr_;
  Vector m_, v_;
  long t_ = 0;
};

// ---------------------------------------------------------------------------
// Penalty method
// ---------------------------------------------------------------------------

struct PenaltyConfig {
  double t0 = 0.1;        // initial penalty weight
  double growth = 2.0;    // multiplier applied every grow_every iterations
  int grow_every = 100;
  double lr = 0.005;
  int max_iters = 20000;
  double stop_delta = 1e-6;  // objective-change stopping threshold
};

struct PenaltyStage {
  double t = 0.0;
  double objective = 0.0;  // penalized objective at the stage-final iterate
  double violation = 0.0;  // max(0, |L0-L1| - gamma)
};

struct PenaltyResult {
  SolveReport report;
  std::vector<PenaltyStage> stages;
};

template <typename Problem>
PenaltyResult penalty_train(const Problem& prob, double gamma, const PenaltyConfig& cfg) {
  const auto t0c = std::chrono::steady_clock::now();
  require(gamma >= 0.0, "penalty_train: gamma must be nonnegative");
  const auto overall = prob.overall();

  Vector w = Vector::Zero(prob.dim());
  AdamOptimizer adam(prob.dim(), cfg.lr);
  double t = cfg.t0;

  auto violation = [&](const Vector& x) {
    return std::max(0.0, std::abs(prob.loss0().value(x) - prob.loss1().value(x)) - gamma);
  };
  auto objective = [&](const Vector& x) {
    const double v = violation(x);
    return overall.value(x) + t * v * v;
  };

  PenaltyResult out;
  double prev_obj = objective(w);
  int small_changes = 0;  // Adam oscillation can cross zero change transiently
  for (int it = 0; it < cfg.max_iters; ++it) {
    const double delta = prob.loss0().value(w) - prob.loss1().value(w);
    const double v = std::max(0.0, std::abs(delta) - gamma);
    Vector g = overall.gradient(w);
    if (v > 0.0) {
      const double sgn = delta >= 0.0 ? 1.0 : -1.0;
      g += (2.0 * t * v * sgn) * (prob.loss0().gradient(w) - prob.loss1().gradient(w));
    }
    if (!g.allFinite()) throw ConvergenceError("penalty_train: non-finite gradient", w);
    adam.step(w, g);

    const bool stage_end = ((it + 1) % cfg.grow_every == 0) || it + 1 == cfg.max_iters;
    const double obj = objective(w);
    if (!std::isfinite(obj)) throw ConvergenceError("penalty_train: objective diverged", w);
    if (stage_end) out.stages.push_back({t, obj, violation(w)});
    small_changes = std::abs(obj - prev_obj) < cfg.stop_delta ? small_changes + 1 : 0;
    if (small_changes >= 3) {
      if (!stage_end) out.stages.push_back({t, obj, violation(w)});
      break;
    }
    prev_obj = obj;
    if ((it + 1) % cfg.grow_every == 0) {
      t *= cfg.growth;
      prev_obj = objective(w);  // rebase after the weight jump
    }
  }

  out.report.w = w;
  out.report.train = detail::losses_at(prob, w);
  out.report.algorithm = "penalty";
  out.report.gamma = gamma;
  out.report.wallclock_ms = detail::ms_since(t0c);
  return out;
}

inline PenaltyResult penalty_train(const GroupedDataset& data, const LossSpec& spec,
                                   double gamma, const PenaltyConfig& cfg) {
  DatasetProblem prob(data, spec);
  return penalty_train(prob, gamma, cfg);
}

// ---------------------------------------------------------------------------
// Linear relaxation
// ---------------------------------------------------------------------------

namespace detail {

// b'w as a SmoothObjective (zero curvature).
class LinearTerm {
 public:
  explicit LinearTerm(Vector b) : b_(std::move(b)) {}
  double value(const Vector& w) const { return b_.dot(w); }
  Vector gradient(const Vector& w) const {
    (void)w;
    return b_;
  }
  Matrix hessian(const Vector& w) const {
    (void)w;
    return Matrix::Zero(b_.size(), b_.size());
  }
  Index dim() const { return b_.size(); }

 private:
  Vector b_;
};

}  // namespace detail

inline SolveReport linear_relaxation_train(const GroupedDataset& data,
                                           const LossSpec& spec, double gamma,
                                           const SolverConfig& scfg = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  require(gamma >= 0.0, "linear_relaxation_train: gamma must be nonnegative");
  DatasetProblem prob(data, spec);
  const auto overall = prob.overall();

  // Affine surrogate r(w) = b'w + c0 for the group discrepancy.
  const Index dw = data.cols() + 1;
  Vector mean0 = Vector::Zero(dw), mean1 = Vector::Zero(dw);
  double ybar0 = 0.0, ybar1 = 0.0;
  for (Index i = 0; i < data.rows(); ++i) {
    Vector xt(dw);
    xt.head(data.cols()) = data.features().row(i);
    xt(dw - 1) = 1.0;
    const double y = data.targets()(i);
    if (data.groups()[static_cast<std::size_t>(i)] == 0) {
      if (spec.kind == LossKind::squared_error) mean0 += xt; else mean0 += (y - 0.5) * xt;
      ybar0 += y;
    } else {
      if (spec.kind == LossKind::squared_error) mean1 += xt; else mean1 += (y - 0.5) * xt;
      ybar1 += y;
    }
  }
  const double n0 = static_cast<double>(data.group_count(0));
  const double n1 = static_cast<double>(data.group_count(1));
  mean0 /= n0;
  mean1 /= n1;
  Vector b;
  double c0;
  if (spec.kind == LossKind::squared_error) {
    b = mean1 - mean0;                  // residual means: (ybar0-ybar1) - w'(x0-x1)
    c0 = ybar0 / n0 - ybar1 / n1;
  } else {
    b = mean0 - mean1;                  // signed-score means
    c0 = 0.0;
  }
  auto r_of = [&](const Vector& w) { return b.dot(w) + c0; };

  Vector w = minimize_unconstrained(overall, Vector::Zero(dw), scfg);
  double r = r_of(w);
  double mult = 0.0;
  if (std::abs(r) > gamma) {
    if (b.lpNorm<Eigen::Infinity>() < 1e-14)
      throw InfeasibleError(
          "linear_relaxation_train: surrogate band is infeasible (constant discrepancy "
          "exceeds gamma)");
    const double side = r > 0.0 ? 1.0 : -1.0;
    const double target = side * gamma;
    const detail::LinearTerm lin(b);
    // psi(nu) = r(w(nu)) - target is strictly decreasing in nu.
    auto solve_at = [&](double nu, const Vector& start) {
      WeightedSum<decltype(overall), detail::LinearTerm> lagr(overall, lin, 1.0, nu);
      return minimize_unconstrained(lagr, start, scfg, 1.0 + std::abs(nu));
    };
    double lo, hi;  // bracket with psi(lo) > 0 > psi(hi)
    if (side > 0.0) {
      lo = 0.0;
      hi = 1.0;
      Vector wt = solve_at(hi, w);
      while (r_of(wt) > target) {
        lo = hi;
        hi *= 4.0;
        if (hi > scfg.dual_mu_max)
          throw ConvergenceError("linear_relaxation_train: dual bracket exceeded cap", wt);
        wt = solve_at(hi, wt);
      }
      w = wt;
    } else {
      hi = 0.0;
      lo = -1.0;
      Vector wt = solve_at(lo, w);
      while (r_of(wt) < target) {
        hi = lo;
        lo *= 4.0;
        if (-lo > scfg.dual_mu_max)
          throw ConvergenceError("linear_relaxation_train: dual bracket exceeded cap", wt);
        wt = solve_at(lo, wt);
      }
      w = wt;
    }
    for (int it = 0; it < scfg.max_dual_iters; ++it) {
      const double nu = 0.5 * (lo + hi);
      w = solve_at(nu, w);
      const double psi = r_of(w) - target;
      mult = nu;
      if (std::abs(psi) <= 1e-8 * (1.0 + gamma + std::abs(c0))) break;
      if (psi > 0.0) lo = nu; else hi = nu;
    }
  }

  SolveReport rep;
  rep.w = w;
  rep.train = detail::losses_at(prob, w);
  rep.algorithm = "linre";
  rep.gamma = gamma;
  rep.trace.push_back({0.0, 0.0, mult, r_of(w)});  // dual multiplier + achieved surrogate
  rep.wallclock_ms = detail::ms_since(t0);
  return rep;
}

// ---------------------------------------------------------------------------
// FairBatch-style adaptive batch composition
// ---------------------------------------------------------------------------

struct FairBatchConfig {
  double alpha = 0.005;  // sampling-rate step per epoch
  int batch_size = 100;
  double lr = 0.005;
  int max_epochs = 300;
  std::uint64_t seed = 0;
  double stop_delta = 1e-6;
};

struct FairBatchResult {
  SolveReport report;
  // Sampling rates (SR0, SR1) after each epoch's update, index 0 = initial.
  std::vector<std::array<double, 2>> sr_history;
};

inline FairBatchResult fairbatch_train(const GroupedDataset& data, const LossSpec& spec,
                                       double gamma, const FairBatchConfig& cfg) {
  const auto t0c = std::chrono::steady_clock::now();
  require(gamma >= 0.0, "fairbatch_train: gamma must be nonnegative");
  require(cfg.batch_size > 0, "fairbatch_train: batch size must be positive");
  DatasetProblem prob(data, spec);
  const auto overall = prob.overall();

  const Index n = data.rows();
  const Index dw = data.cols() + 1;
  Matrix x(n, dw);
  x.leftCols(data.cols()) = data.features();
  x.col(dw - 1).setOnes();
  const Vector& y = data.targets();
  const auto idx0 = data.group_indices(0);
  const auto idx1 = data.group_indices(1);

  std::array<double, 2> sr = {data.group_fraction(0), data.group_fraction(1)};
  FairBatchResult out;
  out.sr_history.push_back(sr);

  Vector w = Vector::Zero(dw);
  AdamOptimizer adam(dw, cfg.lr);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Index batches =
      (n + static_cast<Index>(cfg.batch_size) - 1) / static_cast<Index>(cfg.batch_size);

  double prev_obj = overall.value(w);
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    for (Index bi = 0; bi < batches; ++bi) {
      Vector g = 2.0 * spec.eta * w;
      for (int s = 0; s < cfg.batch_size; ++s) {
        const auto& pool = (unif(rng) < sr[0]) ? idx0 : idx1;
        const Index i = pool[static_cast<std::size_t>(
            std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng))];
        const double score = x.row(i).dot(w);
        const double resid = (spec.kind == LossKind::squared_error)
                                 ? 2.0 * (score - y(i))
                                 : sigmoid(score) - y(i);
        g += (resid / cfg.batch_size) * x.row(i).transpose();
      }
      adam.step(w, g);
      if (!w.allFinite()) throw ConvergenceError("fairbatch_train: weights diverged", w);
    }

    const double d = prob.loss0().value(w) - prob.loss1().value(w);
    if (d > gamma) {
      sr[0] += cfg.alpha;
      sr[1] -= cfg.alpha;
    } else if (d < -gamma) {
      sr[0] -= cfg.alpha;
      sr[1] += cfg.alpha;
    }
    for (double& v : sr) v = std::clamp(v, 0.05, 0.95);
    const double sum = sr[0] + sr[1];
    sr[0] /= sum;
    sr[1] /= sum;
    out.sr_history.push_back(sr);

    const double obj = overall.value(w);
    if (!std::isfinite(obj)) throw ConvergenceError("fairbatch_train: objective diverged", w);
    if (std::abs(obj - prev_obj) < cfg.stop_delta) break;
    prev_obj = obj;
  }

  out.report.w = w;
  out.report.train = detail::losses_at(prob, w);
  out.report.algorithm = "fairbatch";
  out.report.gamma = gamma;
  out.report.wallclock_ms = detail::ms_since(t0c);
  return out;
}

}  // namespace lossbal

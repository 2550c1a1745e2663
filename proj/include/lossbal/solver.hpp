#pragma once

// Smooth convex minimization.
//
// minimize_unconstrained: damped Newton with backtracking line search and a
// gradient-descent fallback when the Hessian solve is unusable.
//
// LevelConstrainedSolver: solves  min obj(w)  s.t.  con(w) <= lambda  for
// strictly convex obj/con.  When the constraint binds, the KKT system reduces
// to a single dual variable mu >= 0 with w(mu) = argmin obj + mu*con and
// con(w(mu)) nonincreasing in mu, so the dual root con(w(mu)) = lambda is
// found by monotone bisection (bracket grown geometrically, capped at
// dual_mu_max).  The solver caches the unconstrained minima of obj and con
// and warm-starts both the dual bracket and the inner Newton iterations
// across successive solve() calls, which matters when an outer bisection
// sweeps lambda.

#include <optional>

#include "lossbal/common.hpp"

namespace lossbal {

struct SolverConfig {
  double grad_tol = 1e-8;       // sup-norm gradient target (scaled by 1+mu inside duals)
  int max_newton_iters = 200;
  double ls_shrink = 0.5;       // backtracking factor
  double ls_c1 = 1e-4;          // sufficient-decrease constant
  double dual_tol = 1e-9;       // relative dual bracket width floor
  double dual_mu_max = 1e8;     // bracket growth cap
  int max_dual_iters = 200;
};

template <SmoothObjective F>
Vector minimize_unconstrained(const F& f, Vector w, const SolverConfig& cfg,
                              double scale = 1.0) {
  if (w.size() != f.dim()) throw Error("minimize: start point dimension mismatch");
  double fw = f.value(w);
  if (!std::isfinite(fw)) throw ConvergenceError("minimize: non-finite start value", w);

  for (int iter = 0; iter < cfg.max_newton_iters; ++iter) {
    const Vector g = f.gradient(w);
    if (!g.allFinite()) throw ConvergenceError("minimize: non-finite gradient", w);
    if (g.lpNorm<Eigen::Infinity>() <= cfg.grad_tol * scale) return w;

    Vector p;
    Eigen::LDLT<Matrix> ldlt(f.hessian(w));
    if (ldlt.info() == Eigen::Success) p = -ldlt.solve(g);
    double gtp = p.size() ? g.dot(p) : 0.0;
    if (p.size() == 0 || !p.allFinite() || gtp >= 0.0) {  // fall back to steepest descent
      p = -g;
      gtp = -g.squaredNorm();
    }

    double t = 1.0;
    bool stepped = false;
    for (int ls = 0; ls < 80; ++ls) {
      const Vector trial = w + t * p;
      const double ft = f.value(trial);
      if (std::isfinite(ft) && ft <= fw + cfg.ls_c1 * t * gtp) {
        w = trial;
        fw = ft;
        stepped = true;
        break;
      }
      t *= cfg.ls_shrink;
    }
    if (!stepped) {
      // No representable decrease left; accept only if the gradient is small.
      if (g.lpNorm<Eigen::Infinity>() <= 1e3 * cfg.grad_tol * scale) return w;
      throw ConvergenceError("minimize: line search failed before gradient tolerance", w);
    }
  }
  const Vector g = f.gradient(w);
  if (g.lpNorm<Eigen::Infinity>() <= 1e3 * cfg.grad_tol * scale) return w;
  throw ConvergenceError("minimize: Newton iteration budget exhausted", w);
}

struct ConstrainedSolution {
  Vector w;
  double objective_value = 0.0;
  double constraint_value = 0.0;
  double multiplier = 0.0;  // KKT multiplier of con(w) <= lambda
  bool active = false;
};

template <SmoothObjective Obj, SmoothObjective Con>
class LevelConstrainedSolver {
 public:
  LevelConstrainedSolver(const Obj& obj, const Con& con, SolverConfig cfg)
      : obj_(&obj), con_(&con), cfg_(cfg) {}

  // Known unconstrained minimizers may be seeded to skip recomputation.
  void seed_objective_minimum(const Vector& w) { w_obj_min_ = w; }
  void seed_constraint_minimum(const Vector& w) {
    w_con_min_ = w;
    con_min_ = con_->value(w);
  }

  // argmin of obj + mu*con from the previous inner iterate (probe helper).
  Vector argmin_at(double mu) {
    WeightedSum<Obj, Con> lagr(*obj_, *con_, 1.0, mu);
    Vector start = warm_w_.size() ? warm_w_ : Vector::Zero(obj_->dim());
    warm_w_ = minimize_unconstrained(lagr, std::move(start), cfg_, 1.0 + mu);
    return warm_w_;
  }

  double constraint_minimum() {
    ensure_con_min();
    return con_min_;
  }

  ConstrainedSolution solve(double lambda) {
    ensure_con_min();
    if (lambda < con_min_ - 1e-9 * (1.0 + std::abs(con_min_)))
      throw InfeasibleError("level constraint infeasible: lambda below the constraint minimum");
    ensure_obj_min();

    const double con_at_obj_min = con_->value(w_obj_min_);
    if (con_at_obj_min <= lambda + 1e-12 * (1.0 + std::abs(lambda))) {
      return {w_obj_min_, obj_->value(w_obj_min_), con_at_obj_min, 0.0, false};
    }

    // Dual bisection on phi(mu) = con(w(mu)) - lambda, phi(0) > 0.
    const double feas_abs = std::min(1e-8 * (1.0 + std::abs(lambda)), 1e-7);
    auto accept = [&](double phi, double mu) {
      return std::abs(phi) <= std::min(feas_abs, 5e-7 / std::max(1.0, mu));
    };
    auto pack = [&](const Vector& w, double mu, double con_val) {
      return ConstrainedSolution{w, obj_->value(w), con_val, mu, true};
    };

    double lo = 0.0;
    double hi = warm_mu_ > 0.0 ? warm_mu_ : 1.0;
    Vector w = argmin_at(hi);
    double phi = con_->value(w) - lambda;
    if (accept(phi, hi)) { warm_mu_ = hi; return pack(w, hi, phi + lambda); }
    while (phi > 0.0) {
      lo = hi;
      hi *= 4.0;
      if (hi > cfg_.dual_mu_max)
        throw ConvergenceError(
            "level constraint: dual bracket exceeded dual_mu_max (level barely attainable)", w);
      w = argmin_at(hi);
      phi = con_->value(w) - lambda;
      if (accept(phi, hi)) { warm_mu_ = hi; return pack(w, hi, phi + lambda); }
    }

    Vector w_feas = w;  // phi(hi) <= 0 side
    double mu_feas = hi, con_feas = phi + lambda;
    for (int it = 0; it < cfg_.max_dual_iters; ++it) {
      const double mid = 0.5 * (lo + hi);
      w = argmin_at(mid);
      const double con_val = con_->value(w);
      phi = con_val - lambda;
      if (accept(phi, mid)) { warm_mu_ = mid; return pack(w, mid, con_val); }
      if (phi > 0.0) {
        lo = mid;
      } else {
        hi = mid;
        w_feas = w;
        mu_feas = mid;
        con_feas = con_val;
      }
      if (hi - lo <= cfg_.dual_tol * std::max(1.0, hi)) break;
    }
    // Bracket collapsed without meeting the residual target; keep the feasible
    // side only if it still satisfies complementary slackness.
    if (mu_feas * (lambda - con_feas) <= 1e-6) {
      warm_mu_ = mu_feas;
      return pack(w_feas, mu_feas, con_feas);
    }
    throw ConvergenceError("level constraint: dual bisection stalled", w_feas);
  }

 private:
  void ensure_obj_min() {
    if (!w_obj_min_.size())
      w_obj_min_ = minimize_unconstrained(*obj_, Vector::Zero(obj_->dim()), cfg_);
  }
  void ensure_con_min() {
    if (!w_con_min_.size()) {
      w_con_min_ = minimize_unconstrained(*con_, Vector::Zero(con_->dim()), cfg_);
      con_min_ = con_->value(w_con_min_);
    }
  }

  const Obj* obj_;
  const Con* con_;
  SolverConfig cfg_;
  Vector w_obj_min_;
  Vector w_con_min_;
  double con_min_ = 0.0;
  Vector warm_w_;
  double warm_mu_ = 0.0;
};

template <SmoothObjective Obj, SmoothObjective Con>
ConstrainedSolution minimize_level_constrained(const Obj& obj, const Con& con,
                                               double lambda, const SolverConfig& cfg) {
  LevelConstrainedSolver<Obj, Con> solver(obj, con, cfg);
  return solver.solve(lambda);
}

}  // namespace lossbal

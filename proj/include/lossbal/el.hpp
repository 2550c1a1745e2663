#pragma once

// Loss-balance training: find w minimizing the population loss subject to
// |L0(w) - L1(w)| <= gamma.  The constraint is non-convex even for convex
// group losses; the reduction here solves it through a sequence of convex
// level-constrained subproblems.
//
// el_minimizer(gamma): bisection on the level lambda.  Starting from
// lambda_start = L0(w_g0), lambda_end = L0(w_g1), each step solves
//
//     w* = argmin L1(w) + gamma   s.t.  L0(w) <= lambda_mid
//
// and moves the interval end toward the fixed point lambda where the shifted
// group-1 loss equals the level, i.e. L0(w) - L1(w) = gamma at the limit.
//
// optimal_gamma_el: if the unconstrained optimum already satisfies the band,
// return it; otherwise run el_minimizer at +gamma and -gamma and keep the
// candidate with the smaller population loss.
//
// suboptimal_gamma_el: cheaper interpolation variant.  With ahat the group
// disadvantaged at the unconstrained optimum w_O, bisect beta in [0,1] on
// g(beta) - gamma where g(beta) is the group-loss difference along the
// segment (1-beta) w_O + beta w_g_ahat.  Both g (decreasing) and the overall
// loss (increasing) are monotone along the segment, so the first beta
// entering the band costs the least loss among segment points.
//
// All entry points require the group-optimum margins
//   margin0 = L1(w_g0) - L0(w_g0),  margin1 = L0(w_g1) - L1(w_g1)
// to be nonnegative (each group's own optimum does not disadvantage it);
// margin violations are surfaced as AssumptionError, never silently ignored.

#include <chrono>
#include <limits>
#include <utility>

#include "lossbal/common.hpp"
#include "lossbal/loss.hpp"
#include "lossbal/report.hpp"
#include "lossbal/solver.hpp"

namespace lossbal {

struct ELConfig {
  double gamma = 0.0;
  double epsilon = 1e-2;  // outer bisection interval tolerance
  SolverConfig solver;
};

struct GroupOptima {
  Vector w_g0;      // argmin L0
  Vector w_g1;      // argmin L1
  Vector w_overall; // argmin p0*L0 + p1*L1
};

struct AssumptionCheck {
  bool holds = false;
  double margin0 = 0.0;  // L1(w_g0) - L0(w_g0)
  double margin1 = 0.0;  // L0(w_g1) - L1(w_g1)
};

namespace detail {

inline long long ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

template <typename Problem>
GroupLossValues losses_at(const Problem& prob, const Vector& w) {
  GroupLossValues v;
  v.l0 = prob.loss0().value(w);
  v.l1 = prob.loss1().value(w);
  v.overall = prob.p0() * v.l0 + prob.p1() * v.l1;
  return v;
}

}  // namespace detail

template <typename Problem>
GroupOptima group_optima(const Problem& prob, const SolverConfig& cfg) {
  GroupOptima out;
  out.w_g0 = minimize_unconstrained(prob.loss0(), Vector::Zero(prob.dim()), cfg);
  out.w_g1 = minimize_unconstrained(prob.loss1(), Vector::Zero(prob.dim()), cfg);
  const auto overall = prob.overall();
  out.w_overall = minimize_unconstrained(overall, Vector::Zero(prob.dim()), cfg);
  return out;
}

template <typename Problem>
AssumptionCheck check_assumption2(const Problem& prob, const GroupOptima& opt) {
  AssumptionCheck c;
  c.margin0 = prob.loss1().value(opt.w_g0) - prob.loss0().value(opt.w_g0);
  c.margin1 = prob.loss0().value(opt.w_g1) - prob.loss1().value(opt.w_g1);
  c.holds = c.margin0 >= 0.0 && c.margin1 >= 0.0;
  return c;
}

// Level bisection for one signed gamma.  Requires the shifted difference
// L0 - (L1 + gamma) to be negative at w_g0 and positive at w_g1 (strictly),
// which holds whenever both group-optimum margins exceed |gamma|; equality at
// the boundary is treated as a violation.
template <typename Problem>
SolveReport el_minimizer(const Problem& prob, const Vector& w_g0, const Vector& w_g1,
                         double epsilon, double gamma, const SolverConfig& scfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& l0 = prob.loss0();
  const auto& l1 = prob.loss1();
  require(epsilon > 0.0, "el_minimizer: epsilon must be positive");

  const double s_at_g0 = l0.value(w_g0) - (l1.value(w_g0) + gamma);
  const double s_at_g1 = l0.value(w_g1) - (l1.value(w_g1) + gamma);
  const double m0 = l1.value(w_g0) - l0.value(w_g0);
  const double m1 = l0.value(w_g1) - l1.value(w_g1);
  if (!(s_at_g0 < 0.0) || !(s_at_g1 > 0.0))
    throw AssumptionError(
        "el_minimizer: group-optimum margins do not straddle the shifted level "
        "(need L0-L1 < gamma at w_g0 and > gamma at w_g1)",
        m0, m1);

  const Shifted obj(l1, gamma);
  LevelConstrainedSolver<Shifted<std::decay_t<decltype(l1)>>, std::decay_t<decltype(l0)>>
      solver(obj, l0, scfg);
  solver.seed_constraint_minimum(w_g0);
  solver.seed_objective_minimum(w_g1);

  double lam_s = l0.value(w_g0);
  double lam_e = std::max(l0.value(w_g1), lam_s);

  SolveReport rep;
  rep.algorithm = "elmin";
  rep.gamma = gamma;
  bool solved = false;
  while (lam_e - lam_s > epsilon) {
    const double mid = 0.5 * (lam_s + lam_e);
    const ConstrainedSolution sol = solver.solve(mid);
    const double lam_val = obj.value(sol.w);
    rep.trace.push_back({lam_s, lam_e, mid, lam_val});
    rep.w = sol.w;
    solved = true;
    if (lam_val >= mid) lam_s = mid; else lam_e = mid;
  }
  if (!solved) {  // interval already narrower than epsilon: one solve at its midpoint
    const double mid = 0.5 * (lam_s + lam_e);
    const ConstrainedSolution sol = solver.solve(mid);
    rep.trace.push_back({lam_s, lam_e, mid, obj.value(sol.w)});
    rep.w = sol.w;
  }
  rep.train = detail::losses_at(prob, rep.w);
  rep.wallclock_ms = detail::ms_since(t0);
  return rep;
}

template <typename Problem>
SolveReport optimal_gamma_el(const Problem& prob, const GroupOptima& opt,
                             const ELConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  require(cfg.gamma >= 0.0, "optimal_gamma_el: gamma must be nonnegative");

  // Unconstrained optimum already inside the band: nothing to trade.
  GroupLossValues at_opt = detail::losses_at(prob, opt.w_overall);
  if (at_opt.gap() <= cfg.gamma) {
    SolveReport rep;
    rep.w = opt.w_overall;
    rep.train = at_opt;
    rep.algorithm = "alg2";
    rep.gamma = cfg.gamma;
    rep.wallclock_ms = detail::ms_since(t0);
    return rep;
  }

  const AssumptionCheck chk = check_assumption2(prob, opt);
  if (!(chk.margin0 > cfg.gamma) || !(chk.margin1 > cfg.gamma))
    throw AssumptionError(
        "optimal_gamma_el: both group-optimum margins must strictly exceed gamma",
        chk.margin0, chk.margin1);

  SolveReport plus, minus;
  bool plus_ok = false, minus_ok = false;
  std::string diag;
  try {
    plus = el_minimizer(prob, opt.w_g0, opt.w_g1, cfg.epsilon, cfg.gamma, cfg.solver);
    plus_ok = true;
  } catch (const Error& e) {
    diag += std::string("+gamma branch: ") + e.what();
  }
  try {
    minus = el_minimizer(prob, opt.w_g0, opt.w_g1, cfg.epsilon, -cfg.gamma, cfg.solver);
    minus_ok = true;
  } catch (const Error& e) {
    if (!diag.empty()) diag += "; ";
    diag += std::string("-gamma branch: ") + e.what();
  }
  if (!plus_ok && !minus_ok)
    throw ConvergenceError("optimal_gamma_el: both branches failed: " + diag,
                           opt.w_overall);
  if (!plus_ok || !minus_ok)
    // Margins were verified above, so a single-branch failure indicates solver
    // trouble the caller must see rather than a silently degraded answer.
    throw ConvergenceError("optimal_gamma_el: one branch failed: " + diag,
                           plus_ok ? plus.w : minus.w);

  SolveReport rep = (plus.train.overall <= minus.train.overall) ? std::move(plus)
                                                                : std::move(minus);
  rep.algorithm = "alg2";
  rep.gamma = cfg.gamma;
  rep.wallclock_ms = detail::ms_since(t0);
  return rep;
}

// Interpolation variant.  Needs only the unconstrained optimum and the
// disadvantaged group's optimum.
template <typename Problem>
SolveReport suboptimal_gamma_el(const Problem& prob, const ELConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  require(cfg.gamma >= 0.0, "suboptimal_gamma_el: gamma must be nonnegative");
  require(cfg.epsilon > 0.0, "suboptimal_gamma_el: epsilon must be positive");

  const Vector w_o =
      minimize_unconstrained(prob.overall(), Vector::Zero(prob.dim()), cfg.solver);
  const GroupLossValues at_opt = detail::losses_at(prob, w_o);
  const int ahat = (at_opt.l0 >= at_opt.l1) ? 0 : 1;  // ties resolve to group 0

  SolveReport rep;
  rep.algorithm = "alg3";
  rep.gamma = cfg.gamma;
  // g(beta) = L_ahat - L_other along the segment; g(0) >= 0 by choice of ahat.
  auto g_of = [&](const Vector& w) {
    const double d = prob.loss0().value(w) - prob.loss1().value(w);
    return ahat == 0 ? d : -d;
  };
  if (g_of(w_o) - cfg.gamma <= 0.0) {
    rep.w = w_o;
    rep.train = at_opt;
    rep.wallclock_ms = detail::ms_since(t0);
    return rep;
  }

  const Vector w_target =
      (ahat == 0)
          ? minimize_unconstrained(prob.loss0(), Vector::Zero(prob.dim()), cfg.solver)
          : minimize_unconstrained(prob.loss1(), Vector::Zero(prob.dim()), cfg.solver);
  const double g_at_end = g_of(w_target);
  if (g_at_end - cfg.gamma > 0.0)
    throw AssumptionError(
        "suboptimal_gamma_el: disadvantaged group's own optimum still violates the band "
        "(margin must be nonnegative)",
        ahat == 0 ? -g_at_end : std::numeric_limits<double>::quiet_NaN(),
        ahat == 1 ? -g_at_end : std::numeric_limits<double>::quiet_NaN());

  auto seg = [&](double beta) { return Vector((1.0 - beta) * w_o + beta * w_target); };
  double bs = 0.0, be = 1.0, mid = 0.5;
  while (be - bs > cfg.epsilon) {
    mid = 0.5 * (bs + be);
    const double val = g_of(seg(mid)) - cfg.gamma;
    rep.trace.push_back({bs, be, mid, val});
    if (val >= 0.0) bs = mid; else be = mid;
  }
  if (rep.trace.empty()) {  // epsilon >= 1: single probe at the midpoint
    mid = 0.5 * (bs + be);
    rep.trace.push_back({bs, be, mid, g_of(seg(mid)) - cfg.gamma});
  }
  rep.w = seg(mid);
  rep.train = detail::losses_at(prob, rep.w);
  rep.wallclock_ms = detail::ms_since(t0);
  return rep;
}

// --- dataset-level entry points ---

inline SolveReport optimal_gamma_el(const GroupedDataset& data, const LossSpec& spec,
                                    const ELConfig& cfg) {
  DatasetProblem prob(data, spec);
  const GroupOptima opt = group_optima(prob, cfg.solver);
  return optimal_gamma_el(prob, opt, cfg);
}

inline SolveReport suboptimal_gamma_el(const GroupedDataset& data, const LossSpec& spec,
                                       const ELConfig& cfg) {
  DatasetProblem prob(data, spec);
  return suboptimal_gamma_el(prob, cfg);
}

inline GroupOptima group_optima(const GroupedDataset& data, const LossSpec& spec,
                                const SolverConfig& cfg) {
  DatasetProblem prob(data, spec);
  return group_optima(prob, cfg);
}

inline AssumptionCheck check_assumption2(const GroupedDataset& data, const LossSpec& spec,
                                         const SolverConfig& cfg) {
  DatasetProblem prob(data, spec);
  return check_assumption2(prob, group_optima(prob, cfg));
}

}  // namespace lossbal

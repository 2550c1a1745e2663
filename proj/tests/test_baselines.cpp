#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lossbal/baselines.hpp"
#include "lossbal/synthetic.hpp"
#include "support.hpp"

using namespace lossbal;
using Catch::Matchers::WithinAbs;

TEST_CASE("penalty with a huge band recovers the unconstrained optimum", "[baselines]") {
  const auto inst = testsup::unit_pair(0.75);  // w_O = 0.5
  PenaltyConfig cfg;
  cfg.max_iters = 40000;
  const PenaltyResult res = penalty_train(inst, 1e30, cfg);
  REQUIRE_THAT(res.report.w(0), WithinAbs(0.5, 5e-3));
  REQUIRE(res.report.algorithm == "penalty");
  REQUIRE_FALSE(res.stages.empty());
}

TEST_CASE("exact fixed-t penalty solutions tighten monotonically", "[baselines]") {
  // Disable growth (growth factor 1) and sweep t by hand.  At the (near)
  // exact minimizer of each penalized objective, the violation decreases in t
  // and the iterate slides toward the true band optimum w = 0.25 at gamma = 1.
  const auto inst = testsup::unit_pair(0.75);
  double prev_err = std::numeric_limits<double>::infinity();
  double prev_violation = std::numeric_limits<double>::infinity();
  for (double t : {1.0, 10.0, 100.0}) {
    PenaltyConfig cfg;
    cfg.t0 = t;
    cfg.growth = 1.0;
    cfg.grow_every = 1 << 30;
    cfg.max_iters = 60000;
    cfg.stop_delta = 1e-12;
    const PenaltyResult res = penalty_train(inst, 1.0, cfg);
    const double err = std::abs(res.report.w(0) - 0.25);
    const double violation = std::max(0.0, res.report.train.gap() - 1.0);
    REQUIRE(err < prev_err + 1e-4);
    REQUIRE(violation < prev_violation + 1e-6);
    prev_err = err;
    prev_violation = violation;
  }
  REQUIRE(prev_err < 5e-3);  // t = 100 lands near the constrained optimum
}

TEST_CASE("staged penalty drives the violation down by the final stage", "[baselines]") {
  // The staged trainer records one entry per stage.  Individual stage ends
  // are mid-flight Adam iterates (the run starts feasible at w = 0, dips into
  // violation chasing the loss, then gets pulled back as t doubles), so the
  // sound check is on the trend, not per step.
  const auto inst = testsup::unit_pair(0.75);
  PenaltyConfig cfg;
  cfg.max_iters = 8000;
  cfg.stop_delta = 1e-12;  // run all stages
  const PenaltyResult res = penalty_train(inst, 0.3, cfg);
  REQUIRE(res.stages.size() >= 5);
  double peak = 0.0;
  for (std::size_t i = 0; i + 1 < res.stages.size(); ++i) {
    REQUIRE(res.stages[i + 1].t >= res.stages[i].t);
    peak = std::max(peak, res.stages[i].violation);
  }
  REQUIRE(res.stages.back().t > res.stages.front().t);  // growth actually fired
  REQUIRE(res.stages.back().violation < 0.05);
  REQUIRE(res.stages.back().violation <= peak + 1e-9);
}

TEST_CASE("penalty surfaces divergence instead of returning garbage", "[baselines]") {
  // A 1e200-scale feature makes the squared loss overflow after one step.
  Matrix x(2, 1);
  x << 1e200, 1e200;
  Vector y(2);
  y << 1.0, -1.0;
  GroupedDataset data(x, y, std::vector<int>{0, 1});
  LossSpec spec{LossKind::squared_error, 0.0, std::nullopt};
  REQUIRE_THROWS_AS(penalty_train(data, spec, 0.1, PenaltyConfig{}), ConvergenceError);
}

TEST_CASE("linear relaxation with a huge band is plain minimization", "[baselines]") {
  auto data = testsup::random_dataset(150, 2, 91, false);
  LossSpec spec{LossKind::squared_error, 0.002, std::nullopt};
  const SolveReport rep = linear_relaxation_train(data, spec, 1e6);
  DatasetProblem prob(data, spec);
  const Vector w_o =
      minimize_unconstrained(prob.overall(), Vector::Zero(prob.dim()), SolverConfig{});
  REQUIRE((rep.w - w_o).lpNorm<Eigen::Infinity>() < 1e-7);
  REQUIRE(rep.algorithm == "linre");
}

TEST_CASE("linear relaxation satisfies its surrogate band exactly", "[baselines]") {
  auto data = testsup::random_dataset(200, 2, 93, false);
  LossSpec spec{LossKind::squared_error, 0.002, std::nullopt};
  const double gamma = 0.02;
  const SolveReport rep = linear_relaxation_train(data, spec, gamma);

  // Recompute the surrogate independently: difference of group residual means.
  auto resid_mean = [&](int grp) {
    double acc = 0.0;
    int cnt = 0;
    for (Index i = 0; i < data.rows(); ++i) {
      if (data.groups()[static_cast<std::size_t>(i)] != grp) continue;
      const double s = data.features().row(i).dot(rep.w.head(2)) + rep.w(2);
      acc += data.targets()(i) - s;
      ++cnt;
    }
    return acc / cnt;
  };
  const double r = resid_mean(0) - resid_mean(1);
  REQUIRE(std::abs(r) <= gamma + 1e-7);
  // Dual multiplier and achieved surrogate are reported in the trace.
  REQUIRE(rep.trace.size() == 1);
  REQUIRE_THAT(rep.trace[0].value, WithinAbs(r, 1e-9));
}

TEST_CASE("linear relaxation matches an equality-constrained closed form",
          "[baselines]") {
  // With squared error the objective is a fixed quadratic and the active
  // surrogate is affine, so the optimum has the exact form
  //   w* = w_O - H^{-1} b (r(w_O) - target) / (b' H^{-1} b).
  auto data = testsup::random_dataset(180, 2, 97, false);
  LossSpec spec{LossKind::squared_error, 0.002, std::nullopt};
  const double gamma = 0.01;
  DatasetProblem prob(data, spec);
  const auto overall = prob.overall();
  const Vector w_o =
      minimize_unconstrained(overall, Vector::Zero(prob.dim()), SolverConfig{});

  const Index dw = prob.dim();
  Vector mean0 = Vector::Zero(dw), mean1 = Vector::Zero(dw);
  double y0 = 0.0, y1 = 0.0;
  for (Index i = 0; i < data.rows(); ++i) {
    Vector xt(dw);
    xt.head(dw - 1) = data.features().row(i);
    xt(dw - 1) = 1.0;
    if (data.groups()[static_cast<std::size_t>(i)] == 0) {
      mean0 += xt;
      y0 += data.targets()(i);
    } else {
      mean1 += xt;
      y1 += data.targets()(i);
    }
  }
  const double n0 = static_cast<double>(data.group_count(0));
  const double n1 = static_cast<double>(data.group_count(1));
  const Vector b = mean1 / n1 - mean0 / n0;
  const double c0 = y0 / n0 - y1 / n1;
  const double r_o = b.dot(w_o) + c0;
  if (std::abs(r_o) > gamma) {
    const double target = (r_o > 0.0 ? 1.0 : -1.0) * gamma;
    const Matrix h = overall.hessian(w_o);
    const Vector hinvb = h.ldlt().solve(b);
    const Vector w_exact = w_o - hinvb * ((r_o - target) / b.dot(hinvb));
    const SolveReport rep = linear_relaxation_train(data, spec, gamma);
    REQUIRE((rep.w - w_exact).lpNorm<Eigen::Infinity>() < 1e-6);
  } else {
    SUCCEED("surrogate already feasible at the unconstrained optimum");
  }
}

TEST_CASE("logistic relaxation meets its score-mean band", "[baselines]") {
  auto data = testsup::random_dataset(200, 2, 101, true);
  LossSpec spec{LossKind::binary_cross_entropy, 0.002, std::nullopt};
  const double gamma = 0.01;
  const SolveReport rep = linear_relaxation_train(data, spec, gamma);
  auto signed_score_mean = [&](int grp) {
    double acc = 0.0;
    int cnt = 0;
    for (Index i = 0; i < data.rows(); ++i) {
      if (data.groups()[static_cast<std::size_t>(i)] != grp) continue;
      const double s = data.features().row(i).dot(rep.w.head(2)) + rep.w(2);
      acc += (data.targets()(i) - 0.5) * s;
      ++cnt;
    }
    return acc / cnt;
  };
  REQUIRE(std::abs(signed_score_mean(0) - signed_score_mean(1)) <= gamma + 1e-7);
}

TEST_CASE("identical groups keep the sampling rates at one half", "[baselines]") {
  // Group 1 duplicates group 0's rows exactly, so the full-sample group
  // losses are bitwise equal and no update ever fires.
  const Index half = 60;
  auto base = testsup::random_dataset(half, 2, 103, false);
  Matrix x(2 * half, 2);
  Vector y(2 * half);
  std::vector<int> g(static_cast<std::size_t>(2 * half));
  for (Index i = 0; i < half; ++i) {
    x.row(i) = base.features().row(i);
    x.row(half + i) = base.features().row(i);
    y(i) = base.targets()(i);
    y(half + i) = base.targets()(i);
    g[static_cast<std::size_t>(i)] = 0;
    g[static_cast<std::size_t>(half + i)] = 1;
  }
  GroupedDataset data(x, y, g);
  FairBatchConfig cfg;
  cfg.max_epochs = 40;
  cfg.stop_delta = 0.0;  // never stop early
  const FairBatchResult res =
      fairbatch_train(data, LossSpec{LossKind::squared_error, 0.002, std::nullopt}, 0.0,
                      cfg);
  REQUIRE(res.sr_history.size() == 41);
  for (const auto& sr : res.sr_history) {
    REQUIRE(sr[0] == 0.5);
    REQUIRE(sr[1] == 0.5);
  }
}

TEST_CASE("a persistently disadvantaged group gains sampling rate", "[baselines]") {
  // Group 0 targets are pure wide noise, group 1 is perfectly linear: the
  // loss gap stays far above gamma, so SR0 must climb every epoch until the
  // clip, and SR stays a valid distribution throughout.
  const Index n = 160;
  std::mt19937_64 rng(107);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix x(n, 1);
  Vector y(n);
  std::vector<int> g(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = gauss(rng);
    const bool grp0 = i % 2 == 0;
    g[static_cast<std::size_t>(i)] = grp0 ? 0 : 1;
    y(i) = grp0 ? 5.0 * gauss(rng) : x(i, 0);
  }
  GroupedDataset data(x, y, g);
  FairBatchConfig cfg;
  cfg.max_epochs = 25;
  cfg.stop_delta = 0.0;
  const FairBatchResult res =
      fairbatch_train(data, LossSpec{LossKind::squared_error, 0.002, std::nullopt}, 0.0,
                      cfg);
  for (std::size_t e = 0; e + 1 < res.sr_history.size(); ++e) {
    REQUIRE(res.sr_history[e + 1][0] >= res.sr_history[e][0] - 1e-12);
    REQUIRE_THAT(res.sr_history[e][0] + res.sr_history[e][1], WithinAbs(1.0, 1e-12));
    REQUIRE(res.sr_history[e][0] >= 0.05);
    REQUIRE(res.sr_history[e][0] <= 0.95);
  }
  REQUIRE(res.sr_history.back()[0] > res.sr_history.front()[0] + 0.05);
}

TEST_CASE("adaptive batches with a huge band reduce to plain stochastic training",
          "[baselines]") {
  auto data = testsup::random_dataset(300, 2, 109, false);
  LossSpec spec{LossKind::squared_error, 0.002, std::nullopt};
  FairBatchConfig cfg;
  cfg.max_epochs = 200;
  const FairBatchResult res = fairbatch_train(data, spec, 1e9, cfg);
  // No SR update can ever fire...
  for (const auto& sr : res.sr_history) REQUIRE(sr[0] == res.sr_history.front()[0]);
  // ...and the stochastic optimum lands near the deterministic one.
  DatasetProblem prob(data, spec);
  const Vector w_o =
      minimize_unconstrained(prob.overall(), Vector::Zero(prob.dim()), SolverConfig{});
  const double gap_to_opt = prob.overall().value(res.report.w) - prob.overall().value(w_o);
  REQUIRE(gap_to_opt >= -1e-12);
  REQUIRE(gap_to_opt < 0.05 * (1.0 + std::abs(prob.overall().value(w_o))));
}

TEST_CASE("adaptive batches shrink the loss gap on a biased dataset", "[baselines]") {
  // Opposed group signals y = +x vs y = -x with a 70/30 group split: plain
  // training favors the majority (model near w = p0 - p1 = 0.4), while equal
  // group losses need w = 0.  Rebalancing the sampler can reach that
  // equilibrium, so the gap must come down decisively.
  const Index n = 300;
  std::mt19937_64 rng(113);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix x(n, 1);
  Vector y(n);
  std::vector<int> g(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = gauss(rng);
    const bool grp0 = (i % 10) < 7;
    g[static_cast<std::size_t>(i)] = grp0 ? 0 : 1;
    y(i) = (grp0 ? x(i, 0) : -x(i, 0)) + 0.05 * gauss(rng);
  }
  GroupedDataset data(x, y, g);
  LossSpec spec{LossKind::squared_error, 0.002, std::nullopt};
  FairBatchConfig plain_cfg;
  plain_cfg.max_epochs = 150;
  plain_cfg.stop_delta = 0.0;
  const FairBatchResult plain = fairbatch_train(data, spec, 1e9, plain_cfg);
  FairBatchConfig fair_cfg;
  fair_cfg.max_epochs = 150;
  fair_cfg.stop_delta = 0.0;
  const FairBatchResult fair = fairbatch_train(data, spec, 0.0, fair_cfg);
  REQUIRE(plain.report.train.gap() > 0.5);  // the bias is real
  REQUIRE(fair.report.train.gap() < 0.5 * plain.report.train.gap());
}

TEST_CASE("baseline entry points validate gamma", "[baselines]") {
  const auto inst = testsup::unit_pair(0.5);
  REQUIRE_THROWS_AS(penalty_train(inst, -0.1, PenaltyConfig{}), Error);
  auto data = testsup::random_dataset(30, 1, 127, false);
  LossSpec spec{LossKind::squared_error, 0.0, std::nullopt};
  REQUIRE_THROWS_AS(linear_relaxation_train(data, spec, -1.0), Error);
  REQUIRE_THROWS_AS(fairbatch_train(data, spec, -1.0, FairBatchConfig{}), Error);
}

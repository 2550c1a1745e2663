// Walkthrough on a 1-D synthetic instance: two quadratic group losses with
// known optima, swept over a grid of band widths.  Prints one line per
// (algorithm, gamma) with the achieved overall loss and group gap, so the
// loss/fairness trade-off is visible at a glance.
//
//   L0(w) = (w - 1)^2,  L1(w) = (w + 1)^2,  weights p = (3/4, 1/4)
//
// The unconstrained optimum sits at w = 1/2 with gap |L0 - L1| = 2; tightening
// gamma pulls the solution toward the balance point w = 0 and raises the
// overall loss.

#include <cstdio>

#include "lossbal/baselines.hpp"
#include "lossbal/el.hpp"
#include "lossbal/synthetic.hpp"

using namespace lossbal;

namespace {

SyntheticQuadratic weighted_pair() {
  Vector c0(1), c1(1);
  c0 << 1.0;
  c1 << -1.0;
  Matrix q(1, 1);
  q << 1.0;
  return SyntheticQuadratic(QuadraticLoss(c0, q), QuadraticLoss(c1, q), 0.75, 0.25);
}

void print_row(const char* algo, double gamma, const Vector& w,
               const GroupLossValues& v) {
  std::printf("  %-9s gamma=%.2f  w=%+.4f  loss=%.4f  l0=%.4f  l1=%.4f  gap=%.4f\n",
              algo, gamma, w(0), v.overall, v.l0, v.l1, v.gap());
}

}  // namespace

int main() {
  const SyntheticQuadratic inst = weighted_pair();
  const GroupOptima opt = group_optima(inst, SolverConfig{});
  const auto at_opt = detail::losses_at(inst, opt.w_overall);

  std::printf("group optima: w_g0=%+.4f  w_g1=%+.4f  w_overall=%+.4f\n", opt.w_g0(0),
              opt.w_g1(0), opt.w_overall(0));
  std::printf("unconstrained: loss=%.4f gap=%.4f\n\n", at_opt.overall, at_opt.gap());

  const double gammas[] = {2.0, 1.0, 0.5, 0.1, 0.0};

  std::printf("band search (two signed branches, winner kept):\n");
  for (double gamma : gammas) {
    ELConfig cfg;
    cfg.gamma = gamma;
    cfg.epsilon = 1e-6;
    const SolveReport rep = optimal_gamma_el(inst, opt, cfg);
    print_row(rep.algorithm.c_str(), gamma, rep.w, rep.train);
  }

  std::printf("\nsegment interpolation (cheaper, possibly suboptimal):\n");
  for (double gamma : gammas) {
    ELConfig cfg;
    cfg.gamma = gamma;
    cfg.epsilon = 1e-6;
    const SolveReport rep = suboptimal_gamma_el(inst, cfg);
    print_row(rep.algorithm.c_str(), gamma, rep.w, rep.train);
  }

  std::printf("\npenalty baseline (soft constraint, no feasibility guarantee):\n");
  for (double gamma : {1.0, 0.1}) {
    const PenaltyResult res = penalty_train(inst, gamma, PenaltyConfig{});
    print_row(res.report.algorithm.c_str(), gamma, res.report.w, res.report.train);
  }
  return 0;
}

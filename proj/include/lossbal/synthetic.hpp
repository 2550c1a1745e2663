#pragma once

// Synthetic two-group instances with quadratic group losses
//
//   L_a(w) = (w - c_a)' Q_a (w - c_a) + d_a,   Q_a SPD,
//
// and an independent oracle for the balance problem
// min p0 L0 + p1 L1 s.t. |L0 - L1| <= gamma.  Any constrained optimum is a
// stationary point of L + mu (L0 - L1) for some scalar mu, i.e. solves
//
//   [(p0 + mu) Q0 + (p1 - mu) Q1] w = (p0 + mu) Q0 c0 + (p1 - mu) Q1 c1.
//
// The oracle scans mu over the positive-definite range of that matrix,
// refines every crossing of L0 - L1 with +gamma and -gamma by bisection, and
// returns the feasible candidate (including the unconstrained optimum when it
// is feasible) with the smallest population loss.  This path shares no code
// with the level-bisection solvers it is used to check.

#include <random>
#include <vector>

#include "lossbal/common.hpp"

namespace lossbal {

class QuadraticLoss {
 public:
  QuadraticLoss(Vector center, Matrix curvature, double offset = 0.0)
      : c_(std::move(center)), q_(std::move(curvature)), d_(offset) {
    if (q_.rows() != q_.cols() || q_.rows() != c_.size())
      throw Error("quadratic loss: center/curvature dimensions disagree");
    q_ = ((q_ + q_.transpose()) / 2.0).eval();  // enforce symmetry
    Eigen::LLT<Matrix> llt(q_);
    if (llt.info() != Eigen::Success)
      throw Error("quadratic loss: curvature must be positive definite");
  }

  double value(const Vector& w) const {
    const Vector r = w - c_;
    return r.dot(q_ * r) + d_;
  }
  Vector gradient(const Vector& w) const { return 2.0 * (q_ * (w - c_)); }
  Matrix hessian(const Vector& w) const {
    (void)w;
    return 2.0 * q_;
  }
  Index dim() const { return c_.size(); }

  const Vector& center() const { return c_; }
  const Matrix& curvature() const { return q_; }
  double offset() const { return d_; }

 private:
  Vector c_;
  Matrix q_;
  double d_;
};

// Two quadratic group losses plus population weights; same problem interface
// as DatasetProblem, so every balance algorithm runs on it unchanged.
class SyntheticQuadratic {
 public:
  SyntheticQuadratic(QuadraticLoss l0, QuadraticLoss l1, double p0, double p1)
      : l0_(std::move(l0)), l1_(std::move(l1)), p0_(p0), p1_(p1) {
    require(l0_.dim() == l1_.dim(), "synthetic instance: dimension mismatch");
    require(p0_ > 0.0 && p1_ > 0.0, "synthetic instance: weights must be positive");
  }

  const QuadraticLoss& loss0() const { return l0_; }
  const QuadraticLoss& loss1() const { return l1_; }
  double p0() const { return p0_; }
  double p1() const { return p1_; }
  WeightedSum<QuadraticLoss, QuadraticLoss> overall() const {
    return WeightedSum<QuadraticLoss, QuadraticLoss>(l0_, l1_, p0_, p1_);
  }
  Index dim() const { return l0_.dim(); }

  // Group-optimum margins in closed form (w_ga = c_a).
  double margin0() const { return l1_.value(l0_.center()) - l0_.value(l0_.center()); }
  double margin1() const { return l0_.value(l1_.center()) - l1_.value(l1_.center()); }

  // Margins strictly above `min_margin`, offsets equal, weights in
  // [0.25, 0.75]; deterministic in (dim, rng state).
  static SyntheticQuadratic random(Index dim, std::mt19937_64& rng,
                                   double min_margin = 0.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.25, 0.75);
    for (int attempt = 0; attempt < 1000; ++attempt) {
      auto spd = [&]() {
        Matrix a(dim, dim);
        for (Index i = 0; i < dim; ++i)
          for (Index j = 0; j < dim; ++j) a(i, j) = gauss(rng);
        return Matrix(a.transpose() * a + 0.3 * Matrix::Identity(dim, dim));
      };
      Vector c0(dim), c1(dim);
      for (Index i = 0; i < dim; ++i) c0(i) = gauss(rng);
      for (Index i = 0; i < dim; ++i) c1(i) = gauss(rng);
      const double p0 = unif(rng);
      SyntheticQuadratic inst(QuadraticLoss(c0, spd()), QuadraticLoss(c1, spd()),
                              p0, 1.0 - p0);
      if (inst.margin0() > min_margin + 0.05 && inst.margin1() > min_margin + 0.05)
        return inst;
    }
    throw Error("synthetic instance: could not sample the requested margins");
  }

 private:
  QuadraticLoss l0_;
  QuadraticLoss l1_;
  double p0_, p1_;
};

struct OracleSolution {
  Vector w;
  double loss = 0.0;   // population loss at w
  double gap = 0.0;    // L0 - L1 at w (signed)
};

inline OracleSolution synth_oracle_solve(const SyntheticQuadratic& inst, double gamma) {
  require(gamma >= 0.0, "oracle: gamma must be nonnegative");
  if (inst.margin0() < 0.0 || inst.margin1() < 0.0)
    throw AssumptionError("oracle: group-optimum margins must be nonnegative",
                          inst.margin0(), inst.margin1());

  const Matrix& q0 = inst.loss0().curvature();
  const Matrix& q1 = inst.loss1().curvature();
  const Vector& c0 = inst.loss0().center();
  const Vector& c1 = inst.loss1().center();
  const double p0 = inst.p0(), p1 = inst.p1();

  auto w_at = [&](double mu) -> Vector {
    const Matrix m = (p0 + mu) * q0 + (p1 - mu) * q1;
    const Vector rhs = (p0 + mu) * (q0 * c0) + (p1 - mu) * (q1 * c1);
    return m.ldlt().solve(rhs);
  };
  auto pd_at = [&](double mu) {
    const Matrix m = (p0 + mu) * q0 + (p1 - mu) * q1;
    return Eigen::LLT<Matrix>(m).info() == Eigen::Success;
  };
  auto gap_at = [&](const Vector& w) {
    return inst.loss0().value(w) - inst.loss1().value(w);
  };
  auto overall_at = [&](const Vector& w) {
    return p0 * inst.loss0().value(w) + p1 * inst.loss1().value(w);
  };

  OracleSolution best;
  bool have = false;
  auto consider = [&](const Vector& w) {
    const double g = gap_at(w);
    if (std::abs(g) > gamma + 1e-9) return;
    const double l = overall_at(w);
    if (!have || l < best.loss) {
      best = {w, l, g};
      have = true;
    }
  };

  consider(w_at(0.0));  // unconstrained optimum

  // Positive-definite range of the path matrix, found by doubling + bisection.
  auto pd_edge = [&](double dir) {  // dir = +1 or -1
    double inside = 0.0, step = 1.0;
    const double cap = 1e4;
    while (step <= cap && pd_at(dir * step)) {
      inside = step;
      step *= 2.0;
    }
    if (step > cap) return dir * inside;  // PD beyond the cap; scan to the cap
    double outside = step;
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (inside + outside);
      (pd_at(dir * mid) ? inside : outside) = mid;
    }
    return dir * inside;
  };
  const double mu_hi = pd_edge(+1.0);
  const double mu_lo = pd_edge(-1.0);

  // Scan the path, refine every crossing of gap = +/-gamma by bisection.
  const int kScan = 4000;
  const double margin = 1e-6 * (mu_hi - mu_lo);
  double prev_mu = mu_lo + margin;
  double prev_gap = gap_at(w_at(prev_mu));
  for (int i = 1; i <= kScan; ++i) {
    const double mu = mu_lo + margin +
                      (mu_hi - mu_lo - 2.0 * margin) * static_cast<double>(i) / kScan;
    const double g = gap_at(w_at(mu));
    for (const double target : {gamma, -gamma}) {
      if ((prev_gap - target) * (g - target) <= 0.0) {
        double a = prev_mu, b = mu, ga = prev_gap - target;
        for (int it = 0; it < 100; ++it) {
          const double m = 0.5 * (a + b);
          const double gm = gap_at(w_at(m)) - target;
          if (ga * gm <= 0.0) b = m; else { a = m; ga = gm; }
          if (std::abs(b - a) < 1e-14 * (1.0 + std::abs(b))) break;
        }
        consider(w_at(0.5 * (a + b)));
      }
    }
    prev_mu = mu;
    prev_gap = g;
  }

  if (!have)
    throw InfeasibleError("oracle: no feasible candidate found on the stationary path");
  return best;
}

}  // namespace lossbal

#pragma once

// Group-conditional empirical losses with exact first- and second-order
// oracles.  A linear predictor scores x as w'[x;1] (bias folded into the last
// weight).  Per-group loss of group a:
//
//   squared error:  Lbar_a(w) = (1/n_a) sum (y_i - s_i)^2        + eta*|w|^2
//   logistic (BCE): Lbar_a(w) = (1/n_a) sum bce(s_i, y_i)        + eta*|w|^2
//
// with the numerically stable bce(s,y) = max(s,0) - s*y + log(1+exp(-|s|)).
// eta > 0 makes every group loss strictly convex.  The population loss is
// p0*Lbar_0 + p1*Lbar_1 with p_a defaulting to the empirical fraction n_a/n.
//
// For squared error the loss is a fixed quadratic in w, so the constructor
// folds the subset into Gram statistics (X'X, X'y, y'y) and every oracle call
// is O(d^2) independent of n_a.

#include <array>
#include <optional>

#include "lossbal/common.hpp"
#include "lossbal/dataset.hpp"

namespace lossbal {

enum class LossKind { squared_error, binary_cross_entropy };
enum class GroupSel { g0 = 0, g1 = 1, all = 2 };

struct LossSpec {
  LossKind kind = LossKind::squared_error;
  double eta = 0.0;  // ridge strength on the full weight vector (bias included)
  // Population weights (p0, p1); empirical fractions when unset.
  std::optional<std::array<double, 2>> group_weights;
};

inline double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

inline double bce_term(double s, double y) {
  return std::max(s, 0.0) - s * y + std::log1p(std::exp(-std::abs(s)));
}

inline double predict_score(const Vector& w, const Vector& x) {
  if (w.size() != x.size() + 1)
    throw Error("predict_score: weight dimension must be feature dim + 1");
  return w.head(x.size()).dot(x) + w(w.size() - 1);
}

// Mean loss over one group's subset plus the ridge term; exposes exact
// value/gradient/Hessian and models SmoothObjective.
class GroupLoss {
 public:
  GroupLoss(const GroupedDataset& data, const LossSpec& spec, int group)
      : kind_(spec.kind), eta_(spec.eta) {
    const auto idx = data.group_indices(group);
    n_ = static_cast<double>(idx.size());
    dim_ = data.cols() + 1;
    Matrix x(static_cast<Index>(idx.size()), dim_);
    Vector y(static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      x.row(static_cast<Index>(k)).head(data.cols()) = data.features().row(idx[k]);
      x(static_cast<Index>(k), dim_ - 1) = 1.0;
      y(static_cast<Index>(k)) = data.targets()(idx[k]);
    }
    if (kind_ == LossKind::binary_cross_entropy) {
      for (Index i = 0; i < y.size(); ++i)
        if (y(i) != 0.0 && y(i) != 1.0)
          throw DataError("binary cross-entropy requires 0/1 targets");
      x_ = std::move(x);
      y_ = std::move(y);
    } else {
      gram_.noalias() = x.transpose() * x;
      xty_.noalias() = x.transpose() * y;
      yty_ = y.squaredNorm();
    }
  }

  double value(const Vector& w) const {
    check_dim(w);
    if (kind_ == LossKind::squared_error)
      return (w.dot(gram_ * w) - 2.0 * xty_.dot(w) + yty_) / n_ + eta_ * w.squaredNorm();
    const Vector s = x_ * w;
    double acc = 0.0;
    for (Index i = 0; i < s.size(); ++i) acc += bce_term(s(i), y_(i));
    return acc / n_ + eta_ * w.squaredNorm();
  }

  Vector gradient(const Vector& w) const {
    check_dim(w);
    if (kind_ == LossKind::squared_error)
      return (2.0 / n_) * (gram_ * w - xty_) + 2.0 * eta_ * w;
    const Vector s = x_ * w;
    Vector r(s.size());
    for (Index i = 0; i < s.size(); ++i) r(i) = sigmoid(s(i)) - y_(i);
    return x_.transpose() * r / n_ + 2.0 * eta_ * w;
  }

  Matrix hessian(const Vector& w) const {
    check_dim(w);
    if (kind_ == LossKind::squared_error)
      return (2.0 / n_) * gram_ + 2.0 * eta_ * Matrix::Identity(dim_, dim_);
    const Vector s = x_ * w;
    Vector d(s.size());
    for (Index i = 0; i < s.size(); ++i) {
      const double p = sigmoid(s(i));
      d(i) = p * (1.0 - p);
    }
    Matrix h = x_.transpose() * d.asDiagonal() * x_ / n_;
    h.diagonal().array() += 2.0 * eta_;
    return h;
  }

  Index dim() const { return dim_; }

 private:
  void check_dim(const Vector& w) const {
    if (w.size() != dim_) throw Error("group loss: weight dimension mismatch");
    if (!w.allFinite()) throw Error("group loss: non-finite weight vector");
  }

  LossKind kind_;
  double eta_;
  double n_ = 0.0;
  Index dim_ = 0;
  // BCE keeps the subset rows; squared error keeps Gram statistics only.
  Matrix x_;
  Vector y_;
  Matrix gram_;
  Vector xty_;
  double yty_ = 0.0;
};

// Both group losses plus population weights; the container every balance
// algorithm consumes.  `overall()` views p0*L0 + p1*L1 as a SmoothObjective.
class DatasetProblem {
 public:
  DatasetProblem(const GroupedDataset& data, const LossSpec& spec)
      : l0_(data, spec, 0), l1_(data, spec, 1) {
    if (spec.group_weights) {
      p0_ = (*spec.group_weights)[0];
      p1_ = (*spec.group_weights)[1];
      require(p0_ > 0.0 && p1_ > 0.0, "group weights must be positive");
    } else {
      p0_ = data.group_fraction(0);
      p1_ = data.group_fraction(1);
    }
  }

  const GroupLoss& loss0() const { return l0_; }
  const GroupLoss& loss1() const { return l1_; }
  double p0() const { return p0_; }
  double p1() const { return p1_; }
  WeightedSum<GroupLoss, GroupLoss> overall() const {
    return WeightedSum<GroupLoss, GroupLoss>(l0_, l1_, p0_, p1_);
  }
  Index dim() const { return l0_.dim(); }

 private:
  GroupLoss l0_;
  GroupLoss l1_;
  double p0_ = 0.5;
  double p1_ = 0.5;
};

// One-shot evaluation helpers (construct the needed subset on the fly).
inline double empirical_loss(const Vector& w, const GroupedDataset& data,
                             const LossSpec& spec, GroupSel sel) {
  if (sel == GroupSel::all) {
    DatasetProblem prob(data, spec);
    return prob.overall().value(w);
  }
  return GroupLoss(data, spec, static_cast<int>(sel)).value(w);
}

inline Vector loss_gradient(const Vector& w, const GroupedDataset& data,
                            const LossSpec& spec, GroupSel sel) {
  if (sel == GroupSel::all) {
    DatasetProblem prob(data, spec);
    return prob.overall().gradient(w);
  }
  return GroupLoss(data, spec, static_cast<int>(sel)).gradient(w);
}

inline Matrix loss_hessian(const Vector& w, const GroupedDataset& data,
                           const LossSpec& spec, GroupSel sel) {
  if (sel == GroupSel::all) {
    DatasetProblem prob(data, spec);
    return prob.overall().hessian(w);
  }
  return GroupLoss(data, spec, static_cast<int>(sel)).hessian(w);
}

}  // namespace lossbal

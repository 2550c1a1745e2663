#pragma once

// Grouped samples (X, Y, A) with a binary protected attribute A in {0,1},
// plus the deterministic split and train-statistics standardization used by
// every experiment pipeline.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "lossbal/common.hpp"

namespace lossbal {

class GroupedDataset {
 public:
  // features: n x d, targets: n, groups: n entries in {0,1}.  Both groups
  // must be represented.
  GroupedDataset(Matrix features, Vector targets, std::vector<int> groups)
      : features_(std::move(features)),
        targets_(std::move(targets)),
        groups_(std::move(groups)) {
    const Index n = features_.rows();
    if (targets_.size() != n || static_cast<Index>(groups_.size()) != n)
      throw DataError("dataset: features/targets/groups row counts disagree");
    if (n == 0) throw DataError("dataset: empty");
    if (!features_.allFinite() || !targets_.allFinite())
      throw DataError("dataset: non-finite feature or target value");
    for (int a : groups_) {
      if (a != 0 && a != 1) throw DataError("dataset: group label outside {0,1}");
      ++(a == 0 ? n0_ : n1_);
    }
    if (n0_ == 0 || n1_ == 0)
      throw DataError("dataset: a group has no samples");
  }

  const Matrix& features() const { return features_; }
  const Vector& targets() const { return targets_; }
  const std::vector<int>& groups() const { return groups_; }
  Index rows() const { return features_.rows(); }
  Index cols() const { return features_.cols(); }
  Index group_count(int a) const { return a == 0 ? n0_ : n1_; }

  // Empirical group weight n_a / n.
  double group_fraction(int a) const {
    return static_cast<double>(group_count(a)) / static_cast<double>(rows());
  }

  std::vector<Index> group_indices(int a) const {
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(group_count(a)));
    for (Index i = 0; i < rows(); ++i)
      if (groups_[static_cast<std::size_t>(i)] == a) out.push_back(i);
    return out;
  }

  GroupedDataset subset(const std::vector<Index>& idx) const {
    Matrix f(static_cast<Index>(idx.size()), features_.cols());
    Vector t(static_cast<Index>(idx.size()));
    std::vector<int> g(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      f.row(static_cast<Index>(k)) = features_.row(idx[k]);
      t(static_cast<Index>(k)) = targets_(idx[k]);
      g[k] = groups_[static_cast<std::size_t>(idx[k])];
    }
    return GroupedDataset(std::move(f), std::move(t), std::move(g));
  }

 private:
  Matrix features_;
  Vector targets_;
  std::vector<int> groups_;
  Index n0_ = 0;
  Index n1_ = 0;
};

// Deterministic shuffle-split.  Same (data, ratio, seed) always yields the
// same partition; both groups must survive in both halves.
inline std::pair<GroupedDataset, GroupedDataset> train_test_split(
    const GroupedDataset& data, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw DataError("train_test_split: ratio must lie in (0,1)");
  const Index n = data.rows();
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  const Index n_train = std::clamp<Index>(
      static_cast<Index>(std::llround(ratio * static_cast<double>(n))), 1, n - 1);
  std::vector<Index> tr(perm.begin(), perm.begin() + n_train);
  std::vector<Index> te(perm.begin() + n_train, perm.end());

  auto has_both = [&](const std::vector<Index>& idx) {
    bool g0 = false, g1 = false;
    for (Index i : idx) (data.groups()[static_cast<std::size_t>(i)] == 0 ? g0 : g1) = true;
    return g0 && g1;
  };
  if (!has_both(tr) || !has_both(te))
    throw DataError("train_test_split: a group is absent from one split");
  return {data.subset(tr), data.subset(te)};
}

// Zero-mean/unit-variance scaling fitted on train only.  Columns may be
// exempted (one-hot indicators stay 0/1); zero-variance columns are centered
// but not scaled.
class Standardizer {
 public:
  Standardizer(const GroupedDataset& train, std::vector<bool> standardize_col)
      : mask_(std::move(standardize_col)) {
    const Matrix& x = train.features();
    if (static_cast<Index>(mask_.size()) != x.cols())
      throw DataError("standardizer: column mask length mismatch");
    mean_ = x.colwise().mean();
    Vector var = (x.rowwise() - mean_.transpose()).array().square().colwise().mean();
    scale_ = var.array().sqrt();
    for (Index j = 0; j < x.cols(); ++j) {
      if (!mask_[static_cast<std::size_t>(j)]) {
        mean_(j) = 0.0;
        scale_(j) = 1.0;
      } else if (scale_(j) < 1e-12) {
        scale_(j) = 1.0;
      }
    }
  }

  explicit Standardizer(const GroupedDataset& train)
      : Standardizer(train,
                     std::vector<bool>(static_cast<std::size_t>(train.cols()), true)) {}

  GroupedDataset apply(const GroupedDataset& data) const {
    if (data.cols() != mean_.size())
      throw DataError("standardizer: column count mismatch");
    Matrix x = (data.features().rowwise() - mean_.transpose()).array().rowwise() /
               scale_.transpose().array();
    return GroupedDataset(std::move(x), data.targets(), data.groups());
  }

  const Vector& mean() const { return mean_; }
  const Vector& scale() const { return scale_; }

 private:
  Vector mean_;
  Vector scale_;
  std::vector<bool> mask_;
};

}  // namespace lossbal

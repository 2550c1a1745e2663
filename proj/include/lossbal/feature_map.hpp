#pragma once

// Frozen nonlinear feature map for output-layer fine-tuning: a fixed hidden
// layer W (m x d) with activation, mapping x to [1, act(W x)].  Training a
// linear model on the mapped dataset then adjusts only the output layer.

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>

#include "lossbal/common.hpp"
#include "lossbal/dataset.hpp"
#include "lossbal/loss.hpp"

namespace lossbal {

enum class Activation { sigmoid, identity };

class FrozenFeatureMap {
 public:
  FrozenFeatureMap(Matrix weights, Activation act)
      : w_(std::move(weights)), act_(act) {
    if (w_.size() == 0) throw DataError("feature map: empty weight matrix");
    if (!w_.allFinite()) throw DataError("feature map: non-finite weight");
  }

  Index input_dim() const { return w_.cols(); }
  // Constant-1 column prepended to the activations.
  Index output_dim() const { return w_.rows() + 1; }
  const Matrix& weights() const { return w_; }
  Activation activation() const { return act_; }

  // Gaussian N(0, 1/sqrt(d)) entries; deterministic in (m, d, seed).
  static FrozenFeatureMap random(Index m, Index d, std::uint64_t seed,
                                 Activation act = Activation::sigmoid) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
    Matrix w(m, d);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < d; ++j) w(i, j) = gauss(rng);
    return FrozenFeatureMap(std::move(w), act);
  }

 private:
  Matrix w_;
  Activation act_;
};

// New dataset whose features are [1, act(W x)]; targets and groups unchanged.
inline GroupedDataset apply_feature_map(const FrozenFeatureMap& map,
                                        const GroupedDataset& data) {
  if (data.cols() != map.input_dim())
    throw DataError("feature map: input dimension mismatch");
  Matrix z = data.features() * map.weights().transpose();  // n x m
  if (map.activation() == Activation::sigmoid)
    z = z.unaryExpr([](double v) { return sigmoid(v); });
  Matrix out(data.rows(), map.output_dim());
  out.col(0).setOnes();
  out.rightCols(map.weights().rows()) = z;
  return GroupedDataset(std::move(out), data.targets(), data.groups());
}

// Text format: first line the activation name, then one comma-separated row
// of hidden weights per line.
inline void save_feature_map(const FrozenFeatureMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("feature map: cannot open '" + path + "' for writing");
  out << (map.activation() == Activation::sigmoid ? "sigmoid" : "identity") << "\n";
  const Matrix& w = map.weights();
  out.precision(17);
  for (Index i = 0; i < w.rows(); ++i) {
    for (Index j = 0; j < w.cols(); ++j) out << (j ? "," : "") << w(i, j);
    out << "\n";
  }
}

inline FrozenFeatureMap load_feature_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("feature map: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("feature map: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  Activation act;
  if (line == "sigmoid") act = Activation::sigmoid;
  else if (line == "identity") act = Activation::identity;
  else throw DataError("feature map: unknown activation '" + line + "'");

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw DataError("feature map: bad number '" + cell + "' in " + path);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError("feature map: ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("feature map: no weight rows in " + path);
  Matrix w(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < w.rows(); ++i)
    for (Index j = 0; j < w.cols(); ++j)
      w(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return FrozenFeatureMap(std::move(w), act);
}

}  // namespace lossbal

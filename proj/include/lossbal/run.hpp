#pragma once

// End-to-end pipelines behind the command-line tool.
//
// A run cell is one (gamma, seed) pair: load CSV per schema, 70/30-style
// split by seed, standardize numeric columns with train statistics, apply an
// optional frozen feature map, train the selected algorithm, evaluate the
// held-out split.  Cells may run concurrently (LOSSBALANCE_THREADS caps the
// pool); results are buffered and written in canonical order so identical
// RunSpecs produce byte-identical CSVs.  Train rows report the regularized
// losses the optimizer controlled; test rows report plain empirical losses.
//
// Result CSV columns: algo,gamma,seed,split,loss,loss_g0,loss_g1,gap,runtime_ms
// `report` merges result CSVs into per-algorithm curve files (gamma,gap,loss)
// averaged over seeds on the test split.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "lossbal/baselines.hpp"
#include "lossbal/csv.hpp"
#include "lossbal/el.hpp"
#include "lossbal/feature_map.hpp"

namespace lossbal {

enum class Algo { alg2, alg3, penalty, linre, fairbatch };

inline std::string algo_name(Algo a) {
  switch (a) {
    case Algo::alg2: return "alg2";
    case Algo::alg3: return "alg3";
    case Algo::penalty: return "penalty";
    case Algo::linre: return "linre";
    case Algo::fairbatch: return "fairbatch";
  }
  return "?";
}

inline Algo algo_from_name(const std::string& s) {
  if (s == "alg2") return Algo::alg2;
  if (s == "alg3") return Algo::alg3;
  if (s == "penalty") return Algo::penalty;
  if (s == "linre") return Algo::linre;
  if (s == "fairbatch") return Algo::fairbatch;
  throw SchemaError("unknown algorithm '" + s + "' (alg2|alg3|penalty|linre|fairbatch)");
}

struct RunSpec {
  Algo algo = Algo::alg2;
  std::vector<double> gammas = {0.0};
  LossKind loss = LossKind::squared_error;
  double eta = 0.002;
  double epsilon = 0.01;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  double split_ratio = 0.7;
  std::string data_path;
  std::string schema_path;
  std::string feature_map_path;  // optional frozen map applied after standardization
  std::string out_path;
  bool timing = true;  // false writes runtime_ms as 0 for byte-reproducible artifacts
  int threads = 1;
  double lr = 0.0;  // 0 = algorithm default (0.005, or 0.001 with a feature map)
};

inline const char* kResultHeader =
    "algo,gamma,seed,split,loss,loss_g0,loss_g1,gap,runtime_ms";

namespace detail {

inline std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

struct CellResult {
  double gamma = 0.0;
  std::uint64_t seed = 0;
  GroupLossValues train;
  GroupLossValues test;
  long long runtime_ms = 0;
};

inline GroupLossValues eval_losses(const Vector& w, const GroupedDataset& data,
                                   LossKind kind, double p0, double p1) {
  LossSpec plain{kind, 0.0, std::nullopt};
  GroupLossValues v;
  v.l0 = GroupLoss(data, plain, 0).value(w);
  v.l1 = GroupLoss(data, plain, 1).value(w);
  v.overall = p0 * v.l0 + p1 * v.l1;
  return v;
}

inline CellResult run_cell(const RunSpec& spec, const LoadedData& loaded, double gamma,
                           std::uint64_t seed) {
  auto [train_raw, test_raw] = train_test_split(loaded.data, spec.split_ratio, seed);
  const Standardizer std_fit(train_raw, loaded.numeric_mask);
  GroupedDataset train = std_fit.apply(train_raw);
  GroupedDataset test = std_fit.apply(test_raw);
  if (!spec.feature_map_path.empty()) {
    const FrozenFeatureMap map = load_feature_map(spec.feature_map_path);
    train = apply_feature_map(map, train);
    test = apply_feature_map(map, test);
  }
  const LossSpec lspec{spec.loss, spec.eta, std::nullopt};
  const double lr_default = spec.feature_map_path.empty() ? 0.005 : 0.001;
  const double lr = spec.lr > 0.0 ? spec.lr : lr_default;

  SolveReport rep;
  switch (spec.algo) {
    case Algo::alg2: {
      ELConfig cfg;
      cfg.gamma = gamma;
      cfg.epsilon = spec.epsilon;
      rep = optimal_gamma_el(train, lspec, cfg);
      break;
    }
    case Algo::alg3: {
      ELConfig cfg;
      cfg.gamma = gamma;
      cfg.epsilon = spec.epsilon;
      rep = suboptimal_gamma_el(train, lspec, cfg);
      break;
    }
    case Algo::penalty: {
      PenaltyConfig cfg;
      cfg.lr = lr;
      rep = penalty_train(train, lspec, gamma, cfg).report;
      break;
    }
    case Algo::linre: {
      rep = linear_relaxation_train(train, lspec, gamma);
      break;
    }
    case Algo::fairbatch: {
      FairBatchConfig cfg;
      cfg.lr = lr;
      cfg.seed = seed;
      rep = fairbatch_train(train, lspec, gamma, cfg).report;
      break;
    }
  }

  CellResult out;
  out.gamma = gamma;
  out.seed = seed;
  out.train = rep.train;
  const DatasetProblem train_prob(train, lspec);
  out.test = eval_losses(rep.w, test, spec.loss, train_prob.p0(), train_prob.p1());
  out.runtime_ms = spec.timing ? rep.wallclock_ms : 0;
  return out;
}

inline std::vector<CellResult> run_cells(const RunSpec& spec, const LoadedData& loaded) {
  struct Cell {
    double gamma;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (double g : spec.gammas)
    for (std::uint64_t s : spec.seeds) cells.push_back({g, s});

  std::vector<CellResult> results(cells.size());
  std::vector<std::string> failures(cells.size());
  const int workers =
      std::max(1, std::min<int>(spec.threads, static_cast<int>(cells.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        results[i] = run_cell(spec, loaded, cells[i].gamma, cells[i].seed);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (!failures[i].empty())
      throw Error("cell gamma=" + fmt_g(cells[i].gamma) +
                  " seed=" + std::to_string(cells[i].seed) + " failed: " + failures[i]);
  return results;
}

inline void append_rows(const RunSpec& spec, const std::vector<CellResult>& results) {
  bool need_header = true;
  {
    std::ifstream probe(spec.out_path);
    if (probe) {
      std::string first;
      std::getline(probe, first);
      if (!first.empty() && first.back() == '\r') first.pop_back();
      if (!first.empty()) {
        if (first != kResultHeader)
          throw SchemaError("results file '" + spec.out_path +
                            "' has a different header; refusing to append");
        need_header = false;
      }
    }
  }
  std::ofstream out(spec.out_path, std::ios::app);
  if (!out) throw DataError("cannot open results file '" + spec.out_path + "'");
  if (need_header) out << kResultHeader << "\n";
  const std::string algo = algo_name(spec.algo);
  for (const auto& r : results) {
    for (int split = 0; split < 2; ++split) {
      const GroupLossValues& v = split == 0 ? r.train : r.test;
      out << algo << ',' << fmt_g(r.gamma) << ',' << r.seed << ','
          << (split == 0 ? "train" : "test") << ',' << fmt_g(v.overall) << ','
          << fmt_g(v.l0) << ',' << fmt_g(v.l1) << ',' << fmt_g(v.gap()) << ','
          << r.runtime_ms << "\n";
    }
  }
}

inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double m = 0.0;
  for (double x : xs) m += x;
  m /= n;
  double s2 = 0.0;
  for (double x : xs) s2 += (x - m) * (x - m);
  const double sd = xs.size() > 1 ? std::sqrt(s2 / (n - 1.0)) : 0.0;
  return {m, sd};
}

inline void print_summary(std::ostream& os, const RunSpec& spec,
                          const std::vector<CellResult>& results) {
  char buf[256];
  for (double g : spec.gammas) {
    for (int split = 0; split < 2; ++split) {
      std::vector<double> L, l0, l1, gap;
      for (const auto& r : results) {
        if (r.gamma != g) continue;
        const GroupLossValues& v = split == 0 ? r.train : r.test;
        L.push_back(v.overall);
        l0.push_back(v.l0);
        l1.push_back(v.l1);
        gap.push_back(v.gap());
      }
      if (L.empty()) continue;
      const auto [lm, ls] = mean_std(L);
      const auto [m0, s0] = mean_std(l0);
      const auto [m1, s1] = mean_std(l1);
      const auto [gm, gs] = mean_std(gap);
      std::snprintf(buf, sizeof buf,
                    "%s gamma=%g %-5s L %.4f ± %.4f | L0 %.4f ± %.4f | L1 %.4f ± %.4f "
                    "| gap %.4f ± %.4f",
                    algo_name(spec.algo).c_str(), g, split == 0 ? "train" : "test", lm,
                    ls, m0, s0, m1, s1, gm, gs);
      os << buf << "\n";
    }
  }
}

}  // namespace detail

// Train (single gamma) or sweep (gamma grid): compute all cells, append rows,
// print table-style summaries.
inline void run_train(const RunSpec& spec, std::ostream& os = std::cout) {
  require(!spec.gammas.empty(), "run: at least one gamma is required");
  require(!spec.out_path.empty(), "run: --out is required");
  const DatasetSchema schema = parse_schema(spec.schema_path);
  const LoadedData loaded = load_csv(spec.data_path, schema);
  const auto results = detail::run_cells(spec, loaded);
  detail::append_rows(spec, results);
  detail::print_summary(os, spec, results);
}

inline void run_sweep(const RunSpec& spec, std::ostream& os = std::cout) {
  run_train(spec, os);
}

// Merge result CSVs into per-algorithm curve files <out_prefix><algo>.csv
// with columns gamma,gap,loss (test-split means across seeds).  Duplicate
// (algo,gamma,seed,split) rows keep the first occurrence and warn.
inline void run_report(const std::vector<std::string>& inputs,
                       const std::string& out_prefix, std::ostream& warn = std::cerr) {
  struct Key {
    std::string algo;
    double gamma;
    std::uint64_t seed;
    std::string split;
    bool operator<(const Key& o) const {
      return std::tie(algo, gamma, seed, split) < std::tie(o.algo, o.gamma, o.seed, o.split);
    }
  };
  struct Val {
    double loss, gap;
  };
  std::map<Key, Val> rows;
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) throw DataError("report: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("report: '" + path + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kResultHeader)
      throw SchemaError("report: '" + path + "' header does not match result format");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (cells.size() != 9)
        throw DataError("report: '" + path + "' line " + std::to_string(lineno) +
                        ": expected 9 cells");
      try {
        Key k{cells[0], std::stod(cells[1]),
              static_cast<std::uint64_t>(std::stoull(cells[2])), cells[3]};
        Val v{std::stod(cells[4]), std::stod(cells[7])};
        if (!rows.emplace(k, v).second)
          warn << "report: duplicate row for " << k.algo << " gamma=" << k.gamma
               << " seed=" << k.seed << " split=" << k.split << " (kept first)\n";
      } catch (const std::invalid_argument&) {
        throw DataError("report: '" + path + "' line " + std::to_string(lineno) +
                        ": malformed numeric cell");
      }
    }
  }

  // algo -> gamma -> test losses/gaps across seeds
  std::map<std::string, std::map<double, std::pair<std::vector<double>, std::vector<double>>>>
      curves;
  for (const auto& [k, v] : rows) {
    if (k.split != "test") continue;
    auto& bucket = curves[k.algo][k.gamma];
    bucket.first.push_back(v.loss);
    bucket.second.push_back(v.gap);
  }
  if (curves.empty()) throw DataError("report: no test rows found in the inputs");
  for (const auto& [algo, by_gamma] : curves) {
    const std::string path = out_prefix + algo + ".csv";
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("report: cannot open '" + path + "' for writing");
    out << "gamma,gap,loss\n";
    for (const auto& [gamma, bucket] : by_gamma) {
      const auto [lm, ls] = detail::mean_std(bucket.first);
      const auto [gm, gs] = detail::mean_std(bucket.second);
      (void)ls;
      (void)gs;
      out << detail::fmt_g(gamma) << ',' << detail::fmt_g(gm) << ',' << detail::fmt_g(lm)
          << "\n";
    }
  }
}

}  // namespace lossbal

// lossbal: train linear models under a group loss-balance constraint.
//
//   lossbal train --algo alg2 --gamma 0.05 --loss mse --data d.csv \
//                 --schema d.schema --out results.csv
//   lossbal sweep --algo alg2 --gammas 0,0.05,0.1 ...
//   lossbal report --out curves/curve_ results_a.csv results_b.csv
//
// Exit codes: 0 ok, 2 input error, 3 schema error, 4 solver failure.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lossbal/run.hpp"

namespace {

int env_threads() {
  const char* v = std::getenv("LOSSBALANCE_THREADS");
  if (!v) return 1;
  const int n = std::atoi(v);
  return n > 0 ? n : 1;
}

void add_common(CLI::App* cmd, lossbal::RunSpec& spec, std::string& algo,
                std::string& loss) {
  cmd->add_option("--algo", algo, "alg2|alg3|penalty|linre|fairbatch")
      ->required()
      ->check(CLI::IsMember({"alg2", "alg3", "penalty", "linre", "fairbatch"}));
  cmd->add_option("--loss", loss, "mse|bce")->check(CLI::IsMember({"mse", "bce"}));
  cmd->add_option("--eta", spec.eta, "ridge strength (default 0.002)");
  cmd->add_option("--epsilon", spec.epsilon, "bisection interval tolerance (default 0.01)");
  cmd->add_option("--seeds", spec.seeds, "split seeds (default 0 1 2 3 4)")->delimiter(',');
  cmd->add_option("--split-ratio", spec.split_ratio, "train fraction (default 0.7)");
  cmd->add_option("--data", spec.data_path, "input CSV")->required();
  cmd->add_option("--schema", spec.schema_path, "dataset schema file")->required();
  cmd->add_option("--feature-map", spec.feature_map_path,
                  "frozen feature map file (output-layer fine-tuning)");
  cmd->add_option("--out", spec.out_path, "results CSV (appended)")->required();
  cmd->add_option("--lr", spec.lr, "first-order learning rate override");
  cmd->add_flag("!--no-timing", spec.timing,
                "write runtime_ms as 0 for byte-reproducible outputs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"loss-balance trainer"};
  app.require_subcommand(1);

  lossbal::RunSpec spec;
  spec.threads = env_threads();
  std::string algo = "alg2", loss = "mse";
  double gamma = 0.0;
  std::vector<double> gammas;

  CLI::App* train = app.add_subcommand("train", "train one algorithm at one gamma");
  add_common(train, spec, algo, loss);
  train->add_option("--gamma", gamma, "balance tolerance")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "train across a gamma grid");
  add_common(sweep, spec, algo, loss);
  sweep->add_option("--gammas", gammas, "comma-separated gamma grid")
      ->required()
      ->delimiter(',');

  CLI::App* report = app.add_subcommand("report", "merge result CSVs into curve files");
  std::string out_prefix;
  std::vector<std::string> inputs;
  report->add_option("--out", out_prefix, "output path prefix for <prefix><algo>.csv")
      ->required();
  report->add_option("inputs", inputs, "result CSV files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (report->parsed()) {
      lossbal::run_report(inputs, out_prefix);
      return 0;
    }
    spec.algo = lossbal::algo_from_name(algo);
    spec.loss = loss == "bce" ? lossbal::LossKind::binary_cross_entropy
                              : lossbal::LossKind::squared_error;
    spec.gammas = train->parsed() ? std::vector<double>{gamma} : gammas;
    lossbal::run_train(spec);
    return 0;
  } catch (const lossbal::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 3;
  } catch (const lossbal::DataError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const lossbal::Error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}

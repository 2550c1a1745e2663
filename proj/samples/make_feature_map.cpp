// Generates a frozen random feature map sized to match a dataset, for the
// fixed-representation workflow: standardize inputs, push them through a
// random sigmoid layer, and train only the output weights with the balance
// constraint (pass the saved file to the CLI via --feature-map).
//
// The map's input width must equal the dataset's post-encoding column count,
// which depends on the categorical levels present, so this tool loads the data
// once and sizes the map from it.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "lossbal/csv.hpp"
#include "lossbal/feature_map.hpp"

using namespace lossbal;

int main(int argc, char** argv) {
  if (argc < 5 || argc > 7) {
    std::fprintf(stderr,
                 "usage: %s <data.csv> <schema> <units> <out_path> [seed] "
                 "[sigmoid|identity]\n",
                 argv[0]);
    return 2;
  }
  try {
    const std::string data_path = argv[1];
    const std::string schema_path = argv[2];
    const long units = std::strtol(argv[3], nullptr, 10);
    const std::string out_path = argv[4];
    const std::uint64_t seed = argc > 5 ? std::strtoull(argv[5], nullptr, 10) : 0;
    const Activation act = (argc > 6 && std::string(argv[6]) == "identity")
                               ? Activation::identity
                               : Activation::sigmoid;
    if (units <= 0) {
      std::fprintf(stderr, "units must be positive\n");
      return 2;
    }

    const LoadedData loaded = load_csv(data_path, parse_schema(schema_path));
    const Index d = loaded.data.cols();
    const FrozenFeatureMap map = FrozenFeatureMap::random(units, d, seed, act);
    save_feature_map(map, out_path);
    std::printf("wrote %s: %ld x %lld map (seed %llu), output dim %lld\n",
                out_path.c_str(), units, static_cast<long long>(d),
                static_cast<unsigned long long>(seed),
                static_cast<long long>(map.output_dim()));
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

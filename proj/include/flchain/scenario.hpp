// Scenario ingestion: a sectioned key-value file mirroring the deployment
// parameter grouping (blockchain / communication / federated learning), with
// environment-variable overrides and canonical serialization.
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "flchain/blockchain_queue.hpp"
#include "flchain/fl_runtime.hpp"
#include "flchain/network_model.hpp"
#include "flchain/types.hpp"

namespace flchain {

struct ScenarioError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Scenario {
    BlockchainParams blockchain;
    double arrival_rate = 0.2;  // nu, transactions/s

    RadioParams radio;
    double d_min_m = 0.0;
    double d_max_m = 4.15;

    FLConfig fl;
    int n_classes = 10;
    int feature_dim = 32;
    int samples_per_client = 100;
    int eval_per_class = 100;
    double cpu_cycles_per_sample = 1e-5;
    double clock_hz = 1e9;
    double clock_jitter = 0.2;
    double aggregator_clock_hz = 1e9;
    std::string model = "synthetic";  // synthetic|fnn|cnn|resnet50|vgg19

    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::uint64_t des_arrivals = 1000000;

    // parameter path -> value grid, e.g. "blockchain.mining_rate" -> {0.05,0.2,1}
    std::map<std::string, std::vector<double>> sweep;
};

Scenario default_scenario();

// Parse from text; unknown keys, malformed values and range violations throw
// ScenarioError naming the key and line. Does not read the environment.
Scenario parse_scenario(const std::string& text);

// Read a file, parse it, then apply FLCHAIN_<SECTION>_<KEY> environment
// overrides and cross-field validation.
Scenario load_scenario(const std::string& path);

void apply_env_overrides(Scenario& s);
void validate_scenario(const Scenario& s);

std::string serialize_scenario(const Scenario& s);

// Parameter-count presets for the model catalogue; 0 for "synthetic"
// (delays then use the trained model's own size).
long long preset_params(const std::string& model);

// Transaction size in bits: 2 bytes per parameter for a preset model,
// otherwise the raw configured size.
double effective_transaction_bits(const Scenario& s);

QueueParams queue_params(const Scenario& s);
P2PParams p2p_params(const Scenario& s);

// Value grid for a swept parameter, or `fallback` when the scenario does not
// override it.
std::vector<double> sweep_grid(const Scenario& s, const std::string& path,
                               std::vector<double> fallback);

}  // namespace flchain

// Experiment runners: parameter sweeps over the queue, confirmation-latency
// and federated-training models, emitted as deterministic plot-ready CSVs
// (one figure per file, cells written in grid order).
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flchain/scenario.hpp"

namespace flchain {

struct SweepResult {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> cell_errors;  // validation failures, run continues
};

// Analytic queue model only:
// lambda,nu,S_B,mean_delay,occupancy,throughput,inter_departure,p_fork,saturated
SweepResult run_queue_analysis(const Scenario& s, const std::filesystem::path& out_dir);

// Analytic and simulated models side by side:
// lambda,nu,S_B,mean_delay,occupancy,p_fork,des_mean_delay,rel_err,saturated
SweepResult run_queue_sweep(const Scenario& s, const std::filesystem::path& out_dir,
                            std::uint64_t seed);

// lambda,C_P2P,T_BC,p_fork over the mining-rate grid per P2P capacity.
SweepResult run_confirmation_sweep(const Scenario& s, const std::filesystem::path& out_dir,
                                   std::uint64_t seed);

// Per-round trajectories for every (K, Upsilon, seed) cell plus an
// efficiency matrix averaged over seeds.
SweepResult run_flchain_comparison(const Scenario& s, const std::filesystem::path& out_dir,
                                   std::uint64_t seed);

// Iteration delay of the model-size catalogue per client count:
// model,params,transaction_bits,K,delay_s,log10_delay_s
SweepResult model_size_delay_report(const Scenario& s, const std::filesystem::path& out_dir,
                                    std::uint64_t seed);

struct ModelPreset {
    std::string name;
    long long params;
};
const std::vector<ModelPreset>& model_catalogue();

}  // namespace flchain

// Federated optimization over a synthetic Gaussian-mixture classification
// task, scheduled either synchronously (one block per round carrying every
// client's update) or asynchronously (blocks fill from whichever updates
// arrive first, bounded by the block size or the timer). Wall-clock time is
// advanced on a deterministic virtual clock using the latency framework.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "flchain/latency_framework.hpp"
#include "flchain/types.hpp"

namespace flchain {

struct GlobalModel {
    std::vector<double> weights;  // class-major, bias appended per class
    int round = 0;
};

struct FLConfig {
    int clients = 50;               // K
    double participation = 1.0;     // Upsilon: block size as a client fraction
    int local_epochs = 5;           // E
    int minibatch = 20;             // B
    double lr_local = 0.01;         // eta_l
    double lr_global = 1.0;         // eta
    double tolerance = 0.0;         // epsilon on |l(w^t) - l(w^{t-1})|
    int max_rounds = 200;           // T_max
    bool iid = true;
    int classes_per_client = 3;     // non-IID label budget

    void validate() const;
};

struct FLRoundRecord {
    int round = 0;
    std::vector<int> participants;
    double wall_clock_s = 0.0;  // cumulative
    double eval_accuracy = 0.0;
    double eval_loss = 0.0;
};

struct ClientDataset {
    int dim = 0;
    int count = 0;
    std::vector<double> features;  // row-major count x dim
    std::vector<int> labels;
};

struct SyntheticTask {
    int n_classes = 0;
    int dim = 0;
    std::vector<ClientDataset> clients;
    std::vector<std::vector<int>> client_classes;  // label set per client
    ClientDataset eval;
};

// Gaussian mixture with unit noise around seeded class means. IID mode
// cycles every class through each client; non-IID mode restricts each client
// to `classes_per_client` labels drawn uniformly at random.
SyntheticTask generate_synthetic_task(int n_classes, int dim, int samples_per_client,
                                      int clients, bool iid, int classes_per_client,
                                      std::uint64_t seed, int eval_per_class = 100,
                                      double class_separation = 2.0);

std::size_t model_size(int n_classes, int dim);
std::vector<double> zero_model(int n_classes, int dim);

// Mean cross-entropy of the multinomial-logistic model on a dataset.
double dataset_loss(const std::vector<double>& weights, const ClientDataset& data,
                    int n_classes);
double dataset_accuracy(const std::vector<double>& weights, const ClientDataset& data,
                        int n_classes);

// Analytic gradient of the mean cross-entropy at `weights`.
std::vector<double> dataset_gradient(const std::vector<double>& weights,
                                     const ClientDataset& data, int n_classes);

// E epochs of mini-batch SGD from `weights` on one client's data. Throws
// std::runtime_error naming the client if the weights stop being finite.
std::vector<double> local_update(const std::vector<double>& weights, const ClientDataset& data,
                                 int n_classes, int epochs, int minibatch, double lr,
                                 std::uint64_t stream_seed, int client_id);

// SGD stream seed the schedulers hand to local_update for the update that
// trains on global model version `model_version` at client `client_id`.
std::uint64_t fl_local_stream_seed(std::uint64_t seed, int model_version, int client_id);

struct ModelUpdate {
    int client_id = 0;
    double samples = 0.0;  // N_k
    std::vector<double> weights;
};

// Dataset-size-weighted average of the updates, then a global step
// w <- w + eta (w_avg - w). Throws on an empty set or zero total samples.
std::vector<double> global_aggregate(const std::vector<ModelUpdate>& updates,
                                     const std::vector<double>& current, double eta);

// Everything the schedulers need besides the learning task itself.
struct ChainSetup {
    BlockchainParams chain;
    RadioParams radio;
    std::vector<ClientProfile> profiles;      // one per client
    double aggregator_clock_hz = 1e9;
    double cycles_per_accumulate = 1.0;
    long long model_params_for_delay = 0;     // 0: use the trained model's size
    std::vector<std::vector<double>>* weight_trace = nullptr;  // per-round global weights
};

std::vector<FLRoundRecord> run_s_flchain(const FLConfig& cfg, const SyntheticTask& task,
                                         const ChainSetup& setup, std::uint64_t seed);

std::vector<FLRoundRecord> run_a_flchain(const FLConfig& cfg, const SyntheticTask& task,
                                         const ChainSetup& setup, std::uint64_t seed);

// Mean evaluation accuracy divided by mean per-round iteration time.
double efficiency(const std::vector<FLRoundRecord>& trajectory);

// CSV export: round,wall_clock_s,participants,accuracy,loss with participant
// ids separated by ';' inside the field.
void write_trajectory_csv(const std::vector<FLRoundRecord>& trajectory, std::ostream& out);

}  // namespace flchain

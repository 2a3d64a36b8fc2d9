// Composition of the per-step delays into the expected iteration time, for
// both the synchronous (slowest-client) and asynchronous (batch-service
// queue) block-filling disciplines.
#pragma once

#include <vector>

#include "flchain/blockchain_queue.hpp"
#include "flchain/network_model.hpp"
#include "flchain/types.hpp"

namespace flchain {

struct LatencyBreakdown {
    double block_fill_s = 0.0;     // delta_bf
    double block_gen_s = 0.0;      // delta_bg (1/lambda in expectation)
    double block_prop_s = 0.0;     // delta_bp
    double aggregation_s = 0.0;    // delta_agg
    double block_download_s = 0.0; // delta_bd
    double fork_prob = 0.0;
    double iteration_s = 0.0;      // T_iter
};

// Clients placed uniformly in [max(d_min, 0.1), d_max] from their serving
// miner; clock_jitter in [0,1) spreads clock speeds uniformly within
// +/- jitter of the nominal value. Deterministic per seed.
std::vector<ClientProfile> sample_clients(int count, double dataset_size,
                                          double cpu_per_sample, double clock_hz,
                                          double clock_jitter, double d_min_m,
                                          double d_max_m, std::uint64_t seed);

// Transaction arrival intensity as a function of client activity:
// sqrt(K / (E[download] + mean compute time + E[upload])).
double arrival_rate(const std::vector<ClientProfile>& clients, double expected_download_s,
                    double expected_upload_s);

// E * N_k * xi / clock_k
double compute_local_delay(const ClientProfile& client, int local_epochs);

// Synchronous block fill: the slowest client's compute + upload.
double sync_block_fill_delay(const std::vector<ClientProfile>& clients, int local_epochs,
                             const RadioParams& rp, const BlockchainParams& bp);

// n_updates * model_params * cycles_per_accumulate / aggregator clock.
double aggregation_delay(int n_updates, long long model_params, double aggregator_clock_hz,
                         double cycles_per_accumulate = 1.0);

// T_iter = (bf + bg + bp) / (1 - p_fork) + agg + bd. Throws on p_fork >= 1.
double iteration_time(double block_fill_s, double block_gen_s, double block_prop_s,
                      double aggregation_s, double block_download_s, double fork_prob);

// Fork retrial factor 1 / (1 - p_fork) = exp(lambda (M-1) delta_bp), computed
// in exponential form so heavily loaded compositions do not round p_fork up
// to 1.
double fork_inflation(double mining_rate, int miners, double propagation_delay_s);

LatencyBreakdown compose_iteration(double block_fill_s, double block_gen_s,
                                   double block_prop_s, double aggregation_s,
                                   double block_download_s, double fork_prob);

// log10 of the iteration time with the fork amplification applied in log
// space, so compositions whose retrial factor overflows a double still
// report a finite magnitude.
double log10_iteration_time(double block_fill_s, double block_gen_s, double block_prop_s,
                            double aggregation_s, double block_download_s,
                            double mining_rate, int miners);

struct ConfirmationLatency {
    double upload_s = 0.0;
    double queue_delay_s = 0.0;
    double mining_s = 0.0;
    double propagation_s = 0.0;
    double fork_prob = 0.0;
    double total_s = 0.0;  // T_BC
};

// End-to-end transaction confirmation latency: upload, asynchronous queueing
// (analytical model), one expected mining epoch and block propagation, the
// latter three amplified by fork retrials. A saturated queue propagates as
// std::runtime_error.
ConfirmationLatency transaction_confirmation_latency(const QueueParams& q,
                                                     const BlockchainParams& bp,
                                                     const P2PParams& p2p,
                                                     double upload_delay_s);

}  // namespace flchain

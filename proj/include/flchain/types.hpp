// Domain types shared across the latency, network and runtime modules.
#pragma once

#include <cstdint>

namespace flchain {

// Static description of the blockchain deployment.
struct BlockchainParams {
    double transaction_size_bits = 5e3;   // S_tr
    double block_header_bits = 200e3;     // S_h
    int miners = 10;                      // M
    double mining_rate = 0.2;             // lambda, blocks/s
    double timeout_s = 1000.0;            // tau, may be +inf
    int queue_capacity = 1000;            // S
    int batch_size = 10;                  // S_B, transactions per block
    double p2p_capacity_bps = 5e6;        // C_P2P
};

// One federated client as seen by the delay model: how much data it holds,
// how fast it computes, and where it sits relative to its serving miner.
struct ClientProfile {
    int id = 0;
    double dataset_size = 100.0;          // N_k, samples
    double cpu_per_sample = 1e-5;         // cycles needed per data point
    double clock_hz = 1e9;                // client clock speed
    double distance_m = 2.0;              // distance to serving miner
};

}  // namespace flchain

// Discrete-event simulation of the transaction pool: Poisson arrivals, block
// sealing (batch complete or timer expiry), exponential mining, and fork
// invalidation with head-of-queue re-service. Ground truth for the
// analytical queue model and the source of empirical fork rates.
#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "flchain/blockchain_queue.hpp"

namespace flchain {

struct DesConfig {
    QueueParams queue;
    double fork_prob = 0.0;           // applied per mined block
    std::uint64_t max_arrivals = 1000000;
    double max_time_s = kInfinity;    // optional alternative horizon
    std::uint64_t seed = 1;
    double warmup_fraction = 0.05;    // leading share of arrivals excluded from stats
    std::ostream* trace = nullptr;    // optional "time,event,queue_len" records

    void validate() const;
};

struct DesStats {
    double mean_delay = 0.0;            // admission to departure, seconds
    double mean_occupancy = 0.0;        // time average
    std::vector<double> departure_state_hist;  // over 0..S
    double inter_departure_mean = 0.0;
    double fork_rate = 0.0;             // invalidated / mined blocks
    std::uint64_t drops = 0;            // arrivals rejected at full queue
    std::uint64_t arrivals = 0;
    std::uint64_t departures = 0;
    double sim_time_s = 0.0;
};

DesStats run(const DesConfig& cfg);

// Fraction of blocks whose PoW race ends with a second miner finishing
// within the propagation delay of the winner. M independent Exp(lambda)
// solvers per block.
double empirical_fork_rate(double mining_rate, int miners, double propagation_delay_s,
                           std::uint64_t blocks, std::uint64_t seed);

}  // namespace flchain

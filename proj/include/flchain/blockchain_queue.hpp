// Analytical batch-service queue model of the asynchronous transaction pool.
//
// The pool is observed just before block departures. From a departure state i
// the mined block removes d(i) = min(i, S_B) transactions; the next
// inter-departure epoch is a block-filling phase (wait until S_B transactions
// are present, cut short by the timer tau) followed by an exponential mining
// phase during which further Poisson arrivals are admitted while the queue
// has room. Solving the embedded chain gives the departure-point distribution;
// Markov-renewal accounting converts it into the time-stationary occupancy
// law and, through Little's law, into the expected queuing delay.
//
// With a finite timer the chain is approximate: a block sealed early by the
// timer departs with the sealed count, while the chain assumes min(i, S_B)
// of the pre-departure occupancy leaves. The discrete-event engine is the
// reference for that regime.
#pragma once

#include <vector>

#include "flchain/mathutil.hpp"

namespace flchain {

struct QueueParams {
    int capacity = 1000;        // S
    int batch_size = 10;        // S_B
    double service_rate = 0.2;  // lambda, blocks/s
    double arrival_rate = 2.0;  // nu, transactions/s
    double timeout_s = kInfinity;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
    bool has_timer() const { return timeout_s != kInfinity; }
};

// Row-stochastic transition matrix over departure states 0..S.
struct TransitionMatrix {
    int size = 0;  // S + 1
    std::vector<double> p;

    double at(int i, int j) const { return p[static_cast<std::size_t>(i) * size + j]; }
    double& at(int i, int j) { return p[static_cast<std::size_t>(i) * size + j]; }
};

struct QueueSolution {
    std::vector<double> departure_dist;   // pi^d over 0..S
    std::vector<double> steady_dist;      // pi^s over 0..S
    double expected_inter_departure = 0;  // E[T], seconds
    double mean_delay = 0;                // delta_bf^async, seconds
    double effective_throughput = 0;      // nu * (1 - pi^S), admitted tx/s
    double mean_occupancy = 0;            // sum_s s * pi^s
    double blocking_prob = 0;             // pi^S
};

// Number of transactions a departing block removes from state i.
int batch_departure(int i, int block_batch_size);

// Distribution of the queue occupancy at the start of the mining phase,
// given the post-departure residue. Index m holds P(mining starts at m).
// Mass below S_B exists only when the timer can expire during the fill.
std::vector<double> mining_start_distribution(int residue, const QueueParams& q);

// Probability that the timer expires before the block fills, starting the
// fill phase with `state` transactions already queued: the Erlang(S_B-state,
// nu) survival at tau. Zero for state >= S_B or an infinite timer.
double timer_expiry_prob(int state, const QueueParams& q);

TransitionMatrix build_transition_matrix(const QueueParams& q);

// Stationary vector of P (pi = pi P, sum pi = 1). Dense solve for small
// chains, power iteration above `dense_limit` states; throws
// std::runtime_error if the residual cannot be brought under 1e-10.
std::vector<double> solve_departure_distribution(const TransitionMatrix& P,
                                                 int dense_limit = 2000);

// Expected time between consecutive departures: fill (capped by the timer)
// plus one mining epoch, averaged over departure states.
double expected_inter_departure_time(const std::vector<double>& departure_dist,
                                     const QueueParams& q);

// Time-stationary occupancy law from the departure-point law, by expected
// time-at-level accounting over one inter-departure epoch. The last entry is
// set by complement; components are clamped to [0,1] (clamps beyond rounding
// noise are reported on stderr). Throws std::runtime_error if the partial
// sum exceeds 1 + 1e-6.
std::vector<double> steady_state_distribution(const std::vector<double>& departure_dist,
                                              const TransitionMatrix& P,
                                              const QueueParams& q);

// Little's-law delay; fills the delay/throughput/occupancy fields. Throws
// std::runtime_error when the effective throughput is zero.
void expected_queue_delay(QueueSolution& sol, const QueueParams& q);

// Full pipeline: matrix, stationary vectors, E[T], delay.
QueueSolution solve_queue(const QueueParams& q);

}  // namespace flchain

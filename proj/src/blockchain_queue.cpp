#include "flchain/blockchain_queue.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <string>

namespace flchain {

namespace {

constexpr double kStationaryResidual = 1e-10;
constexpr long kPowerIterationCap = 1000000;

double l1_residual(const std::vector<double>& pi, const TransitionMatrix& P) {
    const int n = P.size;
    double res = 0.0;
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += pi[i] * P.at(i, j);
        res += std::abs(acc - pi[j]);
    }
    return res;
}

}  // namespace

void QueueParams::validate() const {
    if (batch_size < 1) throw std::invalid_argument("queue batch_size must be >= 1");
    if (capacity < batch_size)
        throw std::invalid_argument("queue capacity must be >= batch_size");
    if (!(service_rate > 0.0))
        throw std::invalid_argument("queue service_rate must be > 0");
    if (!(arrival_rate > 0.0))
        throw std::invalid_argument("queue arrival_rate must be > 0");
    if (!(timeout_s > 0.0))
        throw std::invalid_argument("queue timeout_s must be > 0 (or infinite)");
}

int batch_departure(int i, int block_batch_size) {
    return std::min(i, block_batch_size);
}

double timer_expiry_prob(int state, const QueueParams& q) {
    if (state >= q.batch_size) return 0.0;
    if (!q.has_timer()) return 0.0;
    return erlang_survival(q.batch_size - state, q.arrival_rate, q.timeout_s);
}

std::vector<double> mining_start_distribution(int residue, const QueueParams& q) {
    std::vector<double> dist(static_cast<std::size_t>(q.batch_size) + 1, 0.0);
    if (residue >= q.batch_size) {
        // Residue alone fills the block; mining begins immediately. The
        // occupancy at that instant is the residue, which can exceed S_B;
        // callers treat index batch_size as "residue" in that case.
        dist[q.batch_size] = 1.0;
        return dist;
    }
    if (!q.has_timer()) {
        dist[q.batch_size] = 1.0;
        return dist;
    }
    // Timer expiry with n < S_B - residue arrivals seals a partial block of
    // residue + n transactions; P(n arrivals by tau) is Poisson(nu*tau).
    const double mean = q.arrival_rate * q.timeout_s;
    const int needed = q.batch_size - residue;
    double expired_mass = 0.0;
    for (int n = 0; n < needed; ++n) {
        const double w = poisson_pmf(n, mean);
        dist[residue + n] = w;
        expired_mass += w;
    }
    dist[q.batch_size] = std::max(0.0, 1.0 - expired_mass);
    return dist;
}

TransitionMatrix build_transition_matrix(const QueueParams& q) {
    q.validate();
    const int S = q.capacity;
    const int n = S + 1;
    const double lam = q.service_rate;
    const double nu = q.arrival_rate;
    const double head = lam / (lam + nu);   // P(0 arrivals within a mining epoch)
    const double ratio = nu / (lam + nu);

    TransitionMatrix P;
    P.size = n;
    P.p.assign(static_cast<std::size_t>(n) * n, 0.0);

    // geometric[k] = P(k admitted arrivals during one Exp(lambda) epoch)
    std::vector<double> geometric(static_cast<std::size_t>(S) + 1);
    geometric[0] = head;
    for (int k = 1; k <= S; ++k) geometric[k] = geometric[k - 1] * ratio;

    for (int i = 0; i <= S; ++i) {
        const int residue = i - batch_departure(i, q.batch_size);
        const std::vector<double> start = mining_start_distribution(residue, q);
        for (int m = 0; m < static_cast<int>(start.size()); ++m) {
            const double w = start[m];
            if (w <= 0.0) continue;
            // Index batch_size stands for "fill complete", i.e. a mining
            // start at max(residue, S_B).
            const int level = (m == q.batch_size) ? std::max(residue, q.batch_size) : m;
            double tail = w;
            for (int j = level; j < S; ++j) {
                const double mass = w * geometric[j - level];
                P.at(i, j) += mass;
                tail -= mass;
            }
            P.at(i, S) += std::max(0.0, tail);  // arrivals beyond capacity are lost
        }
        // Absorb rounding into the final column so every row is exactly
        // stochastic.
        double row = 0.0;
        for (int j = 0; j <= S; ++j) row += P.at(i, j);
        P.at(i, S) += 1.0 - row;
    }
    return P;
}

std::vector<double> solve_departure_distribution(const TransitionMatrix& P, int dense_limit) {
    const int n = P.size;
    if (n <= 0) throw std::invalid_argument("empty transition matrix");

    std::vector<double> pi(static_cast<std::size_t>(n), 0.0);

    if (n <= dense_limit + 1) {
        // Solve pi (P - I) = 0 with the normalization sum(pi) = 1 replacing
        // the last balance equation: A = (P - I)^T with row n-1 set to ones.
        Eigen::MatrixXd A(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                A(j, i) = P.at(i, j) - (i == j ? 1.0 : 0.0);
        for (int i = 0; i < n; ++i) A(n - 1, i) = 1.0;
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
        b(n - 1) = 1.0;
        Eigen::VectorXd x = A.partialPivLu().solve(b);
        for (int i = 0; i < n; ++i) pi[i] = std::max(0.0, x(i));
        double sum = std::accumulate(pi.begin(), pi.end(), 0.0);
        if (sum > 0.0)
            for (auto& v : pi) v /= sum;
        if (l1_residual(pi, P) <= kStationaryResidual) return pi;
        // fall through to power iteration on ill-conditioned chains
    }

    std::fill(pi.begin(), pi.end(), 1.0 / n);
    std::vector<double> next(static_cast<std::size_t>(n));
    for (long it = 0; it < kPowerIterationCap; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int i = 0; i < n; ++i) {
            const double w = pi[i];
            if (w == 0.0) continue;
            const double* row = &P.p[static_cast<std::size_t>(i) * n];
            for (int j = 0; j < n; ++j) next[j] += w * row[j];
        }
        double diff = 0.0, sum = 0.0;
        for (int j = 0; j < n; ++j) {
            diff += std::abs(next[j] - pi[j]);
            sum += next[j];
        }
        for (int j = 0; j < n; ++j) pi[j] = next[j] / sum;
        if (diff <= kStationaryResidual * 0.1) {
            if (l1_residual(pi, P) <= kStationaryResidual) return pi;
        }
    }
    throw std::runtime_error(
        "stationary distribution did not converge; transition matrix is likely malformed");
}

double expected_inter_departure_time(const std::vector<double>& departure_dist,
                                     const QueueParams& q) {
    const double nu = q.arrival_rate;
    double et = 0.0;
    for (int i = 0; i < static_cast<int>(departure_dist.size()); ++i) {
        const double w = departure_dist[i];
        if (w == 0.0) continue;
        const int residue = i - batch_departure(i, q.batch_size);
        double fill = 0.0;  // E[min(Erlang(S_B - residue, nu), tau)]
        for (int k = 1; k <= q.batch_size - residue; ++k)
            fill += erlang_cdf(k, nu, q.timeout_s) / nu;
        et += w * (fill + 1.0 / q.service_rate);
    }
    return et;
}

std::vector<double> steady_state_distribution(const std::vector<double>& departure_dist,
                                              const TransitionMatrix& P,
                                              const QueueParams& q) {
    const int S = q.capacity;
    if (static_cast<int>(departure_dist.size()) != S + 1 || P.size != S + 1)
        throw std::invalid_argument("departure distribution / matrix size mismatch");

    const double lam = q.service_rate;
    const double nu = q.arrival_rate;
    const double head = lam / (lam + nu);
    const double ratio = nu / (lam + nu);
    const double et = expected_inter_departure_time(departure_dist, q);

    // occupancy_time[s] accumulates the expected time spent at level s over
    // one inter-departure epoch, weighted by the departure-state law.
    std::vector<double> occupancy_time(static_cast<std::size_t>(S) + 1, 0.0);

    for (int i = 0; i <= S; ++i) {
        const double w = departure_dist[i];
        if (w == 0.0) continue;
        const int residue = i - batch_departure(i, q.batch_size);

        // Fill phase: level residue+m lasts from the m-th admitted arrival
        // to the (m+1)-th, truncated by the timer.
        for (int m = 0; m < q.batch_size - residue; ++m) {
            const double dwell = erlang_cdf(m + 1, nu, q.timeout_s) / nu;
            occupancy_time[residue + m] += w * dwell;
        }

        // Mining phase from each possible start level.
        const std::vector<double> start = mining_start_distribution(residue, q);
        for (int mi = 0; mi < static_cast<int>(start.size()); ++mi) {
            const double ws = start[mi];
            if (ws <= 0.0) continue;
            const int level = (mi == q.batch_size) ? std::max(residue, q.batch_size) : mi;
            // Time at level s before the s-level+1-th arrival or mining end:
            // geometric decay; the full-queue level absorbs the remainder of
            // the expected epoch 1/lambda.
            double dwell = head / lam;
            double spent = 0.0;
            for (int s = level; s < S; ++s) {
                occupancy_time[s] += w * ws * dwell;
                spent += dwell;
                dwell *= ratio;
            }
            occupancy_time[S] += w * ws * (1.0 / lam - spent);
        }
    }

    std::vector<double> pi(static_cast<std::size_t>(S) + 1, 0.0);
    double partial = 0.0;
    double clamped = 0.0;
    for (int s = 0; s < S; ++s) {
        double v = occupancy_time[s] / et;
        if (v < 0.0 || v > 1.0) {
            const double c = std::clamp(v, 0.0, 1.0);
            clamped = std::max(clamped, std::abs(v - c));
            v = c;
        }
        pi[s] = v;
        partial += v;
    }
    if (partial > 1.0 + 1e-6)
        throw std::runtime_error("steady-state mass below capacity exceeds 1: model inconsistency");
    pi[S] = std::clamp(1.0 - partial, 0.0, 1.0);
    if (clamped > 1e-9)
        std::cerr << "[flchain] steady_state_distribution clamped a component by "
                  << clamped << "\n";
    return pi;
}

void expected_queue_delay(QueueSolution& sol, const QueueParams& q) {
    const auto& pi = sol.steady_dist;
    const int S = q.capacity;
    double occupancy = 0.0;
    for (int s = 0; s <= S; ++s) occupancy += s * pi[s];
    const double throughput = q.arrival_rate * (1.0 - pi[S]);
    if (!(throughput > 0.0))
        throw std::runtime_error("queue is saturated or degenerate: zero effective throughput");
    sol.mean_occupancy = occupancy;
    sol.blocking_prob = pi[S];
    sol.effective_throughput = throughput;
    sol.mean_delay = occupancy / throughput;
}

QueueSolution solve_queue(const QueueParams& q) {
    q.validate();
    const TransitionMatrix P = build_transition_matrix(q);
    QueueSolution sol;
    sol.departure_dist = solve_departure_distribution(P);
    sol.expected_inter_departure = expected_inter_departure_time(sol.departure_dist, q);
    sol.steady_dist = steady_state_distribution(sol.departure_dist, P, q);
    expected_queue_delay(sol, q);
    return sol;
}

}  // namespace flchain

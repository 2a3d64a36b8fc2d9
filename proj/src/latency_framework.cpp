#include "flchain/latency_framework.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flchain/rng.hpp"

namespace flchain {

std::vector<ClientProfile> sample_clients(int count, double dataset_size,
                                          double cpu_per_sample, double clock_hz,
                                          double clock_jitter, double d_min_m,
                                          double d_max_m, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("client count must be >= 1");
    if (clock_jitter < 0.0 || clock_jitter >= 1.0)
        throw std::invalid_argument("clock_jitter must lie in [0, 1)");
    const double lo = std::max(d_min_m, 0.1);  // keep log10(d) finite
    const double hi = std::max(lo, d_max_m);
    Rng rng(derive_seed(seed, 11));
    std::vector<ClientProfile> clients(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        auto& c = clients[k];
        c.id = k;
        c.dataset_size = dataset_size;
        c.cpu_per_sample = cpu_per_sample;
        c.clock_hz = clock_jitter > 0.0
                         ? clock_hz * rng.uniform(1.0 - clock_jitter, 1.0 + clock_jitter)
                         : clock_hz;
        c.distance_m = lo < hi ? rng.uniform(lo, hi) : lo;
    }
    return clients;
}

double arrival_rate(const std::vector<ClientProfile>& clients, double expected_download_s,
                    double expected_upload_s) {
    if (clients.empty()) throw std::invalid_argument("client set must be nonempty");
    double compute = 0.0;
    for (const auto& c : clients) compute += c.dataset_size * c.cpu_per_sample / c.clock_hz;
    compute /= static_cast<double>(clients.size());
    const double denom = expected_download_s + compute + expected_upload_s;
    if (!(denom > 0.0)) throw std::invalid_argument("arrival-rate denominator must be > 0");
    return std::sqrt(static_cast<double>(clients.size()) / denom);
}

double compute_local_delay(const ClientProfile& client, int local_epochs) {
    if (local_epochs < 0) throw std::invalid_argument("epoch count must be >= 0");
    return local_epochs * client.dataset_size * client.cpu_per_sample / client.clock_hz;
}

double sync_block_fill_delay(const std::vector<ClientProfile>& clients, int local_epochs,
                             const RadioParams& rp, const BlockchainParams& bp) {
    if (clients.empty()) throw std::invalid_argument("client set must be nonempty");
    double worst = 0.0;
    for (const auto& c : clients) {
        const double d = compute_local_delay(c, local_epochs) + tx_upload_delay(c, rp, bp);
        worst = std::max(worst, d);
    }
    return worst;
}

double aggregation_delay(int n_updates, long long model_params, double aggregator_clock_hz,
                         double cycles_per_accumulate) {
    if (n_updates < 1) throw std::invalid_argument("aggregation needs at least one update");
    if (model_params < 1) throw std::invalid_argument("model parameter count must be >= 1");
    if (!(aggregator_clock_hz > 0.0))
        throw std::invalid_argument("aggregator clock must be > 0");
    return static_cast<double>(n_updates) * static_cast<double>(model_params) *
           cycles_per_accumulate / aggregator_clock_hz;
}

double iteration_time(double block_fill_s, double block_gen_s, double block_prop_s,
                      double aggregation_s, double block_download_s, double fork_prob) {
    if (fork_prob >= 1.0)
        throw std::invalid_argument("fork probability must be < 1 for a finite iteration time");
    if (fork_prob < 0.0) throw std::invalid_argument("fork probability must be >= 0");
    return (block_fill_s + block_gen_s + block_prop_s) / (1.0 - fork_prob) + aggregation_s +
           block_download_s;
}

double fork_inflation(double mining_rate, int miners, double propagation_delay_s) {
    if (!(mining_rate > 0.0)) throw std::invalid_argument("mining rate must be > 0");
    if (miners < 1) throw std::invalid_argument("miner count must be >= 1");
    if (propagation_delay_s < 0.0) throw std::invalid_argument("propagation delay must be >= 0");
    return std::exp(mining_rate * (miners - 1) * propagation_delay_s);
}

LatencyBreakdown compose_iteration(double block_fill_s, double block_gen_s,
                                   double block_prop_s, double aggregation_s,
                                   double block_download_s, double fork_prob) {
    LatencyBreakdown b;
    b.block_fill_s = block_fill_s;
    b.block_gen_s = block_gen_s;
    b.block_prop_s = block_prop_s;
    b.aggregation_s = aggregation_s;
    b.block_download_s = block_download_s;
    b.fork_prob = fork_prob;
    b.iteration_s = iteration_time(block_fill_s, block_gen_s, block_prop_s, aggregation_s,
                                   block_download_s, fork_prob);
    return b;
}

double log10_iteration_time(double block_fill_s, double block_gen_s, double block_prop_s,
                            double aggregation_s, double block_download_s,
                            double mining_rate, int miners) {
    // 1/(1 - p_fork) = exp(lambda (M-1) delta_bp); keep the exponent symbolic.
    const double ln_inflated = std::log(block_fill_s + block_gen_s + block_prop_s) +
                               mining_rate * (miners - 1) * block_prop_s;
    if (ln_inflated < 700.0) {
        return std::log10(std::exp(ln_inflated) + aggregation_s + block_download_s);
    }
    // The inflated group dwarfs the additive tail by hundreds of orders of
    // magnitude, so the tail is below double resolution anyway.
    return ln_inflated / std::log(10.0);
}

ConfirmationLatency transaction_confirmation_latency(const QueueParams& q,
                                                     const BlockchainParams& bp,
                                                     const P2PParams& p2p,
                                                     double upload_delay_s) {
    ConfirmationLatency c;
    c.upload_s = upload_delay_s;
    c.queue_delay_s = solve_queue(q).mean_delay;
    c.mining_s = 1.0 / q.service_rate;
    c.propagation_s = block_propagation_delay(q.batch_size, bp, p2p);
    c.fork_prob = fork_probability(q.service_rate, p2p.miners, c.propagation_s);
    c.total_s = upload_delay_s +
                (c.queue_delay_s + c.mining_s + c.propagation_s) / (1.0 - c.fork_prob);
    return c;
}

}  // namespace flchain

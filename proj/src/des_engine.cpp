#include "flchain/des_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flchain/rng.hpp"

namespace flchain {

void DesConfig::validate() const {
    queue.validate();
    if (fork_prob < 0.0 || fork_prob >= 1.0)
        throw std::invalid_argument("fork_prob must lie in [0, 1)");
    if (max_arrivals == 0 && max_time_s == kInfinity)
        throw std::invalid_argument("simulation horizon must be positive");
    if (warmup_fraction < 0.0 || warmup_fraction >= 1.0)
        throw std::invalid_argument("warmup_fraction must lie in [0, 1)");
}

namespace {

// Circular buffer of admission timestamps; the queue head holds the oldest
// transactions, which are exactly the ones a sealed block carries.
class TimestampRing {
public:
    explicit TimestampRing(int capacity) : buf_(static_cast<std::size_t>(capacity)) {}
    void push(double t) {
        buf_[tail_] = t;
        tail_ = (tail_ + 1) % buf_.size();
    }
    double pop() {
        const double t = buf_[head_];
        head_ = (head_ + 1) % buf_.size();
        return t;
    }

private:
    std::vector<double> buf_;
    std::size_t head_ = 0;
    std::size_t tail_ = 0;
};

}  // namespace

DesStats run(const DesConfig& cfg) {
    cfg.validate();
    const int S = cfg.queue.capacity;
    const int SB = cfg.queue.batch_size;
    const double nu = cfg.queue.arrival_rate;
    const double lam = cfg.queue.service_rate;
    const double tau = cfg.queue.timeout_s;

    Rng arrival_rng(derive_seed(cfg.seed, 0));
    Rng mining_rng(derive_seed(cfg.seed, 1));
    Rng fork_rng(derive_seed(cfg.seed, 2));

    const std::uint64_t warmup_arrivals =
        static_cast<std::uint64_t>(cfg.warmup_fraction * static_cast<double>(cfg.max_arrivals));

    double t = 0.0;
    int n = 0;        // queue occupancy, sealed transactions included
    int sealed = 0;   // size of the block being mined, 0 when idle
    double t_arrival = arrival_rng.exponential(nu);
    double t_mine = kInfinity;
    double t_timer = tau;  // timer armed at t = 0 as if a departure just happened
    TimestampRing stamps(S + 1);

    double warmup_time = warmup_arrivals == 0 ? 0.0 : kInfinity;
    double occupancy_integral = 0.0;
    double sojourn_sum = 0.0;
    std::uint64_t sojourn_count = 0;
    std::vector<std::uint64_t> hist(static_cast<std::size_t>(S) + 1, 0);
    double first_departure = kInfinity, last_departure = 0.0;
    std::uint64_t departures_counted = 0;

    DesStats stats;
    std::uint64_t blocks_mined = 0, forks = 0;

    auto emit = [&](const char* kind) {
        if (cfg.trace) *cfg.trace << t << ',' << kind << ',' << n << '\n';
    };

    auto try_seal = [&]() {
        if (sealed != 0) return;
        if (n >= SB) {
            sealed = SB;
        } else if (n >= 1 && t >= t_timer) {
            sealed = n;
        } else {
            return;
        }
        t_mine = t + mining_rng.exponential(lam);
        emit("seal");
    };

    while (stats.arrivals < cfg.max_arrivals) {
        double t_next = t_arrival;
        int kind = 0;  // 0 arrival, 1 mining completion, 2 timer expiry
        if (sealed != 0) {
            if (t_mine < t_next) {
                t_next = t_mine;
                kind = 1;
            }
        } else if (n >= 1 && t_timer > t && t_timer < t_next) {
            t_next = t_timer;
            kind = 2;
        }
        if (t_next > cfg.max_time_s) {
            t_next = cfg.max_time_s;
            kind = 3;  // horizon
        }

        if (t_next > warmup_time) {
            occupancy_integral += n * (t_next - std::max(t, warmup_time));
        }
        t = t_next;
        if (kind == 3) break;

        if (kind == 0) {
            ++stats.arrivals;
            if (stats.arrivals == warmup_arrivals) warmup_time = t;
            if (n < S) {
                stamps.push(t);
                ++n;
                emit("arrival");
            } else {
                ++stats.drops;
                emit("drop");
            }
            t_arrival = t + arrival_rng.exponential(nu);
            try_seal();
        } else if (kind == 1) {
            ++blocks_mined;
            if (cfg.fork_prob > 0.0 && fork_rng.uniform01() < cfg.fork_prob) {
                // Invalidated block: its transactions are already at the
                // queue head with their original timestamps; re-service.
                ++forks;
                sealed = 0;
                t_mine = kInfinity;
                emit("fork");
                try_seal();
            } else {
                if (t >= warmup_time) {
                    ++hist[static_cast<std::size_t>(n)];
                    if (!(first_departure < kInfinity)) first_departure = t;
                    last_departure = t;
                    ++departures_counted;
                }
                for (int k = 0; k < sealed; ++k) {
                    const double admitted = stamps.pop();
                    if (admitted >= warmup_time) {
                        sojourn_sum += t - admitted;
                        ++sojourn_count;
                    }
                }
                n -= sealed;
                sealed = 0;
                t_mine = kInfinity;
                ++stats.departures;
                t_timer = t + tau;
                emit("departure");
                try_seal();
            }
        } else {
            try_seal();  // timer expiry with a non-empty queue
        }
    }

    stats.sim_time_s = t;
    const double measured = t - std::min(t, warmup_time);
    stats.mean_occupancy = measured > 0.0 ? occupancy_integral / measured : 0.0;
    stats.mean_delay = sojourn_count > 0 ? sojourn_sum / static_cast<double>(sojourn_count) : 0.0;
    stats.inter_departure_mean =
        departures_counted > 1 ? (last_departure - first_departure) / static_cast<double>(departures_counted - 1)
                               : 0.0;
    stats.fork_rate = blocks_mined > 0 ? static_cast<double>(forks) / static_cast<double>(blocks_mined) : 0.0;
    stats.departure_state_hist.assign(static_cast<std::size_t>(S) + 1, 0.0);
    if (departures_counted > 0) {
        for (int s = 0; s <= S; ++s)
            stats.departure_state_hist[s] =
                static_cast<double>(hist[s]) / static_cast<double>(departures_counted);
    }
    return stats;
}

double empirical_fork_rate(double mining_rate, int miners, double propagation_delay_s,
                           std::uint64_t blocks, std::uint64_t seed) {
    if (!(mining_rate > 0.0)) throw std::invalid_argument("mining_rate must be > 0");
    if (miners < 1) throw std::invalid_argument("miners must be >= 1");
    if (propagation_delay_s < 0.0) throw std::invalid_argument("propagation delay must be >= 0");
    if (miners == 1 || propagation_delay_s == 0.0) return 0.0;

    Rng rng(derive_seed(seed, 7));
    std::uint64_t forks = 0;
    for (std::uint64_t b = 0; b < blocks; ++b) {
        double best = kInfinity, second = kInfinity;
        for (int m = 0; m < miners; ++m) {
            const double x = rng.exponential(mining_rate);
            if (x < best) {
                second = best;
                best = x;
            } else if (x < second) {
                second = x;
            }
        }
        if (second - best <= propagation_delay_s) ++forks;
    }
    return static_cast<double>(forks) / static_cast<double>(blocks);
}

}  // namespace flchain

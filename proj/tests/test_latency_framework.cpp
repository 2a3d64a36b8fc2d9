#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flchain/latency_framework.hpp"

using namespace flchain;

namespace {

ClientProfile make_client(int id, double n, double cycles, double clock, double d) {
    ClientProfile c;
    c.id = id;
    c.dataset_size = n;
    c.cpu_per_sample = cycles;
    c.clock_hz = clock;
    c.distance_m = d;
    return c;
}

}  // namespace

TEST_CASE("arrival rate formula") {
    // K = 1 with a unit denominator.
    std::vector<ClientProfile> one = {make_client(0, 1.0, 0.25, 1.0, 1.0)};
    CHECK(arrival_rate(one, 0.5, 0.25) == doctest::Approx(1.0).epsilon(1e-12));

    // K = 10, total denominator 3.
    std::vector<ClientProfile> ten;
    for (int k = 0; k < 10; ++k) ten.push_back(make_client(k, 1.0, 1.0, 1.0, 1.0));
    CHECK(arrival_rate(ten, 1.0, 1.0) == doctest::Approx(std::sqrt(10.0 / 3.0)).epsilon(1e-12));

    // Monotone in K with everything else fixed.
    double prev = 0.0;
    for (int K : {1, 2, 4, 8, 16}) {
        std::vector<ClientProfile> cs;
        for (int k = 0; k < K; ++k) cs.push_back(make_client(k, 1.0, 1.0, 1.0, 1.0));
        const double nu = arrival_rate(cs, 0.3, 0.2);
        CHECK(nu > prev);
        prev = nu;
    }
}

TEST_CASE("local compute delay") {
    ClientProfile c = make_client(0, 100.0, 1e4, 1e9, 1.0);
    CHECK(compute_local_delay(c, 0) == 0.0);
    CHECK(compute_local_delay(c, 1) == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(compute_local_delay(c, 5) == doctest::Approx(5e-3).epsilon(1e-12));
    c.dataset_size = 200.0;
    CHECK(compute_local_delay(c, 1) == doctest::Approx(2e-3).epsilon(1e-12));
}

TEST_CASE("synchronous fill is the slowest client") {
    RadioParams rp;
    BlockchainParams bp;
    std::vector<ClientProfile> cs;
    for (int k = 0; k < 5; ++k) cs.push_back(make_client(k, 100.0, 1e4, 1e9, 1.0));
    const double base = sync_block_fill_delay(cs, 1, rp, bp);
    const double each = compute_local_delay(cs[0], 1) + tx_upload_delay(cs[0], rp, bp);
    CHECK(base == doctest::Approx(each).epsilon(1e-12));

    cs[3].dataset_size = 1000.0;  // straggler
    const double straggled = sync_block_fill_delay(cs, 1, rp, bp);
    CHECK(straggled == doctest::Approx(compute_local_delay(cs[3], 1) +
                                       tx_upload_delay(cs[3], rp, bp)).epsilon(1e-12));
    CHECK(straggled > base);
}

TEST_CASE("aggregation delay") {
    CHECK_THROWS_AS(aggregation_delay(0, 1000, 1e9), std::invalid_argument);
    CHECK(aggregation_delay(10, 203530, 1e9) == doctest::Approx(2.0353e-3).epsilon(1e-6));
    CHECK(aggregation_delay(20, 203530, 1e9) ==
          doctest::Approx(2.0 * aggregation_delay(10, 203530, 1e9)).epsilon(1e-12));
}

TEST_CASE("iteration time composition") {
    CHECK(iteration_time(1.0, 2.0, 3.0, 4.0, 5.0, 0.0) == doctest::Approx(15.0));
    CHECK(iteration_time(1.0, 5.0, 0.05, 0.1, 0.2, 0.5) == doctest::Approx(12.4).epsilon(1e-12));
    double prev = 0.0;
    for (double pf : {0.0, 0.2, 0.5, 0.8, 0.95}) {
        const double t = iteration_time(1.0, 1.0, 1.0, 0.0, 0.0, pf);
        CHECK(t > prev);
        prev = t;
    }
    CHECK_THROWS_AS(iteration_time(1, 1, 1, 1, 1, 1.0), std::invalid_argument);

    const LatencyBreakdown b = compose_iteration(1.0, 2.0, 3.0, 4.0, 5.0, 0.0);
    CHECK(b.iteration_s == doctest::Approx(b.block_fill_s + b.block_gen_s + b.block_prop_s +
                                           b.aggregation_s + b.block_download_s));
}

TEST_CASE("log-space iteration time agrees with the direct formula when finite") {
    const double bf = 2.0, bg = 5.0, bp = 10.0, agg = 0.5, bd = 3.0;
    const double lam = 0.01;
    const int M = 10;
    const double pf = fork_probability(lam, M, bp);
    const double direct = iteration_time(bf, bg, bp, agg, bd, pf);
    CHECK(log10_iteration_time(bf, bg, bp, agg, bd, lam, M) ==
          doctest::Approx(std::log10(direct)).epsilon(1e-9));

    // Astronomic amplification stays finite in log space.
    const double huge = log10_iteration_time(100.0, 5.0, 25000.0, 1.0, 50.0, 0.2, 10);
    CHECK(std::isfinite(huge));
    CHECK(huge > 1000.0);
}

TEST_CASE("sampled clients respect the distance clamp and jitter bounds") {
    const auto cs = sample_clients(100, 100.0, 1e-5, 1e9, 0.5, 0.0, 4.15, 3);
    for (const auto& c : cs) {
        CHECK(c.distance_m >= 0.1);
        CHECK(c.distance_m <= 4.15);
        CHECK(c.clock_hz >= 0.5e9);
        CHECK(c.clock_hz <= 1.5e9);
    }
    const auto again = sample_clients(100, 100.0, 1e-5, 1e9, 0.5, 0.0, 4.15, 3);
    CHECK(cs[50].distance_m == again[50].distance_m);

    const auto fixed = sample_clients(4, 100.0, 1e-5, 1e9, 0.0, 2.0, 2.0, 3);
    for (const auto& c : fixed) {
        CHECK(c.distance_m == 2.0);
        CHECK(c.clock_hz == 1e9);
    }
}

TEST_CASE("confirmation latency composition") {
    QueueParams q{200, 10, 0.5, 2.0, kInfinity};
    BlockchainParams bp;
    // Vanishing propagation and upload: T_BC collapses to queue + mining.
    bp.block_header_bits = 0.0;
    bp.transaction_size_bits = 0.0;
    P2PParams p2p{5e6, 10};
    const ConfirmationLatency c = transaction_confirmation_latency(q, bp, p2p, 0.0);
    CHECK(c.fork_prob == 0.0);
    CHECK(c.total_s == doctest::Approx(c.queue_delay_s + 1.0 / q.service_rate).epsilon(1e-12));

    // A saturated queue propagates as a runtime error.
    QueueParams sat{20, 1, 0.01, 50.0, kInfinity};
    // pi^S -> 1 makes throughput vanish only in the exact-degenerate case;
    // here it stays positive, so just check the call completes.
    CHECK_NOTHROW(transaction_confirmation_latency(sat, bp, p2p, 0.0));
}

TEST_CASE("confirmation latency drops when capacity rises") {
    QueueParams q{1000, 10, 0.5, 0.2, 1000.0};
    BlockchainParams bp;
    ClientProfile c = make_client(0, 100.0, 1e-5, 1e9, 2.0);
    RadioParams rp;
    const double upload = tx_upload_delay(c, rp, bp);
    const ConfirmationLatency lo =
        transaction_confirmation_latency(q, bp, P2PParams{5e6, 10}, upload);
    const ConfirmationLatency hi =
        transaction_confirmation_latency(q, bp, P2PParams{50e6, 10}, upload);
    CHECK(hi.total_s < lo.total_s);
}

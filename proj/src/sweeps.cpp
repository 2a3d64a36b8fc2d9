#include "flchain/sweeps.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "flchain/des_engine.hpp"
#include "flchain/latency_framework.hpp"
#include "flchain/rng.hpp"

namespace flchain {

namespace {

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::ofstream open_csv(const std::filesystem::path& dir, const std::string& name,
                       SweepResult& result) {
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    result.files.push_back(path);
    return f;
}

std::vector<ClientProfile> scenario_clients(const Scenario& s, int count, std::uint64_t seed,
                                            double transaction_bits) {
    (void)transaction_bits;
    return sample_clients(count, s.samples_per_client, s.cpu_cycles_per_sample, s.clock_hz,
                          s.clock_jitter, s.d_min_m, s.d_max_m, seed);
}

double mean_upload_delay(const std::vector<ClientProfile>& clients, const RadioParams& rp,
                         const BlockchainParams& bp) {
    double sum = 0.0;
    for (const auto& c : clients) sum += tx_upload_delay(c, rp, bp);
    return sum / static_cast<double>(clients.size());
}

}  // namespace

const std::vector<ModelPreset>& model_catalogue() {
    static const std::vector<ModelPreset> presets = {
        {"fnn", 203530}, {"cnn", 2374506}, {"resnet50", 23792612}, {"vgg19", 39316644}};
    return presets;
}

SweepResult run_queue_analysis(const Scenario& s, const std::filesystem::path& out_dir) {
    SweepResult result;
    auto f = open_csv(out_dir, "queue_analytic.csv", result);
    f << "lambda,nu,S_B,mean_delay,occupancy,throughput,inter_departure,p_fork,saturated\n";

    const auto lambdas = sweep_grid(s, "blockchain.mining_rate", {0.05, 0.2, 1.0});
    const auto nus = sweep_grid(s, "blockchain.arrival_rate", {0.2, 2.0, 20.0});
    const auto batches = sweep_grid(s, "blockchain.batch_size", {2, 5, 10, 20, 50});
    const P2PParams p2p = p2p_params(s);

    for (double lam : lambdas) {
        for (double nu : nus) {
            for (double sb : batches) {
                QueueParams q = queue_params(s);
                q.service_rate = lam;
                q.arrival_rate = nu;
                q.batch_size = static_cast<int>(sb);
                const QueueSolution sol = solve_queue(q);
                const double bp = block_propagation_delay(q.batch_size, s.blockchain, p2p);
                const double pf = fork_probability(lam, p2p.miners, bp);
                f << num(lam) << ',' << num(nu) << ',' << q.batch_size << ','
                  << num(sol.mean_delay) << ',' << num(sol.mean_occupancy) << ','
                  << num(sol.effective_throughput) << ',' << num(sol.expected_inter_departure)
                  << ',' << num(pf) << ',' << (sol.blocking_prob > 0.5 ? 1 : 0) << '\n';
            }
        }
    }
    return result;
}

SweepResult run_queue_sweep(const Scenario& s, const std::filesystem::path& out_dir,
                            std::uint64_t seed) {
    SweepResult result;
    auto f = open_csv(out_dir, "queue_sweep.csv", result);
    f << "lambda,nu,S_B,mean_delay,occupancy,p_fork,des_mean_delay,rel_err,saturated\n";

    const auto lambdas = sweep_grid(s, "blockchain.mining_rate", {0.05, 0.2, 1.0});
    const auto nus = sweep_grid(s, "blockchain.arrival_rate", {0.2, 2.0, 20.0});
    const auto batches = sweep_grid(s, "blockchain.batch_size", {2, 5, 10, 20, 50});
    const P2PParams p2p = p2p_params(s);

    std::uint64_t cell = 0;
    for (double lam : lambdas) {
        for (double nu : nus) {
            for (double sb : batches) {
                ++cell;
                QueueParams q = queue_params(s);
                q.service_rate = lam;
                q.arrival_rate = nu;
                q.batch_size = static_cast<int>(sb);
                const QueueSolution sol = solve_queue(q);
                const double bp = block_propagation_delay(q.batch_size, s.blockchain, p2p);
                const double pf = fork_probability(lam, p2p.miners, bp);

                DesConfig dc;
                dc.queue = q;
                dc.max_arrivals = s.des_arrivals;
                dc.seed = derive_seed(seed, cell);
                const DesStats des = run(dc);
                const double rel = des.mean_delay > 0.0
                                       ? std::abs(sol.mean_delay - des.mean_delay) / des.mean_delay
                                       : 0.0;
                f << num(lam) << ',' << num(nu) << ',' << q.batch_size << ','
                  << num(sol.mean_delay) << ',' << num(sol.mean_occupancy) << ',' << num(pf)
                  << ',' << num(des.mean_delay) << ',' << num(rel) << ','
                  << (sol.blocking_prob > 0.5 ? 1 : 0) << '\n';
            }
        }
    }
    return result;
}

SweepResult run_confirmation_sweep(const Scenario& s, const std::filesystem::path& out_dir,
                                   std::uint64_t seed) {
    SweepResult result;
    auto f = open_csv(out_dir, "confirmation_sweep.csv", result);
    f << "lambda,C_P2P,T_BC,p_fork\n";

    const auto lambdas = sweep_grid(s, "blockchain.mining_rate",
                                    {0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 0.7, 1.0});
    const auto capacities = sweep_grid(s, "blockchain.p2p_capacity_bps", {5e6, 2e7, 5e7});

    const auto clients = scenario_clients(s, s.fl.clients, derive_seed(seed, 3001),
                                          s.blockchain.transaction_size_bits);
    const double upload = mean_upload_delay(clients, s.radio, s.blockchain);

    for (double cap : capacities) {
        for (double lam : lambdas) {
            QueueParams q = queue_params(s);
            q.service_rate = lam;
            P2PParams p2p{cap, s.blockchain.miners};
            const ConfirmationLatency c =
                transaction_confirmation_latency(q, s.blockchain, p2p, upload);
            f << num(lam) << ',' << num(cap) << ',' << num(c.total_s) << ','
              << num(c.fork_prob) << '\n';
        }
    }
    return result;
}

SweepResult run_flchain_comparison(const Scenario& s, const std::filesystem::path& out_dir,
                                   std::uint64_t seed) {
    SweepResult result;
    const auto k_grid = sweep_grid(s, "federated_learning.clients", {10, 50, 100, 200});
    const auto u_grid = sweep_grid(s, "federated_learning.participation",
                                   {0.10, 0.25, 0.50, 0.75, 1.00});

    // Efficiency matrix shaped K x Upsilon, seed-averaged.
    std::vector<std::vector<double>> eff(k_grid.size(),
                                         std::vector<double>(u_grid.size(), 0.0));
    const double tx_bits = effective_transaction_bits(s);
    const long long params = preset_params(s.model);

    for (std::size_t ki = 0; ki < k_grid.size(); ++ki) {
        const int K = static_cast<int>(k_grid[ki]);
        for (std::size_t ui = 0; ui < u_grid.size(); ++ui) {
            const double upsilon = u_grid[ui];
            double acc = 0.0;
            int ok = 0;
            for (std::size_t si = 0; si < s.seeds.size(); ++si) {
                const std::uint64_t run_seed = s.seeds[si] ^ derive_seed(seed, 0);
                try {
                    FLConfig cfg = s.fl;
                    cfg.clients = K;
                    cfg.participation = upsilon;

                    SyntheticTask task = generate_synthetic_task(
                        s.n_classes, s.feature_dim, s.samples_per_client, K, cfg.iid,
                        cfg.classes_per_client, run_seed, s.eval_per_class);

                    ChainSetup setup;
                    setup.chain = s.blockchain;
                    setup.chain.transaction_size_bits = tx_bits;
                    setup.radio = s.radio;
                    setup.aggregator_clock_hz = s.aggregator_clock_hz;
                    setup.model_params_for_delay = params;
                    setup.profiles = scenario_clients(s, K, derive_seed(run_seed, 500 + K),
                                                      tx_bits);

                    const auto trajectory =
                        upsilon >= 1.0 ? run_s_flchain(cfg, task, setup, run_seed)
                                       : run_a_flchain(cfg, task, setup, run_seed);

                    std::ostringstream name;
                    name << "flchain_trajectory_K" << K << "_U"
                         << static_cast<int>(std::lround(upsilon * 100)) << "_seed"
                         << s.seeds[si] << ".csv";
                    auto tf = open_csv(out_dir, name.str(), result);
                    write_trajectory_csv(trajectory, tf);

                    acc += efficiency(trajectory);
                    ++ok;
                } catch (const std::exception& e) {
                    std::ostringstream err;
                    err << "cell K=" << K << " upsilon=" << upsilon << " seed=" << s.seeds[si]
                        << ": " << e.what();
                    result.cell_errors.push_back(err.str());
                }
            }
            eff[ki][ui] = ok > 0 ? acc / ok : std::nan("");
        }
    }

    auto mf = open_csv(out_dir, "flchain_efficiency.csv", result);
    mf << "K";
    for (double u : u_grid) mf << ",U" << static_cast<int>(std::lround(u * 100));
    mf << '\n';
    for (std::size_t ki = 0; ki < k_grid.size(); ++ki) {
        mf << static_cast<int>(k_grid[ki]);
        for (std::size_t ui = 0; ui < u_grid.size(); ++ui) mf << ',' << num(eff[ki][ui]);
        mf << '\n';
    }

    auto sf = open_csv(out_dir, "flchain_summary.txt", result);
    sf << "model = " << s.model << " (delay transaction size " << num(tx_bits) << " bits)\n";
    sf << "seeds = " << s.seeds.size() << ", rounds <= " << s.fl.max_rounds << '\n';
    double best = -1.0;
    int best_k = 0, best_u = 0;
    for (std::size_t ki = 0; ki < k_grid.size(); ++ki)
        for (std::size_t ui = 0; ui < u_grid.size(); ++ui)
            if (std::isfinite(eff[ki][ui]) && eff[ki][ui] > best) {
                best = eff[ki][ui];
                best_k = static_cast<int>(k_grid[ki]);
                best_u = static_cast<int>(std::lround(u_grid[ui] * 100));
            }
    sf << "best efficiency = " << num(best) << " accuracy/s at K=" << best_k << ", U=" << best_u
       << "%\n";
    for (const auto& e : result.cell_errors) sf << "error: " << e << '\n';
    return result;
}

SweepResult model_size_delay_report(const Scenario& s, const std::filesystem::path& out_dir,
                                    std::uint64_t seed) {
    SweepResult result;
    auto f = open_csv(out_dir, "model_delays.csv", result);
    f << "model,params,transaction_bits,K,delay_s,log10_delay_s\n";

    const auto k_grid = sweep_grid(s, "federated_learning.clients", {10, 50, 100, 200});
    const P2PParams p2p = p2p_params(s);

    for (const auto& preset : model_catalogue()) {
        const double tx_bits = static_cast<double>(preset.params) * 16.0;  // 2-byte parameters
        BlockchainParams chain = s.blockchain;
        chain.transaction_size_bits = tx_bits;
        for (double kd : k_grid) {
            const int K = static_cast<int>(kd);
            const auto clients = scenario_clients(s, K, derive_seed(seed, 7000 + K), tx_bits);
            const double bf = sync_block_fill_delay(clients, s.fl.local_epochs, s.radio, chain);
            const double bg = 1.0 / chain.mining_rate;
            const double bp = block_propagation_delay(K, chain, p2p);
            const double agg = aggregation_delay(K, preset.params, s.aggregator_clock_hz);
            double bd = 0.0;
            for (const auto& c : clients) bd += block_download_delay(c, K, s.radio, chain);
            bd /= K;
            const double log10_delay =
                log10_iteration_time(bf, bg, bp, agg, bd, chain.mining_rate, chain.miners);
            const double delay =
                (bf + bg + bp) * fork_inflation(chain.mining_rate, chain.miners, bp) + agg + bd;
            f << preset.name << ',' << preset.params << ',' << num(tx_bits) << ',' << K << ','
              << num(delay) << ',' << num(log10_delay) << '\n';
        }
    }
    return result;
}

}  // namespace flchain

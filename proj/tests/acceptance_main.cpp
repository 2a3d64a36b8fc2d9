// Acceptance suite: one pass/fail line per criterion, exit 0 only when every
// selected criterion holds. Run with --criterion N for a single criterion;
// --flchain-bin <path> enables the CLI determinism checks.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "flchain/blockchain_queue.hpp"
#include "flchain/des_engine.hpp"
#include "flchain/fl_runtime.hpp"
#include "flchain/latency_framework.hpp"
#include "flchain/rng.hpp"
#include "flchain/scenario.hpp"
#include "flchain/sweeps.hpp"
#include "oracles.hpp"

using namespace flchain;
namespace fs = std::filesystem;

namespace {

std::string g_flchain_bin;

struct GridCell {
    int S, SB;
    double lambda, nu;
};

std::vector<GridCell> acceptance_grid() {
    std::vector<GridCell> cells;
    for (int S : {10, 100, 1000})
        for (int SB : {1, 2, 10, 50})
            for (double lam : {0.05, 0.2, 1.0})
                for (double nu : {0.2, 2.0, 20.0})
                    if (SB <= S) cells.push_back({S, SB, lam, nu});
    return cells;
}

// --- criterion 1 -----------------------------------------------------------

bool criterion_stochastic_matrix(std::ostream& log) {
    double worst_row = 0.0, worst_res = 0.0;
    int checked = 0;
    for (const auto& c : acceptance_grid()) {
        const QueueParams q{c.S, c.SB, c.lambda, c.nu, kInfinity};
        const TransitionMatrix P = build_transition_matrix(q);
        for (int i = 0; i <= c.S; ++i) {
            double row = 0.0;
            for (int j = 0; j <= c.S; ++j) row += P.at(i, j);
            worst_row = std::max(worst_row, std::abs(row - 1.0));
        }
        const auto pi = solve_departure_distribution(P);
        double res = 0.0;
        for (int j = 0; j <= c.S; ++j) {
            double acc = 0.0;
            for (int i = 0; i <= c.S; ++i) acc += pi[i] * P.at(i, j);
            res += std::abs(acc - pi[j]);
        }
        worst_res = std::max(worst_res, res);
        ++checked;
    }
    log << checked << " cells, max |row sum - 1| = " << worst_row
        << ", max stationarity residual = " << worst_res;
    return worst_row <= 1e-9 && worst_res <= 1e-8;
}

// --- criterion 2 -----------------------------------------------------------

bool criterion_closed_form(std::ostream& log) {
    double worst = 0.0;
    for (double rho : {0.2, 0.5, 0.9, 1.5}) {
        const double lambda = 1.0, nu = rho;
        for (int S : {20, 100}) {
            const QueueSolution sol = solve_queue(QueueParams{S, 1, lambda, nu, kInfinity});
            const auto ref = oracles::mm1s(nu, lambda, S);
            worst = std::max(worst,
                             std::abs(sol.mean_delay - ref.mean_sojourn) / ref.mean_sojourn);
        }
    }
    log << "max relative error vs M/M/1/S = " << worst;
    return worst <= 1e-6;
}

// --- criterion 3 -----------------------------------------------------------

bool criterion_des_equivalence(std::ostream& log) {
    bool ok = true;
    int compared = 0, skipped = 0;
    double worst_inf = 0.0, worst_timer = 0.0;
    std::uint64_t cell_id = 0;
    for (double tau : {kInfinity, 1000.0}) {
        const double tolerance = tau == kInfinity ? 0.10 : 0.20;
        for (const auto& c : acceptance_grid()) {
            ++cell_id;
            const QueueParams q{c.S, c.SB, c.lambda, c.nu, tau};
            const QueueSolution sol = solve_queue(q);
            if (sol.blocking_prob > 0.5) {
                ++skipped;
                continue;
            }
            DesConfig dc;
            dc.queue = q;
            dc.seed = derive_seed(4242, cell_id);
            const double rho = c.nu / (c.lambda * c.SB);
            dc.max_arrivals = 1000000;
            if (rho > 0.85 && rho < 1.2) dc.max_arrivals = c.S >= 500 ? 64000000 : 4000000;
            const DesStats des = run(dc);
            const double rel = std::abs(sol.mean_delay - des.mean_delay) / des.mean_delay;
            (tau == kInfinity ? worst_inf : worst_timer) =
                std::max(tau == kInfinity ? worst_inf : worst_timer, rel);
            if (rel > tolerance) {
                std::cerr << "  mismatch: S=" << c.S << " SB=" << c.SB << " lambda=" << c.lambda
                          << " nu=" << c.nu << " tau=" << tau << " analytic=" << sol.mean_delay
                          << " des=" << des.mean_delay << " rel=" << rel << '\n';
                ok = false;
            }
            ++compared;
        }
    }
    log << compared << " cells compared, " << skipped
        << " saturated skipped; worst rel err: no-timer " << worst_inf << " (tol 0.10), timer "
        << worst_timer << " (tol 0.20)";
    return ok;
}

// --- criterion 4 -----------------------------------------------------------

bool criterion_fork_model(std::ostream& log) {
    double worst = 0.0;
    int points = 0;
    std::uint64_t id = 0;
    for (double lam : {0.05, 0.2, 1.0})
        for (int M : {2, 10, 50})
            for (double d : {0.01, 0.1, 1.0}) {
                ++id;
                const double expect = fork_probability(lam, M, d);
                if (expect < 0.01 || expect > 0.9) continue;
                const double est = empirical_fork_rate(lam, M, d, 400000, derive_seed(7, id));
                worst = std::max(worst, std::abs(est - expect) / expect);
                ++points;
            }
    log << points << " points, max relative error = " << worst;
    return points >= 5 && worst <= 0.05;
}

// --- criterion 5 -----------------------------------------------------------

bool criterion_figure_shapes(std::ostream& log) {
    bool ok = true;

    // (a) queue delay vs block size at the deployment defaults.
    {
        QueueParams q{1000, 1, 0.2, 20.0, 1000.0};
        double prev = kInfinity;
        for (int sb : {1, 2, 5, 10, 15, 20}) {
            q.batch_size = sb;
            const double d = solve_queue(q).mean_delay;
            if (!(d < prev)) {
                std::cerr << "  expected decreasing delay at nu=20, S_B=" << sb << '\n';
                ok = false;
            }
            prev = d;
        }
        q.arrival_rate = 0.2;
        prev = 0.0;
        for (int sb : {5, 10, 20, 35, 50}) {
            q.batch_size = sb;
            const double d = solve_queue(q).mean_delay;
            if (!(d > prev)) {
                std::cerr << "  expected increasing delay at nu=0.2, S_B=" << sb << '\n';
                ok = false;
            }
            prev = d;
        }
    }

    // (b) confirmation latency vs lambda: interior minimum at 5 Mbps and
    // capacity dominance at 50 Mbps.
    {
        const Scenario s = default_scenario();
        const std::vector<double> lambdas = {0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 0.7, 1.0};
        const auto clients = sample_clients(s.fl.clients, s.samples_per_client,
                                            s.cpu_cycles_per_sample, s.clock_hz, s.clock_jitter,
                                            s.d_min_m, s.d_max_m, 31);
        double upload = 0.0;
        for (const auto& c : clients) upload += tx_upload_delay(c, s.radio, s.blockchain);
        upload /= clients.size();

        std::vector<double> low, high;
        for (double lam : lambdas) {
            QueueParams q = queue_params(s);
            q.service_rate = lam;
            low.push_back(transaction_confirmation_latency(q, s.blockchain,
                                                           P2PParams{5e6, 10}, upload)
                              .total_s);
            high.push_back(transaction_confirmation_latency(q, s.blockchain,
                                                            P2PParams{50e6, 10}, upload)
                               .total_s);
        }
        std::size_t argmin = 0;
        for (std::size_t i = 1; i < low.size(); ++i)
            if (low[i] < low[argmin]) argmin = i;
        if (argmin == 0 || argmin + 1 == low.size()) {
            std::cerr << "  no interior minimum at 5 Mbps\n";
            ok = false;
        }
        for (std::size_t i = 0; i < low.size(); ++i)
            if (high[i] > low[i]) {
                std::cerr << "  50 Mbps exceeds 5 Mbps at lambda=" << lambdas[i] << '\n';
                ok = false;
            }
        log << "T_BC(5 Mbps) min at lambda=" << lambdas[argmin] << " in [" << lambdas.front()
            << ", " << lambdas.back() << "]";
    }
    return ok;
}

// --- criterion 6 -----------------------------------------------------------

bool criterion_reduction(std::ostream& log) {
    FLConfig cfg;
    cfg.clients = 10;
    cfg.participation = 1.0;
    cfg.max_rounds = 50;
    const auto task = generate_synthetic_task(10, 32, 100, 10, true, 3, 1234);

    ChainSetup setup;
    setup.profiles = sample_clients(10, 100.0, 1e-5, 1e9, 0.0, 2.0, 2.0, 1);
    setup.chain.timeout_s = kInfinity;

    std::vector<std::vector<double>> sync_w, async_w;
    setup.weight_trace = &sync_w;
    run_s_flchain(cfg, task, setup, 99);
    setup.weight_trace = &async_w;
    run_a_flchain(cfg, task, setup, 99);

    if (sync_w.size() != 50 || async_w.size() != 50) {
        log << "expected 50 rounds, got " << sync_w.size() << " / " << async_w.size();
        return false;
    }
    double worst = 0.0;
    for (std::size_t t = 0; t < sync_w.size(); ++t)
        for (std::size_t j = 0; j < sync_w[t].size(); ++j)
            worst = std::max(worst, std::abs(sync_w[t][j] - async_w[t][j]));
    log << "50 rounds, max |w_sync - w_async| = " << worst;
    return worst <= 1e-12;
}

// --- criterion 7 -----------------------------------------------------------

bool criterion_learning_sanity(std::ostream& log) {
    const int K = 10, classes = 10, dim = 32;
    const auto task = generate_synthetic_task(classes, dim, 100, K, true, classes, 2024);

    FLConfig cfg;
    cfg.clients = K;
    cfg.max_rounds = 200;
    ChainSetup setup;
    setup.profiles = sample_clients(K, 100.0, 1e-5, 1e9, 0.2, 0.0, 4.15, 3);
    const auto traj = run_s_flchain(cfg, task, setup, 7);
    const double fed_acc = traj.back().eval_accuracy;

    // Centralized oracle: plain mini-batch SGD over the pooled data with the
    // same hyper-parameters and the same total number of epochs.
    ClientDataset pooled;
    pooled.dim = dim;
    for (const auto& ds : task.clients) {
        pooled.features.insert(pooled.features.end(), ds.features.begin(), ds.features.end());
        pooled.labels.insert(pooled.labels.end(), ds.labels.begin(), ds.labels.end());
        pooled.count += ds.count;
    }
    std::vector<double> w = zero_model(classes, dim);
    Rng rng(555);
    std::vector<int> order(pooled.count);
    for (int i = 0; i < pooled.count; ++i) order[i] = i;
    std::vector<double> probs(classes);
    const int total_epochs = cfg.max_rounds * cfg.local_epochs;
    for (int e = 0; e < total_epochs; ++e) {
        rng.shuffle(order);
        for (int start = 0; start < pooled.count; start += cfg.minibatch) {
            const int stop = std::min(start + cfg.minibatch, pooled.count);
            std::vector<double> grad(w.size(), 0.0);
            for (int b = start; b < stop; ++b) {
                const double* x = &pooled.features[static_cast<std::size_t>(order[b]) * dim];
                // softmax
                double maxz = -1e300;
                for (int c = 0; c < classes; ++c) {
                    const double* row = &w[static_cast<std::size_t>(c) * (dim + 1)];
                    double z = row[dim];
                    for (int j = 0; j < dim; ++j) z += row[j] * x[j];
                    probs[c] = z;
                    maxz = std::max(maxz, z);
                }
                double sum = 0.0;
                for (int c = 0; c < classes; ++c) {
                    probs[c] = std::exp(probs[c] - maxz);
                    sum += probs[c];
                }
                for (int c = 0; c < classes; ++c) probs[c] /= sum;
                const int y = pooled.labels[order[b]];
                for (int c = 0; c < classes; ++c) {
                    const double delta = probs[c] - (c == y ? 1.0 : 0.0);
                    double* grow = &grad[static_cast<std::size_t>(c) * (dim + 1)];
                    for (int j = 0; j < dim; ++j) grow[j] += delta * x[j];
                    grow[dim] += delta;
                }
            }
            const double step = cfg.lr_local / (stop - start);
            for (std::size_t j = 0; j < w.size(); ++j) w[j] -= step * grad[j];
        }
    }
    const double central_acc = dataset_accuracy(w, task.eval, classes);

    // Gradient check against central finite differences.
    Rng grng(9);
    std::vector<double> wg(model_size(classes, dim));
    for (auto& v : wg) v = 0.2 * grng.normal();
    const auto grad = dataset_gradient(wg, task.clients[0], classes);
    double worst_grad = 0.0;
    const double h = 1e-6;
    for (std::size_t i = 0; i < wg.size(); i += 17) {
        std::vector<double> wp = wg, wm = wg;
        wp[i] += h;
        wm[i] -= h;
        const double fd =
            (dataset_loss(wp, task.clients[0], classes) - dataset_loss(wm, task.clients[0], classes)) /
            (2 * h);
        if (std::abs(fd) > 1e-7)
            worst_grad = std::max(worst_grad, std::abs(grad[i] - fd) / std::abs(fd));
    }

    log << "federated accuracy = " << fed_acc << ", centralized = " << central_acc
        << ", gradient max rel err = " << worst_grad;
    return fed_acc >= 0.9 * central_acc && worst_grad <= 1e-5;
}

// --- criterion 8 -----------------------------------------------------------

bool criterion_efficiency_trend(std::ostream& log) {
    Scenario s = default_scenario();
    s.model = "fnn";  // transaction size from the 2-byte parameter rule
    s.fl.max_rounds = 40;
    s.eval_per_class = 50;
    s.seeds = {1, 2, 3, 4, 5};
    s.sweep["federated_learning.clients"] = {10, 50, 100, 200};
    s.sweep["federated_learning.participation"] = {0.10, 0.25, 0.50, 0.75, 1.00};

    const fs::path dir = fs::temp_directory_path() / "flchain_acceptance_trend";
    fs::remove_all(dir);
    const auto result = run_flchain_comparison(s, dir, 1);
    if (!result.cell_errors.empty()) {
        log << result.cell_errors.size() << " cell failures";
        return false;
    }

    std::ifstream mf(dir / "flchain_efficiency.csv");
    std::string line;
    std::getline(mf, line);  // header
    std::vector<std::vector<double>> eff;
    while (std::getline(mf, line)) {
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        eff.push_back(std::move(row));  // row: K, then one efficiency per Upsilon
    }

    bool ok = true;
    for (std::size_t ki = 1; ki < eff.size(); ++ki)
        for (std::size_t ui = 1; ui < eff[ki].size(); ++ui)
            if (eff[ki][ui] > eff[ki - 1][ui]) {
                std::cerr << "  efficiency increased in K at K=" << eff[ki][0] << " column "
                          << ui << '\n';
                ok = false;
            }
    for (std::size_t ki = 0; ki < eff.size(); ++ki)
        for (std::size_t ui = 2; ui < eff[ki].size(); ++ui)
            if (eff[ki][ui] > eff[ki][ui - 1]) {
                std::cerr << "  efficiency increased in Upsilon at K=" << eff[ki][0]
                          << " column " << ui << '\n';
                ok = false;
            }
    double best = -1.0;
    std::size_t bk = 0, bu = 0;
    for (std::size_t ki = 0; ki < eff.size(); ++ki)
        for (std::size_t ui = 1; ui < eff[ki].size(); ++ui)
            if (eff[ki][ui] > best) {
                best = eff[ki][ui];
                bk = ki;
                bu = ui;
            }
    if (bk != 0 || bu != 1) {
        std::cerr << "  maximum efficiency not at (K=10, Upsilon=10%)\n";
        ok = false;
    }
    log << "matrix 4x5 over 5 seeds, max " << best << " at (K=" << eff[bk][0] << ", column "
        << bu << ")";
    return ok;
}

// --- criterion 9 -----------------------------------------------------------

bool criterion_model_delays(std::ostream& log) {
    const Scenario s = default_scenario();
    const fs::path dir = fs::temp_directory_path() / "flchain_acceptance_models";
    fs::remove_all(dir);
    const auto result = model_size_delay_report(s, dir, 3);

    std::ifstream f(result.files[0]);
    std::string line;
    std::getline(f, line);
    std::map<int, std::map<std::string, double>> log_delay;
    while (std::getline(f, line)) {
        std::istringstream ls(line);
        std::string model, params, bits, k, delay, logd;
        std::getline(ls, model, ',');
        std::getline(ls, params, ',');
        std::getline(ls, bits, ',');
        std::getline(ls, k, ',');
        std::getline(ls, delay, ',');
        std::getline(ls, logd, ',');
        log_delay[std::stoi(k)][model] = std::stod(logd);
    }
    bool ok = true;
    for (const int K : {10, 50, 100, 200}) {
        auto& m = log_delay[K];
        if (!(m.at("fnn") < m.at("cnn") && m.at("cnn") < m.at("resnet50") &&
              m.at("resnet50") < m.at("vgg19"))) {
            std::cerr << "  delay not strictly increasing in model size at K=" << K << '\n';
            ok = false;
        }
    }
    const double span = log_delay[200].at("vgg19") - log_delay[200].at("fnn");
    log << "log10 delay span VGG19 vs FNN at K=200 = " << span << " (need > 3)";
    return ok && span > 3.0;
}

// --- criterion 10 ----------------------------------------------------------

bool criterion_determinism(std::ostream& log) {
    if (g_flchain_bin.empty()) {
        log << "flchain binary path not provided (--flchain-bin)";
        return false;
    }
    const fs::path base = fs::temp_directory_path() / "flchain_acceptance_cli";
    fs::remove_all(base);
    fs::create_directories(base);

    const fs::path scenario = base / "scenario.cfg";
    {
        std::ofstream sf(scenario);
        sf << "[blockchain]\nqueue_capacity = 60\nbatch_size = 5\n"
           << "[federated_learning]\nclients = 6\nmax_rounds = 4\n"
           << "n_classes = 4\nfeature_dim = 6\nsamples_per_client = 20\neval_per_class = 20\n"
           << "[run]\nseeds = 1,2\ndes_arrivals = 30000\n"
           << "[sweep]\nblockchain.mining_rate = 0.2,1\nblockchain.arrival_rate = 0.5,2\n"
           << "blockchain.batch_size = 2,5\nfederated_learning.clients = 4,6\n"
           << "federated_learning.participation = 0.5,1\n";
    }

    const char* subs[] = {"queue-analyze", "queue-simulate", "confirmation-sweep",
                          "flchain-run", "model-delays"};
    for (const char* sub : subs) {
        for (int rep = 1; rep <= 2; ++rep) {
            const fs::path out = base / (std::string(sub) + "_" + std::to_string(rep));
            std::ostringstream cmd;
            cmd << '"' << g_flchain_bin << "\" " << sub << " --scenario \"" << scenario.string()
                << "\" --out \"" << out.string() << "\" --seed 11 > /dev/null";
            if (std::system(cmd.str().c_str()) != 0) {
                log << sub << " exited nonzero";
                return false;
            }
        }
        const fs::path d1 = base / (std::string(sub) + "_1");
        const fs::path d2 = base / (std::string(sub) + "_2");
        for (const auto& entry : fs::directory_iterator(d1)) {
            std::ifstream a(entry.path(), std::ios::binary);
            std::ifstream b(d2 / entry.path().filename(), std::ios::binary);
            std::stringstream sa, sb;
            sa << a.rdbuf();
            sb << b.rdbuf();
            if (sa.str() != sb.str() || sa.str().empty()) {
                log << sub << ": " << entry.path().filename().string() << " differs";
                return false;
            }
        }
    }
    log << "5 subcommands, byte-identical reruns";
    return true;
}

struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::ostream&)> fn;
};

}  // namespace

int main(int argc, char** argv) {
    int selected = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc) selected = std::atoi(argv[++i]);
        if (arg == "--flchain-bin" && i + 1 < argc) g_flchain_bin = argv[++i];
    }

    const std::vector<Criterion> criteria = {
        {1, "stochastic matrix suite", criterion_stochastic_matrix},
        {2, "M/M/1/S closed-form oracle", criterion_closed_form},
        {3, "DES equivalence", criterion_des_equivalence},
        {4, "fork model", criterion_fork_model},
        {5, "figure-shape reproduction", criterion_figure_shapes},
        {6, "sync/async reduction", criterion_reduction},
        {7, "learning sanity", criterion_learning_sanity},
        {8, "efficiency trend", criterion_efficiency_trend},
        {9, "model-delay report", criterion_model_delays},
        {10, "CSV determinism", criterion_determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (selected != 0 && c.id != selected) continue;
        std::ostringstream detail;
        const auto t0 = std::chrono::steady_clock::now();
        bool pass = false;
        try {
            pass = c.fn(detail);
        } catch (const std::exception& e) {
            detail << "exception: " << e.what();
        }
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] criterion %d: %s (%s; %.1f s)\n", pass ? "PASS" : "FAIL", c.id,
                    c.name, detail.str().c_str(), dt);
        std::fflush(stdout);
        failures += !pass;
    }
    return failures == 0 ? 0 : 1;
}

// Command-line front end: scenario-driven queue analysis, simulation,
// confirmation-latency sweeps, federated-training comparisons and the
// model-size delay report. Exit codes: 0 success, 1 validation error,
// 2 runtime error.
#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "flchain/des_engine.hpp"
#include "flchain/scenario.hpp"
#include "flchain/sweeps.hpp"

namespace {

flchain::Scenario load_or_default(const std::string& path) {
    if (path.empty()) {
        flchain::Scenario s = flchain::default_scenario();
        flchain::apply_env_overrides(s);
        flchain::validate_scenario(s);
        return s;
    }
    return flchain::load_scenario(path);
}

void report(const flchain::SweepResult& result) {
    for (const auto& f : result.files) std::cout << "wrote " << f.string() << '\n';
    for (const auto& e : result.cell_errors) std::cerr << "cell error: " << e << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FLchain performance model: batch-service queue analysis and "
                 "synchronous/asynchronous federated training evaluation"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    bool trace = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", scenario_path, "scenario file (defaults when omitted)");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "base simulation seed");
    };

    CLI::App* queue_analyze =
        app.add_subcommand("queue-analyze", "analytical queue sweep (no simulation)");
    add_common(queue_analyze);
    CLI::App* queue_simulate = app.add_subcommand(
        "queue-simulate", "analytical and discrete-event queue models side by side");
    add_common(queue_simulate);
    queue_simulate->add_flag("--trace", trace, "emit a per-event trace for the default cell");
    CLI::App* confirmation =
        app.add_subcommand("confirmation-sweep", "transaction confirmation latency vs lambda");
    add_common(confirmation);
    CLI::App* flchain_run = app.add_subcommand(
        "flchain-run", "s-FLchain vs a-FLchain comparison over K and participation grids");
    add_common(flchain_run);
    CLI::App* model_delays =
        app.add_subcommand("model-delays", "iteration delay of the model-size catalogue");
    add_common(model_delays);

    CLI11_PARSE(app, argc, argv);

    try {
        const flchain::Scenario s = load_or_default(scenario_path);
        const std::filesystem::path out(out_dir);

        if (queue_analyze->parsed()) {
            report(flchain::run_queue_analysis(s, out));
        } else if (queue_simulate->parsed()) {
            if (trace) {
                std::filesystem::create_directories(out);
                std::ofstream tf(out / "des_trace.csv", std::ios::binary);
                tf << "time,event,queue_len\n";
                flchain::DesConfig dc;
                dc.queue = flchain::queue_params(s);
                dc.max_arrivals = std::min<std::uint64_t>(s.des_arrivals, 10000);
                dc.seed = seed;
                dc.trace = &tf;
                flchain::run(dc);
                std::cout << "wrote " << (out / "des_trace.csv").string() << '\n';
            }
            report(flchain::run_queue_sweep(s, out, seed));
        } else if (confirmation->parsed()) {
            report(flchain::run_confirmation_sweep(s, out, seed));
        } else if (flchain_run->parsed()) {
            const auto result = flchain::run_flchain_comparison(s, out, seed);
            report(result);
            if (!result.cell_errors.empty()) return 1;
        } else if (model_delays->parsed()) {
            report(flchain::model_size_delay_report(s, out, seed));
        }
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return 2;
    }
}

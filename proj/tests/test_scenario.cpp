#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "flchain/scenario.hpp"

using namespace flchain;

TEST_CASE("empty text yields the default deployment parameters") {
    const Scenario s = parse_scenario("");
    CHECK(s.blockchain.transaction_size_bits == 5e3);
    CHECK(s.blockchain.block_header_bits == 200e3);
    CHECK(s.blockchain.miners == 10);
    CHECK(s.blockchain.timeout_s == 1000.0);
    CHECK(s.blockchain.queue_capacity == 1000);
    CHECK(s.blockchain.p2p_capacity_bps == 5e6);
    CHECK(s.radio.bandwidth_hz == 180e3);
    CHECK(s.radio.tx_power_dbm == 20.0);
    CHECK(s.radio.ref_loss_db == 5.0);
    CHECK(s.radio.pathloss_exp == 4.4);
    CHECK(s.radio.shadowing_db == 9.5);
    CHECK(s.radio.obstacles_db == 30.0);
    CHECK(s.radio.noise_dbm == -95.0);
    CHECK(s.d_max_m == 4.15);
    CHECK(s.fl.lr_local == 0.01);
    CHECK(s.fl.lr_global == 1.0);
    CHECK(s.fl.local_epochs == 5);
    CHECK(s.fl.minibatch == 20);
    CHECK(s.cpu_cycles_per_sample == 1e-5);
    CHECK(s.clock_hz == 1e9);
}

TEST_CASE("keys are parsed with section context") {
    const Scenario s = parse_scenario(
        "[blockchain]\n"
        "mining_rate = 0.5\n"
        "batch_size = 25\n"
        "timeout_s = inf\n"
        "# a comment\n"
        "[federated_learning]\n"
        "clients = 42\n"
        "iid = false\n"
        "model = cnn\n"
        "[run]\n"
        "seeds = 7, 8, 9\n");
    CHECK(s.blockchain.mining_rate == 0.5);
    CHECK(s.blockchain.batch_size == 25);
    CHECK(s.blockchain.timeout_s == kInfinity);
    CHECK(s.fl.clients == 42);
    CHECK_FALSE(s.fl.iid);
    CHECK(s.model == "cnn");
    CHECK(s.seeds == std::vector<std::uint64_t>{7, 8, 9});
}

TEST_CASE("validation errors name the key and line") {
    try {
        parse_scenario("[blockchain]\nmining_rate = -1\n");
        FAIL("expected a scenario error");
    } catch (const ScenarioError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("blockchain.mining_rate") != std::string::npos);
        CHECK(msg.find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_scenario("[blockchain]\nnot_a_key = 3\n"), ScenarioError);
    CHECK_THROWS_AS(parse_scenario("[nowhere]\nx = 1\n"), ScenarioError);
    CHECK_THROWS_AS(parse_scenario("[blockchain]\nminers = ten\n"), ScenarioError);
    CHECK_THROWS_AS(parse_scenario("stray = 1\n"), ScenarioError);
    CHECK_THROWS_AS(parse_scenario("[federated_learning]\nparticipation = 1.5\n"),
                    ScenarioError);
}

TEST_CASE("cross-field validation") {
    Scenario s = parse_scenario("[blockchain]\nbatch_size = 2000\n");
    CHECK_THROWS_AS(validate_scenario(s), ScenarioError);
    s = parse_scenario("[federated_learning]\niid = false\nclasses_per_client = 99\n");
    CHECK_THROWS_AS(validate_scenario(s), ScenarioError);
    s = parse_scenario("");
    CHECK_NOTHROW(validate_scenario(s));
}

TEST_CASE("round trip: load, serialize, load") {
    const std::string text =
        "[blockchain]\nmining_rate = 0.35\nbatch_size = 7\n"
        "[communication]\nnoise_dbm = -92.5\n"
        "[federated_learning]\nclients = 13\nmodel = vgg19\nclock_jitter = 0.125\n"
        "[run]\nseeds = 3,1\ndes_arrivals = 50000\n"
        "[sweep]\nblockchain.mining_rate = 0.1, 0.2, 0.4\n";
    const Scenario a = parse_scenario(text);
    const std::string ser = serialize_scenario(a);
    const Scenario b = parse_scenario(ser);
    CHECK(serialize_scenario(b) == ser);
    CHECK(b.blockchain.mining_rate == a.blockchain.mining_rate);
    CHECK(b.radio.noise_dbm == a.radio.noise_dbm);
    CHECK(b.model == a.model);
    CHECK(b.seeds == a.seeds);
    CHECK(b.sweep == a.sweep);
}

TEST_CASE("environment overrides") {
    ::setenv("FLCHAIN_BLOCKCHAIN_MINING_RATE", "0.77", 1);
    ::setenv("FLCHAIN_FEDERATED_LEARNING_CLIENTS", "33", 1);
    Scenario s = parse_scenario("[blockchain]\nmining_rate = 0.2\n");
    apply_env_overrides(s);
    CHECK(s.blockchain.mining_rate == 0.77);
    CHECK(s.fl.clients == 33);
    ::unsetenv("FLCHAIN_BLOCKCHAIN_MINING_RATE");
    ::unsetenv("FLCHAIN_FEDERATED_LEARNING_CLIENTS");

    ::setenv("FLCHAIN_BLOCKCHAIN_MINING_RATE", "junk", 1);
    CHECK_THROWS_AS(apply_env_overrides(s), ScenarioError);
    ::unsetenv("FLCHAIN_BLOCKCHAIN_MINING_RATE");
}

TEST_CASE("sweep paths must exist") {
    CHECK_THROWS_AS(parse_scenario("[sweep]\nblockchain.unknown_knob = 1,2\n"), ScenarioError);
    const Scenario s = parse_scenario("[sweep]\nfederated_learning.clients = 10,50\n");
    CHECK(sweep_grid(s, "federated_learning.clients", {1}) ==
          std::vector<double>{10, 50});
    CHECK(sweep_grid(s, "blockchain.mining_rate", {0.3}) == std::vector<double>{0.3});
}

TEST_CASE("model presets size the transaction") {
    Scenario s = parse_scenario("[federated_learning]\nmodel = fnn\n");
    CHECK(preset_params(s.model) == 203530);
    CHECK(effective_transaction_bits(s) == doctest::Approx(203530.0 * 16.0));
    s = parse_scenario("");
    CHECK(effective_transaction_bits(s) == 5e3);
    CHECK(preset_params("resnet50") == 23792612);
    CHECK(preset_params("vgg19") == 39316644);
    CHECK(preset_params("cnn") == 2374506);
}

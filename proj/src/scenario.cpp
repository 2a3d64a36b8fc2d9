#include "flchain/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace flchain {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

[[noreturn]] void fail(const std::string& context, const std::string& msg) {
    throw ScenarioError(context.empty() ? msg : context + ": " + msg);
}

double parse_double(const std::string& v, const std::string& ctx) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) fail(ctx, "trailing characters in number '" + v + "'");
        return d;
    } catch (const ScenarioError&) {
        throw;
    } catch (const std::exception&) {
        fail(ctx, "expected a number, got '" + v + "'");
    }
}

long long parse_int(const std::string& v, const std::string& ctx) {
    try {
        std::size_t pos = 0;
        const long long i = std::stoll(v, &pos);
        if (pos != v.size()) fail(ctx, "trailing characters in integer '" + v + "'");
        return i;
    } catch (const ScenarioError&) {
        throw;
    } catch (const std::exception&) {
        fail(ctx, "expected an integer, got '" + v + "'");
    }
}

bool parse_bool(const std::string& v, const std::string& ctx) {
    const std::string l = lower(v);
    if (l == "true" || l == "1" || l == "yes") return true;
    if (l == "false" || l == "0" || l == "no") return false;
    fail(ctx, "expected a boolean, got '" + v + "'");
}

std::vector<double> parse_double_list(const std::string& v, const std::string& ctx) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(item, ctx));
    }
    if (out.empty()) fail(ctx, "expected a comma-separated list of numbers");
    return out;
}

std::string fmt(double v) {
    if (v == kInfinity) return "inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct KeySpec {
    const char* section;
    const char* key;
};

// One row per recognized key; drives parsing, env overrides, serialization
// and sweep-path validation.
constexpr KeySpec kKeys[] = {
    {"blockchain", "transaction_size_bits"},
    {"blockchain", "block_header_bits"},
    {"blockchain", "miners"},
    {"blockchain", "mining_rate"},
    {"blockchain", "arrival_rate"},
    {"blockchain", "timeout_s"},
    {"blockchain", "queue_capacity"},
    {"blockchain", "batch_size"},
    {"blockchain", "p2p_capacity_bps"},
    {"communication", "bandwidth_hz"},
    {"communication", "carrier_hz"},
    {"communication", "antenna_gain_dbi"},
    {"communication", "tx_power_dbm"},
    {"communication", "ref_loss_db"},
    {"communication", "pathloss_exponent"},
    {"communication", "shadowing_db"},
    {"communication", "obstacles_db"},
    {"communication", "noise_dbm"},
    {"communication", "channels"},
    {"communication", "d_min_m"},
    {"communication", "d_max_m"},
    {"federated_learning", "clients"},
    {"federated_learning", "participation"},
    {"federated_learning", "local_epochs"},
    {"federated_learning", "minibatch"},
    {"federated_learning", "lr_local"},
    {"federated_learning", "lr_global"},
    {"federated_learning", "tolerance"},
    {"federated_learning", "max_rounds"},
    {"federated_learning", "iid"},
    {"federated_learning", "classes_per_client"},
    {"federated_learning", "n_classes"},
    {"federated_learning", "feature_dim"},
    {"federated_learning", "samples_per_client"},
    {"federated_learning", "eval_per_class"},
    {"federated_learning", "cpu_cycles_per_sample"},
    {"federated_learning", "clock_hz"},
    {"federated_learning", "clock_jitter"},
    {"federated_learning", "aggregator_clock_hz"},
    {"federated_learning", "model"},
    {"run", "seeds"},
    {"run", "des_arrivals"},
};

void require_positive(double v, const std::string& ctx) {
    if (!(v > 0.0)) fail(ctx, "must be > 0");
}

void require_nonnegative(double v, const std::string& ctx) {
    if (!(v >= 0.0)) fail(ctx, "must be >= 0");
}

int int_at_least(long long v, long long lo, const std::string& ctx) {
    if (v < lo) fail(ctx, "must be >= " + std::to_string(lo));
    return static_cast<int>(v);
}

void apply_key(Scenario& s, const std::string& section, const std::string& key,
               const std::string& value, const std::string& ctx) {
    auto& bc = s.blockchain;
    auto& rp = s.radio;
    auto& fl = s.fl;
    if (section == "blockchain") {
        if (key == "transaction_size_bits") {
            bc.transaction_size_bits = parse_double(value, ctx);
            require_positive(bc.transaction_size_bits, ctx);
        } else if (key == "block_header_bits") {
            bc.block_header_bits = parse_double(value, ctx);
            require_nonnegative(bc.block_header_bits, ctx);
        } else if (key == "miners") {
            bc.miners = int_at_least(parse_int(value, ctx), 1, ctx);
        } else if (key == "mining_rate") {
            bc.mining_rate = parse_double(value, ctx);
            require_positive(bc.mining_rate, ctx);
        } else if (key == "arrival_rate") {
            s.arrival_rate = parse_double(value, ctx);
            require_positive(s.arrival_rate, ctx);
        } else if (key == "timeout_s") {
            bc.timeout_s = parse_double(value, ctx);
            require_positive(bc.timeout_s, ctx);
        } else if (key == "queue_capacity") {
            bc.queue_capacity = int_at_least(parse_int(value, ctx), 1, ctx);
        } else if (key == "batch_size") {
            bc.batch_size = int_at_least(parse_int(value, ctx), 1, ctx);
        } else if (key == "p2p_capacity_bps") {
            bc.p2p_capacity_bps = parse_double(value, ctx);
            require_positive(bc.p2p_capacity_bps, ctx);
        } else {
            fail(ctx, "unknown key 'blockchain." + key + "'");
        }
    } else if (section == "communication") {
        if (key == "bandwidth_hz") {
            rp.bandwidth_hz = parse_double(value, ctx);
            require_positive(rp.bandwidth_hz, ctx);
        } else if (key == "carrier_hz") {
            rp.carrier_hz = parse_double(value, ctx);
            require_positive(rp.carrier_hz, ctx);
        } else if (key == "antenna_gain_dbi") {
            rp.antenna_gain_dbi = parse_double(value, ctx);
        } else if (key == "tx_power_dbm") {
            rp.tx_power_dbm = parse_double(value, ctx);
        } else if (key == "ref_loss_db") {
            rp.ref_loss_db = parse_double(value, ctx);
        } else if (key == "pathloss_exponent") {
            rp.pathloss_exp = parse_double(value, ctx);
            require_positive(rp.pathloss_exp, ctx);
        } else if (key == "shadowing_db") {
            rp.shadowing_db = parse_double(value, ctx);
        } else if (key == "obstacles_db") {
            rp.obstacles_db = parse_double(value, ctx);
        } else if (key == "noise_dbm") {
            rp.noise_dbm = parse_double(value, ctx);
        } else if (key == "channels") {
            rp.channels = int_at_least(parse_int(value, ctx), 1, ctx);
        } else if (key == "d_min_m") {
            s.d_min_m = parse_double(value, ctx);
            require_nonnegative(s.d_min_m, ctx);
        } else if (key == "d_max_m") {
            s.d_max_m = parse_double(value, ctx);
            require_positive(s.d_max_m, ctx);
        } else {
            fail(ctx, "unknown key 'communication." + key + "'");
        }
    } else if (section == "federated_learning") {
        if (key == "clients") {
            fl.clients = int_at_least(parse_int(value, ctx), 1, ctx);
        } else if (key == "participation") {
            fl.participation = parse_double(value, ctx);
            if (!(fl.participation > 0.0) || fl.participation > 1.0)
                fail(ctx, "must lie in (0, 1]");
        } else if (key == "local_epochs") {
            fl.local_epochs = int_at_least(parse_int(value, ctx), 0, ctx);
        } else if (key == "minibatch") {
            fl.minibatch = int_at_least(parse_int(value, ctx), 1, ctx);
        } else if (key == "lr_local") {
            fl.lr_local = parse_double(value, ctx);
            require_nonnegative(fl.lr_local, ctx);
        } else if (key == "lr_global") {
            fl.lr_global = parse_double(value, ctx);
        } else if (key == "tolerance") {
            fl.tolerance = parse_double(value, ctx);
            require_nonnegative(fl.tolerance, ctx);
        } else if (key == "max_rounds") {
            fl.max_rounds = int_at_least(parse_int(value, ctx), 1, ctx);
        } else if (key == "iid") {
            fl.iid = parse_bool(value, ctx);
        } else if (key == "classes_per_client") {
            fl.classes_per_client = int_at_least(parse_int(value, ctx), 1, ctx);
        } else if (key == "n_classes") {
            s.n_classes = int_at_least(parse_int(value, ctx), 2, ctx);
        } else if (key == "feature_dim") {
            s.feature_dim = int_at_least(parse_int(value, ctx), 1, ctx);
        } else if (key == "samples_per_client") {
            s.samples_per_client = int_at_least(parse_int(value, ctx), 1, ctx);
        } else if (key == "eval_per_class") {
            s.eval_per_class = int_at_least(parse_int(value, ctx), 1, ctx);
        } else if (key == "cpu_cycles_per_sample") {
            s.cpu_cycles_per_sample = parse_double(value, ctx);
            require_positive(s.cpu_cycles_per_sample, ctx);
        } else if (key == "clock_hz") {
            s.clock_hz = parse_double(value, ctx);
            require_positive(s.clock_hz, ctx);
        } else if (key == "clock_jitter") {
            s.clock_jitter = parse_double(value, ctx);
            if (s.clock_jitter < 0.0 || s.clock_jitter >= 1.0) fail(ctx, "must lie in [0, 1)");
        } else if (key == "aggregator_clock_hz") {
            s.aggregator_clock_hz = parse_double(value, ctx);
            require_positive(s.aggregator_clock_hz, ctx);
        } else if (key == "model") {
            const std::string m = lower(trim(value));
            if (m != "synthetic" && m != "fnn" && m != "cnn" && m != "resnet50" && m != "vgg19")
                fail(ctx, "unknown model '" + value + "'");
            s.model = m;
        } else {
            fail(ctx, "unknown key 'federated_learning." + key + "'");
        }
    } else if (section == "run") {
        if (key == "seeds") {
            std::vector<std::uint64_t> seeds;
            for (double d : parse_double_list(value, ctx)) {
                if (d < 0 || d != std::floor(d)) fail(ctx, "seeds must be nonnegative integers");
                seeds.push_back(static_cast<std::uint64_t>(d));
            }
            s.seeds = std::move(seeds);
        } else if (key == "des_arrivals") {
            const long long v = parse_int(value, ctx);
            if (v < 1000) fail(ctx, "must be >= 1000");
            s.des_arrivals = static_cast<std::uint64_t>(v);
        } else {
            fail(ctx, "unknown key 'run." + key + "'");
        }
    } else {
        fail(ctx, "unknown section '" + section + "'");
    }
}

bool known_sweep_path(const std::string& path) {
    for (const auto& k : kKeys) {
        if (path == std::string(k.section) + "." + k.key) return true;
    }
    return false;
}

}  // namespace

Scenario default_scenario() { return Scenario{}; }

Scenario parse_scenario(const std::string& text) {
    Scenario s = default_scenario();
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                fail("scenario line " + std::to_string(lineno), "malformed section header");
            section = lower(trim(line.substr(1, line.size() - 2)));
            if (section != "blockchain" && section != "communication" &&
                section != "federated_learning" && section != "run" && section != "sweep")
                fail("scenario line " + std::to_string(lineno),
                     "unknown section '" + section + "'");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail("scenario line " + std::to_string(lineno), "expected 'key = value'");
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        const std::string ctx = "scenario line " + std::to_string(lineno) + ", " +
                                (section.empty() ? key : section + "." + key);
        if (section.empty()) fail(ctx, "key appears before any [section]");
        if (section == "sweep") {
            if (!known_sweep_path(key)) fail(ctx, "swept parameter path does not exist");
            s.sweep[key] = parse_double_list(value, ctx);
        } else {
            apply_key(s, section, key, value, ctx);
        }
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ScenarioError("cannot open scenario file '" + path + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    Scenario s = parse_scenario(buf.str());
    apply_env_overrides(s);
    validate_scenario(s);
    return s;
}

void apply_env_overrides(Scenario& s) {
    for (const auto& k : kKeys) {
        std::string name = "FLCHAIN_" + std::string(k.section) + "_" + k.key;
        std::transform(name.begin(), name.end(), name.begin(),
                       [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
        if (const char* v = std::getenv(name.c_str()))
            apply_key(s, k.section, k.key, v, "environment " + name);
    }
}

void validate_scenario(const Scenario& s) {
    if (s.blockchain.batch_size > s.blockchain.queue_capacity)
        throw ScenarioError("blockchain.batch_size exceeds blockchain.queue_capacity");
    if (s.d_max_m < s.d_min_m)
        throw ScenarioError("communication.d_max_m is below communication.d_min_m");
    if (!s.fl.iid && s.fl.classes_per_client > s.n_classes)
        throw ScenarioError(
            "federated_learning.classes_per_client exceeds federated_learning.n_classes");
    if (s.seeds.empty()) throw ScenarioError("run.seeds must be nonempty");
    for (const auto& [path, grid] : s.sweep)
        if (grid.empty()) throw ScenarioError("sweep grid for '" + path + "' is empty");
    s.fl.validate();
    s.radio.validate();
    queue_params(s).validate();
}

std::string serialize_scenario(const Scenario& s) {
    std::ostringstream o;
    o << "[blockchain]\n";
    o << "transaction_size_bits = " << fmt(s.blockchain.transaction_size_bits) << '\n';
    o << "block_header_bits = " << fmt(s.blockchain.block_header_bits) << '\n';
    o << "miners = " << s.blockchain.miners << '\n';
    o << "mining_rate = " << fmt(s.blockchain.mining_rate) << '\n';
    o << "arrival_rate = " << fmt(s.arrival_rate) << '\n';
    o << "timeout_s = " << fmt(s.blockchain.timeout_s) << '\n';
    o << "queue_capacity = " << s.blockchain.queue_capacity << '\n';
    o << "batch_size = " << s.blockchain.batch_size << '\n';
    o << "p2p_capacity_bps = " << fmt(s.blockchain.p2p_capacity_bps) << '\n';
    o << "\n[communication]\n";
    o << "bandwidth_hz = " << fmt(s.radio.bandwidth_hz) << '\n';
    o << "carrier_hz = " << fmt(s.radio.carrier_hz) << '\n';
    o << "antenna_gain_dbi = " << fmt(s.radio.antenna_gain_dbi) << '\n';
    o << "tx_power_dbm = " << fmt(s.radio.tx_power_dbm) << '\n';
    o << "ref_loss_db = " << fmt(s.radio.ref_loss_db) << '\n';
    o << "pathloss_exponent = " << fmt(s.radio.pathloss_exp) << '\n';
    o << "shadowing_db = " << fmt(s.radio.shadowing_db) << '\n';
    o << "obstacles_db = " << fmt(s.radio.obstacles_db) << '\n';
    o << "noise_dbm = " << fmt(s.radio.noise_dbm) << '\n';
    o << "channels = " << s.radio.channels << '\n';
    o << "d_min_m = " << fmt(s.d_min_m) << '\n';
    o << "d_max_m = " << fmt(s.d_max_m) << '\n';
    o << "\n[federated_learning]\n";
    o << "clients = " << s.fl.clients << '\n';
    o << "participation = " << fmt(s.fl.participation) << '\n';
    o << "local_epochs = " << s.fl.local_epochs << '\n';
    o << "minibatch = " << s.fl.minibatch << '\n';
    o << "lr_local = " << fmt(s.fl.lr_local) << '\n';
    o << "lr_global = " << fmt(s.fl.lr_global) << '\n';
    o << "tolerance = " << fmt(s.fl.tolerance) << '\n';
    o << "max_rounds = " << s.fl.max_rounds << '\n';
    o << "iid = " << (s.fl.iid ? "true" : "false") << '\n';
    o << "classes_per_client = " << s.fl.classes_per_client << '\n';
    o << "n_classes = " << s.n_classes << '\n';
    o << "feature_dim = " << s.feature_dim << '\n';
    o << "samples_per_client = " << s.samples_per_client << '\n';
    o << "eval_per_class = " << s.eval_per_class << '\n';
    o << "cpu_cycles_per_sample = " << fmt(s.cpu_cycles_per_sample) << '\n';
    o << "clock_hz = " << fmt(s.clock_hz) << '\n';
    o << "clock_jitter = " << fmt(s.clock_jitter) << '\n';
    o << "aggregator_clock_hz = " << fmt(s.aggregator_clock_hz) << '\n';
    o << "model = " << s.model << '\n';
    o << "\n[run]\n";
    o << "seeds = ";
    for (std::size_t i = 0; i < s.seeds.size(); ++i) o << (i ? "," : "") << s.seeds[i];
    o << '\n';
    o << "des_arrivals = " << s.des_arrivals << '\n';
    if (!s.sweep.empty()) {
        o << "\n[sweep]\n";
        for (const auto& [path, grid] : s.sweep) {
            o << path << " = ";
            for (std::size_t i = 0; i < grid.size(); ++i) o << (i ? "," : "") << fmt(grid[i]);
            o << '\n';
        }
    }
    return o.str();
}

long long preset_params(const std::string& model) {
    if (model == "fnn") return 203530;
    if (model == "cnn") return 2374506;
    if (model == "resnet50") return 23792612;
    if (model == "vgg19") return 39316644;
    return 0;
}

double effective_transaction_bits(const Scenario& s) {
    const long long p = preset_params(s.model);
    return p > 0 ? static_cast<double>(p) * 16.0 : s.blockchain.transaction_size_bits;
}

QueueParams queue_params(const Scenario& s) {
    QueueParams q;
    q.capacity = s.blockchain.queue_capacity;
    q.batch_size = s.blockchain.batch_size;
    q.service_rate = s.blockchain.mining_rate;
    q.arrival_rate = s.arrival_rate;
    q.timeout_s = s.blockchain.timeout_s;
    return q;
}

P2PParams p2p_params(const Scenario& s) {
    return P2PParams{s.blockchain.p2p_capacity_bps, s.blockchain.miners};
}

std::vector<double> sweep_grid(const Scenario& s, const std::string& path,
                               std::vector<double> fallback) {
    auto it = s.sweep.find(path);
    return it != s.sweep.end() ? it->second : fallback;
}

}  // namespace flchain

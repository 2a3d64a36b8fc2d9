#include "flchain/fl_runtime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "flchain/rng.hpp"

namespace flchain {

void FLConfig::validate() const {
    if (clients < 1) throw std::invalid_argument("fl clients must be >= 1");
    if (!(participation > 0.0) || participation > 1.0)
        throw std::invalid_argument("fl participation must lie in (0, 1]");
    if (local_epochs < 0) throw std::invalid_argument("fl local_epochs must be >= 0");
    if (minibatch < 1) throw std::invalid_argument("fl minibatch must be >= 1");
    if (!(lr_local >= 0.0)) throw std::invalid_argument("fl lr_local must be >= 0");
    if (!(tolerance >= 0.0)) throw std::invalid_argument("fl tolerance must be >= 0");
    if (max_rounds < 1) throw std::invalid_argument("fl max_rounds must be >= 1");
    if (classes_per_client < 1)
        throw std::invalid_argument("fl classes_per_client must be >= 1");
}

std::size_t model_size(int n_classes, int dim) {
    return static_cast<std::size_t>(n_classes) * (dim + 1);
}

std::vector<double> zero_model(int n_classes, int dim) {
    return std::vector<double>(model_size(n_classes, dim), 0.0);
}

SyntheticTask generate_synthetic_task(int n_classes, int dim, int samples_per_client,
                                      int clients, bool iid, int classes_per_client,
                                      std::uint64_t seed, int eval_per_class,
                                      double class_separation) {
    if (n_classes < 2) throw std::invalid_argument("task needs at least 2 classes");
    if (dim < 1) throw std::invalid_argument("task feature dim must be >= 1");
    if (samples_per_client < 1) throw std::invalid_argument("samples_per_client must be >= 1");
    if (clients < 1) throw std::invalid_argument("task needs at least 1 client");
    if (!iid && classes_per_client > n_classes)
        throw std::invalid_argument("classes_per_client exceeds the number of classes");

    Rng rng(derive_seed(seed, 21));
    SyntheticTask task;
    task.n_classes = n_classes;
    task.dim = dim;

    std::vector<double> means(static_cast<std::size_t>(n_classes) * dim);
    for (auto& m : means) m = class_separation * rng.normal();

    auto draw_sample = [&](ClientDataset& ds, int label, Rng& r) {
        const double* mu = &means[static_cast<std::size_t>(label) * dim];
        for (int j = 0; j < dim; ++j) ds.features.push_back(mu[j] + r.normal());
        ds.labels.push_back(label);
        ++ds.count;
    };

    task.clients.resize(static_cast<std::size_t>(clients));
    task.client_classes.resize(static_cast<std::size_t>(clients));
    for (int k = 0; k < clients; ++k) {
        Rng crng(derive_seed(seed, 100 + static_cast<std::uint64_t>(k)));
        auto& ds = task.clients[k];
        ds.dim = dim;
        std::vector<int>& label_set = task.client_classes[k];
        if (iid) {
            label_set.resize(static_cast<std::size_t>(n_classes));
            std::iota(label_set.begin(), label_set.end(), 0);
        } else {
            std::vector<int> all(static_cast<std::size_t>(n_classes));
            std::iota(all.begin(), all.end(), 0);
            crng.shuffle(all);
            label_set.assign(all.begin(), all.begin() + classes_per_client);
            std::sort(label_set.begin(), label_set.end());
        }
        for (int i = 0; i < samples_per_client; ++i)
            draw_sample(ds, label_set[i % label_set.size()], crng);
    }

    Rng erng(derive_seed(seed, 77));
    task.eval.dim = dim;
    for (int i = 0; i < eval_per_class; ++i)
        for (int c = 0; c < n_classes; ++c) draw_sample(task.eval, c, erng);
    return task;
}

namespace {

// Softmax probabilities for one sample; returns the probability vector.
void softmax_probs(const std::vector<double>& w, const double* x, int n_classes, int dim,
                   std::vector<double>& probs) {
    double maxz = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < n_classes; ++c) {
        const double* row = &w[static_cast<std::size_t>(c) * (dim + 1)];
        double z = row[dim];  // bias
        for (int j = 0; j < dim; ++j) z += row[j] * x[j];
        probs[c] = z;
        maxz = std::max(maxz, z);
    }
    double sum = 0.0;
    for (int c = 0; c < n_classes; ++c) {
        probs[c] = std::exp(probs[c] - maxz);
        sum += probs[c];
    }
    for (int c = 0; c < n_classes; ++c) probs[c] /= sum;
}

}  // namespace

double dataset_loss(const std::vector<double>& weights, const ClientDataset& data,
                    int n_classes) {
    if (data.count == 0) return 0.0;
    std::vector<double> probs(static_cast<std::size_t>(n_classes));
    double loss = 0.0;
    for (int i = 0; i < data.count; ++i) {
        softmax_probs(weights, &data.features[static_cast<std::size_t>(i) * data.dim],
                      n_classes, data.dim, probs);
        loss -= std::log(std::max(probs[data.labels[i]], 1e-300));
    }
    return loss / data.count;
}

double dataset_accuracy(const std::vector<double>& weights, const ClientDataset& data,
                        int n_classes) {
    if (data.count == 0) return 0.0;
    std::vector<double> probs(static_cast<std::size_t>(n_classes));
    int hits = 0;
    for (int i = 0; i < data.count; ++i) {
        softmax_probs(weights, &data.features[static_cast<std::size_t>(i) * data.dim],
                      n_classes, data.dim, probs);
        int best = 0;
        for (int c = 1; c < n_classes; ++c)
            if (probs[c] > probs[best]) best = c;
        hits += best == data.labels[i];
    }
    return static_cast<double>(hits) / data.count;
}

std::vector<double> dataset_gradient(const std::vector<double>& weights,
                                     const ClientDataset& data, int n_classes) {
    std::vector<double> grad(weights.size(), 0.0);
    if (data.count == 0) return grad;
    std::vector<double> probs(static_cast<std::size_t>(n_classes));
    const int dim = data.dim;
    for (int i = 0; i < data.count; ++i) {
        const double* x = &data.features[static_cast<std::size_t>(i) * dim];
        softmax_probs(weights, x, n_classes, dim, probs);
        for (int c = 0; c < n_classes; ++c) {
            const double delta = probs[c] - (c == data.labels[i] ? 1.0 : 0.0);
            double* grow = &grad[static_cast<std::size_t>(c) * (dim + 1)];
            for (int j = 0; j < dim; ++j) grow[j] += delta * x[j];
            grow[dim] += delta;
        }
    }
    const double inv = 1.0 / data.count;
    for (auto& g : grad) g *= inv;
    return grad;
}

std::vector<double> local_update(const std::vector<double>& weights, const ClientDataset& data,
                                 int n_classes, int epochs, int minibatch, double lr,
                                 std::uint64_t stream_seed, int client_id) {
    if (weights.size() != model_size(n_classes, data.dim))
        throw std::invalid_argument("weight vector does not match the model shape");
    std::vector<double> w = weights;
    if (epochs == 0 || lr == 0.0 || data.count == 0) return w;

    Rng rng(stream_seed);
    std::vector<int> order(static_cast<std::size_t>(data.count));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> probs(static_cast<std::size_t>(n_classes));
    std::vector<double> grad(w.size());
    const int dim = data.dim;

    for (int e = 0; e < epochs; ++e) {
        rng.shuffle(order);
        for (int start = 0; start < data.count; start += minibatch) {
            const int stop = std::min(start + minibatch, data.count);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (int b = start; b < stop; ++b) {
                const double* x = &data.features[static_cast<std::size_t>(order[b]) * dim];
                softmax_probs(w, x, n_classes, dim, probs);
                const int y = data.labels[order[b]];
                for (int c = 0; c < n_classes; ++c) {
                    const double delta = probs[c] - (c == y ? 1.0 : 0.0);
                    double* grow = &grad[static_cast<std::size_t>(c) * (dim + 1)];
                    for (int j = 0; j < dim; ++j) grow[j] += delta * x[j];
                    grow[dim] += delta;
                }
            }
            const double step = lr / (stop - start);
            for (std::size_t j = 0; j < w.size(); ++j) w[j] -= step * grad[j];
        }
        for (double v : w) {
            if (!std::isfinite(v))
                throw std::runtime_error("local update diverged at client " +
                                         std::to_string(client_id));
        }
    }
    return w;
}

std::vector<double> global_aggregate(const std::vector<ModelUpdate>& updates,
                                     const std::vector<double>& current, double eta) {
    if (updates.empty()) throw std::invalid_argument("aggregation needs at least one update");
    double total = 0.0;
    for (const auto& u : updates) total += u.samples;
    if (!(total > 0.0)) throw std::invalid_argument("aggregation saw zero total samples");

    std::vector<double> avg(current.size(), 0.0);
    for (const auto& u : updates) {
        if (u.weights.size() != current.size())
            throw std::invalid_argument("update size mismatch in aggregation");
        const double w = u.samples / total;
        for (std::size_t j = 0; j < avg.size(); ++j) avg[j] += w * u.weights[j];
    }
    std::vector<double> out(current.size());
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = current[j] + eta * (avg[j] - current[j]);
    return out;
}

std::uint64_t fl_local_stream_seed(std::uint64_t seed, int model_version, int client_id) {
    return derive_seed(seed, 0x1000000ULL + static_cast<std::uint64_t>(model_version) * 4096ULL +
                                 static_cast<std::uint64_t>(client_id));
}

namespace {

// Global objective: dataset-size-weighted mean of client losses.
double global_training_loss(const std::vector<double>& w, const SyntheticTask& task,
                            int n_classes) {
    double total = 0.0, loss = 0.0;
    for (const auto& ds : task.clients) {
        loss += ds.count * dataset_loss(w, ds, n_classes);
        total += ds.count;
    }
    return loss / total;
}

void validate_runtime_inputs(const FLConfig& cfg, const SyntheticTask& task,
                             const ChainSetup& setup) {
    cfg.validate();
    setup.radio.validate();
    if (static_cast<int>(task.clients.size()) != cfg.clients)
        throw std::invalid_argument("task partition count does not match fl clients");
    if (static_cast<int>(setup.profiles.size()) != cfg.clients)
        throw std::invalid_argument("client profile count does not match fl clients");
}

long long delay_model_params(const ChainSetup& setup, const SyntheticTask& task) {
    if (setup.model_params_for_delay > 0) return setup.model_params_for_delay;
    return static_cast<long long>(model_size(task.n_classes, task.dim));
}

}  // namespace

std::vector<FLRoundRecord> run_s_flchain(const FLConfig& cfg, const SyntheticTask& task,
                                         const ChainSetup& setup, std::uint64_t seed) {
    validate_runtime_inputs(cfg, task, setup);
    const int K = cfg.clients;
    const P2PParams p2p{setup.chain.p2p_capacity_bps, setup.chain.miners};
    const long long params = delay_model_params(setup, task);

    // Per-round delay structure is round-invariant in the synchronous case.
    const double bf = sync_block_fill_delay(setup.profiles, cfg.local_epochs, setup.radio,
                                            setup.chain);
    const double bg = 1.0 / setup.chain.mining_rate;
    const double bp = block_propagation_delay(K, setup.chain, p2p);
    const double agg = aggregation_delay(K, params, setup.aggregator_clock_hz,
                                         setup.cycles_per_accumulate);
    double bd = 0.0;
    for (const auto& c : setup.profiles) bd += block_download_delay(c, K, setup.radio, setup.chain);
    bd /= K;
    const double round_time =
        (bf + bg + bp) * fork_inflation(setup.chain.mining_rate, setup.chain.miners, bp) + agg +
        bd;

    GlobalModel model{zero_model(task.n_classes, task.dim), 0};
    double prev_loss = global_training_loss(model.weights, task, task.n_classes);
    double wall = 0.0;
    std::vector<FLRoundRecord> trajectory;
    std::vector<int> everyone(static_cast<std::size_t>(K));
    std::iota(everyone.begin(), everyone.end(), 0);

    for (int t = 1; t <= cfg.max_rounds; ++t) {
        std::vector<ModelUpdate> updates;
        updates.reserve(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k) {
            ModelUpdate u;
            u.client_id = k;
            u.samples = static_cast<double>(task.clients[k].count);
            u.weights = local_update(model.weights, task.clients[k], task.n_classes,
                                     cfg.local_epochs, cfg.minibatch, cfg.lr_local,
                                     fl_local_stream_seed(seed, t, k), k);
            updates.push_back(std::move(u));
        }
        model.weights = global_aggregate(updates, model.weights, cfg.lr_global);
        model.round = t;
        if (setup.weight_trace) setup.weight_trace->push_back(model.weights);
        wall += round_time;

        FLRoundRecord rec;
        rec.round = t;
        rec.participants = everyone;
        rec.wall_clock_s = wall;
        rec.eval_accuracy = dataset_accuracy(model.weights, task.eval, task.n_classes);
        rec.eval_loss = dataset_loss(model.weights, task.eval, task.n_classes);
        trajectory.push_back(std::move(rec));

        const double loss = global_training_loss(model.weights, task, task.n_classes);
        if (std::abs(loss - prev_loss) <= cfg.tolerance) break;
        prev_loss = loss;
    }
    return trajectory;
}

std::vector<FLRoundRecord> run_a_flchain(const FLConfig& cfg, const SyntheticTask& task,
                                         const ChainSetup& setup, std::uint64_t seed) {
    validate_runtime_inputs(cfg, task, setup);
    const int K = cfg.clients;
    const int block_size = static_cast<int>(std::ceil(cfg.participation * K));
    const P2PParams p2p{setup.chain.p2p_capacity_bps, setup.chain.miners};
    const long long params = delay_model_params(setup, task);
    const double tau = setup.chain.timeout_s;

    // Per-client constant legs of one compute/submit cycle.
    std::vector<double> dl(static_cast<std::size_t>(K)), cycle(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        const auto& c = setup.profiles[k];
        dl[k] = block_download_delay(c, block_size, setup.radio, setup.chain);
        cycle[k] = compute_local_delay(c, cfg.local_epochs) +
                   tx_upload_delay(c, setup.radio, setup.chain);
    }

    struct Submission {
        double time = 0.0;
        int client = 0;
        std::vector<double> weights;
    };

    GlobalModel model{zero_model(task.n_classes, task.dim), 0};
    double prev_loss = global_training_loss(model.weights, task, task.n_classes);
    std::vector<FLRoundRecord> trajectory;

    // Every client trains on the freshly published global model; an update
    // left pending when a block seals stays queued for the next block, so it
    // is aggregated at most one block stale.
    std::vector<Submission> pending;
    pending.reserve(static_cast<std::size_t>(K));
    auto submit = [&](int k, double start_time) {
        Submission s;
        s.client = k;
        s.time = start_time + cycle[k];
        s.weights = local_update(model.weights, task.clients[k], task.n_classes,
                                 cfg.local_epochs, cfg.minibatch, cfg.lr_local,
                                 fl_local_stream_seed(seed, model.round + 1, k), k);
        pending.push_back(std::move(s));
    };
    for (int k = 0; k < K; ++k) submit(k, 0.0);  // initial model is known at t = 0

    double block_end = 0.0;
    for (int t = 1; t <= cfg.max_rounds; ++t) {
        std::stable_sort(pending.begin(), pending.end(), [](const Submission& a, const Submission& b) {
            return a.time != b.time ? a.time < b.time : a.client < b.client;
        });

        // Seal once block_size updates are in, or when the timer expires
        // (whichever comes first; an empty pool waits for one submission).
        const double round_start = block_end;
        std::size_t take = std::min<std::size_t>(pending.size(), static_cast<std::size_t>(block_size));
        double seal_time = std::max(round_start, pending[take - 1].time);
        if (tau != kInfinity) {
            const double timer_at = round_start + tau;
            if (timer_at < seal_time) {
                std::size_t by_timer = 0;
                while (by_timer < pending.size() && pending[by_timer].time <= timer_at) ++by_timer;
                if (by_timer == 0) {
                    take = 1;
                    seal_time = pending[0].time;  // wait branch: first arrival seals
                } else {
                    take = by_timer;
                    seal_time = timer_at;
                }
            }
        }

        std::vector<ModelUpdate> updates;
        std::vector<int> participants;
        updates.reserve(take);
        std::vector<Submission> block(pending.begin(), pending.begin() + take);
        pending.erase(pending.begin(), pending.begin() + take);
        std::sort(block.begin(), block.end(), [](const Submission& a, const Submission& b) {
            return a.client < b.client;
        });
        for (auto& s : block) {
            ModelUpdate u;
            u.client_id = s.client;
            u.samples = static_cast<double>(task.clients[s.client].count);
            u.weights = std::move(s.weights);
            updates.push_back(std::move(u));
            participants.push_back(s.client);
        }

        const int n_tx = static_cast<int>(take);
        const double bf = seal_time - round_start;
        const double bg = 1.0 / setup.chain.mining_rate;
        const double bp = block_propagation_delay(n_tx, setup.chain, p2p);
        const double agg = aggregation_delay(n_tx, params, setup.aggregator_clock_hz,
                                             setup.cycles_per_accumulate);
        block_end = round_start +
                    (bf + bg + bp) *
                        fork_inflation(setup.chain.mining_rate, setup.chain.miners, bp) +
                    agg;

        model.weights = global_aggregate(updates, model.weights, cfg.lr_global);
        model.round = t;
        if (setup.weight_trace) setup.weight_trace->push_back(model.weights);

        double bd_mean = 0.0;
        for (int k : participants) bd_mean += dl[k];
        bd_mean /= static_cast<double>(participants.size());

        FLRoundRecord rec;
        rec.round = t;
        rec.participants = participants;
        rec.wall_clock_s = block_end + bd_mean;
        rec.eval_accuracy = dataset_accuracy(model.weights, task.eval, task.n_classes);
        rec.eval_loss = dataset_loss(model.weights, task.eval, task.n_classes);
        trajectory.push_back(std::move(rec));

        // Unblocked clients download the new block and start the next cycle.
        for (int k : participants) submit(k, block_end + dl[k]);

        const double loss = global_training_loss(model.weights, task, task.n_classes);
        if (std::abs(loss - prev_loss) <= cfg.tolerance) break;
        prev_loss = loss;
    }
    return trajectory;
}

double efficiency(const std::vector<FLRoundRecord>& trajectory) {
    if (trajectory.empty()) throw std::invalid_argument("efficiency needs a nonempty trajectory");
    double acc = 0.0;
    for (const auto& r : trajectory) acc += r.eval_accuracy;
    acc /= static_cast<double>(trajectory.size());
    const double mean_iter = trajectory.back().wall_clock_s / static_cast<double>(trajectory.size());
    return acc / mean_iter;
}

void write_trajectory_csv(const std::vector<FLRoundRecord>& trajectory, std::ostream& out) {
    out << "round,wall_clock_s,participants,accuracy,loss\n";
    char buf[64];
    for (const auto& r : trajectory) {
        out << r.round << ',';
        std::snprintf(buf, sizeof buf, "%.10g", r.wall_clock_s);
        out << buf << ',';
        for (std::size_t i = 0; i < r.participants.size(); ++i) {
            if (i) out << ';';
            out << r.participants[i];
        }
        std::snprintf(buf, sizeof buf, "%.10g", r.eval_accuracy);
        out << ',' << buf;
        std::snprintf(buf, sizeof buf, "%.10g", r.eval_loss);
        out << ',' << buf << '\n';
    }
}

}  // namespace flchain

#include "flchain/network_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace flchain {

void RadioParams::validate() const {
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("radio bandwidth must be > 0");
    if (!(pathloss_exp > 0.0)) throw std::invalid_argument("path-loss exponent must be > 0");
    if (channels < 1) throw std::invalid_argument("channel count must be >= 1");
}

void P2PParams::validate() const {
    if (!(capacity_bps > 0.0)) throw std::invalid_argument("P2P capacity must be > 0");
    if (miners < 1) throw std::invalid_argument("miner count must be >= 1");
}

double path_loss_db(double distance_m, const RadioParams& rp) {
    if (!(distance_m > 0.0)) throw std::invalid_argument("distance must be > 0");
    return rp.tx_power_dbm - rp.ref_loss_db + 10.0 * rp.pathloss_exp * std::log10(distance_m) +
           rp.shadowing_db / 2.0 + (distance_m / 10.0) * (rp.obstacles_db / 2.0);
}

double received_power_dbm(double distance_m, const RadioParams& rp) {
    return rp.tx_power_dbm + rp.antenna_gain_dbi - path_loss_db(distance_m, rp);
}

double sinr(double signal_mw, const std::vector<double>& interferers_mw, double noise_mw) {
    if (!(noise_mw > 0.0)) throw std::invalid_argument("noise power must be > 0");
    if (signal_mw < 0.0) throw std::invalid_argument("signal power must be >= 0");
    double denom = noise_mw;
    for (double p : interferers_mw) {
        if (p < 0.0) throw std::invalid_argument("interferer power must be >= 0");
        denom += p;
    }
    return signal_mw / denom;
}

double data_rate(double bandwidth_hz, double sinr_linear) {
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth must be > 0");
    if (sinr_linear < 0.0) throw std::invalid_argument("SINR must be >= 0");
    return bandwidth_hz * std::log2(1.0 + sinr_linear);
}

LinkBudget client_link_budget(double distance_m, const RadioParams& rp) {
    LinkBudget lb;
    lb.distance_m = distance_m;
    const double rx_mw = db_to_linear(received_power_dbm(distance_m, rp));
    const double noise_mw = db_to_linear(rp.noise_dbm);
    lb.sinr = sinr(rx_mw, {}, noise_mw);
    lb.rate_bps = data_rate(rp.bandwidth_hz, lb.sinr);
    return lb;
}

double fork_probability(double mining_rate, int miners, double propagation_delay_s) {
    if (!(mining_rate > 0.0)) throw std::invalid_argument("mining rate must be > 0");
    if (miners < 1) throw std::invalid_argument("miner count must be >= 1");
    if (propagation_delay_s < 0.0) throw std::invalid_argument("propagation delay must be >= 0");
    return -std::expm1(-mining_rate * (miners - 1) * propagation_delay_s);
}

double block_propagation_delay(int n_tx, const BlockchainParams& bp, const P2PParams& p2p) {
    p2p.validate();
    if (n_tx < 0) throw std::invalid_argument("transaction count must be >= 0");
    return (bp.block_header_bits + n_tx * bp.transaction_size_bits) / p2p.capacity_bps;
}

namespace {

double require_rate(const ClientProfile& client, const RadioParams& rp) {
    const double rate = client_link_budget(client.distance_m, rp).rate_bps;
    if (!(rate > 0.0))
        throw std::runtime_error("client " + std::to_string(client.id) +
                                 " is unreachable: zero link rate");
    return rate;
}

}  // namespace

double tx_upload_delay(const ClientProfile& client, const RadioParams& rp,
                       const BlockchainParams& bp) {
    return bp.transaction_size_bits / require_rate(client, rp);
}

double block_download_delay(const ClientProfile& client, int n_tx, const RadioParams& rp,
                            const BlockchainParams& bp) {
    return (bp.block_header_bits + n_tx * bp.transaction_size_bits) / require_rate(client, rp);
}

}  // namespace flchain

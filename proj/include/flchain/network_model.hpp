// Radio-link budget for the client-miner hops and the PoW fork model.
//
// The path-loss expression is kept exactly as the deployment model states
// it, including the transmit-power term inside the loss and the halved
// shadowing/obstacle margins applied deterministically; received power is
// then P_t + G - PL(d) so the default geometry produces usable SINRs.
#pragma once

#include <cmath>
#include <vector>

#include "flchain/types.hpp"

namespace flchain {

struct RadioParams {
    double bandwidth_hz = 180e3;      // b, per FDMA channel
    double carrier_hz = 2e9;          // F_c, metadata only
    double tx_power_dbm = 20.0;       // P_t
    double antenna_gain_dbi = 0.0;    // G
    double ref_loss_db = 5.0;         // PL_0
    double pathloss_exp = 4.4;        // alpha
    double shadowing_db = 9.5;        // sigma
    double obstacles_db = 30.0;       // zeta, per 10 m
    double noise_dbm = -95.0;         // sigma_0
    int channels = 8;                 // P

    void validate() const;
};

struct LinkBudget {
    double distance_m = 0.0;
    double sinr = 0.0;       // linear
    double rate_bps = 0.0;
};

struct P2PParams {
    double capacity_bps = 5e6;  // C_P2P
    int miners = 10;            // M

    void validate() const;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// Deterministic loss at distance d (metres), in dB. Throws on d <= 0.
double path_loss_db(double distance_m, const RadioParams& rp);

// Received power over one hop, in dBm.
double received_power_dbm(double distance_m, const RadioParams& rp);

// SINR from linear-unit powers (mW): signal / (sum of interferers + noise).
double sinr(double signal_mw, const std::vector<double>& interferers_mw, double noise_mw);

// Shannon rate over bandwidth b at linear SINR gamma.
double data_rate(double bandwidth_hz, double sinr_linear);

// Full per-client budget on its FDMA channel; intra-cell interference is
// zero by channel orthogonality.
LinkBudget client_link_budget(double distance_m, const RadioParams& rp);

// p_fork = 1 - exp(-lambda (M-1) delta_bp)
double fork_probability(double mining_rate, int miners, double propagation_delay_s);

// Single-hop broadcast of a block carrying n_tx transactions.
double block_propagation_delay(int n_tx, const BlockchainParams& bp, const P2PParams& p2p);

// Transaction upload / block download over the client's radio link.
// Throw std::runtime_error when the client link has zero rate.
double tx_upload_delay(const ClientProfile& client, const RadioParams& rp,
                       const BlockchainParams& bp);
double block_download_delay(const ClientProfile& client, int n_tx, const RadioParams& rp,
                            const BlockchainParams& bp);

}  // namespace flchain

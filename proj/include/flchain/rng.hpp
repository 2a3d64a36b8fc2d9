// Deterministic random number utilities shared by the simulation modules.
//
// All stochastic components draw through this wrapper instead of the
// implementation-defined std distributions, so a given seed produces the
// same event stream on every platform and every rerun.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace flchain {

// splitmix64; used to derive independent sub-stream seeds from a base seed.
inline std::uint64_t split_mix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t s = base ^ (0x632be59bd9b4e019ULL * (stream + 1));
    std::uint64_t a = split_mix64(s);
    std::uint64_t b = split_mix64(s);
    return a ^ (b << 1);
}

// xoshiro256** by Blackman & Vigna (public domain reference implementation).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0x9e3779b97f4a7c15ULL) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : state_) w = split_mix64(sm);
        have_gauss_ = false;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as a log() argument.
    double uniform01_pos() { return 1.0 - uniform01(); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    double exponential(double rate) { return -std::log(uniform01_pos()) / rate; }

    double normal() {
        if (have_gauss_) {
            have_gauss_ = false;
            return gauss_;
        }
        // Marsaglia polar method.
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        gauss_ = v * f;
        have_gauss_ = true;
        return u * f;
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Lemire-style rejection-free-enough bound; n is tiny in this codebase.
        return next_u64() % n;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4]{};
    double gauss_ = 0.0;
    bool have_gauss_ = false;
};

}  // namespace flchain

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "aoii/model.hpp"
#include "aoii/threshold.hpp"

namespace aoii {

/// splitmix64: seed expander and per-run stream derivation.
struct SplitMix64 {
    std::uint64_t state;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

/// xoshiro256**: the simulation generator. Seeded through splitmix64, so any
/// 64-bit seed yields a full state; sub-streams are derived as
/// derive_stream(seed, index) by callers that fan out runs.
class Xoshiro256ss {
public:
    explicit Xoshiro256ss(std::uint64_t seed) {
        SplitMix64 sm{seed};
        for (auto& word : s_) word = sm.next();
    }
    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }
    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return (next() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 sm{seed ^ (0xd1b54a32d192ed03ULL * (index + 1))};
    return sm.next();
}

struct SimConfig {
    long long slots = 10'000'000;
    std::uint64_t seed = 1;
    long long warmup = 10'000;
    int batch_count = 30;
    int visit_freq_cap = 127;  // track idle-state frequencies for Delta <= cap
};

struct SimResult {
    double mean_aoii = 0.0;
    double std_error = 0.0;
    std::vector<double> visit_freq;     // idle-state frequency, Delta = 0..cap
    std::vector<double> visit_freq_se;  // batch-means standard error per Delta
    long long transmissions = 0;
    long long deliveries = 0;
    long long discards = 0;
    long long slots = 0;
    long long measured_slots = 0;
    std::uint64_t seed = 0;
    std::string rng;  // generator identifier

    friend bool operator==(const SimResult&, const SimResult&) = default;
};

/// Policy hook: transmit decision given the current AoII at an idle slot.
using DecisionFn = std::function<bool(long long delta)>;

/// Slotted-time simulation of the full system under a decision rule.
/// Per-slot draw order is fixed (delay draws at a transmission start, then
/// the source flip), so a given seed reproduces the run bit for bit.
SimResult simulate(const SourceModel& src, const DelayModel& d,
                   const DecisionFn& decide, const SimConfig& cfg);
SimResult simulate(const SourceModel& src, const DelayModel& d,
                   const ThresholdPolicy& policy, const SimConfig& cfg);

/// Monte Carlo estimate of the transmit-epoch cost C(delta0, 1): mean and
/// batch-free standard error over independent single-transmission epochs.
std::pair<double, double> simulate_epoch_cost(const SourceModel& src,
                                              const DelayModel& d, int delta0,
                                              long long trials,
                                              std::uint64_t seed = 0x5eedULL);

}  // namespace aoii

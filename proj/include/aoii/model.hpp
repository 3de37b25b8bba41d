#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace aoii {

/// Two-state symmetric Markov source with per-slot state-flip probability p.
/// Only 0 < p <= 1/2 is supported; in that regime the receiver-side estimate
/// "last received update" is optimal and the math below relies on it.
struct SourceModel {
    double p;
};

/// Validates p and returns the source model. Throws std::domain_error when
/// p <= 0 or p > 1/2.
SourceModel make_source(double p);

/// p^(t): probability that the source occupies its initial state again after
/// t slots. Closed form (1 + (1-2p)^t) / 2; p^(0) = 1.
double p_pow(const SourceModel& src, int t);

enum class DelayVariant {
    GuaranteedDelivery,  // delivery always happens within t_max slots
    DiscardAfterTmax,    // transmissions exceeding t_max slots are discarded
};

/// Transmission-time distribution: p_t = Pr(T = t) on t = 1..t_max, plus the
/// mass beyond t_max (p_tail) which is meaningful only under DiscardAfterTmax.
/// Immutable after construction; total mass is exactly 1 up to rounding.
class DelayModel {
public:
    DelayModel(std::vector<double> pmf, DelayVariant variant, double p_tail,
               double folded_mass);

    int t_max() const { return static_cast<int>(pmf_.size()) - 1; }
    DelayVariant variant() const { return variant_; }

    /// p_t for 1 <= t <= t_max.
    double pmf(int t) const { return pmf_[static_cast<std::size_t>(t)]; }
    /// P_t = sum_{k<=t} p_k for 0 <= t <= t_max.
    double cdf(int t) const { return cdf_[static_cast<std::size_t>(t)]; }
    /// Pr(T > t), accumulated from the tail so that survival(t_max) is exactly
    /// p_tail (exactly 0 under GuaranteedDelivery).
    double survival(int t) const { return surv_[static_cast<std::size_t>(t)]; }
    double p_tail() const { return p_tail_; }

    /// q_{t+1} = Pr(T > t+1 | transmission in progress for t slots).
    /// Exactly 0 at t = t_max-1 under GuaranteedDelivery. States whose
    /// survival mass is zero are unreachable; their rows use q = 0 so that
    /// every kernel row stays stochastic.
    double continue_prob(int t) const;

    /// Mass that construction folded into p_{t_max} (GuaranteedDelivery
    /// normalization of families with support beyond t_max). Zero otherwise.
    double folded_mass() const { return folded_mass_; }

private:
    std::vector<double> pmf_;   // index 0 unused (= 0)
    std::vector<double> cdf_;   // cdf_[t] = P_t
    std::vector<double> surv_;  // surv_[t] = Pr(T > t)
    DelayVariant variant_;
    double p_tail_;
    double folded_mass_;
};

/// Geometric transmission delay, p_t = (1-p_s)^{t-1} p_s. Under
/// GuaranteedDelivery the residual mass beyond t_max is folded into p_{t_max};
/// under DiscardAfterTmax it becomes p_tail. Rejects p_s outside [0, 1).
DelayModel make_delay_geometric(double p_s, int t_max, DelayVariant variant);

/// Zipf transmission delay, p_t = t^{-a} / sum_i i^{-a} on 1..t_max.
/// Always GuaranteedDelivery. Rejects a < 0.
DelayModel make_delay_zipf(double a, int t_max);

/// Two-point delay: half the mass at t = 1, half at t = t_max.
DelayModel make_delay_twopoint(int t_max);

/// Explicit PMF (p_1..p_{t_max}) plus optional tail mass. Renormalizes when
/// the raw total deviates from 1 by at most 1e-9 and rejects larger defects.
DelayModel make_delay_pmf(std::vector<double> pmf, DelayVariant variant,
                          double p_tail = 0.0);

/// ET: sum_t t p_t, plus t_max * p_tail under DiscardAfterTmax (a discarded
/// transmission still occupies the channel for t_max slots).
double expected_transmission_time(const DelayModel& d);

enum class ChannelInfo : int {
    Idle = -1,      // no transmission in progress
    BusySame = 0,   // transmitting update equals the receiver's estimate
    BusyDiff = 1,   // transmitting update differs from the receiver's estimate
};

/// Full system state (Delta, t, i): AoII in slots, elapsed transmission slots
/// (0 = idle), channel info. i == Idle if and only if t == 0.
struct SystemState {
    int delta = 0;
    int t = 0;
    ChannelInfo i = ChannelInfo::Idle;

    static SystemState idle(int delta) { return {delta, 0, ChannelInfo::Idle}; }
    static SystemState busy(int delta, int t, ChannelInfo info) {
        return {delta, t, info};
    }

    friend bool operator==(const SystemState&, const SystemState&) = default;
    friend auto operator<=>(const SystemState&, const SystemState&) = default;
};

/// Throws std::invalid_argument unless the triplet is internally consistent
/// and t < t_max.
void validate_state(const SystemState& s, int t_max);

std::string to_string(const SystemState& s);

}  // namespace aoii

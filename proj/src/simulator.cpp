#include "aoii/simulator.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace aoii {

namespace {

constexpr const char* kRngId = "xoshiro256** (splitmix64-seeded)";

// Delay draw. Under DiscardAfterTmax first decide delivered-vs-discarded by
// total mass, then the conditional delivery slot; returns 0 for a discard.
int draw_delay(const DelayModel& d, Xoshiro256ss& rng) {
    if (d.variant() == DelayVariant::DiscardAfterTmax) {
        const double u = rng.uniform01();
        if (u < d.p_tail()) return 0;
        const double target = rng.uniform01() * (1.0 - d.p_tail());
        double acc = 0.0;
        for (int t = 1; t < d.t_max(); ++t) {
            acc += d.pmf(t);
            if (target < acc) return t;
        }
        return d.t_max();
    }
    const double target = rng.uniform01();
    double acc = 0.0;
    for (int t = 1; t < d.t_max(); ++t) {
        acc += d.pmf(t);
        if (target < acc) return t;
    }
    return d.t_max();
}

}  // namespace

SimResult simulate(const SourceModel& src, const DelayModel& d,
                   const DecisionFn& decide, const SimConfig& cfg) {
    if (cfg.warmup < 0 || cfg.slots <= cfg.warmup) {
        throw std::invalid_argument("simulation requires slots > warmup >= 0");
    }
    if (cfg.batch_count < 2) {
        throw std::invalid_argument("simulation requires batch_count >= 2");
    }
    const long long measured = cfg.slots - cfg.warmup;
    const long long batch_len = measured / cfg.batch_count;
    if (batch_len <= 0) {
        throw std::invalid_argument("too few measured slots for the batch count");
    }

    Xoshiro256ss rng(cfg.seed);
    const double p = src.p;
    const int t_max = d.t_max();
    const int cap = cfg.visit_freq_cap;

    // Source state and the receiver estimate are binary; AoII only needs the
    // mismatch indicator, but both sides are tracked to keep the ACK bookkeeping
    // honest.
    int source = 0;
    int estimate = 0;
    // Transmitter's view of the estimate, updated by instantaneous ACKs.
    [[maybe_unused]] int tx_view = 0;
    long long delta = 0;

    bool busy = false;
    int tx_value = 0;
    int elapsed = 0;
    int delivery_at = 0;  // 0 means the draw was a discard

    SimResult res;
    res.slots = cfg.slots;
    res.measured_slots = batch_len * cfg.batch_count;
    res.seed = cfg.seed;
    res.rng = kRngId;

    const int nbatch = cfg.batch_count;
    std::vector<double> batch_mean(static_cast<std::size_t>(nbatch), 0.0);
    std::vector<std::vector<double>> batch_visits(
        static_cast<std::size_t>(nbatch),
        std::vector<double>(static_cast<std::size_t>(cap) + 1, 0.0));

    double batch_sum = 0.0;
    long long batch_fill = 0;
    int batch_idx = 0;

    for (long long k = 0; k < cfg.slots; ++k) {
        const bool measure = k >= cfg.warmup && batch_idx < nbatch;
        if (measure) {
            batch_sum += static_cast<double>(delta);
            if (!busy && delta <= cap) {
                batch_visits[static_cast<std::size_t>(batch_idx)]
                            [static_cast<std::size_t>(delta)] += 1.0;
            }
            if (++batch_fill == batch_len) {
                batch_mean[static_cast<std::size_t>(batch_idx)] =
                    batch_sum / static_cast<double>(batch_len);
                batch_sum = 0.0;
                batch_fill = 0;
                ++batch_idx;
            }
        }

        // Decision at an idle slot; the transmitted update is this slot's
        // source value.
        if (!busy && decide(delta)) {
            busy = true;
            tx_value = source;
            elapsed = 0;
            delivery_at = draw_delay(d, rng);
            ++res.transmissions;
        }

        // Advance one slot boundary: delivery/discard first, then the source
        // move, then the AoII update.
        if (busy) {
            ++elapsed;
            if (elapsed == delivery_at) {
                estimate = tx_value;
                tx_view = tx_value;  // instantaneous ACK
                assert(tx_view == estimate);
                busy = false;
                ++res.deliveries;
            } else if (delivery_at == 0 && elapsed == t_max) {
                busy = false;  // discarded, estimate unchanged
                ++res.discards;
            }
        }
        if (rng.uniform01() < p) source ^= 1;
        delta = (source != estimate) ? delta + 1 : 0;
    }

    double mean = 0.0;
    for (double b : batch_mean) mean += b;
    mean /= nbatch;
    double var = 0.0;
    for (double b : batch_mean) var += (b - mean) * (b - mean);
    res.mean_aoii = mean;
    res.std_error = std::sqrt(var / (static_cast<double>(nbatch) *
                                     static_cast<double>(nbatch - 1)));

    res.visit_freq.assign(static_cast<std::size_t>(cap) + 1, 0.0);
    res.visit_freq_se.assign(static_cast<std::size_t>(cap) + 1, 0.0);
    for (int delta_i = 0; delta_i <= cap; ++delta_i) {
        double fmean = 0.0;
        for (int bi = 0; bi < nbatch; ++bi) {
            fmean += batch_visits[static_cast<std::size_t>(bi)]
                                 [static_cast<std::size_t>(delta_i)] /
                     static_cast<double>(batch_len);
        }
        fmean /= nbatch;
        double fvar = 0.0;
        for (int bi = 0; bi < nbatch; ++bi) {
            const double f = batch_visits[static_cast<std::size_t>(bi)]
                                         [static_cast<std::size_t>(delta_i)] /
                             static_cast<double>(batch_len);
            fvar += (f - fmean) * (f - fmean);
        }
        res.visit_freq[static_cast<std::size_t>(delta_i)] = fmean;
        res.visit_freq_se[static_cast<std::size_t>(delta_i)] =
            std::sqrt(fvar / (static_cast<double>(nbatch) *
                              static_cast<double>(nbatch - 1)));
    }
    return res;
}

SimResult simulate(const SourceModel& src, const DelayModel& d,
                   const ThresholdPolicy& policy, const SimConfig& cfg) {
    return simulate(
        src, d, [&policy](long long delta) {
            return !policy.is_infinite() && delta >= policy.tau();
        },
        cfg);
}

std::pair<double, double> simulate_epoch_cost(const SourceModel& src,
                                              const DelayModel& d, int delta0,
                                              long long trials,
                                              std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    Xoshiro256ss rng(seed);
    const double p = src.p;
    const int t_max = d.t_max();

    double sum = 0.0, sumsq = 0.0;
    for (long long trial = 0; trial < trials; ++trial) {
        const int delivery_at = draw_delay(d, rng);
        const int length = (delivery_at == 0) ? t_max : delivery_at;
        // Estimate stays fixed during the epoch; only the mismatch matters.
        long long delta = delta0;
        bool mismatch = delta0 > 0;
        double cost = static_cast<double>(delta);
        for (int slot = 1; slot < length; ++slot) {
            if (rng.uniform01() < p) mismatch = !mismatch;
            delta = mismatch ? delta + 1 : 0;
            cost += static_cast<double>(delta);
        }
        sum += cost;
        sumsq += cost * cost;
    }
    const double mean = sum / static_cast<double>(trials);
    double variance =
        (sumsq - static_cast<double>(trials) * mean * mean) /
        std::max<double>(1.0, static_cast<double>(trials - 1));
    if (variance < 0.0) variance = 0.0;
    const double se = std::sqrt(variance / static_cast<double>(trials));
    return {mean, se};
}

}  // namespace aoii

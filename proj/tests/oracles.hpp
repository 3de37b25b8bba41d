// Test-only oracles: brute-force and enumeration references kept independent
// of the library's analytic paths.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <vector>

#include "aoii/kernel.hpp"
#include "aoii/model.hpp"
#include "aoii/threshold.hpp"

namespace oracle {

// Entry (1,1) of the t-th power of the source transition matrix.
inline double p_pow_matrix(double p, int t) {
    double a = 1.0, b = 0.0;  // current distribution over {start, other}
    for (int i = 0; i < t; ++i) {
        const double na = a * (1.0 - p) + b * p;
        const double nb = a * p + b * (1.0 - p);
        a = na;
        b = nb;
    }
    return a;
}

// Composes single-step kernel rows from (delta, 0, idle) under the first
// action until all mass is back on idle states: the decision-epoch
// distribution over the next idle AoII.
inline std::map<int, double> epoch_dist_walk(const aoii::SourceModel& src,
                                             const aoii::DelayModel& d,
                                             int delta, aoii::Action action) {
    using aoii::ChannelInfo;
    using aoii::SystemState;
    std::map<SystemState, double> frontier;
    std::map<int, double> absorbed;
    frontier[SystemState::idle(delta)] = 1.0;
    bool first = true;
    while (!frontier.empty()) {
        std::map<SystemState, double> next;
        for (const auto& [s, mass] : frontier) {
            if (!first && s.i == ChannelInfo::Idle) {
                absorbed[s.delta] += mass;
                continue;
            }
            const aoii::Action a = first ? action : aoii::Action::Idle;
            for (const auto& [ns, prob] : aoii::step_kernel(src, d, {s, a})) {
                next[ns] += mass * prob;
            }
        }
        first = false;
        frontier.swap(next);
        bool any_busy = false;
        for (const auto& [s, mass] : frontier) {
            if (s.i != ChannelInfo::Idle) any_busy = true;
        }
        if (!any_busy) {
            for (const auto& [s, mass] : frontier) absorbed[s.delta] += mass;
            break;
        }
    }
    return absorbed;
}

// Exhaustive source-path enumeration of one transmission epoch of known
// length: the update starts at slot 0 with value equal to the source; the
// estimate is fixed during slots 1..length-1; at slot `length` the estimate
// either flips to the transmitted value (delivery from a mismatched start),
// stays (delivery from a matched start), or stays (discard).
struct EpochPathResult {
    std::map<int, double> dist;   // AoII at the next idle slot
    double expected_sum = 0.0;    // summed AoII over slots 0..length-1
};

inline EpochPathResult epoch_paths(const aoii::SourceModel& src, int delta,
                                   int length, bool delivered) {
    EpochPathResult out;
    const double p = src.p;
    const long paths = 1L << length;
    for (long bits = 0; bits < paths; ++bits) {
        double prob = 1.0;
        bool mismatch = delta > 0;
        long long aoii = delta;
        double sum = delta;
        // slots 1..length-1: transmission in progress
        for (int slot = 1; slot < length; ++slot) {
            const bool flip = (bits >> (slot - 1)) & 1;
            prob *= flip ? p : 1.0 - p;
            if (flip) mismatch = !mismatch;
            aoii = mismatch ? aoii + 1 : 0;
            sum += static_cast<double>(aoii);
        }
        // slot `length`: delivery or discard, then the source moves
        const bool flip = (bits >> (length - 1)) & 1;
        prob *= flip ? p : 1.0 - p;
        if (delivered && delta > 0) mismatch = !mismatch;  // estimate flips
        if (flip) mismatch = !mismatch;
        aoii = mismatch ? aoii + 1 : 0;
        out.dist[static_cast<int>(aoii)] += prob;
        out.expected_sum += prob * sum;
    }
    return out;
}

// Mixture of epoch_paths over the delay distribution: an independent
// rederivation of the epoch transition row.
inline std::map<int, double> epoch_dist_enum(const aoii::SourceModel& src,
                                             const aoii::DelayModel& d,
                                             int delta) {
    std::map<int, double> mix;
    for (int t = 1; t <= d.t_max(); ++t) {
        if (d.pmf(t) <= 0.0) continue;
        for (const auto& [to, prob] : epoch_paths(src, delta, t, true).dist) {
            mix[to] += d.pmf(t) * prob;
        }
    }
    if (d.variant() == aoii::DelayVariant::DiscardAfterTmax && d.p_tail() > 0.0) {
        for (const auto& [to, prob] :
             epoch_paths(src, delta, d.t_max(), false).dist) {
            mix[to] += d.p_tail() * prob;
        }
    }
    return mix;
}

// Expected AoII exactly k slots after a transmission starts (transmission
// still in progress): enumerate the k source moves.
inline double aoii_after_k_enum(const aoii::SourceModel& src, int delta, int k) {
    const double p = src.p;
    const long paths = 1L << k;
    double expect = 0.0;
    for (long bits = 0; bits < paths; ++bits) {
        double prob = 1.0;
        bool mismatch = delta > 0;
        long long aoii = delta;
        for (int slot = 1; slot <= k; ++slot) {
            const bool flip = (bits >> (slot - 1)) & 1;
            prob *= flip ? p : 1.0 - p;
            if (flip) mismatch = !mismatch;
            aoii = mismatch ? aoii + 1 : 0;
        }
        expect += prob * static_cast<double>(aoii);
    }
    return expect;
}

// Direct stationary solve of the lumped idle-state balance equations,
// truncated at delta_big (tail mass beyond it is dropped). Returns
// pi_0..pi_delta_big.
inline std::vector<double> stationary_truncated_balance(
    const aoii::SourceModel& src, const aoii::DelayModel& d, int tau,
    int delta_big) {
    using aoii::Action;
    const int n = delta_big + 1;
    const double et = aoii::expected_transmission_time(d);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    // balance rows for delta = 0..delta_big-1
    for (int to = 0; to < delta_big; ++to) {
        A(to, to) += 1.0;
        for (int from = 0; from <= delta_big; ++from) {
            const Action a = from >= tau ? Action::Transmit : Action::Idle;
            A(to, from) -= aoii::epoch_prob(src, d, from, to, a);
        }
    }
    // occupancy identity
    for (int from = 0; from <= delta_big; ++from) {
        A(delta_big, from) = from < tau ? 1.0 : et;
    }
    b(delta_big) = 1.0;
    Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
    return std::vector<double>(x.data(), x.data() + n);
}

// Extends a solved stationary head beyond omega with the tail recursion
// pi_D = sum_{i=D-t_max}^{D-1} P_{i,D}(1) pi_i and returns pi_0..pi_delta_big.
inline std::vector<double> extend_stationary_tail(
    const aoii::SourceModel& src, const aoii::DelayModel& d,
    const aoii::StationarySolution& sol, int delta_big) {
    std::vector<double> pi(sol.pi.begin(), sol.pi.end());
    pi.resize(static_cast<std::size_t>(delta_big) + 1, 0.0);
    for (int delta = sol.omega(); delta <= delta_big; ++delta) {
        double v = 0.0;
        for (int i = std::max(0, delta - d.t_max()); i <= delta - 1; ++i) {
            v += aoii::epoch_prob(src, d, i, delta, aoii::Action::Transmit) *
                 pi[static_cast<std::size_t>(i)];
        }
        pi[static_cast<std::size_t>(delta)] = v;
    }
    return pi;
}

}  // namespace oracle

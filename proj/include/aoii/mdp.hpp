#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoii/cost.hpp"
#include "aoii/kernel.hpp"
#include "aoii/model.hpp"
#include "aoii/threshold.hpp"

namespace aoii {

/// AoII-truncated copy of the full decision process: Delta is capped at m and
/// the overflowing transition mass is redirected to the boundary state with
/// the same (t, i). States: (Delta <= m) x ({idle} + {1..t_max-1} x {same,diff}).
class TruncatedMdp {
public:
    TruncatedMdp(SourceModel src, DelayModel d, int m);

    struct Entry {
        int next;
        double prob;
    };
    using Row = std::vector<Entry>;

    int m() const { return m_; }
    int t_max() const { return delay_.t_max(); }
    int num_states() const { return num_states_; }
    const SourceModel& source() const { return src_; }
    const DelayModel& delay() const { return delay_; }

    int index_of(const SystemState& s) const;
    SystemState state_at(int idx) const;
    bool is_idle(int idx) const { return idx % per_delta_ == 0; }
    int idle_index(int delta) const { return delta * per_delta_; }

    double cost(int idx) const { return state_at(idx).delta; }

    /// Kernel row for (state, action). Transmit rows exist for idle states only.
    const Row& row(int idx, Action a) const;

private:
    SourceModel src_;
    DelayModel delay_;
    int m_;
    int per_delta_;
    int num_states_;
    std::vector<Row> idle_rows_;      // action 0, all states
    std::vector<Row> transmit_rows_;  // action 1, indexed by Delta
};

/// Builds the truncated model. Requires m >= 2*t_max so the redirect region
/// stays clear of the structured part of the kernel.
TruncatedMdp build_truncated(const SourceModel& src, const DelayModel& d, int m);

/// Action table over the idle states (Delta, 0, Idle), Delta = 0..m. Busy
/// states carry no choice.
struct TabularPolicy {
    std::vector<Action> idle_action;

    static TabularPolicy threshold(int m, const ThresholdPolicy& policy);
    Action at(int delta) const { return idle_action[static_cast<std::size_t>(delta)]; }

    friend bool operator==(const TabularPolicy&, const TabularPolicy&) = default;
};

/// Smallest tau such that the policy transmits exactly at Delta >= tau over
/// Delta = 0..check_up_to; nullopt when the policy is not of threshold form.
/// A policy that never transmits in the range reports tau = check_up_to + 1.
std::optional<int> threshold_equivalent_tau(const TabularPolicy& policy,
                                            int check_up_to);

struct SolveResult {
    TabularPolicy policy;
    double theta = 0.0;      // span-midpoint estimate (RVI) / exact (PI)
    double theta_ref = 0.0;  // reference-state estimate
    double span = 0.0;       // final one-step span (RVI), 0 for PI
    std::vector<double> value;
    long iterations = 0;
    double residual = 0.0;  // final sweep delta (RVI) / evaluation defect (PI)
};

struct SolverOptions {
    double epsilon = 1e-9;
    long max_iter = 500000;
    bool parallel = true;  // OpenMP Bellman sweeps; serial path kept for tests
};

struct NonConvergenceError : std::runtime_error {
    NonConvergenceError(const std::string& what, double span_, long iterations_)
        : std::runtime_error(what), span(span_), iterations(iterations_) {}
    double span;
    long iterations;
};

/// Relative value iteration on the truncated model with reference state
/// (0, 0, Idle). Stops when the relative values move by at most epsilon;
/// throws NonConvergenceError (carrying the final span) past max_iter.
SolveResult rvi(const TruncatedMdp& mdp, const SolverOptions& opts = {});

struct PolicyEvalResult {
    std::vector<double> value;  // pinned: value at (0, 0, Idle) is 0
    double theta = 0.0;
    double residual = 0.0;
};

/// Solves the pinned average-cost evaluation system for a stationary policy.
/// Throws when the induced chain makes the system singular.
PolicyEvalResult policy_evaluation(const TruncatedMdp& mdp,
                                   const TabularPolicy& policy);

/// One greedy improvement step; ties break toward staying idle.
TabularPolicy policy_improvement(const TruncatedMdp& mdp,
                                 const std::vector<double>& value);

/// Policy iteration from an initial policy. The per-round average cost is
/// checked to be non-increasing; convergence is policy equality.
SolveResult policy_iteration(const TruncatedMdp& mdp,
                             const TabularPolicy& initial);

/// Max defect of the idle-state compacted optimality equation
/// V(Delta) + theta = min_a { C(Delta,a) - theta(a) + sum P_{Delta,.}(a) V(.) }
/// over Delta <= m - t_max, with theta(1) = (ET-1) theta. Small values certify
/// that the full-kernel solve agrees with the epoch-level recursion.
double compact_bellman_residual(const TruncatedMdp& mdp,
                                const SolveResult& solve);

/// Constant value-function difference V(Delta+1) - V(Delta) (Delta >= 1)
/// under the threshold-1 policy, in closed form.
double condition1_sigma(const SourceModel& src, const DelayModel& d);

struct Condition1Report {
    double sigma = 0.0;
    double delta_bar_0 = 0.0;
    double delta_bar_1 = 0.0;
    double bound = 0.0;  // min(delta_bar_0, (1 + (1-p) sigma) / 2)
    bool holds = false;
};

/// Evaluates the threshold-1 optimality condition
/// delta_bar_1 <= min(delta_bar_0, (1 + (1-p) sigma) / 2).
Condition1Report check_condition1(const SourceModel& src, const DelayModel& d);

}  // namespace aoii

#include "aoii/mdp.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>

namespace aoii {

namespace {

void merge_entry(TruncatedMdp::Row& row, int next, double prob) {
    for (auto& e : row) {
        if (e.next == next) {
            e.prob += prob;
            return;
        }
    }
    row.push_back({next, prob});
}

}  // namespace

TruncatedMdp::TruncatedMdp(SourceModel src, DelayModel d, int m)
    : src_(src), delay_(std::move(d)), m_(m) {
    const int t_max = delay_.t_max();
    if (m_ < 2 * t_max) {
        throw std::invalid_argument("truncation bound must satisfy m >= 2*t_max");
    }
    per_delta_ = 2 * t_max - 1;
    num_states_ = (m_ + 1) * per_delta_;

    idle_rows_.resize(static_cast<std::size_t>(num_states_));
    transmit_rows_.resize(static_cast<std::size_t>(m_) + 1);

    auto truncated_row = [&](const SystemState& from, Action a) {
        Row row;
        for (const auto& [next, prob] : step_kernel(src_, delay_, {from, a})) {
            SystemState capped = next;
            if (capped.delta > m_) capped.delta = m_;
            merge_entry(row, index_of(capped), prob);
        }
        return row;
    };

    for (int idx = 0; idx < num_states_; ++idx) {
        const SystemState s = state_at(idx);
        idle_rows_[static_cast<std::size_t>(idx)] = truncated_row(s, Action::Idle);
        if (s.i == ChannelInfo::Idle) {
            transmit_rows_[static_cast<std::size_t>(s.delta)] =
                truncated_row(s, Action::Transmit);
        }
    }
}

int TruncatedMdp::index_of(const SystemState& s) const {
    const int t_max = delay_.t_max();
    int slot;
    if (s.i == ChannelInfo::Idle) {
        slot = 0;
    } else if (s.i == ChannelInfo::BusySame) {
        slot = s.t;
    } else {
        slot = (t_max - 1) + s.t;
    }
    return s.delta * per_delta_ + slot;
}

SystemState TruncatedMdp::state_at(int idx) const {
    const int t_max = delay_.t_max();
    const int delta = idx / per_delta_;
    const int slot = idx % per_delta_;
    if (slot == 0) return SystemState::idle(delta);
    if (slot <= t_max - 1) {
        return SystemState::busy(delta, slot, ChannelInfo::BusySame);
    }
    return SystemState::busy(delta, slot - (t_max - 1), ChannelInfo::BusyDiff);
}

const TruncatedMdp::Row& TruncatedMdp::row(int idx, Action a) const {
    if (a == Action::Idle) return idle_rows_[static_cast<std::size_t>(idx)];
    if (!is_idle(idx)) {
        throw std::invalid_argument("Transmit rows exist for idle states only");
    }
    return transmit_rows_[static_cast<std::size_t>(idx / per_delta_)];
}

TruncatedMdp build_truncated(const SourceModel& src, const DelayModel& d, int m) {
    return TruncatedMdp(src, d, m);
}

TabularPolicy TabularPolicy::threshold(int m, const ThresholdPolicy& policy) {
    TabularPolicy tab;
    tab.idle_action.resize(static_cast<std::size_t>(m) + 1);
    for (int delta = 0; delta <= m; ++delta) {
        tab.idle_action[static_cast<std::size_t>(delta)] =
            policy.transmits_at(delta) ? Action::Transmit : Action::Idle;
    }
    return tab;
}

std::optional<int> threshold_equivalent_tau(const TabularPolicy& policy,
                                            int check_up_to) {
    const int limit = std::min<int>(check_up_to,
                                    static_cast<int>(policy.idle_action.size()) - 1);
    int first_tx = limit + 1;
    for (int delta = 0; delta <= limit; ++delta) {
        if (policy.at(delta) == Action::Transmit) {
            first_tx = delta;
            break;
        }
    }
    for (int delta = first_tx; delta <= limit; ++delta) {
        if (policy.at(delta) != Action::Transmit) return std::nullopt;
    }
    return first_tx;
}

namespace {

// One Bellman backup; returns the minimizing Q value and records the action.
inline double backup_state(const TruncatedMdp& mdp, int idx,
                           const std::vector<double>& v, Action* best) {
    const double c = mdp.cost(idx);
    double q0 = c;
    for (const auto& e : mdp.row(idx, Action::Idle)) {
        q0 += e.prob * v[static_cast<std::size_t>(e.next)];
    }
    if (!mdp.is_idle(idx)) {
        if (best) *best = Action::Idle;
        return q0;
    }
    double q1 = c;
    for (const auto& e : mdp.row(idx, Action::Transmit)) {
        q1 += e.prob * v[static_cast<std::size_t>(e.next)];
    }
    if (q1 < q0) {
        if (best) *best = Action::Transmit;
        return q1;
    }
    if (best) *best = Action::Idle;
    return q0;
}

void bellman_sweep_serial(const TruncatedMdp& mdp, const std::vector<double>& v,
                          std::vector<double>& q) {
    const int n = mdp.num_states();
    for (int idx = 0; idx < n; ++idx) {
        q[static_cast<std::size_t>(idx)] = backup_state(mdp, idx, v, nullptr);
    }
}

void bellman_sweep_omp(const TruncatedMdp& mdp, const std::vector<double>& v,
                       std::vector<double>& q) {
    const int n = mdp.num_states();
#pragma omp parallel for schedule(static)
    for (int idx = 0; idx < n; ++idx) {
        q[static_cast<std::size_t>(idx)] = backup_state(mdp, idx, v, nullptr);
    }
}

}  // namespace

SolveResult rvi(const TruncatedMdp& mdp, const SolverOptions& opts) {
    if (!(opts.epsilon > 0.0)) {
        throw std::invalid_argument("rvi requires epsilon > 0");
    }
    const int n = mdp.num_states();
    const int ref = mdp.index_of(SystemState::idle(0));
    std::vector<double> v(static_cast<std::size_t>(n), 0.0);
    std::vector<double> q(static_cast<std::size_t>(n), 0.0);

    double span_lo = 0.0, span_hi = 0.0, q_ref = 0.0, max_delta = 0.0;
    long iter = 0;
    bool converged = false;
    while (iter < opts.max_iter) {
        ++iter;
        if (opts.parallel) {
            bellman_sweep_omp(mdp, v, q);
        } else {
            bellman_sweep_serial(mdp, v, q);
        }
        q_ref = q[static_cast<std::size_t>(ref)];
        span_lo = std::numeric_limits<double>::infinity();
        span_hi = -std::numeric_limits<double>::infinity();
        max_delta = 0.0;
        for (int idx = 0; idx < n; ++idx) {
            const double d = q[static_cast<std::size_t>(idx)] -
                             v[static_cast<std::size_t>(idx)];
            span_lo = std::min(span_lo, d);
            span_hi = std::max(span_hi, d);
            const double relative = q[static_cast<std::size_t>(idx)] - q_ref;
            max_delta = std::max(max_delta,
                                 std::abs(relative - v[static_cast<std::size_t>(idx)]));
            v[static_cast<std::size_t>(idx)] = relative;
        }
        if (max_delta <= opts.epsilon) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw NonConvergenceError(
            "relative value iteration did not converge within " +
                std::to_string(opts.max_iter) + " iterations (span " +
                std::to_string(span_hi - span_lo) + ")",
            span_hi - span_lo, iter);
    }

    SolveResult result;
    result.value = v;
    result.iterations = iter;
    result.residual = max_delta;
    result.span = span_hi - span_lo;
    result.theta = 0.5 * (span_lo + span_hi);
    result.theta_ref = q_ref;
    result.policy.idle_action.resize(static_cast<std::size_t>(mdp.m()) + 1);
    for (int delta = 0; delta <= mdp.m(); ++delta) {
        Action best = Action::Idle;
        backup_state(mdp, mdp.idle_index(delta), v, &best);
        result.policy.idle_action[static_cast<std::size_t>(delta)] = best;
    }
    return result;
}

PolicyEvalResult policy_evaluation(const TruncatedMdp& mdp,
                                   const TabularPolicy& policy) {
    const int n = mdp.num_states();
    if (static_cast<int>(policy.idle_action.size()) != mdp.m() + 1) {
        throw std::invalid_argument("policy does not cover all idle states");
    }
    const int ref = mdp.index_of(SystemState::idle(0));

    // Unknowns: V(s) for s != ref (V(ref) pinned to 0) and theta (last column).
    auto col_of = [&](int idx) { return idx < ref ? idx : idx - 1; };
    const int theta_col = n - 1;

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(n) * 6);
    Eigen::VectorXd b(n);
    for (int idx = 0; idx < n; ++idx) {
        const Action a = mdp.is_idle(idx)
                             ? policy.at(mdp.state_at(idx).delta)
                             : Action::Idle;
        if (idx != ref) triplets.emplace_back(idx, col_of(idx), 1.0);
        triplets.emplace_back(idx, theta_col, 1.0);
        for (const auto& e : mdp.row(idx, a)) {
            if (e.next == ref) continue;
            triplets.emplace_back(idx, col_of(e.next), -e.prob);
        }
        b(idx) = mdp.cost(idx);
    }

    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(triplets.begin(), triplets.end());
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success) {
        throw std::runtime_error(
            "policy evaluation system is singular (reducible chain under the "
            "policy)");
    }
    Eigen::VectorXd x = lu.solve(b);
    const double residual = (A * x - b).cwiseAbs().maxCoeff();

    PolicyEvalResult result;
    result.value.assign(static_cast<std::size_t>(n), 0.0);
    for (int idx = 0; idx < n; ++idx) {
        if (idx == ref) continue;
        result.value[static_cast<std::size_t>(idx)] = x(col_of(idx));
    }
    result.theta = x(theta_col);
    result.residual = residual;
    return result;
}

TabularPolicy policy_improvement(const TruncatedMdp& mdp,
                                 const std::vector<double>& value) {
    if (static_cast<int>(value.size()) != mdp.num_states()) {
        throw std::invalid_argument("value table does not cover all states");
    }
    TabularPolicy next;
    next.idle_action.resize(static_cast<std::size_t>(mdp.m()) + 1);
    for (int delta = 0; delta <= mdp.m(); ++delta) {
        Action best = Action::Idle;
        backup_state(mdp, mdp.idle_index(delta), value, &best);
        next.idle_action[static_cast<std::size_t>(delta)] = best;
    }
    return next;
}

SolveResult policy_iteration(const TruncatedMdp& mdp,
                             const TabularPolicy& initial) {
    constexpr long kMaxRounds = 1000;
    TabularPolicy current = initial;
    PolicyEvalResult eval;
    double prev_theta = std::numeric_limits<double>::infinity();
    for (long round = 1; round <= kMaxRounds; ++round) {
        eval = policy_evaluation(mdp, current);
        if (eval.theta > prev_theta + 1e-9) {
            throw std::logic_error(
                "policy iteration produced an increasing average cost");
        }
        prev_theta = eval.theta;
        TabularPolicy next = policy_improvement(mdp, eval.value);
        if (next == current) {
            SolveResult result;
            result.policy = current;
            result.theta = eval.theta;
            result.theta_ref = eval.theta;
            result.span = 0.0;
            result.value = eval.value;
            result.iterations = round;
            result.residual = eval.residual;
            return result;
        }
        current = next;
    }
    throw NonConvergenceError("policy iteration did not converge", 0.0,
                              kMaxRounds);
}

double compact_bellman_residual(const TruncatedMdp& mdp,
                                const SolveResult& solve) {
    const SourceModel& src = mdp.source();
    const DelayModel& d = mdp.delay();
    const double et = expected_transmission_time(d);
    const double theta = solve.theta;
    const int upper = mdp.m() - mdp.t_max();

    auto idle_value = [&](int delta) {
        return solve.value[static_cast<std::size_t>(mdp.idle_index(delta))];
    };

    double worst = 0.0;
    for (int delta = 0; delta <= upper; ++delta) {
        double q0 = delta;  // C(delta, 0), theta(0) = 0
        q0 += src.p * idle_value(delta == 0 ? 1 : 0);
        q0 += (1.0 - src.p) * idle_value(delta == 0 ? 0 : delta + 1);

        double q1 = cost_epoch(src, d, delta, Action::Transmit) - (et - 1.0) * theta;
        for (int to = 0; to <= delta + mdp.t_max(); ++to) {
            const double prob = epoch_prob(src, d, delta, to, Action::Transmit);
            if (prob != 0.0) q1 += prob * idle_value(to);
        }
        const double lhs = idle_value(delta) + theta;
        worst = std::max(worst, std::abs(lhs - std::min(q0, q1)));
    }
    return worst;
}

double condition1_sigma(const SourceModel& src, const DelayModel& d) {
    const double p = src.p;
    double numerator = cost_shift(src, d, 1);
    double climb = 0.0;
    for (int t = 1; t <= d.t_max(); ++t) {
        climb += d.pmf(t) * p * std::pow(1.0 - p, t - 1);
    }
    if (d.variant() == DelayVariant::DiscardAfterTmax) {
        climb += d.p_tail() * std::pow(1.0 - p, d.t_max());
    }
    return numerator / (1.0 - climb);
}

Condition1Report check_condition1(const SourceModel& src, const DelayModel& d) {
    Condition1Report report;
    report.sigma = condition1_sigma(src, d);
    report.delta_bar_0 = expected_aoii(src, d, ThresholdPolicy(0)).expected_aoii;
    report.delta_bar_1 = expected_aoii(src, d, ThresholdPolicy(1)).expected_aoii;
    report.bound = std::min(report.delta_bar_0,
                            0.5 * (1.0 + (1.0 - src.p) * report.sigma));
    // Degenerate channels (e.g. a discard variant that never delivers) meet
    // the bound with exact equality; the slack keeps rounding from flipping
    // those ties.
    const double slack = 1e-9 * std::max(1.0, report.bound);
    report.holds = report.delta_bar_1 <= report.bound + slack;
    return report;
}

}  // namespace aoii

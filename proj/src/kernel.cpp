#include "aoii/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace aoii {

namespace {

void push_mass(StateDistribution& out, const SystemState& s, double prob) {
    if (prob <= 0.0) return;
    for (auto& [state, mass] : out) {
        if (state == s) {
            mass += prob;
            return;
        }
    }
    out.emplace_back(s, prob);
}

// Successor AoII of a busy slot when the receiver's estimate is unchanged:
// with probability `match` the next source state matches the estimate.
struct DeltaSplit {
    int delta_up;
    double p_up;    // Delta -> Delta+1
    double p_zero;  // Delta -> 0
};

DeltaSplit busy_delta_split(const SourceModel& src, int delta) {
    // Mismatch persists with 1-p when the estimate is currently wrong
    // (delta > 0); from a correct estimate a flip creates the mismatch.
    if (delta > 0) return {delta + 1, 1.0 - src.p, src.p};
    return {1, src.p, 1.0 - src.p};
}

}  // namespace

StateDistribution step_kernel(const SourceModel& src, const DelayModel& d,
                              const KernelQuery& q) {
    const int t_max = d.t_max();
    validate_state(q.from, t_max);
    const SystemState s = q.from;
    const bool idle = (s.i == ChannelInfo::Idle);
    if (q.action == Action::Transmit && !idle) {
        throw std::invalid_argument(
            "Transmit is infeasible from a busy state " + to_string(s));
    }

    StateDistribution out;

    if (idle && q.action == Action::Idle) {
        auto split = busy_delta_split(src, s.delta);
        push_mass(out, SystemState::idle(split.delta_up), split.p_up);
        push_mass(out, SystemState::idle(0), split.p_zero);
        return out;
    }

    // A transmission is in progress (either just started from an idle state
    // or already running). The update being transmitted equals the estimate
    // exactly when the estimate was correct at the start (Delta = 0 then).
    int elapsed;
    ChannelInfo info;
    if (idle) {
        elapsed = 0;
        info = (s.delta == 0) ? ChannelInfo::BusySame : ChannelInfo::BusyDiff;
    } else {
        elapsed = s.t;
        info = s.i;
    }

    const double cont = d.continue_prob(elapsed);
    auto split = busy_delta_split(src, s.delta);

    // Transmission continues for another slot.
    if (cont > 0.0) {
        const bool discard_now = (d.variant() == DelayVariant::DiscardAfterTmax &&
                                  elapsed + 1 == t_max);
        if (discard_now) {
            // The update is dropped at the end of slot t_max; the estimate
            // stays as it is and the channel frees up.
            push_mass(out, SystemState::idle(split.delta_up), cont * split.p_up);
            push_mass(out, SystemState::idle(0), cont * split.p_zero);
        } else {
            push_mass(out, SystemState::busy(split.delta_up, elapsed + 1, info),
                      cont * split.p_up);
            push_mass(out, SystemState::busy(0, elapsed + 1, info),
                      cont * split.p_zero);
        }
    }

    // Delivery at the next slot boundary. When the transmitted update differs
    // from the current estimate (BusyDiff) the estimate flips on delivery, so
    // the match/mismatch split swaps relative to the busy evolution.
    const double deliver = 1.0 - cont;
    if (deliver > 0.0) {
        double to_up = split.p_up;
        double to_zero = split.p_zero;
        if (info == ChannelInfo::BusyDiff) std::swap(to_up, to_zero);
        push_mass(out, SystemState::idle(split.delta_up), deliver * to_up);
        push_mass(out, SystemState::idle(0), deliver * to_zero);
    }

    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

double epoch_prob_idle(const SourceModel& src, int from_delta, int to_delta) {
    const double p = src.p;
    if (from_delta == 0) {
        if (to_delta == 0) return 1.0 - p;
        if (to_delta == 1) return p;
        return 0.0;
    }
    if (to_delta == 0) return p;
    if (to_delta == from_delta + 1) return 1.0 - p;
    return 0.0;
}

double epoch_prob_tx_given_t(const SourceModel& src, int from_delta,
                             int to_delta, int t) {
    if (t < 1) throw std::invalid_argument("epoch_prob_tx_given_t requires t >= 1");
    const double p = src.p;
    if (from_delta == 0) {
        if (to_delta == 0) return p_pow(src, t);
        if (to_delta >= 1 && to_delta <= t) {
            return p_pow(src, t - to_delta) * p * std::pow(1.0 - p, to_delta - 1);
        }
        return 0.0;
    }
    if (to_delta == 0) return p_pow(src, t);
    if (to_delta == from_delta + t) return p * std::pow(1.0 - p, t - 1);
    if (to_delta == 1) return (1.0 - p_pow(src, t - 1)) * (1.0 - p);
    if (to_delta >= 2 && to_delta <= t - 1) {
        return (1.0 - p_pow(src, t - to_delta)) * p * p *
               std::pow(1.0 - p, to_delta - 2);
    }
    return 0.0;
}

double epoch_prob_tx_discard(const SourceModel& src, const DelayModel& d,
                             int from_delta, int to_delta) {
    if (d.variant() != DelayVariant::DiscardAfterTmax) {
        throw std::invalid_argument(
            "discard epoch probabilities exist only under DiscardAfterTmax");
    }
    const int t_max = d.t_max();
    const double p = src.p;
    if (from_delta == 0) {
        // A discarded update carries the same value as the estimate, so the
        // epoch looks exactly like a delivery after t_max slots.
        return epoch_prob_tx_given_t(src, 0, to_delta, t_max);
    }
    if (to_delta == 0) return 1.0 - p_pow(src, t_max);
    if (to_delta == from_delta + t_max) return std::pow(1.0 - p, t_max);
    if (to_delta >= 1 && to_delta <= t_max - 1) {
        return (1.0 - p_pow(src, t_max - to_delta)) * p *
               std::pow(1.0 - p, to_delta - 1);
    }
    return 0.0;
}

double epoch_prob(const SourceModel& src, const DelayModel& d, int from_delta,
                  int to_delta, Action action) {
    if (action == Action::Idle) return epoch_prob_idle(src, from_delta, to_delta);
    double prob = 0.0;
    for (int t = 1; t <= d.t_max(); ++t) {
        const double pt = d.pmf(t);
        if (pt > 0.0) prob += pt * epoch_prob_tx_given_t(src, from_delta, to_delta, t);
    }
    if (d.variant() == DelayVariant::DiscardAfterTmax && d.p_tail() > 0.0) {
        prob += d.p_tail() * epoch_prob_tx_discard(src, d, from_delta, to_delta);
    }
    return prob;
}

double EpochTransitionRow::prob(int to_delta) const {
    for (const auto& [delta, value] : entries) {
        if (delta == to_delta) return value;
    }
    return 0.0;
}

double EpochTransitionRow::total() const {
    double sum = 0.0;
    for (const auto& [delta, value] : entries) sum += value;
    return sum;
}

EpochTransitionRow epoch_row(const SourceModel& src, const DelayModel& d,
                             int from_delta, Action action) {
    EpochTransitionRow row;
    row.from_delta = from_delta;
    row.action = action;
    const int upper = (action == Action::Idle) ? from_delta + 1
                                               : from_delta + d.t_max();
    for (int to = 0; to <= upper; ++to) {
        const double value = epoch_prob(src, d, from_delta, to, action);
        if (value != 0.0) row.entries.emplace_back(to, value);
    }
    return row;
}

StructureReport validate_epoch_structure(const SourceModel& src,
                                         const DelayModel& d) {
    return validate_epoch_structure_fn(
        src, d, [&](int from, int to) {
            return epoch_prob(src, d, from, to, Action::Transmit);
        });
}

StructureReport validate_epoch_structure_fn(const SourceModel& src,
                                            const DelayModel& d,
                                            const EpochProbFn& prob) {
    (void)src;
    const int t_max = d.t_max();
    const int delta_hi = 3 * t_max;
    const bool discard = (d.variant() == DelayVariant::DiscardAfterTmax);
    const double tol = 1e-12;

    auto fail = [](const std::string& what) {
        StructureReport r;
        r.pass = false;
        r.counterexample = what;
        return r;
    };

    // Property 1: rows share the entries below t_max once Delta is past the
    // target (and positive under DiscardAfterTmax).
    for (int to = 0; to <= t_max - 1; ++to) {
        const int base = std::max(discard ? 1 : 0, to);
        const double ref = prob(base, to);
        for (int from = base + 1; from <= delta_hi; ++from) {
            const double got = prob(from, to);
            if (std::abs(got - ref) > tol) {
                std::ostringstream os;
                os << "property 1: P_{" << from << "," << to << "}(1)=" << got
                   << " differs from P_{" << base << "," << to << "}(1)=" << ref;
                return fail(os.str());
            }
        }
    }

    // Property 2: shift invariance in the climb region Delta' >= t_max.
    const int from_lo = discard ? 1 : 0;
    for (int from = from_lo; from <= delta_hi; ++from) {
        for (int to = t_max; to <= from + t_max; ++to) {
            const double ref = prob(from, to);
            for (int shift = 1; shift <= t_max; ++shift) {
                const double got = prob(from + shift, to + shift);
                if (std::abs(got - ref) > tol) {
                    std::ostringstream os;
                    os << "property 2: P_{" << from + shift << "," << to + shift
                       << "}(1)=" << got << " differs from P_{" << from << ","
                       << to << "}(1)=" << ref;
                    return fail(os.str());
                }
            }
        }
    }

    // Property 3: no mass above Delta+t_max or strictly between the reset
    // band and the climb target.
    for (int from = 0; from <= delta_hi; ++from) {
        for (int to = 0; to <= from + 2 * t_max; ++to) {
            const bool outside =
                (to > from + t_max) || (to > t_max - 1 && to < from + 1);
            if (!outside) continue;
            const double got = prob(from, to);
            if (std::abs(got) > tol) {
                std::ostringstream os;
                os << "property 3: P_{" << from << "," << to << "}(1)=" << got
                   << " inside the zero region";
                return fail(os.str());
            }
        }
    }
    return StructureReport{};
}

}  // namespace aoii

#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "aoii/model.hpp"

namespace aoii {

enum class Action : int { Idle = 0, Transmit = 1 };

struct KernelQuery {
    SystemState from;
    Action action = Action::Idle;
};

/// Successor states with probabilities, one slot ahead. Entries carry nonzero
/// probability and distinct states; the row sums to 1.
using StateDistribution = std::vector<std::pair<SystemState, double>>;

/// Single-slot transition kernel of the full chain. Transmit is feasible only
/// from idle states. Under GuaranteedDelivery the transmission cannot outlast
/// t_max slots (continue probability 0 at t = t_max-1); under DiscardAfterTmax
/// the would-be state (Delta', t_max, i') collapses to (Delta', 0, Idle) with
/// the receiver's estimate unchanged.
StateDistribution step_kernel(const SourceModel& src, const DelayModel& d,
                              const KernelQuery& q);

/// P_{Delta,Delta'}(0): idle decision, one slot.
double epoch_prob_idle(const SourceModel& src, int from_delta, int to_delta);

/// P^t_{Delta,Delta'}(1): decision-epoch transition given the transmission
/// takes exactly t slots (1 <= t <= t_max).
double epoch_prob_tx_given_t(const SourceModel& src, int from_delta,
                             int to_delta, int t);

/// P^{t+}_{Delta,Delta'}(1): decision-epoch transition given the transmission
/// is discarded after t_max slots. Only valid under DiscardAfterTmax.
double epoch_prob_tx_discard(const SourceModel& src, const DelayModel& d,
                             int from_delta, int to_delta);

/// P_{Delta,Delta'}(a): decision-epoch transition probability, mixing the
/// conditional kernels over the delay distribution (plus the discard branch
/// under DiscardAfterTmax).
double epoch_prob(const SourceModel& src, const DelayModel& d, int from_delta,
                  int to_delta, Action action);

struct EpochTransitionRow {
    int from_delta = 0;
    Action action = Action::Idle;
    std::vector<std::pair<int, double>> entries;  // (delta', prob), ascending

    double prob(int to_delta) const;
    double total() const;
};

/// Assembles the full finite-support row of epoch_prob values.
EpochTransitionRow epoch_row(const SourceModel& src, const DelayModel& d,
                             int from_delta, Action action);

struct StructureReport {
    bool pass = true;
    std::string counterexample;  // first violation, empty when pass
};

/// Checks the structural properties of the transmit-epoch rows over
/// Delta <= 3*t_max and the full support:
///  1. P_{Delta,Delta'}(1) independent of Delta for Delta' <= t_max-1 in the
///     stated region (Delta >= Delta'; Delta >= max(1, Delta') under
///     DiscardAfterTmax),
///  2. shift invariance P_{Delta,Delta'} = P_{Delta+k,Delta'+k} for
///     Delta' >= t_max (Delta > 0 under DiscardAfterTmax),
///  3. zero outside the support (Delta' > Delta+t_max or
///     t_max-1 < Delta' < Delta+1).
StructureReport validate_epoch_structure(const SourceModel& src,
                                         const DelayModel& d);

/// Same checks against an arbitrary row provider; lets tests feed corrupted
/// kernels through the validator.
using EpochProbFn = std::function<double(int from_delta, int to_delta)>;
StructureReport validate_epoch_structure_fn(const SourceModel& src,
                                            const DelayModel& d,
                                            const EpochProbFn& prob);

}  // namespace aoii

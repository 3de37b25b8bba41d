#pragma once

#include <vector>

#include "aoii/kernel.hpp"
#include "aoii/model.hpp"

namespace aoii {

/// C^k(Delta): expected AoII k slots after a transmission starts at
/// (Delta, 0, Idle), given the transmission is still in progress. C^0 = Delta.
double cost_ck(const SourceModel& src, int delta, int k);

/// C^t(Delta, 1) = sum_{k=0}^{t-1} C^k(Delta): expected summed AoII over the
/// t slots of a transmission epoch, including the decision slot.
double cost_tx_given_t(const SourceModel& src, int delta, int t);

/// C(Delta, a): expected summed AoII of the epoch started by action a at
/// (Delta, 0, Idle). Idle epochs cost Delta; transmit epochs mix
/// cost_tx_given_t over the delay distribution (the discard branch costs the
/// same as a full-length delivery, the channel is held for t_max slots
/// either way).
double cost_epoch(const SourceModel& src, const DelayModel& d, int delta,
                  Action action);

/// Delta'_t = C(Delta, 1) - C(Delta - t, 1), constant for Delta > t.
/// Equals t * Delta'_1; Delta'_1 is the per-step slope of the transmit cost.
double cost_shift(const SourceModel& src, const DelayModel& d, int t);

/// Transmit-epoch costs C(Delta, 1) cached up to a bound; beyond it the
/// affine structure C(Delta+1,1) - C(Delta,1) = Delta'_1 (Delta >= 1) extends
/// values in O(1). Built eagerly; reads are lock-free.
class EpochCostTable {
public:
    EpochCostTable(const SourceModel& src, const DelayModel& d, int delta_bound);

    double transmit(int delta) const;
    double idle(int delta) const { return delta; }
    double cost(int delta, Action a) const {
        return a == Action::Idle ? idle(delta) : transmit(delta);
    }
    double slope() const { return slope_; }

private:
    std::vector<double> transmit_;
    double slope_;
};

}  // namespace aoii

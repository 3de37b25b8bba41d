#pragma once

#include <optional>
#include <vector>

#include "aoii/cost.hpp"
#include "aoii/kernel.hpp"
#include "aoii/model.hpp"

namespace aoii {

/// Transmit at idle states iff AoII >= tau; the infinite threshold never
/// transmits.
class ThresholdPolicy {
public:
    explicit ThresholdPolicy(int tau);
    static ThresholdPolicy infinite();

    bool is_infinite() const { return infinite_; }
    int tau() const;
    bool transmits_at(int delta) const {
        return !infinite_ && delta >= tau_;
    }

    friend bool operator==(const ThresholdPolicy&, const ThresholdPolicy&) = default;

private:
    ThresholdPolicy() : tau_(0), infinite_(true) {}
    int tau_;
    bool infinite_;
};

/// Stationary quantities of the chain induced by a finite threshold policy:
/// pi_Delta for the idle states Delta = 0..omega-1 (omega = t_max + tau + 1)
/// and the lumped tail mass Pi = sum_{Delta >= omega} pi_Delta.
struct StationarySolution {
    int tau = 0;
    std::vector<double> pi;
    double tail_pi = 0.0;
    double residual = 0.0;                // linear-system defect (0 for closed forms)
    double normalization_residual = 0.0;  // defect of the occupancy identity
    int omega() const { return static_cast<int>(pi.size()); }
};

/// Solves the lumped balance system for 0 < tau < infinity (dense direct
/// solve; the system is omega+1 unknowns with one consistent redundant
/// equation). Throws on a numerically singular system.
StationarySolution stationary_general(const SourceModel& src,
                                      const DelayModel& d, int tau);

/// Closed forms for tau = 0 and tau = 1.
StationarySolution stationary_tau0(const SourceModel& src, const DelayModel& d);
StationarySolution stationary_tau1(const SourceModel& src, const DelayModel& d);

/// Sigma = sum_{Delta >= omega} C(Delta, 1) pi_Delta, computed in closed form
/// from the solved head of the distribution.
double tail_cost_sigma(const SourceModel& src, const DelayModel& d, int tau,
                       const StationarySolution& sol);

struct EvaluationReport {
    ThresholdPolicy policy = ThresholdPolicy(0);
    double expected_aoii = 0.0;
    std::optional<StationarySolution> stationary;  // absent for tau = infinity
    double tail_cost = 0.0;                        // Sigma (0 for tau = infinity)
};

/// Expected AoII of a threshold policy. tau = infinity evaluates to 1/(2p)
/// exactly; finite tau composes the stationary solution, the epoch costs and
/// the tail aggregate.
EvaluationReport expected_aoii(const SourceModel& src, const DelayModel& d,
                               const ThresholdPolicy& policy);

}  // namespace aoii

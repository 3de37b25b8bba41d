#include "aoii/cost.hpp"

#include <cmath>
#include <stdexcept>

namespace aoii {

double cost_ck(const SourceModel& src, int delta, int k) {
    if (k < 0) throw std::invalid_argument("cost_ck requires k >= 0");
    const double p = src.p;
    if (delta == 0) {
        double sum = 0.0;
        for (int h = 1; h <= k; ++h) {
            sum += h * p_pow(src, k - h) * p * std::pow(1.0 - p, h - 1);
        }
        return sum;
    }
    double sum = 0.0;
    for (int h = 1; h <= k - 1; ++h) {
        sum += h * (1.0 - p_pow(src, k - h)) * p * std::pow(1.0 - p, h - 1);
    }
    return sum + (delta + k) * std::pow(1.0 - p, k);
}

double cost_tx_given_t(const SourceModel& src, int delta, int t) {
    if (t < 1) throw std::invalid_argument("cost_tx_given_t requires t >= 1");
    double sum = 0.0;
    for (int k = 0; k < t; ++k) sum += cost_ck(src, delta, k);
    return sum;
}

double cost_epoch(const SourceModel& src, const DelayModel& d, int delta,
                  Action action) {
    if (action == Action::Idle) return delta;
    double cost = 0.0;
    for (int t = 1; t <= d.t_max(); ++t) {
        const double pt = d.pmf(t);
        if (pt > 0.0) cost += pt * cost_tx_given_t(src, delta, t);
    }
    if (d.variant() == DelayVariant::DiscardAfterTmax && d.p_tail() > 0.0) {
        cost += d.p_tail() * cost_tx_given_t(src, delta, d.t_max());
    }
    return cost;
}

double cost_shift(const SourceModel& src, const DelayModel& d, int t) {
    if (t < 1 || t > d.t_max()) {
        throw std::invalid_argument("cost_shift requires 1 <= t <= t_max");
    }
    const double p = src.p;
    double shift = 0.0;
    for (int i = 1; i <= d.t_max(); ++i) {
        shift += d.pmf(i) * (t - t * std::pow(1.0 - p, i)) / p;
    }
    if (d.variant() == DelayVariant::DiscardAfterTmax) {
        shift += d.p_tail() * (t - t * std::pow(1.0 - p, d.t_max())) / p;
    }
    return shift;
}

EpochCostTable::EpochCostTable(const SourceModel& src, const DelayModel& d,
                               int delta_bound) {
    if (delta_bound < 1) delta_bound = 1;
    transmit_.resize(static_cast<std::size_t>(delta_bound) + 1);
    for (int delta = 0; delta <= delta_bound; ++delta) {
        transmit_[static_cast<std::size_t>(delta)] =
            cost_epoch(src, d, delta, Action::Transmit);
    }
    slope_ = cost_shift(src, d, 1);
}

double EpochCostTable::transmit(int delta) const {
    const int bound = static_cast<int>(transmit_.size()) - 1;
    if (delta <= bound) return transmit_[static_cast<std::size_t>(delta)];
    return transmit_[static_cast<std::size_t>(bound)] + (delta - bound) * slope_;
}

}  // namespace aoii

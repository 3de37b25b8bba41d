#include "aoii/model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace aoii {

namespace {

constexpr double kMassTolerance = 1e-12;
constexpr double kRenormalizeTolerance = 1e-9;

void require_t_max(int t_max) {
    if (t_max < 2) {
        throw std::domain_error("DelayModel requires t_max > 1 (got " +
                                std::to_string(t_max) + ")");
    }
}

}  // namespace

SourceModel make_source(double p) {
    if (!(p > 0.0)) {
        throw std::domain_error("SourceModel requires p > 0 (got " +
                                std::to_string(p) + ")");
    }
    if (!(p <= 0.5)) {
        throw std::domain_error("SourceModel requires p <= 1/2 (got " +
                                std::to_string(p) + ")");
    }
    return SourceModel{p};
}

double p_pow(const SourceModel& src, int t) {
    if (t < 0) throw std::domain_error("p_pow requires t >= 0");
    if (t == 0) return 1.0;
    return 0.5 * (1.0 + std::pow(1.0 - 2.0 * src.p, t));
}

DelayModel::DelayModel(std::vector<double> pmf, DelayVariant variant,
                       double p_tail, double folded_mass)
    : pmf_(std::move(pmf)),
      variant_(variant),
      p_tail_(p_tail),
      folded_mass_(folded_mass) {
    const int t_max = static_cast<int>(pmf_.size()) - 1;
    require_t_max(t_max);
    if (variant_ == DelayVariant::GuaranteedDelivery && p_tail_ != 0.0) {
        throw std::invalid_argument(
            "p_tail must be zero under GuaranteedDelivery");
    }
    for (int t = 1; t <= t_max; ++t) {
        if (pmf_[static_cast<std::size_t>(t)] < 0.0) {
            throw std::domain_error("delay pmf entries must be nonnegative");
        }
    }
    if (p_tail_ < 0.0) throw std::domain_error("p_tail must be nonnegative");
    pmf_[0] = 0.0;

    cdf_.assign(pmf_.size(), 0.0);
    for (int t = 1; t <= t_max; ++t) {
        cdf_[static_cast<std::size_t>(t)] =
            cdf_[static_cast<std::size_t>(t - 1)] + pmf_[static_cast<std::size_t>(t)];
    }
    // Survival accumulated from the tail: exact zero at t_max under
    // GuaranteedDelivery, exact p_tail under DiscardAfterTmax.
    surv_.assign(pmf_.size(), 0.0);
    surv_[static_cast<std::size_t>(t_max)] = p_tail_;
    for (int t = t_max - 1; t >= 0; --t) {
        surv_[static_cast<std::size_t>(t)] =
            surv_[static_cast<std::size_t>(t + 1)] + pmf_[static_cast<std::size_t>(t + 1)];
    }
    const double total = surv_[0];
    if (std::abs(total - 1.0) > kMassTolerance) {
        throw std::domain_error("delay distribution mass " + std::to_string(total) +
                                " != 1");
    }
}

double DelayModel::continue_prob(int t) const {
    if (t < 0 || t >= t_max()) {
        throw std::invalid_argument("continue_prob requires 0 <= t < t_max");
    }
    const double denom = surv_[static_cast<std::size_t>(t)];
    if (denom <= 0.0) return 0.0;  // unreachable elapsed time
    return surv_[static_cast<std::size_t>(t + 1)] / denom;
}

DelayModel make_delay_geometric(double p_s, int t_max, DelayVariant variant) {
    require_t_max(t_max);
    if (!(p_s >= 0.0) || !(p_s < 1.0)) {
        throw std::domain_error("geometric delay requires 0 <= p_s < 1 (got " +
                                std::to_string(p_s) + ")");
    }
    std::vector<double> pmf(static_cast<std::size_t>(t_max) + 1, 0.0);
    for (int t = 1; t <= t_max; ++t) {
        pmf[static_cast<std::size_t>(t)] = std::pow(1.0 - p_s, t - 1) * p_s;
    }
    const double tail = std::pow(1.0 - p_s, t_max);
    if (variant == DelayVariant::GuaranteedDelivery) {
        pmf[static_cast<std::size_t>(t_max)] += tail;
        return DelayModel(std::move(pmf), variant, 0.0, tail);
    }
    return DelayModel(std::move(pmf), variant, tail, 0.0);
}

DelayModel make_delay_zipf(double a, int t_max) {
    require_t_max(t_max);
    if (!(a >= 0.0)) {
        throw std::domain_error("zipf delay requires a >= 0 (got " +
                                std::to_string(a) + ")");
    }
    std::vector<double> pmf(static_cast<std::size_t>(t_max) + 1, 0.0);
    double norm = 0.0;
    for (int t = 1; t <= t_max; ++t) norm += std::pow(t, -a);
    for (int t = 1; t <= t_max; ++t) {
        pmf[static_cast<std::size_t>(t)] = std::pow(t, -a) / norm;
    }
    return DelayModel(std::move(pmf), DelayVariant::GuaranteedDelivery, 0.0, 0.0);
}

DelayModel make_delay_twopoint(int t_max) {
    require_t_max(t_max);
    std::vector<double> pmf(static_cast<std::size_t>(t_max) + 1, 0.0);
    pmf[1] += 0.5;
    pmf[static_cast<std::size_t>(t_max)] += 0.5;
    return DelayModel(std::move(pmf), DelayVariant::GuaranteedDelivery, 0.0, 0.0);
}

DelayModel make_delay_pmf(std::vector<double> pmf, DelayVariant variant,
                          double p_tail) {
    const int t_max = static_cast<int>(pmf.size());
    require_t_max(t_max);
    if (variant == DelayVariant::GuaranteedDelivery && p_tail != 0.0) {
        throw std::domain_error("p_tail must be zero under GuaranteedDelivery");
    }
    for (double v : pmf) {
        if (v < 0.0) throw std::domain_error("delay pmf entries must be nonnegative");
    }
    if (p_tail < 0.0) throw std::domain_error("p_tail must be nonnegative");

    double total = std::accumulate(pmf.begin(), pmf.end(), 0.0) + p_tail;
    if (std::abs(total - 1.0) > kRenormalizeTolerance) {
        throw std::domain_error("delay pmf mass " + std::to_string(total) +
                                " deviates from 1 by more than 1e-9");
    }
    std::vector<double> shifted(static_cast<std::size_t>(t_max) + 1, 0.0);
    for (int t = 1; t <= t_max; ++t) {
        shifted[static_cast<std::size_t>(t)] = pmf[static_cast<std::size_t>(t - 1)] / total;
    }
    return DelayModel(std::move(shifted), variant, p_tail / total, 0.0);
}

double expected_transmission_time(const DelayModel& d) {
    double et = 0.0;
    for (int t = 1; t <= d.t_max(); ++t) et += t * d.pmf(t);
    if (d.variant() == DelayVariant::DiscardAfterTmax) {
        et += d.t_max() * d.p_tail();
    }
    return et;
}

void validate_state(const SystemState& s, int t_max) {
    if (s.delta < 0) throw std::invalid_argument("state requires delta >= 0");
    if (s.t < 0 || s.t > t_max - 1) {
        throw std::invalid_argument("state requires 0 <= t <= t_max-1");
    }
    const bool idle = (s.i == ChannelInfo::Idle);
    if (idle != (s.t == 0)) {
        throw std::invalid_argument("state requires i = Idle iff t = 0");
    }
}

std::string to_string(const SystemState& s) {
    std::ostringstream os;
    os << "(" << s.delta << "," << s.t << "," << static_cast<int>(s.i) << ")";
    return os.str();
}

}  // namespace aoii

#include "aoii/threshold.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace aoii {

namespace {

double eq11_residual(const DelayModel& d, int tau,
                     const std::vector<double>& pi, double tail_pi) {
    const double et = expected_transmission_time(d);
    double idle_mass = 0.0;
    double busy_mass = tail_pi;
    for (int i = 0; i < static_cast<int>(pi.size()); ++i) {
        if (i < tau) {
            idle_mass += pi[static_cast<std::size_t>(i)];
        } else {
            busy_mass += pi[static_cast<std::size_t>(i)];
        }
    }
    return std::abs(idle_mass + et * busy_mass - 1.0);
}

void check_nonnegative(std::vector<double>& pi, double& tail_pi) {
    constexpr double kSlack = 1e-10;
    for (double& v : pi) {
        if (v < 0.0) {
            if (v < -kSlack) {
                throw std::runtime_error(
                    "stationary solution has a negative probability " +
                    std::to_string(v));
            }
            v = 0.0;
        }
    }
    if (tail_pi < 0.0) {
        if (tail_pi < -kSlack) {
            throw std::runtime_error("stationary tail mass is negative");
        }
        tail_pi = 0.0;
    }
}

}  // namespace

ThresholdPolicy::ThresholdPolicy(int tau) : tau_(tau), infinite_(false) {
    if (tau < 0) throw std::invalid_argument("threshold tau must be >= 0");
}

ThresholdPolicy ThresholdPolicy::infinite() { return ThresholdPolicy(); }

int ThresholdPolicy::tau() const {
    if (infinite_) throw std::logic_error("infinite threshold has no finite tau");
    return tau_;
}

StationarySolution stationary_general(const SourceModel& src,
                                      const DelayModel& d, int tau) {
    if (tau < 1) {
        throw std::invalid_argument(
            "stationary_general covers 0 < tau < infinity; use stationary_tau0");
    }
    const int t_max = d.t_max();
    const int omega = t_max + tau + 1;
    const int n = omega + 1;  // unknowns: pi_0..pi_{omega-1}, Pi
    const double p = src.p;
    const double et = expected_transmission_time(d);

    auto tx = [&](int from, int to) {
        return epoch_prob(src, d, from, to, Action::Transmit);
    };

    // One balance row per pi_Delta, the lumped tail row, and the occupancy
    // identity: omega+2 consistent equations in omega+1 unknowns.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(omega + 2, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(omega + 2);

    // Transmitting states are Delta >= tau plus the tail; several rows carry
    // a common coefficient on that whole block.
    auto add_transmit_block = [&](int row, double coeff) {
        for (int i = tau; i <= omega - 1; ++i) A(row, i) += coeff;
        A(row, omega) += coeff;
    };

    // pi_0 row.
    A(0, 0) += 1.0 - (1.0 - p);
    for (int i = 1; i <= tau - 1; ++i) A(0, i) -= p;
    add_transmit_block(0, -tx(1, 0));

    // pi_1 row.
    A(1, 1) += 1.0;
    A(1, 0) -= p;
    add_transmit_block(1, -tx(1, 1));

    // pi_Delta rows, 2 <= Delta <= t_max-1: reachable both by the idle climb
    // (when Delta-1 is below the threshold) and by transmission epochs.
    for (int delta = 2; delta <= t_max - 1; ++delta) {
        A(delta, delta) += 1.0;
        if (delta - 1 < tau) {
            A(delta, delta - 1) -= 1.0 - p;
            add_transmit_block(delta, -tx(tau, delta));
        } else {
            for (int i = tau; i <= delta - 1; ++i) A(delta, i) -= tx(i, delta);
            const double c = tx(delta, delta);
            for (int i = delta; i <= omega - 1; ++i) A(delta, i) -= c;
            A(delta, omega) -= c;
        }
    }

    // pi_Delta rows, t_max <= Delta <= omega-1: only climbs can land here.
    for (int delta = t_max; delta <= omega - 1; ++delta) {
        A(delta, delta) += 1.0;
        if (delta - 1 < tau) {
            A(delta, delta - 1) -= 1.0 - p;
        } else {
            for (int i = tau; i <= delta - 1; ++i) A(delta, i) -= tx(i, delta);
        }
    }

    // Tail row.
    A(omega, omega) += 1.0;
    for (int i = tau + 1; i <= omega - 1; ++i) {
        double c = 0.0;
        for (int k = tau + 1; k <= i; ++k) c += tx(i, t_max + k);
        A(omega, i) -= c;
    }
    double stay = 0.0;
    for (int i = 1; i <= t_max; ++i) stay += tx(omega, omega + i);
    A(omega, omega) -= stay;

    // Occupancy identity: idle slots count once, transmissions hold the
    // channel for ET slots on average.
    for (int i = 0; i <= tau - 1; ++i) A(omega + 1, i) += 1.0;
    add_transmit_block(omega + 1, et);
    b(omega + 1) = 1.0;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < n) {
        throw std::runtime_error("stationary balance system is singular");
    }
    Eigen::VectorXd x = qr.solve(b);
    const double residual = (A * x - b).cwiseAbs().maxCoeff();

    StationarySolution sol;
    sol.tau = tau;
    sol.pi.assign(x.data(), x.data() + omega);
    sol.tail_pi = x(omega);
    check_nonnegative(sol.pi, sol.tail_pi);
    sol.residual = residual;
    sol.normalization_residual = eq11_residual(d, tau, sol.pi, sol.tail_pi);
    return sol;
}

StationarySolution stationary_tau0(const SourceModel& src, const DelayModel& d) {
    const int t_max = d.t_max();
    const double et = expected_transmission_time(d);
    auto tx = [&](int from, int to) {
        return epoch_prob(src, d, from, to, Action::Transmit);
    };

    StationarySolution sol;
    sol.tau = 0;
    sol.pi.assign(static_cast<std::size_t>(t_max) + 1, 0.0);  // omega = t_max+1

    sol.pi[0] = tx(1, 0) / (et * (1.0 - tx(0, 0) + tx(1, 0)));
    double head = sol.pi[0];
    for (int delta = 1; delta <= t_max; ++delta) {
        double v = 0.0;
        for (int i = 0; i <= delta - 1; ++i) {
            v += tx(i, delta) * sol.pi[static_cast<std::size_t>(i)];
        }
        v += tx(delta, delta) * (1.0 / et - head);
        sol.pi[static_cast<std::size_t>(delta)] = v;
        head += v;
    }

    double num = 0.0;
    for (int i = 1; i <= t_max; ++i) {
        double c = 0.0;
        for (int k = 1; k <= i; ++k) c += tx(i, t_max + k);
        num += c * sol.pi[static_cast<std::size_t>(i)];
    }
    double stay = 0.0;
    for (int i = 1; i <= t_max; ++i) stay += tx(t_max + 1, t_max + 1 + i);
    sol.tail_pi = num / (1.0 - stay);

    check_nonnegative(sol.pi, sol.tail_pi);
    sol.normalization_residual = eq11_residual(d, 0, sol.pi, sol.tail_pi);
    return sol;
}

StationarySolution stationary_tau1(const SourceModel& src, const DelayModel& d) {
    const int t_max = d.t_max();
    const double p = src.p;
    const double et = expected_transmission_time(d);
    auto tx = [&](int from, int to) {
        return epoch_prob(src, d, from, to, Action::Transmit);
    };

    StationarySolution sol;
    sol.tau = 1;
    sol.pi.assign(static_cast<std::size_t>(t_max) + 2, 0.0);  // omega = t_max+2

    const double denom = p * et + tx(1, 0);
    sol.pi[0] = tx(1, 0) / denom;
    sol.pi[1] = (p * tx(1, 0) + p * tx(1, 1)) / denom;

    double trans_head = sol.pi[1];  // sum of pi_i over transmitting i < Delta
    for (int delta = 2; delta <= t_max + 1; ++delta) {
        double v = 0.0;
        for (int i = 1; i <= delta - 1; ++i) {
            v += tx(i, delta) * sol.pi[static_cast<std::size_t>(i)];
        }
        v += tx(delta, delta) * ((1.0 - sol.pi[0]) / et - trans_head);
        sol.pi[static_cast<std::size_t>(delta)] = v;
        trans_head += v;
    }

    double num = 0.0;
    for (int i = 2; i <= t_max + 1; ++i) {
        double c = 0.0;
        for (int k = 2; k <= i; ++k) c += tx(i, t_max + k);
        num += c * sol.pi[static_cast<std::size_t>(i)];
    }
    double stay = 0.0;
    for (int i = 1; i <= t_max; ++i) stay += tx(t_max + 2, t_max + 2 + i);
    sol.tail_pi = num / (1.0 - stay);

    check_nonnegative(sol.pi, sol.tail_pi);
    sol.normalization_residual = eq11_residual(d, 1, sol.pi, sol.tail_pi);
    return sol;
}

double tail_cost_sigma(const SourceModel& src, const DelayModel& d, int tau,
                       const StationarySolution& sol) {
    const int t_max = d.t_max();
    const int omega = sol.omega();
    if (omega != t_max + tau + 1) {
        throw std::invalid_argument("stationary solution does not match tau");
    }
    EpochCostTable costs(src, d, omega + t_max);

    double num = 0.0;
    double den = 1.0;
    if (d.variant() == DelayVariant::GuaranteedDelivery) {
        for (int t = 1; t <= t_max; ++t) {
            const double climb = d.pmf(t) * epoch_prob_tx_given_t(src, 1, 1 + t, t);
            double weighted = 0.0;
            double mass = sol.tail_pi;
            for (int i = omega - t; i <= omega - 1; ++i) {
                weighted += costs.transmit(i) * sol.pi[static_cast<std::size_t>(i)];
                mass += sol.pi[static_cast<std::size_t>(i)];
            }
            const double pi_t = climb * mass;
            num += climb * weighted + cost_shift(src, d, t) * pi_t;
            den -= climb;
        }
    } else {
        auto upsilon = [&](int delta, int t) {
            return d.pmf(t) * epoch_prob_tx_given_t(src, delta - t, delta, t) +
                   d.p_tail() * epoch_prob_tx_discard(src, d, delta - t, delta);
        };
        for (int t = 1; t <= t_max; ++t) {
            double weighted = 0.0;
            double pi_t = upsilon(omega + t, t) * sol.tail_pi;
            for (int i = omega - t; i <= omega - 1; ++i) {
                const double u = upsilon(i + t, t);
                weighted += u * costs.transmit(i) * sol.pi[static_cast<std::size_t>(i)];
                pi_t += u * sol.pi[static_cast<std::size_t>(i)];
            }
            num += weighted + cost_shift(src, d, t) * pi_t;
            den -= upsilon(omega + t, t);
        }
    }
    if (!(den > 0.0)) {
        throw std::runtime_error("tail cost denominator is not positive");
    }
    return num / den;
}

EvaluationReport expected_aoii(const SourceModel& src, const DelayModel& d,
                               const ThresholdPolicy& policy) {
    EvaluationReport report;
    report.policy = policy;
    if (policy.is_infinite()) {
        report.expected_aoii = 1.0 / (2.0 * src.p);
        return report;
    }
    const int tau = policy.tau();
    StationarySolution sol;
    if (tau == 0) {
        sol = stationary_tau0(src, d);
    } else if (tau == 1) {
        sol = stationary_tau1(src, d);
    } else {
        sol = stationary_general(src, d, tau);
    }
    const double sigma_tail = tail_cost_sigma(src, d, tau, sol);
    EpochCostTable costs(src, d, sol.omega());

    double value = 0.0;
    for (int i = 0; i < sol.omega(); ++i) {
        const Action a = (i < tau) ? Action::Idle : Action::Transmit;
        value += costs.cost(i, a) * sol.pi[static_cast<std::size_t>(i)];
    }
    value += sigma_tail;

    report.expected_aoii = value;
    report.tail_cost = sigma_tail;
    report.stationary = std::move(sol);
    return report;
}

}  // namespace aoii

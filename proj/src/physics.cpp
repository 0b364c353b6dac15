#include "risopt/physics.hpp"

#include <algorithm>
#include <cmath>

namespace risopt {

int ElementAssignment::active_count() const {
    int n = 0;
    for (const auto& row : eps_) n += row[0] + row[1];
    return n;
}

int ElementAssignment::active_count(int user) const {
    int n = 0;
    for (const auto& row : eps_) n += row[user];
    return n;
}

bool ElementAssignment::exclusive() const {
    for (const auto& row : eps_) {
        if (row[0] + row[1] > 1) return false;
    }
    return true;
}

std::string violation_name(Violation v) {
    switch (v) {
        case Violation::power_bounds: return "power_bounds";
        case Violation::exclusivity: return "exclusivity";
        case Violation::rate_user1: return "rate_user1";
        case Violation::rate_user2: return "rate_user2";
        case Violation::energy_causality: return "energy_causality";
        case Violation::battery_capacity: return "battery_capacity";
    }
    return "unknown";
}

double rate_snr_threshold(const ScenarioConfig& config) {
    return (std::exp2(config.r_th) - 1.0) * config.sigma2;
}

double received_amplitude(int user, const ElementAssignment& assignment,
                          const ChannelRealization& channels,
                          const ScenarioConfig& config) {
    double sum = 0.0;
    const auto& cascade = channels.cascade[user];
    for (int n = 0; n < assignment.size(); ++n) {
        if (assignment.reflects_toward(n, user)) sum += cascade[n];
    }
    return channels.h_direct + config.alpha * sum;
}

double achievable_rate(int user, const ElementAssignment& assignment,
                       const PowerAllocation& power,
                       const ChannelRealization& channels,
                       const ScenarioConfig& config) {
    const double amp = received_amplitude(user, assignment, channels, config);
    const double p_other = power.p[1 - user];
    return std::log2(1.0 + p_other * amp * amp / config.sigma2);
}

double ris_consumption(const ElementAssignment& assignment,
                       const ScenarioConfig& config) {
    return config.t_s * config.p_e * assignment.active_count();
}

double harvest_energy(double theta, const ScenarioConfig& config) {
    return config.t_s * config.eta * theta;
}

BatteryState battery_update(BatteryState prev, double harvested,
                            double consumed, const ScenarioConfig& config) {
    double next = prev.stored + harvested - consumed;
    next = std::max(0.0, next);
    next = std::min(config.battery_capacity, next);
    return BatteryState{next};
}

std::array<double, 2> user_energy(const PowerAllocation& power,
                                  const ScenarioConfig& config) {
    return {config.t_s * power.p[0], config.t_s * power.p[1]};
}

double objective_value(const ElementAssignment& assignment,
                       const PowerAllocation& power,
                       const ScenarioConfig& config) {
    const auto eu = user_energy(power, config);
    return config.zeta * ris_consumption(assignment, config) +
           (1.0 - config.zeta) * (eu[0] + eu[1]);
}

FeasibilityReport check_feasible(const ElementAssignment& assignment,
                                 const PowerAllocation& power,
                                 BatteryState battery_before, double theta,
                                 const ChannelRealization& channels,
                                 const ScenarioConfig& config) {
    FeasibilityReport report;
    for (int i = 0; i < 2; ++i) {
        if (power.p[i] < config.p_min - kFeasTol ||
            power.p[i] > config.p_max + kFeasTol) {
            report.violations.push_back(Violation::power_bounds);
            break;
        }
    }
    if (!assignment.exclusive()) {
        report.violations.push_back(Violation::exclusivity);
    }
    for (int i = 0; i < 2; ++i) {
        const double rate =
            achievable_rate(i, assignment, power, channels, config);
        if (rate < config.r_th - kFeasTol) {
            report.violations.push_back(i == 0 ? Violation::rate_user1
                                               : Violation::rate_user2);
        }
    }
    if (ris_consumption(assignment, config) >
        battery_before.stored + kFeasTol) {
        report.violations.push_back(Violation::energy_causality);
    }
    if (battery_before.stored + harvest_energy(theta, config) >
        config.battery_capacity + kFeasTol) {
        report.violations.push_back(Violation::battery_capacity);
    }
    report.feasible = report.violations.empty();
    return report;
}

}  // namespace risopt

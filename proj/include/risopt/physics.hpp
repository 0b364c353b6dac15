#ifndef RISOPT_PHYSICS_HPP_
#define RISOPT_PHYSICS_HPP_

#include <array>
#include <string>
#include <vector>

#include "risopt/scenario.hpp"

namespace risopt {

/// Which user each panel element reflects toward. Stored as an N x 2
/// binary matrix so that exclusivity (at most one direction per
/// element) is a checkable property, not a structural given.
class ElementAssignment {
public:
    ElementAssignment() = default;
    explicit ElementAssignment(int n_elements)
        : eps_(static_cast<std::size_t>(n_elements), {0, 0}) {}

    int size() const { return static_cast<int>(eps_.size()); }

    bool reflects_toward(int element, int user) const {
        return eps_[element][user] != 0;
    }
    void set(int element, int user, bool on) {
        eps_[element][user] = on ? 1 : 0;
    }

    int active_count() const;
    int active_count(int user) const;

    /// True when no element serves both directions at once.
    bool exclusive() const;

    bool operator==(const ElementAssignment&) const = default;

private:
    std::vector<std::array<std::uint8_t, 2>> eps_;
};

struct PowerAllocation {
    std::array<double, 2> p{0.0, 0.0};  // W

    bool operator==(const PowerAllocation&) const = default;
};

struct BatteryState {
    double stored = 0.0;  // J
};

enum class Violation {
    power_bounds,
    exclusivity,
    rate_user1,
    rate_user2,
    energy_causality,
    battery_capacity,
};

std::string violation_name(Violation v);

struct FeasibilityReport {
    bool feasible = false;
    std::vector<Violation> violations;
};

/// Everything recorded for one solved (or unsolvable) slot.
struct SlotOutcome {
    ElementAssignment assignment;
    PowerAllocation power;
    std::array<double, 2> rates{0.0, 0.0};  // bit/s/Hz
    double e_ris = 0.0;                     // J
    std::array<double, 2> e_users{0.0, 0.0};
    double objective = 0.0;
    BatteryState battery_after;
    bool feasible = false;
};

/// Peak SNR numerator threshold: (2^r_th - 1) * sigma2. The rate
/// constraint toward user i reads  p * amp^2 >= this.
double rate_snr_threshold(const ScenarioConfig& config);

/// Received amplitude toward `user`: h_direct plus alpha times the sum
/// of the cascade amplitudes of the elements assigned to that user.
double received_amplitude(int user, const ElementAssignment& assignment,
                          const ChannelRealization& channels,
                          const ScenarioConfig& config);

/// Spectral efficiency toward `user` (driven by the other user's
/// transmit power): log2(1 + p * amp^2 / sigma2). All selected
/// reflections add coherently with the direct path.
double achievable_rate(int user, const ElementAssignment& assignment,
                       const PowerAllocation& power,
                       const ChannelRealization& channels,
                       const ScenarioConfig& config);

/// Panel energy for the slot: t_s * p_e * (active element count).
double ris_consumption(const ElementAssignment& assignment,
                       const ScenarioConfig& config);

/// Energy banked from an arrival of theta Watts: t_s * eta * theta.
double harvest_energy(double theta, const ScenarioConfig& config);

/// Harvest-store-use step, clamped into [0, battery_capacity]. Excess
/// harvest beyond capacity is discarded.
BatteryState battery_update(BatteryState prev, double harvested,
                            double consumed, const ScenarioConfig& config);

std::array<double, 2> user_energy(const PowerAllocation& power,
                                  const ScenarioConfig& config);

/// zeta-weighted mix of panel energy and summed user energy.
double objective_value(const ElementAssignment& assignment,
                       const PowerAllocation& power,
                       const ScenarioConfig& config);

/// Checks every per-slot constraint at the given point: power bounds,
/// element exclusivity, both rate thresholds, panel energy causality
/// against the stored energy, and the harvest capacity gate.
FeasibilityReport check_feasible(const ElementAssignment& assignment,
                                 const PowerAllocation& power,
                                 BatteryState battery_before, double theta,
                                 const ChannelRealization& channels,
                                 const ScenarioConfig& config);

/// Absolute tolerance used for all feasibility comparisons.
inline constexpr double kFeasTol = 1e-9;

}  // namespace risopt

#endif  // RISOPT_PHYSICS_HPP_

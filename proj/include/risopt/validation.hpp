#ifndef RISOPT_VALIDATION_HPP_
#define RISOPT_VALIDATION_HPP_

#include <cstdint>
#include <iosfwd>

#include "risopt/physics.hpp"
#include "risopt/scenario.hpp"

namespace risopt::validation {

/// One randomized small instance for solver cross-checks.
struct Instance {
    ScenarioConfig config;
    ChannelRealization channels;
    BatteryState battery;
    double theta = 0.0;
};

/// Draws a small instance around the default link-budget constants.
/// The rate threshold is placed against the panel's total cascade
/// budget, stratified by index: panel-binding thresholds, slack
/// thresholds under the panel-energy objective, and unreachable
/// thresholds, with occasional near-empty batteries throughout, so the
/// set spans feasible and infeasible instances.
Instance random_small_instance(Rng& rng, int n_max, int index);

struct ExactCheckStats {
    int instances = 0;
    int feasible = 0;
    int infeasible = 0;
    int mismatches = 0;
    double max_objective_diff = 0.0;
    double max_residual = 0.0;  // worst constraint violation at optima
    long max_nodes = 0;
};

/// solve_exact vs the exhaustive oracle on `instances` random draws.
ExactCheckStats check_exact_vs_oracle(int n_max, int instances,
                                      std::uint64_t seed);

struct BendersCheckStats {
    int instances = 0;
    int feasible = 0;
    int infeasible = 0;
    int unsound = 0;        // benders feasible where the oracle is not,
                            // below-optimal objective, or constraint breach
    int nonmonotone = 0;    // traces with an increasing upper bound
    double mean_gap = 0.0;  // relative to the exact optimum
    double max_gap = 0.0;
};

/// Decomposition soundness and gap measurement against solve_exact on
/// the same instance stream as check_exact_vs_oracle.
BendersCheckStats check_benders(int n_max, int instances, std::uint64_t seed);

/// Runs both checks, prints a short report, returns true when clean.
bool run_validation(int n_max, int instances, std::uint64_t seed,
                    std::ostream& out);

}  // namespace risopt::validation

#endif  // RISOPT_VALIDATION_HPP_

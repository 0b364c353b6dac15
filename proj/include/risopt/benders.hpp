#ifndef RISOPT_BENDERS_HPP_
#define RISOPT_BENDERS_HPP_

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "risopt/milp.hpp"
#include "risopt/physics.hpp"
#include "risopt/scenario.hpp"

namespace risopt::benders {

struct MasterSolution {
    milp::SolveStatus status = milp::SolveStatus::infeasible;
    ElementAssignment assignment;
    double e_ris = 0.0;  // J, the master objective
};

struct AuxSolution {
    milp::SolveStatus status = milp::SolveStatus::infeasible;
    PowerAllocation power;
    std::array<double, 2> e_users{0.0, 0.0};
    std::string diagnosis;  // set when infeasible
};

struct BendersIteration {
    int iteration = 0;
    PowerAllocation p_bar;
    ElementAssignment assignment;
    double master_objective = 0.0;  // panel energy
    double aux_objective = 0.0;     // summed user energy
    double combined_objective = 0.0;
    double lower_bound = 0.0;
    double upper_bound = 0.0;
};

struct BendersTrace {
    std::vector<BendersIteration> iterations;
};

void write_trace_csv(const BendersTrace& trace, std::ostream& out);

/// Element-selection subproblem at fixed powers: the fewest active
/// elements such that each direction's received amplitude reaches its
/// square-root rate target, subject to exclusivity and the stored
/// energy budget. Solved exactly: greedy per direction in descending
/// cascade order, with branch-and-bound over contested elements.
MasterSolution solve_master(const PowerAllocation& p_bar,
                            const ChannelRealization& channels,
                            BatteryState battery_before, double theta,
                            const ScenarioConfig& config);

/// Power-selection subproblem at a fixed assignment, in closed form:
/// each serving power is the rate constraint turned into an equality,
/// clipped up to p_min; infeasible beyond p_max or with no path.
AuxSolution solve_auxiliary(const ElementAssignment& eps_bar,
                            const ChannelRealization& channels,
                            BatteryState battery_before, double theta,
                            const ScenarioConfig& config);

struct BendersResult {
    SlotOutcome outcome;
    BendersTrace trace;
};

/// Alternates master and auxiliary solves starting from full power,
/// tracking scalarized bounds; stops on a small relative gap, a
/// repeated iterate, or max_iter. Returns the best feasible slot seen.
BendersResult benders_iterate(const ChannelRealization& channels,
                              BatteryState battery_before, double theta,
                              const ScenarioConfig& config, double tol = 1e-4,
                              int max_iter = 50);

}  // namespace risopt::benders

#endif  // RISOPT_BENDERS_HPP_

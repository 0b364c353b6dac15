#ifndef RISOPT_SIM_HPP_
#define RISOPT_SIM_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "risopt/benders.hpp"
#include "risopt/milp.hpp"
#include "risopt/physics.hpp"
#include "risopt/scenario.hpp"

namespace risopt {

enum class SolverKind { exact, benders };

SolverKind solver_from_name(const std::string& name);
std::string solver_name(SolverKind kind);

struct EpisodeResult {
    std::vector<SlotOutcome> slots;
    std::vector<double> theta;               // arrival draw per slot, W
    std::vector<double> battery_trajectory;  // size n_slots + 1, J
    double e_users_total = 0.0;
    double e_ris_total = 0.0;
    double objective_total = 0.0;
    double mean_active_elements = 0.0;
    int infeasible_slots = 0;
};

struct SweepPoint {
    std::vector<std::pair<std::string, double>> params;
    double e_users_mean = 0.0;
    double e_ris_mean = 0.0;
    double objective_mean = 0.0;
    double elements_mean = 0.0;
    double infeasible_rate = 0.0;
    int scenarios = 0;
};

struct SweepParameter {
    std::string key;  // any numeric config key, plus ris_x / ris_y
    std::vector<double> values;
};

/// Solves one slot with the chosen solver. An unsolvable slot is
/// recorded best-effort: powers at p_max, all affordable elements
/// split to balance the two directions, no panel energy consumed.
SlotOutcome solve_slot(const ChannelRealization& channels,
                       BatteryState battery_before, double theta,
                       const ScenarioConfig& config, SolverKind solver);

/// One scenario: draw channels once, then per slot draw the arrival,
/// solve given the stored energy, and propagate the battery. Harvest
/// beyond the battery capacity is discarded before the solver sees the
/// slot. Deterministic given (config, solver, seed).
EpisodeResult run_episode(const ScenarioConfig& config, SolverKind solver,
                          std::uint64_t seed);

/// Applies one sweep value to a config copy.
void apply_sweep_value(ScenarioConfig& config, const std::string& key,
                       double value);

/// Cartesian sweep over the parameter grid; each grid point averages
/// `scenarios` episodes seeded seed, seed+1, ... Episodes run in
/// parallel with OpenMP; results are identical to run_sweep_serial.
std::vector<SweepPoint> run_sweep(const ScenarioConfig& base,
                                  const std::vector<SweepParameter>& grid,
                                  int scenarios, SolverKind solver);

/// Single-threaded reference implementation of run_sweep.
std::vector<SweepPoint> run_sweep_serial(const ScenarioConfig& base,
                                         const std::vector<SweepParameter>& grid,
                                         int scenarios, SolverKind solver);

void write_episode_csv(const EpisodeResult& episode, std::ostream& out);
void write_sweep_csv(const std::vector<SweepPoint>& points, std::ostream& out);

}  // namespace risopt

#endif  // RISOPT_SIM_HPP_

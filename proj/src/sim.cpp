#include "risopt/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace risopt {

SolverKind solver_from_name(const std::string& name) {
    if (name == "exact") return SolverKind::exact;
    if (name == "benders") return SolverKind::benders;
    throw std::invalid_argument("unknown solver '" + name +
                                "' (expected exact or benders)");
}

std::string solver_name(SolverKind kind) {
    return kind == SolverKind::exact ? "exact" : "benders";
}

namespace {

// Best-effort record for a slot no solver can satisfy: transmit at
// peak power and stand up every affordable element, splitting them to
// balance the two directions' amplitudes.
SlotOutcome infeasible_record(const ChannelRealization& channels,
                              BatteryState battery_before, double theta,
                              const ScenarioConfig& config) {
    SlotOutcome out;
    const int n = config.n_elements;
    out.assignment = ElementAssignment(n);
    out.power = PowerAllocation{{config.p_max, config.p_max}};

    int budget = n;
    const double per_element = config.t_s * config.p_e;
    if (per_element > 0.0) {
        budget = static_cast<int>(std::min<double>(
            n, std::floor((battery_before.stored + kFeasTol) / per_element)));
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return std::max(channels.cascade[0][a], channels.cascade[1][a]) >
               std::max(channels.cascade[0][b], channels.cascade[1][b]);
    });
    std::array<double, 2> amp{channels.h_direct, channels.h_direct};
    for (int k = 0; k < budget && k < n; ++k) {
        const int d = amp[0] <= amp[1] ? 0 : 1;
        out.assignment.set(order[k], d, true);
        amp[d] += config.alpha * channels.cascade[d][order[k]];
    }

    for (int d = 0; d < 2; ++d) {
        out.rates[d] =
            achievable_rate(d, out.assignment, out.power, channels, config);
    }
    out.e_ris = 0.0;  // nothing consumed on a slot that is not served
    out.e_users = user_energy(out.power, config);
    out.objective = config.zeta * out.e_ris +
                    (1.0 - config.zeta) * (out.e_users[0] + out.e_users[1]);
    out.battery_after = battery_update(
        battery_before, harvest_energy(theta, config), 0.0, config);
    out.feasible = false;
    return out;
}

}  // namespace

SlotOutcome solve_slot(const ChannelRealization& channels,
                       BatteryState battery_before, double theta,
                       const ScenarioConfig& config, SolverKind solver) {
    if (solver == SolverKind::benders) {
        auto result =
            benders::benders_iterate(channels, battery_before, theta, config);
        if (result.outcome.feasible) return result.outcome;
        return infeasible_record(channels, battery_before, theta, config);
    }
    const auto program =
        milp::build_program(channels, battery_before, theta, config);
    const auto report = milp::solve_exact(program);
    if (report.status != milp::SolveStatus::optimal) {
        return infeasible_record(channels, battery_before, theta, config);
    }
    SlotOutcome out;
    out.assignment = report.assignment;
    out.power = report.power;
    for (int d = 0; d < 2; ++d) {
        out.rates[d] =
            achievable_rate(d, report.assignment, report.power, channels,
                            config);
    }
    out.e_ris = ris_consumption(report.assignment, config);
    out.e_users = user_energy(report.power, config);
    out.objective = report.objective;
    out.battery_after = battery_update(
        battery_before, harvest_energy(theta, config), out.e_ris, config);
    out.feasible = true;
    return out;
}

EpisodeResult run_episode(const ScenarioConfig& config, SolverKind solver,
                          std::uint64_t seed) {
    config.validate();
    EpisodeResult episode;
    Rng rng(seed);
    const ChannelRealization channels = sample_channels(config, rng);

    BatteryState battery{config.battery_initial};
    episode.battery_trajectory.push_back(battery.stored);

    for (int t = 0; t < config.n_slots; ++t) {
        const double theta = sample_energy_arrival(config, rng);
        const double e_h = harvest_energy(theta, config);
        // overflow harvest is discarded, never a constraint on the slot
        const double usable =
            std::min(e_h, std::max(0.0, config.battery_capacity -
                                            battery.stored));
        const double theta_eff =
            e_h > 0.0 ? theta * (usable / e_h) : theta;

        SlotOutcome outcome =
            solve_slot(channels, battery, theta_eff, config, solver);
        const double consumed = outcome.feasible ? outcome.e_ris : 0.0;
        battery = battery_update(battery, e_h, consumed, config);
        outcome.battery_after = battery;

        episode.theta.push_back(theta);
        episode.battery_trajectory.push_back(battery.stored);
        episode.e_users_total += outcome.e_users[0] + outcome.e_users[1];
        episode.e_ris_total += outcome.e_ris;
        episode.objective_total += outcome.objective;
        episode.mean_active_elements += outcome.assignment.active_count();
        if (!outcome.feasible) ++episode.infeasible_slots;
        episode.slots.push_back(std::move(outcome));
    }
    episode.mean_active_elements /= config.n_slots;
    return episode;
}

void apply_sweep_value(ScenarioConfig& config, const std::string& key,
                       double value) {
    if (key == "ris_x") {
        config.ris_pos.x = value;
    } else if (key == "ris_y") {
        config.ris_pos.y = value;
    } else {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", value);
        apply_setting(config, key, buf);
    }
}

namespace {

struct SweepJob {
    int point_index;
    std::uint64_t seed;
    ScenarioConfig config;
};

struct EpisodeTotals {
    double e_users = 0.0;
    double e_ris = 0.0;
    double objective = 0.0;
    double elements = 0.0;
    double infeasible_rate = 0.0;
};

EpisodeTotals reduce_episode(const EpisodeResult& episode, int n_slots) {
    return {episode.e_users_total, episode.e_ris_total,
            episode.objective_total, episode.mean_active_elements,
            static_cast<double>(episode.infeasible_slots) / n_slots};
}

std::vector<SweepPoint> sweep_impl(const ScenarioConfig& base,
                                   const std::vector<SweepParameter>& grid,
                                   int scenarios, SolverKind solver,
                                   bool parallel) {
    if (grid.empty()) {
        throw std::invalid_argument("run_sweep: empty sweep grid");
    }
    for (const auto& param : grid) {
        if (param.values.empty()) {
            throw std::invalid_argument("run_sweep: no values for parameter " +
                                        param.key);
        }
    }
    if (scenarios < 1) {
        throw std::invalid_argument("run_sweep: need at least one scenario");
    }

    // expand the cartesian grid, last parameter fastest
    std::vector<SweepPoint> points;
    std::vector<std::size_t> index(grid.size(), 0);
    bool done = false;
    while (!done) {
        SweepPoint point;
        point.scenarios = scenarios;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            point.params.emplace_back(grid[k].key, grid[k].values[index[k]]);
        }
        points.push_back(std::move(point));
        done = true;
        for (std::size_t k = grid.size(); k-- > 0;) {
            if (++index[k] < grid[k].values.size()) {
                done = false;
                break;
            }
            index[k] = 0;
        }
    }

    std::vector<SweepJob> jobs;
    jobs.reserve(points.size() * scenarios);
    for (std::size_t p = 0; p < points.size(); ++p) {
        ScenarioConfig config = base;
        for (const auto& [key, value] : points[p].params) {
            apply_sweep_value(config, key, value);
        }
        config.validate();
        for (int s = 0; s < scenarios; ++s) {
            jobs.push_back(
                {static_cast<int>(p), base.seed + static_cast<std::uint64_t>(s),
                 config});
        }
    }

    std::vector<EpisodeTotals> totals(jobs.size());
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            const auto episode =
                run_episode(jobs[j].config, solver, jobs[j].seed);
            totals[j] = reduce_episode(episode, jobs[j].config.n_slots);
        }
    } else {
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            const auto episode =
                run_episode(jobs[j].config, solver, jobs[j].seed);
            totals[j] = reduce_episode(episode, jobs[j].config.n_slots);
        }
    }

    // deterministic aggregation in job order
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        SweepPoint& point = points[jobs[j].point_index];
        point.e_users_mean += totals[j].e_users;
        point.e_ris_mean += totals[j].e_ris;
        point.objective_mean += totals[j].objective;
        point.elements_mean += totals[j].elements;
        point.infeasible_rate += totals[j].infeasible_rate;
    }
    for (auto& point : points) {
        point.e_users_mean /= scenarios;
        point.e_ris_mean /= scenarios;
        point.objective_mean /= scenarios;
        point.elements_mean /= scenarios;
        point.infeasible_rate /= scenarios;
    }
    return points;
}

}  // namespace

std::vector<SweepPoint> run_sweep(const ScenarioConfig& base,
                                  const std::vector<SweepParameter>& grid,
                                  int scenarios, SolverKind solver) {
    return sweep_impl(base, grid, scenarios, solver, true);
}

std::vector<SweepPoint> run_sweep_serial(const ScenarioConfig& base,
                                         const std::vector<SweepParameter>& grid,
                                         int scenarios, SolverKind solver) {
    return sweep_impl(base, grid, scenarios, solver, false);
}

void write_episode_csv(const EpisodeResult& episode, std::ostream& out) {
    out << std::setprecision(12);
    out << "slot,theta_w,battery_before_j,battery_after_j,feasible,"
           "p1_w,p2_w,rate1,rate2,active_u1,active_u2,e_ris_j,e_users_j,"
           "objective_j\n";
    for (std::size_t t = 0; t < episode.slots.size(); ++t) {
        const SlotOutcome& s = episode.slots[t];
        out << (t + 1) << ',' << episode.theta[t] << ','
            << episode.battery_trajectory[t] << ','
            << episode.battery_trajectory[t + 1] << ',' << (s.feasible ? 1 : 0)
            << ',' << s.power.p[0] << ',' << s.power.p[1] << ',' << s.rates[0]
            << ',' << s.rates[1] << ',' << s.assignment.active_count(0) << ','
            << s.assignment.active_count(1) << ',' << s.e_ris << ','
            << (s.e_users[0] + s.e_users[1]) << ',' << s.objective << '\n';
    }
}

void write_sweep_csv(const std::vector<SweepPoint>& points, std::ostream& out) {
    if (points.empty()) return;
    out << std::setprecision(12);
    for (const auto& [key, value] : points.front().params) {
        (void)value;
        out << key << ',';
    }
    out << "e_users_mean,e_ris_mean,objective_mean,elements_mean,"
           "infeasible_rate,scenarios\n";
    for (const auto& point : points) {
        for (const auto& [key, value] : point.params) {
            (void)key;
            out << value << ',';
        }
        out << point.e_users_mean << ',' << point.e_ris_mean << ','
            << point.objective_mean << ',' << point.elements_mean << ','
            << point.infeasible_rate << ',' << point.scenarios << '\n';
    }
}

}  // namespace risopt

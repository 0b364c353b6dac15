// Command-line front end: solve a single slot, run an episode, sweep a
// parameter grid to CSV, or run the built-in solver cross-checks.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "risopt/benders.hpp"
#include "risopt/milp.hpp"
#include "risopt/sim.hpp"
#include "risopt/validation.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> settings;
    std::string solver = "benders";
    std::string out_path;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_solver = true) {
    cmd->add_option("--config", opts.config_path,
                    "scenario config file (key=value lines)");
    cmd->add_option("--set", opts.settings,
                    "override a config key, e.g. --set r_th=5")
        ->take_all();
    if (with_solver) {
        cmd->add_option("--solver", opts.solver, "exact or benders")
            ->check(CLI::IsMember({"exact", "benders"}));
    }
    cmd->add_option("--out", opts.out_path, "output file (default: stdout)");
    cmd->add_option("--seed", opts.seed, "override the config seed");
}

risopt::ScenarioConfig resolve_config(const CommonOptions& opts) {
    risopt::ScenarioConfig config;
    if (!opts.config_path.empty()) {
        config = risopt::load_config(opts.config_path);
    }
    for (const auto& setting : opts.settings) {
        const auto eq = setting.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("--set expects key=value, got '" +
                                        setting + "'");
        }
        risopt::apply_setting(config, setting.substr(0, eq),
                              setting.substr(eq + 1));
    }
    if (opts.seed) config.seed = *opts.seed;
    config.validate();
    return config;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    return out;
}

std::vector<risopt::SweepParameter> parse_params(
    const std::vector<std::string>& raw) {
    std::vector<risopt::SweepParameter> grid;
    for (const auto& entry : raw) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(
                "--param expects key=v1,v2,..., got '" + entry + "'");
        }
        risopt::SweepParameter param;
        param.key = entry.substr(0, eq);
        std::string values = entry.substr(eq + 1);
        std::size_t pos = 0;
        while (pos <= values.size()) {
            const auto comma = values.find(',', pos);
            const std::string token =
                values.substr(pos, comma == std::string::npos ? std::string::npos
                                                              : comma - pos);
            if (token.empty()) {
                throw std::invalid_argument("--param " + param.key +
                                            ": empty value");
            }
            param.values.push_back(std::stod(token));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        grid.push_back(std::move(param));
    }
    return grid;
}

int run_solve_slot(const CommonOptions& opts, double theta,
                   const std::string& dump_path,
                   const std::string& trace_path) {
    const auto config = resolve_config(opts);
    risopt::Rng rng(config.seed);
    const auto channels = risopt::sample_channels(config, rng);
    const risopt::BatteryState battery{config.battery_initial};

    if (!dump_path.empty()) {
        const auto program =
            risopt::milp::build_program(channels, battery, theta, config);
        auto out = open_out(dump_path);
        risopt::milp::dump_lp(program, out);
    }
    if (!trace_path.empty()) {
        const auto result =
            risopt::benders::benders_iterate(channels, battery, theta, config);
        auto out = open_out(trace_path);
        risopt::benders::write_trace_csv(result.trace, out);
    }

    const auto solver = risopt::solver_from_name(opts.solver);
    const auto outcome =
        risopt::solve_slot(channels, battery, theta, config, solver);
    if (!outcome.feasible) {
        const auto report = risopt::check_feasible(
            outcome.assignment, outcome.power, battery, theta, channels,
            config);
        std::cerr << "slot infeasible; violations at the recorded point:";
        for (const auto v : report.violations) {
            std::cerr << ' ' << risopt::violation_name(v);
        }
        std::cerr << '\n';
    }

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!opts.out_path.empty()) {
        file = open_out(opts.out_path);
        out = &file;
    }
    *out << "feasible," << (outcome.feasible ? 1 : 0) << '\n'
         << "p1_w," << outcome.power.p[0] << '\n'
         << "p2_w," << outcome.power.p[1] << '\n'
         << "rate1," << outcome.rates[0] << '\n'
         << "rate2," << outcome.rates[1] << '\n'
         << "active_u1," << outcome.assignment.active_count(0) << '\n'
         << "active_u2," << outcome.assignment.active_count(1) << '\n'
         << "e_ris_j," << outcome.e_ris << '\n'
         << "e_users_j," << outcome.e_users[0] + outcome.e_users[1] << '\n'
         << "objective_j," << outcome.objective << '\n';
    return outcome.feasible ? 0 : 2;
}

int run_episode_cmd(const CommonOptions& opts) {
    const auto config = resolve_config(opts);
    const auto solver = risopt::solver_from_name(opts.solver);
    const auto episode = risopt::run_episode(config, solver, config.seed);
    if (opts.out_path.empty()) {
        risopt::write_episode_csv(episode, std::cout);
    } else {
        auto out = open_out(opts.out_path);
        risopt::write_episode_csv(episode, out);
    }
    std::cerr << "episode: " << episode.slots.size() << " slots, "
              << episode.infeasible_slots << " infeasible, user energy "
              << episode.e_users_total << " J, panel energy "
              << episode.e_ris_total << " J\n";
    return 0;
}

int run_sweep_cmd(const CommonOptions& opts,
                  const std::vector<std::string>& raw_params, int scenarios,
                  bool serial) {
    const auto config = resolve_config(opts);
    const auto solver = risopt::solver_from_name(opts.solver);
    const auto grid = parse_params(raw_params);
    const auto points =
        serial ? risopt::run_sweep_serial(config, grid, scenarios, solver)
               : risopt::run_sweep(config, grid, scenarios, solver);
    if (opts.out_path.empty()) {
        risopt::write_sweep_csv(points, std::cout);
    } else {
        auto out = open_out(opts.out_path);
        risopt::write_sweep_csv(points, out);
    }
    std::cerr << "sweep: " << points.size() << " grid points x " << scenarios
              << " scenarios (" << opts.solver << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
    if (const char* cap = std::getenv("RIS_OPT_THREADS")) {
        const int threads = std::atoi(cap);
        if (threads > 0) omp_set_num_threads(threads);
    }
#endif

    CLI::App app{"solar-powered reflecting panel link optimizer"};
    app.require_subcommand(1);

    CommonOptions slot_opts;
    double theta = 0.0;
    std::string dump_path;
    std::string trace_path;
    auto* slot_cmd =
        app.add_subcommand("solve-slot", "solve a single time slot");
    add_common(slot_cmd, slot_opts);
    slot_cmd->add_option("--theta", theta, "energy arrival during the slot, W");
    slot_cmd->add_option("--dump-lp", dump_path,
                         "write the linearized program in LP format");
    slot_cmd->add_option("--trace", trace_path,
                         "write the decomposition bound trace as CSV");

    CommonOptions episode_opts;
    auto* episode_cmd =
        app.add_subcommand("episode", "run one time-slotted scenario");
    add_common(episode_cmd, episode_opts);

    CommonOptions sweep_opts;
    std::vector<std::string> raw_params;
    int scenarios = 35;
    bool serial = false;
    auto* sweep_cmd =
        app.add_subcommand("sweep", "average episodes over a parameter grid");
    add_common(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--param", raw_params,
                          "sweep axis, e.g. --param ris_x=1,250,500")
        ->take_all();
    sweep_cmd->add_option("--scenarios", scenarios,
                          "episodes averaged per grid point");
    sweep_cmd->add_flag("--serial", serial,
                        "use the single-threaded reference path");

    CommonOptions validate_opts;
    int validate_n = 6;
    int validate_instances = 50;
    auto* validate_cmd = app.add_subcommand(
        "validate", "cross-check the solvers against exhaustive oracles");
    add_common(validate_cmd, validate_opts, /*with_solver=*/false);
    validate_cmd->add_option("--n", validate_n, "max element count (<= 6)")
        ->check(CLI::Range(2, 6));
    validate_cmd->add_option("--instances", validate_instances,
                             "random instances per check");

    CLI11_PARSE(app, argc, argv);

    try {
        if (slot_cmd->parsed()) {
            return run_solve_slot(slot_opts, theta, dump_path, trace_path);
        }
        if (episode_cmd->parsed()) {
            return run_episode_cmd(episode_opts);
        }
        if (sweep_cmd->parsed()) {
            return run_sweep_cmd(sweep_opts, raw_params, scenarios, serial);
        }
        if (validate_cmd->parsed()) {
            const std::uint64_t seed =
                validate_opts.seed ? *validate_opts.seed : 20240601ULL;
            const bool ok = risopt::validation::run_validation(
                validate_n, validate_instances, seed, std::cout);
            return ok ? 0 : 3;
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
    return 0;
}

#include "risopt/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace risopt::milp {

namespace {

// Relative slack accepted when a closed-form power sits at p_max; keeps
// the exact solver, the oracle and the decomposition classifying the
// same instances as feasible.
constexpr double kPowerRelTol = 1e-12;

constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct LeafSolve {
    bool feasible = false;
    PowerAllocation power;
    double objective = 0.0;
};

// Continuous optimum once the binaries are fixed: each serving power is
// the smallest value in [p_min, p_max] meeting its rate row.
LeafSolve solve_leaf(const std::array<double, 2>& amp, int active_count,
                     double battery, const ScenarioConfig& cfg) {
    LeafSolve out;
    if (cfg.t_s * cfg.p_e * active_count > battery + kFeasTol) return out;
    const double q = rate_snr_threshold(cfg);
    for (int user = 0; user < 2; ++user) {
        double p;
        if (q <= 0.0) {
            p = cfg.p_min;
        } else {
            if (amp[user] <= 0.0) return out;
            const double required = q / (amp[user] * amp[user]);
            if (required > cfg.p_max * (1.0 + kPowerRelTol)) return out;
            p = std::clamp(required, cfg.p_min, cfg.p_max);
        }
        out.power.p[1 - user] = p;
    }
    out.feasible = true;
    out.objective = cfg.zeta * cfg.t_s * cfg.p_e * active_count +
                    (1.0 - cfg.zeta) * cfg.t_s *
                        (out.power.p[0] + out.power.p[1]);
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::vector<std::pair<int, int>> ordered_pairs(int n) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(n) * (n - 1));
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y) {
            if (x != y) pairs.emplace_back(x, y);
        }
    }
    return pairs;
}

int LinearizedProgram::add_variable(std::string name, double lb, double ub,
                                    bool binary) {
    vars.push_back(Variable{std::move(name), lb, ub, binary});
    return static_cast<int>(vars.size()) - 1;
}

int linearize_binary_product(LinearizedProgram& prog, int x, int y,
                             const std::string& name) {
    const int z = prog.add_variable(name, 0.0, 1.0, true);
    prog.constraints.push_back(
        {name + "_le_x", {{z, 1.0}, {x, -1.0}}, Relation::le, 0.0});
    prog.constraints.push_back(
        {name + "_le_y", {{z, 1.0}, {y, -1.0}}, Relation::le, 0.0});
    prog.constraints.push_back(
        {name + "_ge_sum", {{z, 1.0}, {x, -1.0}, {y, -1.0}}, Relation::ge,
         -1.0});
    prog.binary_links.push_back({z, x, y});
    return z;
}

int linearize_continuous_binary(LinearizedProgram& prog, int power, int binary,
                                double p_max, const std::string& name) {
    const int pt = prog.add_variable(name, 0.0, p_max, false);
    prog.constraints.push_back(
        {name + "_le_p", {{pt, 1.0}, {power, -1.0}}, Relation::le, 0.0});
    prog.constraints.push_back(
        {name + "_ge_act", {{pt, 1.0}, {binary, -p_max}, {power, -1.0}},
         Relation::ge, -p_max});
    prog.constraints.push_back(
        {name + "_le_on", {{pt, 1.0}, {binary, -p_max}}, Relation::le, 0.0});
    prog.product_links.push_back({pt, power, binary});
    return pt;
}

LinearConstraint build_linearized_rate_constraint(
    int user, const ChannelRealization& channels, const ScenarioConfig& config,
    const RateVarRefs& refs) {
    const auto& cascade = channels.cascade[user];
    const int n = static_cast<int>(refs.ptilde.size());
    const double h = channels.h_direct;
    const double a = config.alpha;
    // normalize by sigma2 and by the SNR threshold (clamped below at 1)
    // so residuals are O(1) at any threshold and the absolute
    // feasibility tolerance stays meaningful
    const double snr_threshold = std::exp2(config.r_th) - 1.0;
    const double scale = config.sigma2 * std::max(snr_threshold, 1.0);

    LinearConstraint row;
    row.name = "rate_u" + std::to_string(user + 1);
    row.rel = Relation::ge;
    row.rhs = snr_threshold / std::max(snr_threshold, 1.0);

    row.terms.push_back({refs.power, h * h / scale});
    for (int e = 0; e < n; ++e) {
        const double he = cascade[e];
        row.terms.push_back(
            {refs.ptilde[e], (2.0 * a * h * he + a * a * he * he) / scale});
    }
    const auto pairs = ordered_pairs(n);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const double coeff =
            a * a * cascade[pairs[k].first] * cascade[pairs[k].second] / scale;
        row.terms.push_back({refs.pttilde[k], coeff});
    }
    return row;
}

LinearizedProgram build_program(const ChannelRealization& channels,
                                BatteryState battery_before, double theta,
                                const ScenarioConfig& config) {
    config.validate();
    const int n = config.n_elements;
    if (static_cast<int>(channels.cascade[0].size()) != n ||
        static_cast<int>(channels.cascade[1].size()) != n) {
        throw std::invalid_argument(
            "build_program: channel realization does not match n_elements");
    }

    LinearizedProgram prog;
    prog.config = config;
    prog.channels = channels;
    prog.battery_before = battery_before.stored;

    for (int i = 0; i < 2; ++i) {
        prog.power_var[i] = prog.add_variable("p_" + std::to_string(i + 1),
                                              config.p_min, config.p_max,
                                              false);
    }
    prog.eps_var.resize(n);
    for (int e = 0; e < n; ++e) {
        for (int u = 0; u < 2; ++u) {
            prog.eps_var[e][u] = prog.add_variable(
                "eps_u" + std::to_string(u + 1) + "_e" + std::to_string(e),
                0.0, 1.0, true);
        }
    }

    const auto pairs = ordered_pairs(n);
    for (int u = 0; u < 2; ++u) {
        RateVarRefs refs;
        refs.power = prog.power_var[1 - u];
        const std::string du = "_u" + std::to_string(u + 1);
        for (int e = 0; e < n; ++e) {
            refs.ptilde.push_back(linearize_continuous_binary(
                prog, refs.power, prog.eps_var[e][u], config.p_max,
                "pt" + du + "_e" + std::to_string(e)));
        }
        for (const auto& [x, y] : pairs) {
            const std::string suffix =
                du + "_" + std::to_string(x) + "_" + std::to_string(y);
            const int et = linearize_binary_product(
                prog, prog.eps_var[x][u], prog.eps_var[y][u], "et" + suffix);
            refs.pttilde.push_back(linearize_continuous_binary(
                prog, refs.power, et, config.p_max, "ptt" + suffix));
        }
        prog.rate_refs[u] = refs;
    }

    for (int u = 0; u < 2; ++u) {
        prog.rate_row[u] = static_cast<int>(prog.constraints.size());
        prog.constraints.push_back(
            build_linearized_rate_constraint(u, channels, config,
                                             prog.rate_refs[u]));
    }
    for (int e = 0; e < n; ++e) {
        prog.constraints.push_back({"excl_e" + std::to_string(e),
                                    {{prog.eps_var[e][0], 1.0},
                                     {prog.eps_var[e][1], 1.0}},
                                    Relation::le,
                                    1.0});
    }
    LinearConstraint causality;
    causality.name = "panel_energy";
    causality.rel = Relation::le;
    causality.rhs = battery_before.stored;
    for (int e = 0; e < n; ++e) {
        for (int u = 0; u < 2; ++u) {
            causality.terms.push_back(
                {prog.eps_var[e][u], config.t_s * config.p_e});
        }
    }
    prog.constraints.push_back(std::move(causality));

    for (int e = 0; e < n; ++e) {
        for (int u = 0; u < 2; ++u) {
            prog.objective.push_back(
                {prog.eps_var[e][u], config.zeta * config.t_s * config.p_e});
        }
    }
    for (int i = 0; i < 2; ++i) {
        prog.objective.push_back(
            {prog.power_var[i], (1.0 - config.zeta) * config.t_s});
    }

    prog.capacity_gate_ok =
        battery_before.stored + harvest_energy(theta, config) <=
        config.battery_capacity + kFeasTol;
    return prog;
}

std::vector<double> assemble_point(const LinearizedProgram& prog,
                                   const ElementAssignment& assignment,
                                   const PowerAllocation& power) {
    if (assignment.size() != static_cast<int>(prog.eps_var.size())) {
        throw std::invalid_argument("assemble_point: assignment size mismatch");
    }
    std::vector<double> point(prog.vars.size(), 0.0);
    for (int i = 0; i < 2; ++i) point[prog.power_var[i]] = power.p[i];
    for (int e = 0; e < assignment.size(); ++e) {
        for (int u = 0; u < 2; ++u) {
            point[prog.eps_var[e][u]] =
                assignment.reflects_toward(e, u) ? 1.0 : 0.0;
        }
    }
    // pairwise binaries first; the power products may reference them
    for (const auto& link : prog.binary_links) {
        point[link.product] = point[link.x] * point[link.y];
    }
    for (const auto& link : prog.product_links) {
        point[link.product] = point[link.power] * point[link.binary];
    }
    return point;
}

double max_constraint_violation(const LinearizedProgram& prog,
                                const std::vector<double>& point) {
    double worst = 0.0;
    for (std::size_t v = 0; v < prog.vars.size(); ++v) {
        worst = std::max(worst, prog.vars[v].lb - point[v]);
        worst = std::max(worst, point[v] - prog.vars[v].ub);
    }
    for (const auto& row : prog.constraints) {
        double lhs = 0.0;
        for (const auto& term : row.terms) lhs += term.coeff * point[term.var];
        worst = std::max(worst, row.rel == Relation::le ? lhs - row.rhs
                                                        : row.rhs - lhs);
    }
    return worst;
}

namespace {

// Depth-first search over per-element choices {off, toward u1, toward
// u2}, elements visited in descending cascade order. The node bound
// underestimates every completion: the panel term assumes all unfixed
// elements off, the power term assumes they all assist.
class ExactSearch {
public:
    explicit ExactSearch(const LinearizedProgram& prog)
        : cfg_(prog.config),
          channels_(prog.channels),
          battery_(prog.battery_before),
          n_(static_cast<int>(prog.eps_var.size())),
          q_(rate_snr_threshold(prog.config)) {
        order_.resize(n_);
        std::iota(order_.begin(), order_.end(), 0);
        std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
            return std::max(channels_.cascade[0][a], channels_.cascade[1][a]) >
                   std::max(channels_.cascade[0][b], channels_.cascade[1][b]);
        });
        suffix_.assign(n_ + 1, {0.0, 0.0});
        for (int k = n_ - 1; k >= 0; --k) {
            for (int d = 0; d < 2; ++d) {
                suffix_[k][d] =
                    suffix_[k + 1][d] + channels_.cascade[d][order_[k]];
            }
        }
        toward_.assign(n_, 0);
    }

    void run(SolveReport& report) {
        descend(0, {0.0, 0.0}, 0);
        if (found_) {
            report.status = SolveStatus::optimal;
            report.assignment = best_assignment_;
            report.power = best_power_;
            report.objective = best_objective_;
        } else {
            report.status = SolveStatus::infeasible;
        }
        report.nodes_explored = closed_nodes_;
    }

private:
    // objective lower bound for the subtree, or +inf when provably
    // infeasible
    double bound(int depth, const std::array<double, 2>& cascade_sum,
                 int active) const {
        if (cfg_.t_s * cfg_.p_e * active > battery_ + kFeasTol) {
            return kInfinity;
        }
        double power_sum = 0.0;
        for (int d = 0; d < 2; ++d) {
            double p;
            if (q_ <= 0.0) {
                p = cfg_.p_min;
            } else {
                const double amp =
                    channels_.h_direct +
                    cfg_.alpha * (cascade_sum[d] + suffix_[depth][d]);
                if (amp <= 0.0) return kInfinity;
                const double required = q_ / (amp * amp);
                if (required > cfg_.p_max * (1.0 + kPowerRelTol)) {
                    return kInfinity;
                }
                p = std::max(required, cfg_.p_min);
            }
            power_sum += p;
        }
        return cfg_.zeta * cfg_.t_s * cfg_.p_e * active +
               (1.0 - cfg_.zeta) * cfg_.t_s * power_sum;
    }

    void descend(int depth, std::array<double, 2> cascade_sum, int active) {
        const double b = bound(depth, cascade_sum, active);
        if (b == kInfinity || b >= best_objective_ - 1e-12) {
            ++closed_nodes_;
            return;
        }
        if (depth == n_) {
            ++closed_nodes_;
            take_leaf(cascade_sum, active);
            return;
        }
        // children ordered by their bound for early strong incumbents
        const int element = order_[depth];
        struct Child {
            double bound;
            int option;  // 0 off, 1 toward u1, 2 toward u2
        };
        std::array<Child, 3> children;
        for (int option = 0; option < 3; ++option) {
            auto sum = cascade_sum;
            int act = active;
            if (option > 0) {
                sum[option - 1] += channels_.cascade[option - 1][element];
                ++act;
            }
            children[option] = {bound(depth + 1, sum, act), option};
        }
        std::stable_sort(children.begin(), children.end(),
                         [](const Child& a, const Child& b) {
                             return a.bound < b.bound;
                         });
        for (const auto& child : children) {
            auto sum = cascade_sum;
            int act = active;
            if (child.option > 0) {
                sum[child.option - 1] +=
                    channels_.cascade[child.option - 1][element];
                ++act;
            }
            toward_[element] = child.option;
            descend(depth + 1, sum, act);
        }
        toward_[element] = 0;
    }

    void take_leaf(const std::array<double, 2>& cascade_sum, int active) {
        const std::array<double, 2> amp{
            channels_.h_direct + cfg_.alpha * cascade_sum[0],
            channels_.h_direct + cfg_.alpha * cascade_sum[1]};
        const LeafSolve leaf = solve_leaf(amp, active, battery_, cfg_);
        if (!leaf.feasible || leaf.objective >= best_objective_) return;
        best_objective_ = leaf.objective;
        best_power_ = leaf.power;
        best_assignment_ = ElementAssignment(n_);
        for (int e = 0; e < n_; ++e) {
            if (toward_[e] > 0) best_assignment_.set(e, toward_[e] - 1, true);
        }
        found_ = true;
    }

    const ScenarioConfig& cfg_;
    const ChannelRealization& channels_;
    double battery_;
    int n_;
    double q_;
    std::vector<int> order_;
    std::vector<std::array<double, 2>> suffix_;
    std::vector<int> toward_;  // indexed by element id

    double best_objective_ = kInfinity;
    ElementAssignment best_assignment_;
    PowerAllocation best_power_;
    bool found_ = false;
    long closed_nodes_ = 0;
};

}  // namespace

SolveReport solve_exact(const LinearizedProgram& prog) {
    const auto start = std::chrono::steady_clock::now();
    SolveReport report;
    if (!prog.capacity_gate_ok) {
        report.status = SolveStatus::infeasible;
        report.nodes_explored = 1;
    } else {
        ExactSearch search(prog);
        search.run(report);
    }
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return report;
}

SolveReport exhaustive_oracle(const ChannelRealization& channels,
                              BatteryState battery_before, double theta,
                              const ScenarioConfig& config) {
    config.validate();
    const int n = config.n_elements;
    if (n > 12) {
        throw std::invalid_argument(
            "exhaustive_oracle: instance too large (3^N > 10^6)");
    }
    const auto start = std::chrono::steady_clock::now();
    SolveReport report;
    report.status = SolveStatus::infeasible;

    const bool gate_ok =
        battery_before.stored + harvest_energy(theta, config) <=
        config.battery_capacity + kFeasTol;
    if (gate_ok) {
        std::vector<int> toward(n, 0);
        double best = kInfinity;
        bool done = false;
        while (!done) {
            ++report.nodes_explored;
            std::array<double, 2> sum{0.0, 0.0};
            int active = 0;
            for (int e = 0; e < n; ++e) {
                if (toward[e] > 0) {
                    sum[toward[e] - 1] += channels.cascade[toward[e] - 1][e];
                    ++active;
                }
            }
            const std::array<double, 2> amp{
                channels.h_direct + config.alpha * sum[0],
                channels.h_direct + config.alpha * sum[1]};
            const LeafSolve leaf =
                solve_leaf(amp, active, battery_before.stored, config);
            if (leaf.feasible && leaf.objective < best) {
                best = leaf.objective;
                report.status = SolveStatus::optimal;
                report.objective = leaf.objective;
                report.power = leaf.power;
                report.assignment = ElementAssignment(n);
                for (int e = 0; e < n; ++e) {
                    if (toward[e] > 0) {
                        report.assignment.set(e, toward[e] - 1, true);
                    }
                }
            }
            // base-3 odometer
            int e = 0;
            for (; e < n; ++e) {
                if (++toward[e] <= 2) break;
                toward[e] = 0;
            }
            done = (e == n);
        }
    }
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return report;
}

void dump_lp(const LinearizedProgram& prog, std::ostream& out) {
    out << "\\ per-slot linearized program (" << prog.vars.size()
        << " vars, " << prog.constraints.size() << " rows)\n";
    if (!prog.capacity_gate_ok) {
        out << "\\ capacity gate violated: program is infeasible\n";
    }
    out << "Minimize\n obj:";
    bool first = true;
    for (const auto& term : prog.objective) {
        out << (first ? " " : " + ") << fmt(term.coeff) << ' '
            << prog.vars[term.var].name;
        first = false;
    }
    out << "\nSubject To\n";
    for (const auto& row : prog.constraints) {
        out << ' ' << row.name << ':';
        for (std::size_t k = 0; k < row.terms.size(); ++k) {
            const double c = row.terms[k].coeff;
            if (k == 0) {
                out << ' ' << fmt(c);
            } else {
                out << (c < 0 ? " - " : " + ") << fmt(std::fabs(c));
            }
            out << ' ' << prog.vars[row.terms[k].var].name;
        }
        out << (row.rel == Relation::le ? " <= " : " >= ") << fmt(row.rhs)
            << '\n';
    }
    out << "Bounds\n";
    for (const auto& var : prog.vars) {
        if (!var.is_binary) {
            out << ' ' << fmt(var.lb) << " <= " << var.name
                << " <= " << fmt(var.ub) << '\n';
        }
    }
    out << "Binaries\n";
    for (const auto& var : prog.vars) {
        if (var.is_binary) out << ' ' << var.name << '\n';
    }
    out << "End\n";
}

}  // namespace risopt::milp

#ifndef RISOPT_MILP_HPP_
#define RISOPT_MILP_HPP_

#include <array>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "risopt/physics.hpp"
#include "risopt/scenario.hpp"

namespace risopt::milp {

enum class Relation { le, ge };

struct Term {
    int var;
    double coeff;
};

struct LinearConstraint {
    std::string name;
    std::vector<Term> terms;
    Relation rel = Relation::le;
    double rhs = 0.0;
};

struct Variable {
    std::string name;
    double lb = 0.0;
    double ub = 0.0;
    bool is_binary = false;
};

/// ptilde = power * binary, enforced by three big-M rows.
struct ProductLink {
    int product;
    int power;
    int binary;
};

/// etilde = x * y for binaries x, y, enforced by three rows.
struct BinaryProductLink {
    int product;
    int x;
    int y;
};

/// Variable ids a rate row is written over: the serving power, one
/// power-times-element product per element, and one per ordered
/// element pair (ordered_pairs order).
struct RateVarRefs {
    int power = -1;
    std::vector<int> ptilde;
    std::vector<int> pttilde;
};

/// All ordered pairs (x, y), x != y, row-major.
std::vector<std::pair<int, int>> ordered_pairs(int n);

/// The per-slot program after exact linearization: binaries for the
/// element choices and their pairwise products, continuous powers and
/// power-times-binary products, all coupling rows, and the weighted
/// energy objective. The structural index tables at the bottom let the
/// branch-and-bound solve leaf nodes in closed form; the generic
/// variable/constraint tables remain the canonical statement.
struct LinearizedProgram {
    std::vector<Variable> vars;
    std::vector<LinearConstraint> constraints;
    std::vector<Term> objective;  // minimized
    std::vector<ProductLink> product_links;
    std::vector<BinaryProductLink> binary_links;

    std::array<int, 2> power_var{-1, -1};
    std::vector<std::array<int, 2>> eps_var;  // [element][toward user]
    std::array<RateVarRefs, 2> rate_refs;
    std::array<int, 2> rate_row{-1, -1};

    /// False when stored energy plus the slot's harvest would overflow
    /// the battery; such a program is reported infeasible outright.
    bool capacity_gate_ok = true;

    ScenarioConfig config;
    ChannelRealization channels;
    double battery_before = 0.0;

    int add_variable(std::string name, double lb, double ub, bool binary);
};

enum class SolveStatus { optimal, infeasible };

struct SolveReport {
    SolveStatus status = SolveStatus::infeasible;
    ElementAssignment assignment;
    PowerAllocation power;
    double objective = 0.0;
    long nodes_explored = 0;
    double wall_time_seconds = 0.0;
};

/// Adds z with z <= x, z <= y, z >= x + y - 1; returns z's id.
int linearize_binary_product(LinearizedProgram& prog, int x, int y,
                             const std::string& name);

/// Adds ptilde with power >= ptilde >= 0, ptilde >= M*binary - M + power,
/// ptilde <= M*binary, where M = p_max; returns ptilde's id.
int linearize_continuous_binary(LinearizedProgram& prog, int power, int binary,
                                double p_max, const std::string& name);

/// The linearized rate row for the direction toward `user`, normalized
/// by sigma2 so that residuals are O(1) and the absolute feasibility
/// tolerance stays meaningful.
LinearConstraint build_linearized_rate_constraint(
    int user, const ChannelRealization& channels, const ScenarioConfig& config,
    const RateVarRefs& refs);

LinearizedProgram build_program(const ChannelRealization& channels,
                                BatteryState battery_before, double theta,
                                const ScenarioConfig& config);

/// Full variable vector at a binary assignment and power pair, with
/// every product variable forced to its linked value.
std::vector<double> assemble_point(const LinearizedProgram& prog,
                                   const ElementAssignment& assignment,
                                   const PowerAllocation& power);

/// Largest positive residual over all rows and variable bounds.
double max_constraint_violation(const LinearizedProgram& prog,
                                const std::vector<double>& point);

/// Branch-and-bound over the element binaries; with binaries fixed the
/// continuous optimum is closed-form, so no LP relaxation is needed.
/// nodes_explored counts closed nodes (evaluated leaves plus pruned
/// subtrees), which never exceeds 3^N + 1.
SolveReport solve_exact(const LinearizedProgram& prog);

/// Enumerates every element assignment (off / toward user 1 / toward
/// user 2); refuses instances with 3^N > 10^6.
SolveReport exhaustive_oracle(const ChannelRealization& channels,
                              BatteryState battery_before, double theta,
                              const ScenarioConfig& config);

/// Plain-text LP-format dump for external cross-checks.
void dump_lp(const LinearizedProgram& prog, std::ostream& out);

}  // namespace risopt::milp

#endif  // RISOPT_MILP_HPP_

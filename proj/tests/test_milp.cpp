#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "risopt/milp.hpp"
#include "risopt/validation.hpp"
#include "test_support.hpp"

using namespace risopt;
using namespace risopt::milp;

namespace {

ScenarioConfig small_config(int n) {
    ScenarioConfig cfg;
    cfg.n_elements = n;
    cfg.sigma2 = 1.0;
    cfg.p_max = 2.0;
    cfg.battery_capacity = 100.0;
    cfg.battery_initial = 100.0;
    return cfg;
}

ChannelRealization make_channels(double h, std::vector<double> cascade) {
    ChannelRealization ch;
    ch.h_direct = h;
    ch.cascade[0] = cascade;
    ch.cascade[1] = std::move(cascade);
    return ch;
}

bool rows_feasible(const LinearizedProgram& prog,
                   const std::vector<double>& point, std::size_t first_row,
                   std::size_t n_rows) {
    for (std::size_t r = first_row; r < first_row + n_rows; ++r) {
        double lhs = 0.0;
        for (const auto& term : prog.constraints[r].terms) {
            lhs += term.coeff * point[term.var];
        }
        const double residual = prog.constraints[r].rel == Relation::le
                                    ? lhs - prog.constraints[r].rhs
                                    : prog.constraints[r].rhs - lhs;
        if (residual > 1e-12) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("binary product linearization reproduces the truth table") {
    for (int x = 0; x <= 1; ++x) {
        for (int y = 0; y <= 1; ++y) {
            LinearizedProgram prog;
            const int vx = prog.add_variable("x", 0, 1, true);
            const int vy = prog.add_variable("y", 0, 1, true);
            const int vz = linearize_binary_product(prog, vx, vy, "z");
            REQUIRE(prog.constraints.size() == 3);
            int feasible_z = -1;
            for (int z = 0; z <= 1; ++z) {
                std::vector<double> point(3, 0.0);
                point[vx] = x;
                point[vy] = y;
                point[vz] = z;
                if (rows_feasible(prog, point, 0, 3)) {
                    CHECK(feasible_z == -1);  // exactly one feasible value
                    feasible_z = z;
                }
            }
            CHECK(feasible_z == x * y);
        }
    }
}

TEST_CASE("continuous-binary linearization pins the product value") {
    const double p_max = 2.0;
    for (double p : {0.0, 0.3 * p_max, p_max}) {
        for (int xi = 0; xi <= 1; ++xi) {
            LinearizedProgram prog;
            const int vp = prog.add_variable("p", 0, p_max, false);
            const int vxi = prog.add_variable("xi", 0, 1, true);
            const int vpt =
                linearize_continuous_binary(prog, vp, vxi, p_max, "pt");
            REQUIRE(prog.constraints.size() == 3);
            // the three rows admit exactly the interval
            // [max(0, M xi - M + p), min(p, M xi)]; it must collapse
            const double lo = std::max(0.0, p_max * xi - p_max + p);
            const double hi = std::min(p, p_max * xi);
            CHECK(lo == doctest::Approx(p * xi));
            CHECK(hi == doctest::Approx(p * xi));
            std::vector<double> point(3, 0.0);
            point[vp] = p;
            point[vxi] = xi;
            point[vpt] = p * xi;
            CHECK(rows_feasible(prog, point, 0, 3));
            point[vpt] = p * xi + 0.05;
            CHECK_FALSE(rows_feasible(prog, point, 0, 3));
        }
    }
}

TEST_CASE("rate row with no elements reduces to the direct-link threshold") {
    auto cfg = small_config(1);
    cfg.r_th = 3.0;
    ChannelRealization ch = make_channels(0.5, {});
    RateVarRefs refs;
    refs.power = 0;
    const auto row = build_linearized_rate_constraint(0, ch, cfg, refs);
    REQUIRE(row.terms.size() == 1);
    const double snr = std::exp2(3.0) - 1.0;  // rows are threshold-normalized
    CHECK(row.terms[0].coeff == doctest::Approx(0.25 / (cfg.sigma2 * snr)));
    CHECK(row.rhs == doctest::Approx(1.0));
    // satisfied exactly when p * h^2 >= (2^r - 1) sigma2
    const double p_threshold = snr * cfg.sigma2 / 0.25;
    CHECK(row.terms[0].coeff * p_threshold >= row.rhs - 1e-12);
    CHECK(row.terms[0].coeff * (0.99 * p_threshold) < row.rhs);
}

TEST_CASE("zero threshold makes the rate row vacuous") {
    auto cfg = small_config(2);
    cfg.r_th = 0.0;
    const auto ch = make_channels(0.0, {0.1, 0.2});
    const auto prog = build_program(ch, {1.0}, 0.0, cfg);
    for (int u = 0; u < 2; ++u) {
        CHECK(prog.constraints[prog.rate_row[u]].rhs == 0.0);
    }
    const auto point =
        assemble_point(prog, ElementAssignment(2), PowerAllocation{{0, 0}});
    CHECK(max_constraint_violation(prog, point) <= 1e-12);
}

TEST_CASE("linearized rate rows agree with the closed-form rate") {
    // every assignment at N=4, fresh random powers each time
    const int n = 4;
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        auto cfg = small_config(n);
        cfg.r_th = 0.3 + 3.0 * rng.uniform01();
        cfg.alpha = 0.5 + 0.5 * rng.uniform01();
        std::vector<double> cascade(n);
        for (auto& c : cascade) c = 0.8 * rng.uniform01();
        const auto ch =
            make_channels(trial % 2 == 0 ? 0.4 * rng.uniform01() : 0.0,
                          cascade);
        const auto prog = build_program(ch, {100.0}, 0.0, cfg);

        std::vector<int> toward(n, 0);
        bool done = false;
        while (!done) {
            ElementAssignment assign(n);
            for (int e = 0; e < n; ++e) {
                if (toward[e] > 0) assign.set(e, toward[e] - 1, true);
            }
            PowerAllocation p{{cfg.p_max * rng.uniform01(),
                               cfg.p_max * rng.uniform01()}};
            const auto point = assemble_point(prog, assign, p);
            for (int u = 0; u < 2; ++u) {
                const auto& row = prog.constraints[prog.rate_row[u]];
                double lhs = 0.0;
                for (const auto& term : row.terms) {
                    lhs += term.coeff * point[term.var];
                }
                const bool lin_ok = lhs >= row.rhs - 1e-9;
                const bool rate_ok =
                    achievable_rate(u, assign, p, ch, cfg) >= cfg.r_th - 1e-9;
                CHECK(lin_ok == rate_ok);
            }
            done = true;
            for (int e = 0; e < n; ++e) {
                if (++toward[e] <= 2) {
                    done = false;
                    break;
                }
                toward[e] = 0;
            }
        }
    }
}

TEST_CASE("program structure at N=2 has the documented shape") {
    auto cfg = small_config(2);
    const auto ch = make_channels(0.1, {0.2, 0.3});
    const auto prog = build_program(ch, {1.0}, 0.0, cfg);

    int n_power = 0, n_eps = 0, n_etilde = 0, n_pt = 0, n_ptt = 0;
    for (const auto& var : prog.vars) {
        if (var.name.starts_with("p_")) ++n_power;
        else if (var.name.starts_with("eps_")) ++n_eps;
        else if (var.name.starts_with("et_")) ++n_etilde;
        else if (var.name.starts_with("ptt_")) ++n_ptt;
        else if (var.name.starts_with("pt_")) ++n_pt;
    }
    CHECK(n_power == 2);
    CHECK(n_eps == 4);
    CHECK(n_etilde == 4);  // ordered pairs per direction
    CHECK(n_pt == 4);
    CHECK(n_ptt == 4);
    CHECK(prog.vars.size() == 18);

    // every product variable carries exactly its three rows
    CHECK(prog.binary_links.size() == 4);
    CHECK(prog.product_links.size() == 8);
    for (const auto& link : prog.binary_links) {
        const auto& name = prog.vars[link.product].name;
        int rows = 0;
        for (const auto& row : prog.constraints) {
            if (row.name.starts_with(name + "_")) ++rows;
        }
        CHECK(rows == 3);
    }
    for (const auto& link : prog.product_links) {
        const auto& name = prog.vars[link.product].name;
        int rows = 0;
        for (const auto& row : prog.constraints) {
            if (row.name.starts_with(name + "_")) ++rows;
        }
        CHECK(rows == 3);
    }
    // 2 rate rows + 2 exclusivity + 1 causality + 12 product triples
    //   + 12 pairwise triples... pairwise: 4 etilde * 3 = 12,
    //   products: 8 * 3 = 24
    CHECK(prog.constraints.size() == 2 + 2 + 1 + 12 + 24);
}

TEST_CASE("an empty battery admits only the all-off assignment") {
    auto cfg = small_config(3);
    cfg.los_present = true;
    cfg.r_th = 0.1;
    const auto ch = make_channels(1.0, {0.5, 0.5, 0.5});
    const auto prog = build_program(ch, {0.0}, 0.0, cfg);
    const auto report = solve_exact(prog);
    REQUIRE(report.status == SolveStatus::optimal);
    CHECK(report.assignment.active_count() == 0);

    // any active element breaks the causality row
    ElementAssignment one(3);
    one.set(0, 0, true);
    const auto point = assemble_point(prog, one, report.power);
    CHECK(max_constraint_violation(prog, point) > 1e-9);
}

TEST_CASE("tiny threshold is met by the all-off direct link") {
    auto cfg = small_config(4);
    cfg.los_present = true;
    cfg.r_th = 0.05;
    cfg.p_min = 0.0;
    cfg.zeta = 0.5;  // weak cascades cannot pay for their element cost
    const auto ch = make_channels(0.8, {0.01, 0.01, 0.01, 0.01});
    const auto prog = build_program(ch, {10.0}, 0.0, cfg);
    const auto report = solve_exact(prog);
    REQUIRE(report.status == SolveStatus::optimal);
    CHECK(report.assignment.active_count() == 0);
    const double expected_p =
        (std::exp2(cfg.r_th) - 1.0) * cfg.sigma2 / (0.8 * 0.8);
    CHECK(report.power.p[0] == doctest::Approx(expected_p));
    CHECK(report.power.p[1] == doctest::Approx(expected_p));
}

TEST_CASE("unreachable thresholds are reported infeasible") {
    auto cfg = small_config(2);
    cfg.r_th = 20.0;
    cfg.p_max = 0.5;
    cfg.p_min = 0.0;
    const auto ch = make_channels(0.0, {1e-4, 1e-4});
    const auto prog = build_program(ch, {0.0}, 0.0, cfg);
    const auto report = solve_exact(prog);
    CHECK(report.status == SolveStatus::infeasible);
}

TEST_CASE("capacity gate failure is an immediate infeasible") {
    auto cfg = small_config(2);
    cfg.battery_capacity = 1.0;
    cfg.battery_initial = 1.0;
    const auto ch = make_channels(1.0, {0.1, 0.1});
    const auto prog = build_program(ch, {1.0}, /*theta=*/5.0, cfg);
    CHECK_FALSE(prog.capacity_gate_ok);
    CHECK(solve_exact(prog).status == SolveStatus::infeasible);
}

TEST_CASE("branch and bound matches the exhaustive oracle") {
    const auto stats = validation::check_exact_vs_oracle(6, 50, 20240601);
    CHECK(stats.instances == 50);
    CHECK(stats.mismatches == 0);
    CHECK(stats.feasible > 5);
    CHECK(stats.infeasible > 5);
    CHECK(stats.max_objective_diff <= 1e-9);
    CHECK(stats.max_residual <= 1e-9);
}

TEST_CASE("the linearized set and the physics check accept the same points") {
    // at fixed binaries: minimal closed-form powers satisfy the whole
    // program exactly when the physics-level feasibility check passes
    Rng rng(321);
    for (int k = 0; k < 12; ++k) {
        const int n = 2 + static_cast<int>(rng.uniform01() * 3);
        auto cfg = small_config(n);
        cfg.r_th = 0.5 + 2.5 * rng.uniform01();
        cfg.p_e = 0.2;
        cfg.battery_initial = 0.2 * (1 + static_cast<int>(rng.uniform01() * n));
        std::vector<double> cascade(n);
        for (auto& c : cascade) c = 0.2 + 0.8 * rng.uniform01();
        const auto ch = make_channels(0.3 * rng.uniform01(), cascade);
        const BatteryState battery{cfg.battery_initial};
        const auto prog = build_program(ch, battery, 0.0, cfg);
        const double q = rate_snr_threshold(cfg);

        std::vector<int> toward(n, 0);
        bool done = false;
        while (!done) {
            ElementAssignment assign(n);
            for (int e = 0; e < n; ++e) {
                if (toward[e] > 0) assign.set(e, toward[e] - 1, true);
            }
            PowerAllocation p;
            bool closed_form_ok = true;
            for (int d = 0; d < 2; ++d) {
                const double amp = received_amplitude(d, assign, ch, cfg);
                if (q <= 0.0) {
                    p.p[1 - d] = cfg.p_min;
                } else if (amp <= 0.0 ||
                           q / (amp * amp) > cfg.p_max * (1 + 1e-12)) {
                    closed_form_ok = false;
                } else {
                    p.p[1 - d] =
                        std::clamp(q / (amp * amp), cfg.p_min, cfg.p_max);
                }
            }
            const auto physics_ok =
                closed_form_ok &&
                check_feasible(assign, p, battery, 0.0, ch, cfg).feasible;
            bool lin_ok = false;
            if (closed_form_ok) {
                const auto point = assemble_point(prog, assign, p);
                lin_ok = max_constraint_violation(prog, point) <= 1e-9;
            }
            CHECK(lin_ok == physics_ok);
            done = true;
            for (int e = 0; e < n; ++e) {
                if (++toward[e] <= 2) {
                    done = false;
                    break;
                }
                toward[e] = 0;
            }
        }
    }
}

TEST_CASE("node count never exceeds full enumeration") {
    Rng rng(99);
    for (int k = 0; k < 30; ++k) {
        const auto inst = validation::random_small_instance(rng, 6, k);
        const auto prog = milp::build_program(inst.channels, inst.battery,
                                              inst.theta, inst.config);
        const auto report = milp::solve_exact(prog);
        long full = 1;
        for (int e = 0; e < inst.config.n_elements; ++e) full *= 3;
        CHECK(report.nodes_explored <= full + 1);
    }
}

TEST_CASE("Distant users, mid-placed panel, N=6") {
    ScenarioConfig cfg;
    cfg.n_elements = 6;
    cfg.user1_pos = {1.0, 1.0};
    cfg.user2_pos = {60.0, 1.0};
    cfg.ris_pos = {30.0, 10.0};
    cfg.r_th = 4.0;
    cfg.zeta = 0.5;
    cfg.battery_capacity = 100.0;
    cfg.battery_initial = 100.0;
    Rng rng(17);
    const auto ch = sample_channels(cfg, rng);
    const auto prog = build_program(ch, {cfg.battery_initial}, 0.0, cfg);
    const auto exact = solve_exact(prog);
    const auto oracle =
        exhaustive_oracle(ch, {cfg.battery_initial}, 0.0, cfg);
    REQUIRE(exact.status == SolveStatus::optimal);
    REQUIRE(oracle.status == SolveStatus::optimal);
    CHECK(exact.objective == doctest::Approx(oracle.objective).epsilon(1e-12));
}

TEST_CASE("branch and bound stays exact on larger panels") {
    Rng rng(777);
    int feasible = 0;
    for (int n : {7, 8, 9, 10}) {
        for (int k = 0; k < 3; ++k) {
            ScenarioConfig cfg;
            cfg.n_elements = n;
            cfg.user1_pos = {1.0 + 40.0 * rng.uniform01(),
                             1.0 + 40.0 * rng.uniform01()};
            cfg.user2_pos = {1.0 + 40.0 * rng.uniform01(),
                             1.0 + 40.0 * rng.uniform01()};
            cfg.ris_pos = {1.0 + 40.0 * rng.uniform01(),
                           1.0 + 40.0 * rng.uniform01()};
            cfg.fading = k % 2 == 0 ? FadingModel::none : FadingModel::rayleigh;
            cfg.zeta = std::array{0.0, 0.5, 1.0}[k % 3];
            cfg.battery_capacity = 1000.0;
            cfg.battery_initial = 0.005 * (2 + static_cast<int>(
                                                   rng.uniform01() * n));
            const auto ch = sample_channels(cfg, rng);
            double total = 0.0;
            for (double c : ch.cascade[0]) total += c;
            const double amp = (0.3 + 0.9 * rng.uniform01()) * total / 2.0;
            cfg.r_th = std::log2(1.0 + amp * amp * cfg.p_max / cfg.sigma2);

            const BatteryState battery{cfg.battery_initial};
            const auto prog = build_program(ch, battery, 0.0, cfg);
            const auto exact = solve_exact(prog);
            const auto oracle = exhaustive_oracle(ch, battery, 0.0, cfg);
            REQUIRE(exact.status == oracle.status);
            if (exact.status == SolveStatus::optimal) {
                ++feasible;
                CHECK(std::fabs(exact.objective - oracle.objective) <= 1e-9);
                CHECK(exact.nodes_explored <= oracle.nodes_explored + 1);
            }
        }
    }
    CHECK(feasible > 3);
}

TEST_CASE("oracle refuses oversized instances") {
    ScenarioConfig cfg;
    cfg.n_elements = 13;
    Rng rng(1);
    const auto ch = sample_channels(cfg, rng);
    CHECK_THROWS_AS(exhaustive_oracle(ch, {1.0}, 0.0, cfg),
                    std::invalid_argument);
}

TEST_CASE("LP dump carries the whole program") {
    auto cfg = small_config(2);
    const auto ch = make_channels(0.1, {0.2, 0.3});
    const auto prog = build_program(ch, {1.0}, 0.0, cfg);
    std::ostringstream out;
    dump_lp(prog, out);
    const std::string text = out.str();
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("Subject To") != std::string::npos);
    CHECK(text.find("rate_u1") != std::string::npos);
    CHECK(text.find("panel_energy") != std::string::npos);
    CHECK(text.find("Binaries") != std::string::npos);
    CHECK(text.find("eps_u1_e0") != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
}

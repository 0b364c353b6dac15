#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "risopt/benders.hpp"
#include "risopt/milp.hpp"
#include "risopt/validation.hpp"

using namespace risopt;
using namespace risopt::benders;

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

// smallest total element count over all assignments meeting the
// master's amplitude targets, by full enumeration
int min_count_oracle(const ChannelRealization& ch, const ScenarioConfig& cfg,
                     const PowerAllocation& p_bar, double battery) {
    const double q = rate_snr_threshold(cfg);
    const int n = cfg.n_elements;
    int best = -1;
    std::vector<int> toward(n, 0);
    bool done = false;
    while (!done) {
        int count = 0;
        std::array<double, 2> amp{ch.h_direct, ch.h_direct};
        for (int e = 0; e < n; ++e) {
            if (toward[e] > 0) {
                ++count;
                amp[toward[e] - 1] += cfg.alpha * ch.cascade[toward[e] - 1][e];
            }
        }
        bool ok = cfg.t_s * cfg.p_e * count <= battery + 1e-9;
        for (int d = 0; d < 2 && ok; ++d) {
            if (q > 0.0) {
                const double target = std::sqrt(q / p_bar.p[1 - d]);
                ok = amp[d] >= target * (1.0 - 1e-12);
            }
        }
        if (ok && (best < 0 || count < best)) best = count;
        done = true;
        for (int e = 0; e < n; ++e) {
            if (++toward[e] <= 2) {
                done = false;
                break;
            }
            toward[e] = 0;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("master selects nothing when the direct link already covers") {
    auto cfg = small_config(3);
    cfg.r_th = 0.5;
    const auto ch = make_channels(2.0, {0.5, 0.5, 0.5});
    const auto ms = solve_master(PowerAllocation{{2.0, 2.0}}, ch, {10.0}, 0.0,
                                 cfg);
    REQUIRE(ms.status == milp::SolveStatus::optimal);
    CHECK(ms.assignment.active_count() == 0);
    CHECK(ms.e_ris == 0.0);
}

TEST_CASE("master with an empty battery and a deficit is infeasible") {
    auto cfg = small_config(3);
    cfg.r_th = 2.0;
    const auto ch = make_channels(0.0, {0.5, 0.5, 0.5});
    const auto ms = solve_master(PowerAllocation{{2.0, 2.0}}, ch, {0.0}, 0.0,
                                 cfg);
    CHECK(ms.status == milp::SolveStatus::infeasible);
}

TEST_CASE("contested elements are split exactly") {
    auto cfg = small_config(4);
    cfg.p_e = 0.0;
    // two directions each need amplitude 4; elements {3,2,2,2}
    const auto ch = make_channels(0.0, {3.0, 2.0, 2.0, 2.0});
    const double q = 16.0;  // target = sqrt(q / p) = 4 at p = 1
    cfg.r_th = std::log2(1.0 + q / cfg.sigma2);
    const auto ms =
        solve_master(PowerAllocation{{1.0, 1.0}}, ch, {10.0}, 0.0, cfg);
    REQUIRE(ms.status == milp::SolveStatus::optimal);
    CHECK(ms.assignment.active_count() == 4);
    CHECK(min_count_oracle(ch, cfg, PowerAllocation{{1.0, 1.0}}, 10.0) == 4);
}

TEST_CASE("master cardinality matches exhaustive enumeration") {
    Rng rng(431);
    int checked = 0;
    for (int k = 0; k < 50; ++k) {
        const auto inst = validation::random_small_instance(rng, 6, k);
        PowerAllocation p_bar{{inst.config.p_max, inst.config.p_max}};
        const auto ms = solve_master(p_bar, inst.channels, inst.battery,
                                     inst.theta, inst.config);
        const int oracle = min_count_oracle(inst.channels, inst.config, p_bar,
                                            inst.battery.stored);
        if (ms.status == milp::SolveStatus::optimal) {
            REQUIRE(oracle >= 0);
            CHECK(ms.assignment.active_count() == oracle);
            CHECK(ms.assignment.exclusive());
            ++checked;
        } else {
            CHECK(oracle == -1);
        }
    }
    CHECK(checked > 10);
}

TEST_CASE("direction-asymmetric cascades still solve exactly") {
    Rng rng(88);
    int feasible = 0;
    for (int k = 0; k < 40; ++k) {
        const int n = 2 + static_cast<int>(rng.uniform01() * 4);
        auto cfg = small_config(n);
        cfg.r_th = 1.0 + 2.5 * rng.uniform01();
        ChannelRealization ch;
        ch.h_direct = 0.0;
        for (int d = 0; d < 2; ++d) {
            ch.cascade[d].resize(n);
            for (auto& c : ch.cascade[d]) c = 0.2 + rng.uniform01();
        }
        const PowerAllocation p_bar{{cfg.p_max, cfg.p_max}};
        const auto ms = solve_master(p_bar, ch, {10.0}, 0.0, cfg);
        const int oracle = min_count_oracle(ch, cfg, p_bar, 10.0);
        if (ms.status == milp::SolveStatus::optimal) {
            CHECK(ms.assignment.active_count() == oracle);
            ++feasible;
        } else {
            CHECK(oracle == -1);
        }
    }
    CHECK(feasible > 5);
}

TEST_CASE("auxiliary closed form hits the threshold exactly") {
    auto cfg = small_config(1);
    cfg.r_th = 1.0;  // q = (2^1 - 1) * 1 = 1, amp = 1 -> p = 1
    const auto ch = make_channels(1.0, {0.0});
    const auto aux =
        solve_auxiliary(ElementAssignment(1), ch, {10.0}, 0.0, cfg);
    REQUIRE(aux.status == milp::SolveStatus::optimal);
    CHECK(aux.power.p[0] == doctest::Approx(1.0));
    CHECK(aux.power.p[1] == doctest::Approx(1.0));
}

TEST_CASE("zero threshold pins the auxiliary at p_min") {
    auto cfg = small_config(1);
    cfg.r_th = 0.0;
    cfg.p_min = 0.25;
    const auto ch = make_channels(1.0, {0.0});
    const auto aux =
        solve_auxiliary(ElementAssignment(1), ch, {10.0}, 0.0, cfg);
    REQUIRE(aux.status == milp::SolveStatus::optimal);
    CHECK(aux.power.p[0] == doctest::Approx(0.25));
    CHECK(aux.power.p[1] == doctest::Approx(0.25));
}

TEST_CASE("auxiliary reports a missing path") {
    auto cfg = small_config(2);
    cfg.r_th = 1.0;
    const auto ch = make_channels(0.0, {0.5, 0.5});
    const auto aux =
        solve_auxiliary(ElementAssignment(2), ch, {10.0}, 0.0, cfg);
    CHECK(aux.status == milp::SolveStatus::infeasible);
    CHECK(aux.diagnosis.find("no path") != std::string::npos);
}

TEST_CASE("auxiliary plug-back equality on random feasible draws") {
    Rng rng(555);
    int feasible = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform01() * 6);
        auto cfg = small_config(n);
        cfg.r_th = 0.2 + 3.0 * rng.uniform01();
        cfg.p_min = 0.0;
        std::vector<double> cascade(n);
        for (auto& c : cascade) c = 0.3 + rng.uniform01();
        const auto ch = make_channels(rng.uniform01(), cascade);
        ElementAssignment assign(n);
        for (int e = 0; e < n; ++e) {
            const double u = rng.uniform01();
            if (u < 0.45) assign.set(e, 0, true);
            else if (u < 0.9) assign.set(e, 1, true);
        }
        const auto aux =
            solve_auxiliary(assign, ch, {cfg.battery_capacity}, 0.0, cfg);
        if (aux.status != milp::SolveStatus::optimal) continue;
        ++feasible;
        for (int d = 0; d < 2; ++d) {
            CHECK(std::fabs(achievable_rate(d, assign, aux.power, ch, cfg) -
                            cfg.r_th) < 1e-9);
        }
    }
    CHECK(feasible > 100);
}

TEST_CASE("iteration fixes on all-off when the threshold is tiny") {
    auto cfg = small_config(4);
    cfg.los_present = true;
    cfg.r_th = 0.01;
    const auto ch = make_channels(1.5, {0.2, 0.2, 0.2, 0.2});
    const auto result = benders_iterate(ch, {10.0}, 0.0, cfg);
    REQUIRE(result.outcome.feasible);
    CHECK(result.outcome.assignment.active_count() == 0);
    const double expected_p =
        (std::exp2(cfg.r_th) - 1.0) * cfg.sigma2 / (1.5 * 1.5);
    CHECK(result.outcome.power.p[0] == doctest::Approx(expected_p));
    CHECK(result.trace.iterations.size() <= 2);
}

TEST_CASE("iterates are sound against the exact solver") {
    const auto stats = validation::check_benders(6, 50, 20240601);
    CHECK(stats.instances == 50);
    CHECK(stats.unsound == 0);
    CHECK(stats.nonmonotone == 0);
    CHECK(stats.feasible > 5);
    CHECK(stats.mean_gap >= 0.0);
}

TEST_CASE("upper bounds never increase along the trace") {
    Rng rng(909);
    for (int k = 0; k < 100; ++k) {
        const auto inst = validation::random_small_instance(rng, 6, k);
        const auto result = benders_iterate(inst.channels, inst.battery,
                                            inst.theta, inst.config);
        const auto& iters = result.trace.iterations;
        for (std::size_t i = 1; i < iters.size(); ++i) {
            CHECK(iters[i].upper_bound <= iters[i - 1].upper_bound + 1e-12);
            CHECK(iters[i].lower_bound <= iters[i].upper_bound + 1e-12);
        }
    }
}

TEST_CASE("trace exports as CSV") {
    auto cfg = small_config(2);
    cfg.r_th = 1.0;
    const auto ch = make_channels(0.0, {1.2, 0.9});
    const auto result = benders_iterate(ch, {10.0}, 0.0, cfg);
    REQUIRE(result.outcome.feasible);
    std::ostringstream out;
    write_trace_csv(result.trace, out);
    CHECK(out.str().find("iteration,upper_bound,lower_bound") == 0);
    CHECK(out.str().find('\n') != std::string::npos);
}

#include "risopt/benders.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace risopt::benders {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();
constexpr int kNoCover = std::numeric_limits<int>::max();

// Coverage comparisons are relative: the amplitude targets sit many
// orders of magnitude below 1, so an absolute slack would be either
// vacuous or unreachable.
constexpr double kCoverRelTol = 1e-12;

constexpr double kPowerRelTol = 1e-12;

// Exact minimum-cardinality cover when both directions see the same
// cascade magnitudes (the reciprocal construction always does). Some
// optimal solution then uses a prefix of the elements sorted by
// magnitude, so it suffices to find the shortest prefix that splits
// into two groups covering the deficits; the split is a subset-sum
// window search.
class PrefixPartitionMaster {
public:
    PrefixPartitionMaster(const std::vector<double>& cascade, double alpha,
                          int budget)
        : alpha_(alpha), budget_(budget) {
        const int n = static_cast<int>(cascade.size());
        order_.resize(n);
        std::iota(order_.begin(), order_.end(), 0);
        std::stable_sort(order_.begin(), order_.end(),
                         [&](int a, int b) { return cascade[a] > cascade[b]; });
        sorted_.resize(n);
        for (int k = 0; k < n; ++k) sorted_[k] = cascade[order_[k]];
        prefix_.assign(n + 1, 0.0);
        for (int k = 0; k < n; ++k) prefix_[k + 1] = prefix_[k] + sorted_[k];
    }

    // deficits are amplitude shortfalls per direction (already net of
    // the direct link); returns false when no assignment covers them
    bool run(std::array<double, 2> deficit, ElementAssignment& out) {
        const int n = static_cast<int>(sorted_.size());
        const int cap = std::min(n, budget_);
        std::array<double, 2> need{std::max(deficit[0], 0.0) / alpha_,
                                   std::max(deficit[1], 0.0) / alpha_};
        out = ElementAssignment(n);
        if (need[0] <= 0.0 && need[1] <= 0.0) return true;

        if (need[0] <= 0.0 || need[1] <= 0.0) {
            const int d = need[0] > 0.0 ? 0 : 1;
            for (int k = 0; k < cap; ++k) {
                out.set(order_[k], d, true);
                if (prefix_[k + 1] >= need[d]) return true;
            }
            return false;
        }

        const double joint = need[0] + need[1];
        int lower = cap + 1;
        for (int m = 2; m <= cap; ++m) {
            if (prefix_[m] >= joint) {
                lower = m;
                break;
            }
        }
        for (int m = lower; m <= cap; ++m) {
            // place a subset summing into [need0, prefix - need1] on
            // direction 1; the rest of the prefix covers direction 2
            const double hi = prefix_[m] - need[1];
            if (hi < need[0]) continue;
            chosen_.assign(m, 0);
            nodes_ = 0;
            if (find_subset(0, m, 0.0, need[0], hi)) {
                for (int k = 0; k < m; ++k) {
                    out.set(order_[k], chosen_[k] ? 0 : 1, true);
                }
                return true;
            }
        }
        return false;
    }

private:
    bool find_subset(int idx, int m, double sum, double lo, double hi) {
        if (sum >= lo && sum <= hi) return true;
        if (idx == m || sum > hi) return false;
        if (sum + (prefix_[m] - prefix_[idx]) < lo) return false;
        if (++nodes_ > kNodeBudget) {
            throw std::runtime_error(
                "solve_master: subset search exceeded its node budget");
        }
        chosen_[idx] = 1;
        if (find_subset(idx + 1, m, sum + sorted_[idx], lo, hi)) return true;
        chosen_[idx] = 0;
        return find_subset(idx + 1, m, sum, lo, hi);
    }

    static constexpr long kNodeBudget = 20000000;

    double alpha_;
    int budget_;
    std::vector<int> order_;
    std::vector<double> sorted_;
    std::vector<double> prefix_;
    std::vector<char> chosen_;
    long nodes_ = 0;
};

// Minimum-cardinality search for two disjoint element sets whose
// cascade sums cover the per-direction deficits, for channels whose
// two directions rank elements differently. Elements are taken per
// direction in descending cascade order; an element wanted by both
// still-uncovered directions is branched on exactly.
class MasterSearch {
public:
    MasterSearch(const ChannelRealization& channels,
                 const ScenarioConfig& config, int budget)
        : channels_(channels),
          config_(config),
          n_(config.n_elements),
          budget_(budget) {
        for (int d = 0; d < 2; ++d) {
            order_[d].resize(n_);
            std::iota(order_[d].begin(), order_[d].end(), 0);
            std::stable_sort(order_[d].begin(), order_[d].end(),
                             [&](int a, int b) {
                                 return channels_.cascade[d][a] >
                                        channels_.cascade[d][b];
                             });
        }
        joint_order_.resize(n_);
        std::iota(joint_order_.begin(), joint_order_.end(), 0);
        std::stable_sort(joint_order_.begin(), joint_order_.end(),
                         [&](int a, int b) {
                             return std::max(channels_.cascade[0][a],
                                             channels_.cascade[1][a]) >
                                    std::max(channels_.cascade[0][b],
                                             channels_.cascade[1][b]);
                         });
        toward_.assign(n_, -1);
    }

    bool run(std::array<double, 2> deficit, ElementAssignment& out) {
        best_count_ = kNoCover;
        descend(deficit, 0);
        if (best_count_ == kNoCover) return false;
        out = ElementAssignment(n_);
        for (int e = 0; e < n_; ++e) {
            if (best_toward_[e] >= 0) out.set(e, best_toward_[e], true);
        }
        return true;
    }

private:
    bool covered(double deficit) const { return deficit <= 0.0; }

    // fewest unused elements (in one direction's order) summing past
    // the deficit; kNoCover when even all of them fall short
    int cover_count(int d, double deficit) const {
        if (covered(deficit)) return 0;
        int count = 0;
        double sum = 0.0;
        for (int e : order_[d]) {
            if (toward_[e] >= 0) continue;
            sum += config_.alpha * channels_.cascade[d][e];
            ++count;
            if (sum >= deficit) return count;
        }
        return kNoCover;
    }

    // joint relaxation: both deficits from a shared pool, each element
    // credited its better direction
    int joint_count(double d0, double d1) const {
        double need = std::max(d0, 0.0) + std::max(d1, 0.0);
        if (need <= 0.0) return 0;
        int count = 0;
        double sum = 0.0;
        for (int e : joint_order_) {
            if (toward_[e] >= 0) continue;
            sum += config_.alpha * std::max(channels_.cascade[0][e],
                                            channels_.cascade[1][e]);
            ++count;
            if (sum >= need) return count;
        }
        return kNoCover;
    }

    int top_unused(int d) const {
        for (int e : order_[d]) {
            if (toward_[e] < 0) return e;
        }
        return -1;
    }

    void descend(std::array<double, 2> deficit, int used) {
        const bool c0 = covered(deficit[0]);
        const bool c1 = covered(deficit[1]);
        if (c0 && c1) {
            if (used < best_count_) {
                best_count_ = used;
                best_toward_ = toward_;
            }
            return;
        }
        const int need0 = c0 ? 0 : cover_count(0, deficit[0]);
        const int need1 = c1 ? 0 : cover_count(1, deficit[1]);
        if (need0 == kNoCover || need1 == kNoCover) return;
        const int lower =
            used + std::max(need0 + need1, joint_count(deficit[0], deficit[1]));
        if (lower >= best_count_ || lower > budget_) return;

        if (c0 || c1) {
            // single uncovered direction: taking its best remaining
            // element is never worse
            const int d = c0 ? 1 : 0;
            const int e = top_unused(d);
            toward_[e] = d;
            auto next = deficit;
            next[d] -= config_.alpha * channels_.cascade[d][e];
            descend(next, used + 1);
            toward_[e] = -1;
            return;
        }

        // contested: both directions want their top element; branch the
        // larger-deficit direction's pick both ways
        const int first = deficit[0] >= deficit[1] ? 0 : 1;
        const int e = top_unused(first);
        for (int d : {first, 1 - first}) {
            toward_[e] = d;
            auto next = deficit;
            next[d] -= config_.alpha * channels_.cascade[d][e];
            descend(next, used + 1);
        }
        toward_[e] = -1;
    }

    const ChannelRealization& channels_;
    const ScenarioConfig& config_;
    int n_;
    int budget_;
    std::array<std::vector<int>, 2> order_;
    std::vector<int> joint_order_;
    std::vector<int> toward_;  // -1 unused, else direction
    std::vector<int> best_toward_;
    int best_count_ = kNoCover;
};

bool capacity_gate_ok(BatteryState battery_before, double theta,
                      const ScenarioConfig& config) {
    return battery_before.stored + harvest_energy(theta, config) <=
           config.battery_capacity + kFeasTol;
}

}  // namespace

MasterSolution solve_master(const PowerAllocation& p_bar,
                            const ChannelRealization& channels,
                            BatteryState battery_before, double theta,
                            const ScenarioConfig& config) {
    config.validate();
    MasterSolution out;
    out.assignment = ElementAssignment(config.n_elements);
    if (!capacity_gate_ok(battery_before, theta, config)) return out;

    const double q = rate_snr_threshold(config);
    std::array<double, 2> deficit{0.0, 0.0};
    for (int d = 0; d < 2; ++d) {
        if (q <= 0.0) continue;
        const double serving = p_bar.p[1 - d];
        if (!(serving > 0.0)) {
            throw std::domain_error(
                "solve_master: fixed power must be positive when the rate "
                "threshold is");
        }
        const double target = std::sqrt(q / serving);
        deficit[d] = target * (1.0 - kCoverRelTol) - channels.h_direct;
    }

    const double slot_element_energy = config.t_s * config.p_e;
    int budget = config.n_elements;
    if (slot_element_energy > 0.0) {
        budget = static_cast<int>(
            std::min<double>(config.n_elements,
                             std::floor((battery_before.stored + kFeasTol) /
                                        slot_element_energy)));
    }

    bool covered;
    if (channels.cascade[0] == channels.cascade[1]) {
        PrefixPartitionMaster search(channels.cascade[0], config.alpha,
                                     budget);
        covered = search.run(deficit, out.assignment);
    } else {
        MasterSearch search(channels, config, budget);
        covered = search.run(deficit, out.assignment);
    }
    if (!covered) {
        out.status = milp::SolveStatus::infeasible;
        return out;
    }
    out.status = milp::SolveStatus::optimal;
    out.e_ris = ris_consumption(out.assignment, config);
    return out;
}

AuxSolution solve_auxiliary(const ElementAssignment& eps_bar,
                            const ChannelRealization& channels,
                            BatteryState battery_before, double theta,
                            const ScenarioConfig& config) {
    config.validate();
    AuxSolution out;
    if (!eps_bar.exclusive()) {
        throw std::invalid_argument("solve_auxiliary: assignment violates "
                                    "element exclusivity");
    }
    if (ris_consumption(eps_bar, config) >
        battery_before.stored + kFeasTol) {
        throw std::invalid_argument("solve_auxiliary: assignment violates "
                                    "energy causality");
    }
    if (!capacity_gate_ok(battery_before, theta, config)) {
        out.diagnosis = "capacity gate violated";
        return out;
    }

    const double q = rate_snr_threshold(config);
    for (int d = 0; d < 2; ++d) {
        double p;
        if (q <= 0.0) {
            p = config.p_min;
        } else {
            const double amp = received_amplitude(d, eps_bar, channels, config);
            if (amp <= 0.0) {
                out.diagnosis = "no path toward user " + std::to_string(d + 1);
                return out;
            }
            const double required = q / (amp * amp);
            if (required > config.p_max * (1.0 + kPowerRelTol)) {
                out.diagnosis = "required power toward user " +
                                std::to_string(d + 1) + " exceeds p_max";
                return out;
            }
            p = std::clamp(required, config.p_min, config.p_max);
        }
        out.power.p[1 - d] = p;
    }
    out.status = milp::SolveStatus::optimal;
    out.e_users = user_energy(out.power, config);
    return out;
}

BendersResult benders_iterate(const ChannelRealization& channels,
                              BatteryState battery_before, double theta,
                              const ScenarioConfig& config, double tol,
                              int max_iter) {
    if (!(tol > 0.0) || max_iter < 1) {
        throw std::invalid_argument("benders_iterate: need tol > 0 and "
                                    "max_iter >= 1");
    }
    config.validate();

    BendersResult result;
    result.outcome.assignment = ElementAssignment(config.n_elements);
    result.outcome.feasible = false;
    if (rate_snr_threshold(config) > 0.0 && !(config.p_max > 0.0)) {
        return result;  // no positive power available, thresholds unreachable
    }

    PowerAllocation p_bar{{config.p_max, config.p_max}};
    double upper = kInfinity;
    bool have_best = false;
    double best_combined = kInfinity;
    ElementAssignment best_assignment;
    PowerAllocation best_power;

    ElementAssignment prev_assignment;
    PowerAllocation prev_power;
    bool have_prev = false;

    for (int iter = 1; iter <= max_iter; ++iter) {
        const MasterSolution master =
            solve_master(p_bar, channels, battery_before, theta, config);
        if (master.status != milp::SolveStatus::optimal) break;
        const AuxSolution aux = solve_auxiliary(master.assignment, channels,
                                                battery_before, theta, config);
        if (aux.status != milp::SolveStatus::optimal) break;

        const double combined =
            config.zeta * master.e_ris +
            (1.0 - config.zeta) * (aux.e_users[0] + aux.e_users[1]);
        const double lower =
            config.zeta * master.e_ris +
            (1.0 - config.zeta) * 2.0 * config.t_s * config.p_min;
        upper = std::min(upper, combined);

        BendersIteration record;
        record.iteration = iter;
        record.p_bar = p_bar;
        record.assignment = master.assignment;
        record.master_objective = master.e_ris;
        record.aux_objective = aux.e_users[0] + aux.e_users[1];
        record.combined_objective = combined;
        record.lower_bound = lower;
        record.upper_bound = upper;
        result.trace.iterations.push_back(record);

        if (!have_best || combined < best_combined) {
            have_best = true;
            best_combined = combined;
            best_assignment = master.assignment;
            best_power = aux.power;
        }

        const double gap = (upper - lower) / std::max(upper, 1e-15);
        const bool repeated = have_prev &&
                              master.assignment == prev_assignment &&
                              aux.power == prev_power;
        if (gap <= tol || repeated) break;

        prev_assignment = master.assignment;
        prev_power = aux.power;
        have_prev = true;
        p_bar = aux.power;
    }

    if (have_best) {
        SlotOutcome& o = result.outcome;
        o.assignment = best_assignment;
        o.power = best_power;
        for (int d = 0; d < 2; ++d) {
            o.rates[d] =
                achievable_rate(d, best_assignment, best_power, channels,
                                config);
        }
        o.e_ris = ris_consumption(best_assignment, config);
        o.e_users = user_energy(best_power, config);
        o.objective = best_combined;
        o.battery_after = battery_update(
            battery_before, harvest_energy(theta, config), o.e_ris, config);
        o.feasible = true;
    }
    return result;
}

void write_trace_csv(const BendersTrace& trace, std::ostream& out) {
    out << std::setprecision(12);
    out << "iteration,upper_bound,lower_bound,e_ris,e_users,active_elements\n";
    for (const auto& it : trace.iterations) {
        out << it.iteration << ',' << it.upper_bound << ',' << it.lower_bound
            << ',' << it.master_objective << ',' << it.aux_objective << ','
            << it.assignment.active_count() << '\n';
    }
}

}  // namespace risopt::benders

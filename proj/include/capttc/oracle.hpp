#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "capttc/engine.hpp"
#include "capttc/model.hpp"
#include "capttc/rng.hpp"
#include "capttc/satisfaction.hpp"

namespace capttc {

// Hard bounds for the exhaustive checkers. They refuse with BudgetExceeded
// instead of degrading silently.
struct OracleBudget {
    int max_agents = 8;
    int max_total_preferences = 32;
    int max_coalition_size = 6;
    int full_permutation_max_prefs = 5;  // above this, misreports are sampled
    int misreport_samples = 200;
    std::uint64_t sample_seed = 0x9e3779b97f4a7c15ull;
};

class BudgetExceeded : public std::runtime_error {
public:
    explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require_within_budget(const Instance& instance, const OracleBudget& budget) {
    if (static_cast<int>(instance.agents().size()) > budget.max_agents)
        throw BudgetExceeded("oracle budget exceeded: " +
                             std::to_string(instance.agents().size()) + " agents against cap " +
                             std::to_string(budget.max_agents));
    std::size_t total = 0;
    for (const auto& a : instance.agents()) total += a.preferences.size();
    if (static_cast<int>(total) > budget.max_total_preferences)
        throw BudgetExceeded("oracle budget exceeded: " + std::to_string(total) +
                             " preference entries against cap " +
                             std::to_string(budget.max_total_preferences));
}

// Option table for the exhaustive space of constraints: at most one resource
// per agent, quotas respected, only listed resources, and nobody below its
// endowment. Endowed agents always hold a slot, so staying unassigned is an
// option only for unendowed agents (encoded as npos, enumerated last).
struct SearchTables {
    static constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();

    std::vector<std::vector<std::size_t>> options;       // per agent: resource indices
    std::vector<std::vector<double>> option_sat;         // aligned satisfaction values
    std::vector<bool> may_skip;                          // unendowed agents may stay out
    std::vector<int> capacity;

    explicit SearchTables(const Instance& instance) {
        const auto& agents = instance.agents();
        options.resize(agents.size());
        option_sat.resize(agents.size());
        may_skip.resize(agents.size());
        for (std::size_t i = 0; i < agents.size(); ++i) {
            const Agent& agent = agents[i];
            const int usable = acceptable_count(agent);
            for (int k = 0; k < usable; ++k) {
                options[i].push_back(*instance.resource_index(agent.preferences[k]));
                option_sat[i].push_back(
                    pt_satisfaction(agent, agent.preferences[k], instance.params()));
            }
            may_skip[i] = !agent.endowment.has_value();
        }
        for (const auto& r : instance.resources()) capacity.push_back(r.quota);
    }
};

// Depth-first walk over every feasible assignment, agents in instance order,
// options in preference order (unassigned last). The visitor sees the chosen
// resource index per agent (kUnassigned when out) and the satisfaction total.
template <typename Visitor>
void for_each_feasible(const SearchTables& tables, Visitor&& visit) {
    const std::size_t n = tables.options.size();
    std::vector<std::size_t> chosen(n, SearchTables::kUnassigned);
    std::vector<int> used(tables.capacity.size(), 0);
    std::function<void(std::size_t, double)> descend = [&](std::size_t agent, double total) {
        if (agent == n) {
            visit(chosen, total);
            return;
        }
        const auto& opts = tables.options[agent];
        for (std::size_t k = 0; k < opts.size(); ++k) {
            const std::size_t r = opts[k];
            if (used[r] == tables.capacity[r]) continue;
            ++used[r];
            chosen[agent] = r;
            descend(agent + 1, total + tables.option_sat[agent][k]);
            --used[r];
        }
        chosen[agent] = SearchTables::kUnassigned;
        if (tables.may_skip[agent]) descend(agent + 1, total);
    };
    descend(0, 0.0);
}

inline Assignment materialize(const Instance& instance, const std::vector<std::size_t>& chosen) {
    Assignment out;
    const auto& agents = instance.agents();
    for (std::size_t i = 0; i < agents.size(); ++i) {
        AgentAssignment row;
        row.agent = agents[i].id;
        if (chosen[i] != SearchTables::kUnassigned) {
            const std::string& rid = instance.resources()[chosen[i]].id;
            row.resource = rid;
            row.rank = assigned_rank(agents[i], rid);
            row.satisfaction = pt_satisfaction(agents[i], rid, instance.params());
        }
        out.agents.push_back(std::move(row));
    }
    for (std::size_t j = 0; j < instance.resources().size(); ++j) {
        std::vector<std::string> members;
        for (std::size_t i = 0; i < agents.size(); ++i)
            if (chosen[i] == j) members.push_back(agents[i].id);
        out.occupants.emplace_back(instance.resources()[j].id, std::move(members));
    }
    return out;
}

// Ordinal key for comparing outcomes by an agent's reported order: smaller is
// better, staying unassigned is worse than any listed resource.
inline int outcome_key(const Agent& agent, const std::optional<std::string>& resource) {
    if (!resource) return static_cast<int>(agent.preferences.size()) + 1;
    return assigned_rank(agent, *resource);
}

}  // namespace detail

struct OptimizeResult {
    double best_total = 0.0;
    Assignment assignment;
};

// Exact maximum of total prospect-theoretic satisfaction over the feasible
// space; ties keep the first assignment in canonical enumeration order.
inline OptimizeResult optimize(const Instance& instance, const OracleBudget& budget = {}) {
    detail::require_within_budget(instance, budget);
    detail::SearchTables tables(instance);
    double best = -1.0;
    std::vector<std::size_t> best_chosen;
    detail::for_each_feasible(tables, [&](const std::vector<std::size_t>& chosen, double total) {
        if (total > best) {
            best = total;
            best_chosen = chosen;
        }
    });
    if (best_chosen.empty() && best < 0.0)
        throw std::logic_error("feasible space is empty");  // endowed agents always fit
    return OptimizeResult{best, detail::materialize(instance, best_chosen)};
}

struct ParetoResult {
    bool pareto_optimal = true;
    std::optional<Assignment> dominating;
};

// True iff no feasible assignment weakly improves every agent (by its own
// reported order) and strictly improves at least one.
inline ParetoResult is_pareto_optimal(const Instance& instance, const Assignment& assignment,
                                      const OracleBudget& budget = {}) {
    detail::require_within_budget(instance, budget);
    detail::SearchTables tables(instance);
    const auto& agents = instance.agents();
    std::vector<int> base_key(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i)
        base_key[i] = detail::outcome_key(agents[i], assignment.resource_of(agents[i].id));

    ParetoResult result;
    const std::size_t n = agents.size();
    std::vector<std::size_t> chosen(n, detail::SearchTables::kUnassigned);
    std::vector<int> used(tables.capacity.size(), 0);
    std::function<bool(std::size_t, bool)> descend = [&](std::size_t agent,
                                                         bool any_strict) -> bool {
        if (agent == n) return any_strict;
        const auto& opts = tables.options[agent];
        for (std::size_t k = 0; k < opts.size(); ++k) {
            const int key = static_cast<int>(k) + 1;  // options follow preference order
            if (key > base_key[agent]) break;         // weak improvement already lost
            const std::size_t r = opts[k];
            if (used[r] == tables.capacity[r]) continue;
            ++used[r];
            chosen[agent] = r;
            if (descend(agent + 1, any_strict || key < base_key[agent])) return true;
            --used[r];
        }
        chosen[agent] = detail::SearchTables::kUnassigned;
        if (tables.may_skip[agent]) {
            const int key = static_cast<int>(agents[agent].preferences.size()) + 1;
            if (key <= base_key[agent] && descend(agent + 1, any_strict || key < base_key[agent]))
                return true;
        }
        return false;
    };
    if (descend(0, false)) {
        result.pareto_optimal = false;
        result.dominating = detail::materialize(instance, chosen);
    }
    return result;
}

struct BlockingCoalition {
    std::vector<std::string> agents;
    std::vector<std::pair<std::string, std::string>> reallocation;  // agent -> resource
};

// Searches every coalition of endowed agents (up to the budgeted size) for an
// internal reallocation of exactly their endowed slots that makes every
// member strictly better off than under the given assignment.
inline std::optional<BlockingCoalition> find_blocking_coalition(const Instance& instance,
                                                                const Assignment& assignment,
                                                                const OracleBudget& budget = {}) {
    detail::require_within_budget(instance, budget);
    const auto& agents = instance.agents();
    std::vector<std::size_t> endowed;
    for (std::size_t i = 0; i < agents.size(); ++i)
        if (agents[i].endowment) endowed.push_back(i);

    std::vector<int> base_key(agents.size(), 0);
    for (std::size_t i : endowed)
        base_key[i] = detail::outcome_key(agents[i], assignment.resource_of(agents[i].id));

    const int max_size =
        std::min<int>(budget.max_coalition_size, static_cast<int>(endowed.size()));
    std::vector<std::size_t> members;
    std::optional<BlockingCoalition> found;

    // Strict self-improvement needs a genuine swap, so singletons are skipped.
    std::function<void(std::size_t, int)> choose = [&](std::size_t next, int want) {
        if (found) return;
        if (want == 0) {
            std::vector<std::size_t> slots;
            slots.reserve(members.size());
            for (std::size_t m : members)
                slots.push_back(*instance.resource_index(*agents[m].endowment));
            std::sort(slots.begin(), slots.end());
            do {
                bool all_strict = true;
                for (std::size_t k = 0; k < members.size() && all_strict; ++k) {
                    const Agent& agent = agents[members[k]];
                    const auto& rid = instance.resources()[slots[k]].id;
                    auto it =
                        std::find(agent.preferences.begin(), agent.preferences.end(), rid);
                    if (it == agent.preferences.end()) {
                        all_strict = false;
                        continue;
                    }
                    const int key = static_cast<int>(it - agent.preferences.begin()) + 1;
                    all_strict = key < base_key[members[k]];
                }
                if (all_strict) {
                    BlockingCoalition result;
                    for (std::size_t k = 0; k < members.size(); ++k) {
                        result.agents.push_back(agents[members[k]].id);
                        result.reallocation.emplace_back(agents[members[k]].id,
                                                         instance.resources()[slots[k]].id);
                    }
                    found = std::move(result);
                    return;
                }
            } while (std::next_permutation(slots.begin(), slots.end()));
            return;
        }
        for (std::size_t k = next; k + want <= endowed.size() && !found; ++k) {
            members.push_back(endowed[k]);
            choose(k + 1, want - 1);
            members.pop_back();
        }
    };
    for (int size = 2; size <= max_size && !found; ++size) choose(0, size);
    return found;
}

struct StrategyProofnessResult {
    bool strategy_proof = true;
    std::string agent;
    std::vector<std::string> misreport;
    std::optional<std::string> truthful_outcome;
    std::optional<std::string> deviant_outcome;  // strictly better in the true order
};

// Reruns the mechanism under every misreported preference order of each agent
// (others fixed) and compares that agent's outcome under its true order.
inline StrategyProofnessResult check_strategy_proofness(const Instance& instance,
                                                        const OracleBudget& budget = {},
                                                        const EngineConfig& engine_config = {}) {
    detail::require_within_budget(instance, budget);
    const Assignment truthful = run(instance, engine_config).assignment;
    const auto& agents = instance.agents();

    for (std::size_t i = 0; i < agents.size(); ++i) {
        const Agent& agent = agents[i];
        if (agent.preferences.size() < 2) continue;
        const int truthful_key = detail::outcome_key(agent, truthful.resource_of(agent.id));

        std::vector<std::vector<std::string>> reports;
        if (static_cast<int>(agent.preferences.size()) <= budget.full_permutation_max_prefs) {
            std::vector<std::string> order = agent.preferences;
            std::sort(order.begin(), order.end());
            do {
                if (order != agent.preferences) reports.push_back(order);
            } while (std::next_permutation(order.begin(), order.end()));
        } else {
            std::mt19937_64 rng(budget.sample_seed + 0x51ed2701ull * (i + 1));
            for (int s = 0; s < budget.misreport_samples; ++s) {
                std::vector<std::string> order = agent.preferences;
                shuffle_stable(order, rng);
                if (order != agent.preferences) reports.push_back(std::move(order));
            }
        }

        for (const auto& report : reports) {
            std::vector<Agent> modified = agents;
            modified[i].preferences = report;
            Instance deviated(std::move(modified), instance.resources(), instance.params());
            const Assignment outcome = run(deviated, engine_config).assignment;
            const auto received = outcome.resource_of(agent.id);
            if (detail::outcome_key(agent, received) < truthful_key) {
                StrategyProofnessResult result;
                result.strategy_proof = false;
                result.agent = agent.id;
                result.misreport = report;
                result.truthful_outcome = truthful.resource_of(agent.id);
                result.deviant_outcome = received;
                return result;
            }
        }
    }
    return StrategyProofnessResult{};
}

struct RationalityResult {
    bool individually_rational = true;
    std::vector<std::string> offenders;
};

// Rank-level individual rationality: every endowed agent ends weakly above
// its endowment in its own reported order.
inline RationalityResult check_individual_rationality(const Instance& instance,
                                                      const Assignment& assignment) {
    RationalityResult result;
    for (const auto& agent : instance.agents()) {
        if (!agent.endowment) continue;
        const auto received = assignment.resource_of(agent.id);
        const int endow_rank = assigned_rank(agent, *agent.endowment);
        if (!received || assigned_rank(agent, *received) > endow_rank) {
            result.individually_rational = false;
            result.offenders.push_back(agent.id);
        }
    }
    return result;
}

}  // namespace capttc

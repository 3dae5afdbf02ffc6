#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace capttc {

// Prospect-theory value-function parameters. Only the gain curvature alpha
// drives the mechanism; beta and lambda belong to the loss branch, which the
// reassignment path never reaches (no agent ends below its endowment).
struct SatisfactionParams {
    double alpha = 0.5;
    double beta = 0.5;
    double lambda = 2.25;

    bool operator==(const SatisfactionParams&) const = default;
};

struct Resource {
    std::string id;
    int quota = 1;

    bool operator==(const Resource&) const = default;
};

// A non-compliant agent: the slot it holds entering reassignment (endowment,
// absent for unendowed agents) and its strict preference order over the
// resources it may receive. The full reported order is kept so ranks and
// scores stay stable; entries ranked strictly below the endowment are never
// assignable (see acceptable_count).
struct Agent {
    std::string id;
    std::optional<std::string> endowment;
    std::vector<std::string> preferences;

    bool operator==(const Agent&) const = default;
};

// One well-formedness or contract breach. Violations are data, not failures:
// validators collect every breach instead of stopping at the first.
struct Violation {
    std::string code;     // stable machine-readable tag, e.g. "quota-exceeded"
    std::string subject;  // offending agent or resource id
    std::string detail;
};

// The reassignment market: agents with endowments and strict preferences,
// resources with residual quotas. Quotas are the capacities left over after
// compliant occupants; compliant agents are not modelled. Immutable after
// construction; safe to share across concurrent runs.
class Instance {
public:
    Instance() = default;

    Instance(std::vector<Agent> agents, std::vector<Resource> resources,
             SatisfactionParams params = {})
        : agents_(std::move(agents)), resources_(std::move(resources)), params_(params) {
        for (std::size_t i = 0; i < agents_.size(); ++i)
            agent_idx_.emplace(agents_[i].id, i);
        for (std::size_t j = 0; j < resources_.size(); ++j)
            resource_idx_.emplace(resources_[j].id, j);
    }

    const std::vector<Agent>& agents() const { return agents_; }
    const std::vector<Resource>& resources() const { return resources_; }
    const SatisfactionParams& params() const { return params_; }

    std::optional<std::size_t> agent_index(const std::string& id) const {
        auto it = agent_idx_.find(id);
        if (it == agent_idx_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::size_t> resource_index(const std::string& id) const {
        auto it = resource_idx_.find(id);
        if (it == resource_idx_.end()) return std::nullopt;
        return it->second;
    }

    bool operator==(const Instance& other) const {
        return agents_ == other.agents_ && resources_ == other.resources_ &&
               params_ == other.params_;
    }

private:
    std::vector<Agent> agents_;
    std::vector<Resource> resources_;
    SatisfactionParams params_;
    std::unordered_map<std::string, std::size_t> agent_idx_;
    std::unordered_map<std::string, std::size_t> resource_idx_;
};

// 1-based position of a resource in the agent's reported preference list;
// rank 1 is the most preferred.
inline int assigned_rank(const Agent& agent, const std::string& resource) {
    auto it = std::find(agent.preferences.begin(), agent.preferences.end(), resource);
    if (it == agent.preferences.end())
        throw std::invalid_argument("assigned_rank: resource '" + resource +
                                    "' not in preferences of agent '" + agent.id + "'");
    return static_cast<int>(it - agent.preferences.begin()) + 1;
}

// Number of leading preference entries the agent may actually receive. For an
// endowed agent the list is truncated at the endowment: anything ranked below
// it is unreachable and never assigned. Unendowed agents keep their full list.
inline int acceptable_count(const Agent& agent) {
    if (!agent.endowment) return static_cast<int>(agent.preferences.size());
    return assigned_rank(agent, *agent.endowment);
}

inline std::vector<Violation> validate_instance(const Instance& instance) {
    std::vector<Violation> out;
    const auto& params = instance.params();
    if (!(params.alpha > 0.0 && params.alpha <= 1.0))
        out.push_back({"bad-alpha", "params", "alpha must lie in (0, 1]"});
    if (!(params.beta > 0.0 && params.beta <= 1.0))
        out.push_back({"bad-beta", "params", "beta must lie in (0, 1]"});
    if (!(params.lambda > 1.0))
        out.push_back({"bad-lambda", "params", "lambda must be > 1"});

    std::unordered_map<std::string, int> resource_seen;
    for (const auto& r : instance.resources()) {
        if (++resource_seen[r.id] == 2)
            out.push_back({"duplicate-resource-id", r.id, "resource id declared more than once"});
        if (r.quota < 1)
            out.push_back({"bad-quota", r.id, "quota must be >= 1"});
    }

    std::unordered_map<std::string, int> agent_seen;
    std::unordered_map<std::string, int> endowed_count;
    for (const auto& a : instance.agents()) {
        if (++agent_seen[a.id] == 2)
            out.push_back({"duplicate-agent-id", a.id, "agent id declared more than once"});

        std::unordered_map<std::string, int> pref_seen;
        for (const auto& p : a.preferences) {
            if (++pref_seen[p] == 2)
                out.push_back({"duplicate-preference", a.id,
                               "resource '" + p + "' listed more than once"});
            if (!instance.resource_index(p))
                out.push_back({"unknown-resource", a.id,
                               "preference names unknown resource '" + p + "'"});
        }
        if (a.endowment) {
            ++endowed_count[*a.endowment];
            if (!instance.resource_index(*a.endowment))
                out.push_back({"unknown-endowment", a.id,
                               "endowment names unknown resource '" + *a.endowment + "'"});
            if (pref_seen.find(*a.endowment) == pref_seen.end())
                out.push_back({"endowment-not-acceptable", a.id,
                               "endowment '" + *a.endowment + "' missing from preference list"});
        }
    }
    for (const auto& r : instance.resources()) {
        auto it = endowed_count.find(r.id);
        if (it != endowed_count.end() && it->second > r.quota)
            out.push_back({"endowment-exceeds-quota", r.id,
                           std::to_string(it->second) + " agents endowed against quota " +
                               std::to_string(r.quota)});
    }
    return out;
}

// Per-agent slice of a final assignment. rank is the 1-based position of the
// received resource in the reported list; 0 when the agent stays unassigned.
struct AgentAssignment {
    std::string agent;
    std::optional<std::string> resource;
    int rank = 0;
    double satisfaction = 0.0;

    bool operator==(const AgentAssignment&) const = default;
};

// Final one-to-many mapping: agent rows in instance order plus the mirrored
// per-resource occupant lists.
struct Assignment {
    std::vector<AgentAssignment> agents;
    std::vector<std::pair<std::string, std::vector<std::string>>> occupants;

    const AgentAssignment* find(const std::string& agent_id) const {
        for (const auto& a : agents)
            if (a.agent == agent_id) return &a;
        return nullptr;
    }

    std::optional<std::string> resource_of(const std::string& agent_id) const {
        const auto* a = find(agent_id);
        if (!a) return std::nullopt;
        return a->resource;
    }

    double total_satisfaction() const {
        double total = 0.0;
        for (const auto& a : agents) total += a.satisfaction;
        return total;
    }

    bool operator==(const Assignment&) const = default;
};

// Assignment contract: each agent maps to at most one resource (structural),
// occupant counts respect quotas, the two directions agree, and every
// received resource appears in its agent's preference list.
inline std::vector<Violation> check_assignment(const Instance& instance,
                                               const Assignment& assignment) {
    std::vector<Violation> out;
    std::unordered_map<std::string, std::vector<std::string>> by_resource;
    std::unordered_map<std::string, int> agent_rows;

    for (const auto& row : assignment.agents) {
        if (++agent_rows[row.agent] == 2)
            out.push_back({"duplicate-assignment-row", row.agent, "agent listed twice"});
        auto ai = instance.agent_index(row.agent);
        if (!ai) {
            out.push_back({"unknown-agent", row.agent, "assignment names unknown agent"});
            continue;
        }
        if (!row.resource) continue;
        by_resource[*row.resource].push_back(row.agent);
        const Agent& agent = instance.agents()[*ai];
        if (std::find(agent.preferences.begin(), agent.preferences.end(), *row.resource) ==
            agent.preferences.end())
            out.push_back({"infeasible-assignment", row.agent,
                           "received '" + *row.resource + "' outside its preference list"});
    }
    for (const auto& a : instance.agents())
        if (agent_rows.find(a.id) == agent_rows.end())
            out.push_back({"missing-agent", a.id, "agent absent from assignment"});

    for (const auto& r : instance.resources()) {
        auto it = by_resource.find(r.id);
        const int count = it == by_resource.end() ? 0 : static_cast<int>(it->second.size());
        if (count > r.quota)
            out.push_back({"quota-exceeded", r.id,
                           std::to_string(count) + " occupants against quota " +
                               std::to_string(r.quota)});
    }
    for (const auto& [rid, members] : assignment.occupants) {
        if (!instance.resource_index(rid)) {
            out.push_back({"unknown-resource", rid, "occupant list names unknown resource"});
            continue;
        }
        auto expected = by_resource[rid];
        auto got = members;
        std::sort(expected.begin(), expected.end());
        std::sort(got.begin(), got.end());
        if (expected != got)
            out.push_back({"occupancy-mismatch", rid,
                           "occupant list disagrees with per-agent assignments"});
        by_resource.erase(rid);
    }
    for (const auto& [rid, members] : by_resource) {
        (void)members;
        out.push_back({"occupancy-mismatch", rid, "assigned resource missing an occupant list"});
    }
    return out;
}

}  // namespace capttc

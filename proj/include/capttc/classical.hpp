#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "capttc/model.hpp"
#include "capttc/satisfaction.hpp"

namespace capttc {

// Reference implementation of the classical top-trading-cycles mechanism on
// endowed units only. Each agent points at the single owner of its favorite
// remaining endowed resource; the unit-disjoint cycles trade and exit. Spare
// capacity and co-owned resources are outside the classical model, so the
// instance must give every resource at most one endowed owner.
inline Assignment classical_ttc(const Instance& instance) {
    if (auto violations = validate_instance(instance); !violations.empty())
        throw std::invalid_argument("classical_ttc: invalid instance");

    const std::size_t n = instance.agents().size();
    std::vector<std::optional<std::size_t>> owner_of;  // resource -> endowed agent
    owner_of.assign(instance.resources().size(), std::nullopt);
    for (std::size_t i = 0; i < n; ++i) {
        const Agent& agent = instance.agents()[i];
        if (!agent.endowment) continue;
        auto r = *instance.resource_index(*agent.endowment);
        if (owner_of[r])
            throw std::invalid_argument(
                "classical_ttc: resource '" + *agent.endowment + "' has co-owners");
        owner_of[r] = i;
    }

    std::vector<char> active(n, 0);
    std::vector<std::optional<std::size_t>> result(n, std::nullopt);
    std::size_t remaining = 0;
    for (std::size_t i = 0; i < n; ++i) {
        active[i] = instance.agents()[i].endowment.has_value() ? 1 : 0;
        if (active[i]) ++remaining;
    }

    while (remaining > 0) {
        // Point at the owner of the best remaining endowed resource. The own
        // endowment is always among them, so a pointer always exists.
        std::vector<std::optional<std::size_t>> points_to(n, std::nullopt);
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            const Agent& agent = instance.agents()[i];
            const int usable = acceptable_count(agent);
            for (int k = 0; k < usable && !points_to[i]; ++k) {
                auto r = *instance.resource_index(agent.preferences[k]);
                if (owner_of[r] && active[*owner_of[r]]) points_to[i] = *owner_of[r];
            }
            if (!points_to[i])
                throw std::logic_error("classical_ttc: active agent lost its endowment");
        }
        // With out-degree one everywhere, walking pointers from any active
        // agent must enter a cycle; resolve every cycle found this round.
        std::vector<char> resolved(n, 0);
        for (std::size_t start = 0; start < n; ++start) {
            if (!active[start] || resolved[start]) continue;
            std::vector<std::size_t> walk;
            std::vector<int> seen_at(n, -1);
            std::size_t v = start;
            while (seen_at[v] < 0 && !resolved[v]) {
                seen_at[v] = static_cast<int>(walk.size());
                walk.push_back(v);
                v = *points_to[v];
            }
            if (resolved[v]) continue;  // walked into an already-handled cycle's tail
            for (std::size_t k = seen_at[v]; k < walk.size(); ++k) {
                const std::size_t agent = walk[k];
                const std::size_t successor =
                    k + 1 < walk.size() ? walk[k + 1] : walk[seen_at[v]];
                result[agent] =
                    *instance.resource_index(*instance.agents()[successor].endowment);
                resolved[agent] = 1;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!resolved[i] || !active[i]) continue;
            active[i] = 0;
            --remaining;
        }
        for (std::size_t r = 0; r < owner_of.size(); ++r)
            if (owner_of[r] && resolved[*owner_of[r]]) owner_of[r] = std::nullopt;
    }

    Assignment out;
    for (std::size_t i = 0; i < n; ++i) {
        const Agent& agent = instance.agents()[i];
        AgentAssignment row;
        row.agent = agent.id;
        if (result[i]) {
            const std::string& rid = instance.resources()[*result[i]].id;
            row.resource = rid;
            row.rank = assigned_rank(agent, rid);
            row.satisfaction = pt_satisfaction(agent, rid, instance.params());
        }
        out.agents.push_back(std::move(row));
    }
    for (std::size_t j = 0; j < instance.resources().size(); ++j) {
        std::vector<std::string> members;
        for (std::size_t i = 0; i < n; ++i)
            if (result[i] && *result[i] == j) members.push_back(instance.agents()[i].id);
        out.occupants.emplace_back(instance.resources()[j].id, std::move(members));
    }
    return out;
}

}  // namespace capttc

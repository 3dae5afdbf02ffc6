#pragma once

#include <string>
#include <vector>

#include "capttc/model.hpp"
#include "capttc/rng.hpp"
#include "capttc/scenario.hpp"

// Hand-built copies of the bundled scenarios, so engine tests do not depend
// on the file loader (the scenario tests assert the two stay in sync).
namespace fixtures {

inline capttc::Agent agent(std::string id, std::string endowment,
                           std::vector<std::string> preferences) {
    return capttc::Agent{std::move(id), std::move(endowment), std::move(preferences)};
}

inline capttc::Instance classic_swap() {
    return capttc::Instance{{agent("a1", "r1", {"r2", "r1", "r3"}),
                             agent("a2", "r2", {"r1", "r2", "r3"}),
                             agent("a3", "r3", {"r3", "r1", "r2"})},
                            {{"r1", 1}, {"r2", 1}, {"r3", 1}},
                            {}};
}

inline capttc::Instance spare_slot() {
    return capttc::Instance{{agent("a1", "r1", {"r2", "r1", "r3"}),
                             agent("a2", "r2", {"r1", "r2", "r3"}),
                             agent("a3", "r3", {"r2", "r1", "r3"})},
                            {{"r1", 2}, {"r2", 1}, {"r3", 1}},
                            {}};
}

inline capttc::Instance overlap_long_wins() {
    return capttc::Instance{{agent("a1", "r1", {"r3", "r1", "r2"}),
                             agent("a2", "r2", {"r1", "r2", "r3"}),
                             agent("a3", "r3", {"r2", "r1", "r3"}),
                             agent("a4", "r2", {"r3", "r1", "r2"})},
                            {{"r1", 1}, {"r2", 2}, {"r3", 1}},
                            {}};
}

inline capttc::Instance overlap_short_wins() {
    return capttc::Instance{{agent("a1", "r1", {"r3", "r2", "r1"}),
                             agent("a2", "r2", {"r1", "r2", "r3"}),
                             agent("a3", "r3", {"r2", "r1", "r3"}),
                             agent("a4", "r2", {"r3", "r2", "r1"})},
                            {{"r1", 1}, {"r2", 2}, {"r3", 1}},
                            {}};
}

inline capttc::Instance chain_absorb() {
    return capttc::Instance{{agent("a1", "r1", {"r2", "r1", "r3", "r4"}),
                             agent("a2", "r2", {"r1", "r2", "r3", "r4"}),
                             agent("a3", "r3", {"r1", "r4", "r2", "r3"}),
                             agent("a4", "r2", {"r4", "r3", "r1", "r2"}),
                             agent("a5", "r4", {"r3", "r2", "r4", "r1"})},
                            {{"r1", 2}, {"r2", 2}, {"r3", 1}, {"r4", 1}},
                            {}};
}

inline capttc::Instance multi_overlap_a() {
    return capttc::Instance{{agent("a1", "r1", {"r2", "r3", "r1"}),
                             agent("a2", "r2", {"r1", "r3", "r2"}),
                             agent("a3", "r3", {"r2", "r1", "r3"}),
                             agent("a4", "r2", {"r3", "r1", "r2"})},
                            {{"r1", 1}, {"r2", 2}, {"r3", 1}},
                            {}};
}

inline capttc::Instance multi_overlap_b() {
    return capttc::Instance{{agent("a1", "r1", {"r4", "r3", "r1", "r2"}),
                             agent("a2", "r2", {"r1", "r2", "r3", "r4"}),
                             agent("a3", "r3", {"r2", "r1", "r3", "r4"}),
                             agent("a4", "r2", {"r4", "r3", "r1", "r2"})},
                            {{"r1", 1}, {"r2", 2}, {"r3", 1}, {"r4", 1}},
                            {}};
}

// Desk-scale random markets for the guarantee sweeps: at most 6 agents over at
// most 4 resources with quotas up to 3, everyone endowed.
inline capttc::GeneratorConfig random_config(std::uint64_t seed, int max_agents = 6,
                                             int max_resources = 4, int max_quota = 3) {
    std::mt19937_64 rng(seed * 0x2545F4914F6CDD1Dull + 0x9E3779B97F4A7C15ull);
    capttc::GeneratorConfig config;
    config.seed = seed;
    config.resource_count = 1 + static_cast<int>(capttc::uniform_below(rng, max_resources));
    config.quota = 1 + static_cast<int>(capttc::uniform_below(rng, max_quota));
    const int slots = config.resource_count * config.quota;
    const int cap = std::min(max_agents, slots);
    config.agent_count = 1 + static_cast<int>(capttc::uniform_below(rng, cap));
    config.min_prefs = 1;
    config.max_prefs = config.resource_count;
    return config;
}

inline std::string scenario_path(const std::string& name) {
    return std::string(CAPTTC_SCENARIO_DIR) + "/" + name + ".scenario";
}

}  // namespace fixtures

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "capttc/model.hpp"

namespace capttc {

// Normalized linear rank score: 1 for the top choice, 0 for the least
// preferred. A single-entry list scores 1 (the sole option is also the best).
inline double linear_score(int feasible_count, int rank) {
    if (feasible_count < 1)
        throw std::invalid_argument("linear_score: feasible_count must be >= 1");
    if (rank < 1 || rank > feasible_count)
        throw std::invalid_argument("linear_score: rank " + std::to_string(rank) +
                                    " out of range [1, " + std::to_string(feasible_count) + "]");
    if (feasible_count == 1) return 1.0;
    return static_cast<double>(feasible_count - rank) / static_cast<double>(feasible_count - 1);
}

// Prospect-theory value function. The loss branch is implemented for
// completeness; the mechanism never produces z < 0.
inline double pt_value(double z, const SatisfactionParams& params) {
    if (z >= 0.0) return std::pow(z, params.alpha);
    return -params.lambda * std::pow(-z, params.beta);
}

// Per-agent reference data for the prospect-theoretic score: the linear score
// of the endowment (0 for unendowed agents) and the headroom above it.
struct SatisfactionProfile {
    double reference = 0.0;
    double max_gain = 1.0;
    int feasible_count = 0;
};

inline SatisfactionProfile satisfaction_profile(const Agent& agent) {
    SatisfactionProfile profile;
    profile.feasible_count = static_cast<int>(agent.preferences.size());
    if (agent.endowment)
        profile.reference =
            linear_score(profile.feasible_count, assigned_rank(agent, *agent.endowment));
    profile.max_gain = 1.0 - profile.reference;
    return profile;
}

// Gain over the endowment reference, normalized by the agent's maximum
// possible gain and curved by alpha. 0 at the endowment, 1 at the top choice.
// When the endowment already is the top choice there is no headroom and every
// acceptable outcome (there is exactly one) scores 1.
inline double pt_satisfaction(const Agent& agent, const std::string& resource,
                              const SatisfactionParams& params) {
    const int rank = assigned_rank(agent, resource);
    if (rank > acceptable_count(agent))
        throw std::invalid_argument("pt_satisfaction: '" + resource +
                                    "' is below the endowment of agent '" + agent.id + "'");
    const SatisfactionProfile profile = satisfaction_profile(agent);
    if (profile.max_gain == 0.0) return 1.0;
    const double gain = linear_score(profile.feasible_count, rank) - profile.reference;
    return std::pow(gain / profile.max_gain, params.alpha);
}

// Minimum satisfaction loss: how much the agent gives up if pushed from its
// current target to the next entry of its remaining list. When nothing
// remains after the current target the fallback satisfaction is 0.
inline double satisfaction_loss(const Agent& agent, const std::string& current,
                                const std::vector<std::string>& remaining_preferences,
                                const SatisfactionParams& params) {
    if (remaining_preferences.empty() || remaining_preferences.front() != current)
        throw std::invalid_argument(
            "satisfaction_loss: current resource must head the remaining list");
    const double sat_current = pt_satisfaction(agent, current, params);
    const double sat_next = remaining_preferences.size() > 1
                                ? pt_satisfaction(agent, remaining_preferences[1], params)
                                : 0.0;
    return sat_current - sat_next;
}

}  // namespace capttc

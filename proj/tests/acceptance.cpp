// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Golden markets come from the bundled scenario files; random sweeps use the
// same seeded generator the `verify` command drives.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "capttc/classical.hpp"
#include "capttc/oracle.hpp"
#include "capttc/scenario.hpp"
#include "fixtures.hpp"

using namespace capttc;

namespace {

int failures = 0;

void report(int criterion, bool passed, const std::string& description) {
    std::printf("[%s] criterion %d: %s\n", passed ? "PASS" : "FAIL", criterion,
                description.c_str());
    if (!passed) ++failures;
}

std::map<std::string, std::string> assigned_map(const Assignment& assignment) {
    std::map<std::string, std::string> out;
    for (const auto& row : assignment.agents)
        if (row.resource) out[row.agent] = *row.resource;
    return out;
}

Instance load(const std::string& name) {
    return parse_scenario_file(fixtures::scenario_path(name)).instance;
}

bool near(double value, double want, double tolerance) {
    return std::abs(value - want) <= tolerance;
}

double score_of(const RunResult& result, const std::vector<std::string>& vertices) {
    for (const auto& candidate : result.rounds.at(0).candidates)
        if (candidate.vertices == vertices) return candidate.score;
    return -1.0;
}

bool resolved_first(const RunResult& result, const std::vector<std::string>& vertices) {
    const auto& candidates = result.rounds.at(0).candidates;
    return !candidates.empty() && candidates[0].vertices == vertices &&
           candidates[0].resolved;
}

void criterion_1() {
    const auto instance = load("classic_swap");
    const auto start = std::chrono::steady_clock::now();
    const auto result = run(instance);
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    const bool match =
        assigned_map(result.assignment) ==
        std::map<std::string, std::string>{{"a1", "r2"}, {"a2", "r1"}, {"a3", "r3"}};
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "classic one-to-one swap, exact assignment, %.3f ms (< 10 ms)", ms);
    report(1, match && ms < 10.0, buf);
}

void criterion_2() {
    const auto instance = load("spare_slot");
    const auto capacity_aware = run(instance).assignment;
    const auto reference = classical_ttc(instance);
    const bool passed = capacity_aware.resource_of("a3") == std::optional<std::string>("r1") &&
                        reference.resource_of("a3") == std::optional<std::string>("r3");
    report(2, passed,
           "idle slot reached: capacity-aware sends a3 to r1, unit-ownership reference "
           "strands it on r3");
}

void criterion_3() {
    const auto instance = load("overlap_long_wins");
    const auto result = run(instance);
    bool passed = near(score_of(result, {"a1", "a3", "a2"}), 1.0, 0.005) &&
                  near(score_of(result, {"a3", "a4"}), 0.29, 0.005) &&
                  resolved_first(result, {"a1", "a3", "a2"});
    passed = passed && assigned_map(result.assignment) ==
                           std::map<std::string, std::string>{
                               {"a1", "r3"}, {"a2", "r1"}, {"a3", "r2"}, {"a4", "r2"}};
    const double sats[] = {1.0, 1.0, 1.0, 0.0};
    for (int i = 0; i < 4; ++i)
        passed = passed && near(result.assignment.agents[i].satisfaction, sats[i], 0.005);
    passed = passed && near(result.assignment.total_satisfaction(), 3.0, 0.01);
    report(3, passed,
           "overlapping cycles, long cycle scores 1.0 and goes first, satisfactions "
           "(1,1,1,0), total 3.0");
}

void criterion_4() {
    const auto instance = load("overlap_short_wins");
    const auto result = run(instance);
    bool passed = near(score_of(result, {"a3", "a4"}), 1.0, 0.005) &&
                  near(score_of(result, {"a1", "a3", "a2"}), 0.29, 0.005) &&
                  resolved_first(result, {"a3", "a4"});
    passed = passed && assigned_map(result.assignment) ==
                           std::map<std::string, std::string>{
                               {"a1", "r2"}, {"a2", "r1"}, {"a3", "r2"}, {"a4", "r3"}};
    const double sats[] = {0.71, 1.0, 1.0, 1.0};
    for (int i = 0; i < 4; ++i)
        passed = passed && near(result.assignment.agents[i].satisfaction, sats[i], 0.005);
    const double engine_total = result.assignment.total_satisfaction();
    passed = passed && near(engine_total, 3.71, 0.01);
    const double optimum = optimize(instance).best_total;
    passed = passed && near(optimum, 3.71, 0.01) && near(engine_total, optimum, 1e-9);
    report(4, passed,
           "overlapping cycles, short cycle scores 1.0 and goes first, total 3.71 equals "
           "the exhaustive optimum");
}

void criterion_5() {
    const auto instance = load("chain_absorb");
    const auto result = run(instance);
    bool saw_cycle = false;
    bool saw_chain = false;
    for (const auto& candidate : result.rounds.at(0).candidates) {
        if (candidate.resolved && !candidate.is_chain &&
            candidate.vertices == std::vector<std::string>{"a1", "a2"})
            saw_cycle = true;
        if (candidate.resolved && candidate.is_chain &&
            candidate.vertices == std::vector<std::string>{"a4", "a5", "a3", "v1"})
            saw_chain = true;
    }
    bool passed = saw_cycle && saw_chain;
    // Traced outcome: a4 receives r4. The alternative reading a4 -> r1 would
    // put three occupants on a quota-2 resource, so it is recorded as
    // impossible rather than asserted.
    passed = passed && assigned_map(result.assignment) ==
                           std::map<std::string, std::string>{{"a1", "r2"},
                                                              {"a2", "r1"},
                                                              {"a3", "r1"},
                                                              {"a4", "r4"},
                                                              {"a5", "r3"}};
    for (const auto& [resource, members] : result.assignment.occupants)
        if (resource == "r1") passed = passed && members.size() == 2;
    for (const auto& row : result.assignment.agents)
        passed = passed && near(row.satisfaction, 1.0, 1e-9);
    report(5, passed,
           "cycle (a1,a2) plus chain a4->a5->a3->virtual(r1); a4 takes r4 (a4->r1 would "
           "exceed the quota), all satisfactions 1");
}

void criteria_6_and_7() {
    const int kInstances = 500;
    const auto start = std::chrono::steady_clock::now();
    int termination = 0, rational = 0, pareto = 0, core = 0, truthful = 0;
    int sandwich = 0, welfare_optimal = 0;
    for (int i = 0; i < kInstances; ++i) {
        const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(i);
        const auto instance = generate(fixtures::random_config(seed));
        const auto result = run(instance);

        std::size_t preference_entries = 0;
        for (const auto& agent : instance.agents())
            preference_entries += agent.preferences.size();
        if (result.rounds.size() <= instance.agents().size() + preference_entries &&
            check_assignment(instance, result.assignment).empty())
            ++termination;
        if (check_individual_rationality(instance, result.assignment).individually_rational)
            ++rational;
        if (is_pareto_optimal(instance, result.assignment).pareto_optimal) ++pareto;
        if (!find_blocking_coalition(instance, result.assignment)) ++core;
        if (check_strategy_proofness(instance).strategy_proof) ++truthful;

        const double engine_total = result.assignment.total_satisfaction();
        const double optimum = optimize(instance).best_total;
        if (engine_total >= 0.0 && engine_total <= optimum + 1e-9) ++sandwich;
        if (std::abs(engine_total - optimum) <= 1e-9) ++welfare_optimal;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    char buf[240];
    std::snprintf(buf, sizeof(buf),
                  "property suite on %d random markets: termination %d, rationality %d, "
                  "pareto %d, core %d, truthfulness %d (%.1f s < 300 s)",
                  kInstances, termination, rational, pareto, core, truthful, seconds);
    report(6,
           termination == kInstances && rational == kInstances && pareto == kInstances &&
               core == kInstances && truthful == kInstances && seconds < 300.0,
           buf);

    std::snprintf(buf, sizeof(buf),
                  "oracle sandwich 0 <= engine <= optimum on %d/%d markets; engine hits the "
                  "welfare optimum on %.1f%% (informational)",
                  sandwich, kInstances, 100.0 * welfare_optimal / kInstances);
    report(7, sandwich == kInstances, buf);
}

void criterion_8() {
    int matched = 0;
    const int kInstances = 200;
    for (int i = 0; i < kInstances; ++i) {
        std::mt19937_64 sizes(77777u + static_cast<std::uint64_t>(i));
        GeneratorConfig config;
        config.seed = 500000 + static_cast<std::uint64_t>(i);
        config.resource_count = 2 + static_cast<int>(uniform_below(sizes, 6));
        config.quota = 1;
        config.ratio = 1.0;  // fully endowed, one slot each
        config.min_prefs = 1;
        config.max_prefs = config.resource_count;
        const auto instance = generate(config);
        if (run(instance).assignment == classical_ttc(instance)) ++matched;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "unit-quota fully-endowed reduction matches classical TTC exactly on "
                  "%d/%d markets",
                  matched, kInstances);
    report(8, matched == kInstances, buf);
}

void criterion_9() {
    bool stable = true;
    const std::vector<std::string> goldens = {
        "classic_swap",       "spare_slot",      "overlap_long_wins", "overlap_short_wins",
        "chain_absorb",       "multi_overlap_a", "multi_overlap_b"};
    for (const auto& name : goldens) {
        const auto instance = load(name);
        const auto first = run(instance);
        const auto second = run(instance);
        const auto doc_of = [&](const RunResult& r) {
            return result_document(name, r,
                                   compute_metrics(instance, r.assignment,
                                                   static_cast<int>(r.rounds.size())))
                .dump(2);
        };
        stable = stable && doc_of(first) == doc_of(second);
    }
    for (int i = 0; i < 20; ++i) {
        const auto instance = generate(fixtures::random_config(9000 + i));
        const auto first = run(instance);
        const auto second = run(instance);
        const auto doc_of = [&](const RunResult& r) {
            return result_document("random", r,
                                   compute_metrics(instance, r.assignment,
                                                   static_cast<int>(r.rounds.size())))
                .dump(2);
        };
        stable = stable && doc_of(first) == doc_of(second);
    }
    report(9, stable, "result documents byte-identical across repeated runs");
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criteria_6_and_7();
    criterion_8();
    criterion_9();
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}

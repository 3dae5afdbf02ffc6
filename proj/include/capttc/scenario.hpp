#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "capttc/engine.hpp"
#include "capttc/model.hpp"
#include "capttc/rng.hpp"

namespace capttc {

class ScenarioError : public std::runtime_error {
public:
    explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

// Golden block a scenario may carry: the assignment the run must reproduce
// and, optionally, the expected total satisfaction.
struct ExpectedOutcome {
    std::vector<std::pair<std::string, std::optional<std::string>>> assignment;
    std::optional<double> total_satisfaction;
};

struct ScenarioFile {
    int version = 1;
    Instance instance;
    std::optional<ExpectedOutcome> expected;
};

namespace detail {

using ordered_json = nlohmann::ordered_json;

inline void reject_unknown_keys(const ordered_json& node, const std::string& path,
                                std::initializer_list<const char*> allowed) {
    if (!node.is_object())
        throw ScenarioError("scenario error at " + path + ": expected an object");
    for (auto it = node.begin(); it != node.end(); ++it) {
        bool known = false;
        for (const char* key : allowed) known = known || it.key() == key;
        if (!known)
            throw ScenarioError("scenario error at " + path + ": unknown field '" + it.key() +
                                "'");
    }
}

inline const ordered_json& require_field(const ordered_json& node, const std::string& path,
                                         const char* key) {
    auto it = node.find(key);
    if (it == node.end())
        throw ScenarioError("scenario error at " + path + ": missing field '" +
                            std::string(key) + "'");
    return *it;
}

inline std::string require_string(const ordered_json& node, const std::string& path) {
    if (!node.is_string())
        throw ScenarioError("scenario error at " + path + ": expected a string");
    return node.get<std::string>();
}

inline int require_int(const ordered_json& node, const std::string& path) {
    if (!node.is_number_integer())
        throw ScenarioError("scenario error at " + path + ": expected an integer");
    return node.get<int>();
}

inline double require_number(const ordered_json& node, const std::string& path) {
    if (!node.is_number())
        throw ScenarioError("scenario error at " + path + ": expected a number");
    return node.get<double>();
}

}  // namespace detail

// Scenario text is lines of optional '#' comments around a single JSON body.
// Unknown fields are rejected with the JSON path; semantic breaches surface
// the instance validator's findings.
inline ScenarioFile parse_scenario(const std::string& text) {
    using detail::ordered_json;
    std::string body;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first != std::string::npos && line[first] == '#') {
            body += '\n';  // keep byte positions roughly line-aligned
            continue;
        }
        body += line;
        body += '\n';
    }

    ordered_json doc;
    try {
        doc = ordered_json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ScenarioError(std::string("scenario syntax error: ") + e.what());
    }
    if (!doc.is_object()) throw ScenarioError("scenario error at $: expected an object");
    detail::reject_unknown_keys(doc, "$", {"version", "params", "resources", "agents",
                                           "expected"});

    ScenarioFile out;
    out.version = detail::require_int(detail::require_field(doc, "$", "version"), "$.version");
    if (out.version != 1)
        throw ScenarioError("scenario error at $.version: unsupported version " +
                            std::to_string(out.version));

    SatisfactionParams params;
    if (auto it = doc.find("params"); it != doc.end()) {
        detail::reject_unknown_keys(*it, "$.params", {"alpha", "beta", "lambda"});
        if (auto f = it->find("alpha"); f != it->end())
            params.alpha = detail::require_number(*f, "$.params.alpha");
        if (auto f = it->find("beta"); f != it->end())
            params.beta = detail::require_number(*f, "$.params.beta");
        if (auto f = it->find("lambda"); f != it->end())
            params.lambda = detail::require_number(*f, "$.params.lambda");
    }

    std::vector<Resource> resources;
    const auto& rarr = detail::require_field(doc, "$", "resources");
    if (!rarr.is_array()) throw ScenarioError("scenario error at $.resources: expected an array");
    for (std::size_t j = 0; j < rarr.size(); ++j) {
        const std::string path = "$.resources[" + std::to_string(j) + "]";
        detail::reject_unknown_keys(rarr[j], path, {"id", "quota"});
        Resource r;
        r.id = detail::require_string(detail::require_field(rarr[j], path, "id"), path + ".id");
        r.quota =
            detail::require_int(detail::require_field(rarr[j], path, "quota"), path + ".quota");
        resources.push_back(std::move(r));
    }

    std::vector<Agent> agents;
    const auto& aarr = detail::require_field(doc, "$", "agents");
    if (!aarr.is_array()) throw ScenarioError("scenario error at $.agents: expected an array");
    for (std::size_t i = 0; i < aarr.size(); ++i) {
        const std::string path = "$.agents[" + std::to_string(i) + "]";
        detail::reject_unknown_keys(aarr[i], path, {"id", "endowment", "preferences"});
        Agent a;
        a.id = detail::require_string(detail::require_field(aarr[i], path, "id"), path + ".id");
        if (auto f = aarr[i].find("endowment"); f != aarr[i].end() && !f->is_null())
            a.endowment = detail::require_string(*f, path + ".endowment");
        const auto& prefs = detail::require_field(aarr[i], path, "preferences");
        if (!prefs.is_array())
            throw ScenarioError("scenario error at " + path + ".preferences: expected an array");
        for (std::size_t k = 0; k < prefs.size(); ++k)
            a.preferences.push_back(detail::require_string(
                prefs[k], path + ".preferences[" + std::to_string(k) + "]"));
        agents.push_back(std::move(a));
    }

    out.instance = Instance(std::move(agents), std::move(resources), params);

    if (auto it = doc.find("expected"); it != doc.end()) {
        detail::reject_unknown_keys(*it, "$.expected", {"assignment", "total_satisfaction"});
        ExpectedOutcome expected;
        const auto& mapping = detail::require_field(*it, "$.expected", "assignment");
        if (!mapping.is_object())
            throw ScenarioError("scenario error at $.expected.assignment: expected an object");
        for (auto f = mapping.begin(); f != mapping.end(); ++f) {
            std::optional<std::string> resource;
            if (!f.value().is_null())
                resource = detail::require_string(f.value(),
                                                  "$.expected.assignment." + f.key());
            expected.assignment.emplace_back(f.key(), std::move(resource));
        }
        if (auto f = it->find("total_satisfaction"); f != it->end())
            expected.total_satisfaction =
                detail::require_number(*f, "$.expected.total_satisfaction");
        out.expected = std::move(expected);
    }

    const auto violations = validate_instance(out.instance);
    if (!violations.empty()) {
        std::string msg = "scenario semantic error:";
        for (const auto& v : violations)
            msg += " [" + v.code + " " + v.subject + ": " + v.detail + "]";
        throw ScenarioError(msg);
    }
    return out;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline ScenarioFile parse_scenario_file(const std::string& path) {
    return parse_scenario(read_text_file(path));
}

// Canonical serialization; parse(emit(s)) reproduces s field for field.
inline std::string emit_scenario(const ScenarioFile& scenario) {
    using detail::ordered_json;
    ordered_json doc;
    doc["version"] = scenario.version;
    const auto& params = scenario.instance.params();
    doc["params"] = {{"alpha", params.alpha}, {"beta", params.beta}, {"lambda", params.lambda}};
    doc["resources"] = ordered_json::array();
    for (const auto& r : scenario.instance.resources())
        doc["resources"].push_back({{"id", r.id}, {"quota", r.quota}});
    doc["agents"] = ordered_json::array();
    for (const auto& a : scenario.instance.agents()) {
        ordered_json row;
        row["id"] = a.id;
        if (a.endowment)
            row["endowment"] = *a.endowment;
        else
            row["endowment"] = nullptr;
        row["preferences"] = a.preferences;
        doc["agents"].push_back(std::move(row));
    }
    if (scenario.expected) {
        ordered_json expected;
        expected["assignment"] = ordered_json::object();
        for (const auto& [agent, resource] : scenario.expected->assignment) {
            if (resource)
                expected["assignment"][agent] = *resource;
            else
                expected["assignment"][agent] = nullptr;
        }
        if (scenario.expected->total_satisfaction)
            expected["total_satisfaction"] = *scenario.expected->total_satisfaction;
        doc["expected"] = std::move(expected);
    }
    return doc.dump(2) + "\n";
}

// Seeded random market mirroring the experimental axes: uniform quotas, a
// non-compliant-to-slot ratio, random feasible endowments, and preference
// lists drawn as permuted subsets that always contain the endowment.
struct GeneratorConfig {
    std::uint64_t seed = 0;
    int agent_count = 0;  // ignored when ratio > 0
    int resource_count = 1;
    int quota = 1;
    double ratio = 0.0;  // non-compliant agents per slot, in (0, 1]
    int min_prefs = 0;   // 0 means the full resource set
    int max_prefs = 0;
    double alpha = 0.5;
};

inline Instance generate(const GeneratorConfig& config) {
    if (config.resource_count < 1 || config.quota < 1)
        throw std::invalid_argument("generate: need at least one resource and quota >= 1");
    if (config.ratio < 0.0 || config.ratio > 1.0)
        throw std::invalid_argument("generate: ratio must lie in (0, 1]");
    const int slots = config.resource_count * config.quota;
    const int agent_count = config.ratio > 0.0
                                ? static_cast<int>(config.ratio * slots)
                                : config.agent_count;
    if (agent_count < 0 || agent_count > slots)
        throw std::invalid_argument("generate: agent count " + std::to_string(agent_count) +
                                    " exceeds total capacity " + std::to_string(slots));

    std::mt19937_64 rng(config.seed);
    std::vector<Resource> resources;
    resources.reserve(config.resource_count);
    for (int j = 0; j < config.resource_count; ++j)
        resources.push_back(Resource{"r" + std::to_string(j + 1), config.quota});

    std::vector<int> slot_pool;
    for (int j = 0; j < config.resource_count; ++j)
        for (int k = 0; k < config.quota; ++k) slot_pool.push_back(j);
    shuffle_stable(slot_pool, rng);

    int min_prefs = config.min_prefs > 0 ? config.min_prefs : config.resource_count;
    int max_prefs = config.max_prefs > 0 ? config.max_prefs : config.resource_count;
    min_prefs = std::min(std::max(min_prefs, 1), config.resource_count);
    max_prefs = std::min(std::max(max_prefs, min_prefs), config.resource_count);

    std::vector<Agent> agents;
    for (int i = 0; i < agent_count; ++i) {
        Agent agent;
        agent.id = "a" + std::to_string(i + 1);
        const int endowment = slot_pool[i];
        agent.endowment = resources[endowment].id;

        const int length =
            min_prefs + static_cast<int>(uniform_below(rng, max_prefs - min_prefs + 1));
        std::vector<int> others;
        for (int j = 0; j < config.resource_count; ++j)
            if (j != endowment) others.push_back(j);
        shuffle_stable(others, rng);
        std::vector<int> subset(others.begin(), others.begin() + (length - 1));
        subset.push_back(endowment);
        shuffle_stable(subset, rng);
        for (int j : subset) agent.preferences.push_back(resources[j].id);
        agents.push_back(std::move(agent));
    }

    SatisfactionParams params;
    params.alpha = config.alpha;
    return Instance(std::move(agents), std::move(resources), params);
}

struct AgentMetric {
    std::string agent;
    std::optional<std::string> resource;
    int rank = 0;
    double satisfaction = 0.0;
};

struct MetricsReport {
    long long rank_sum = 0;
    double total_satisfaction = 0.0;
    double mean_satisfaction = 0.0;
    std::vector<AgentMetric> per_agent;
    int rounds = 0;
    long long millis = 0;  // kept out of result files; reported on stderr
};

// Rank sum and satisfaction totals. Assigned agents contribute their assigned
// rank; agents left on their reference point contribute the endowment rank
// (unendowed leftovers count their full list, the bottom of their scale).
inline MetricsReport compute_metrics(const Instance& instance, const Assignment& assignment,
                                     int rounds = 0, long long millis = 0) {
    MetricsReport report;
    report.rounds = rounds;
    report.millis = millis;
    if (assignment.agents.size() != instance.agents().size())
        throw std::invalid_argument("compute_metrics: assignment does not match the instance");
    for (std::size_t i = 0; i < instance.agents().size(); ++i) {
        const Agent& agent = instance.agents()[i];
        const AgentAssignment& row = assignment.agents[i];
        if (row.agent != agent.id)
            throw std::invalid_argument("compute_metrics: assignment does not match the instance");
        AgentMetric metric;
        metric.agent = agent.id;
        metric.resource = row.resource;
        metric.satisfaction = row.satisfaction;
        if (row.resource) {
            metric.rank = row.rank;
        } else if (agent.endowment) {
            metric.rank = assigned_rank(agent, *agent.endowment);
        } else {
            metric.rank = static_cast<int>(agent.preferences.size());
        }
        report.rank_sum += metric.rank;
        report.total_satisfaction += metric.satisfaction;
        report.per_agent.push_back(std::move(metric));
    }
    if (!report.per_agent.empty())
        report.mean_satisfaction =
            report.total_satisfaction / static_cast<double>(report.per_agent.size());
    return report;
}

namespace detail {

inline std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

}  // namespace detail

inline std::string metrics_csv_header() {
    return "scenario,agents,resources,quota,ratio,rank_sum,total_sat,mean_sat,rounds,millis";
}

inline std::string metrics_csv_row(const std::string& scenario, const Instance& instance,
                                   const MetricsReport& metrics) {
    int max_quota = 0;
    long long slots = 0;
    for (const auto& r : instance.resources()) {
        max_quota = std::max(max_quota, r.quota);
        slots += r.quota;
    }
    const double ratio =
        slots > 0 ? static_cast<double>(instance.agents().size()) / static_cast<double>(slots)
                  : 0.0;
    std::string row = scenario;
    row += "," + std::to_string(instance.agents().size());
    row += "," + std::to_string(instance.resources().size());
    row += "," + std::to_string(max_quota);
    row += "," + detail::fixed(ratio, 4);
    row += "," + std::to_string(metrics.rank_sum);
    row += "," + detail::fixed(metrics.total_satisfaction, 6);
    row += "," + detail::fixed(metrics.mean_satisfaction, 6);
    row += "," + std::to_string(metrics.rounds);
    row += "," + std::to_string(metrics.millis);
    return row;
}

// The structured run report: assignment, metrics, and the per-round trace
// records. Byte-stable for a fixed scenario; wall time never enters it.
inline detail::ordered_json result_document(const std::string& scenario, const RunResult& run,
                                            const MetricsReport& metrics) {
    using detail::ordered_json;
    ordered_json doc;
    doc["scenario"] = scenario;
    doc["assignment"] = ordered_json::array();
    for (const auto& row : run.assignment.agents) {
        ordered_json entry;
        entry["agent"] = row.agent;
        if (row.resource)
            entry["resource"] = *row.resource;
        else
            entry["resource"] = nullptr;
        entry["rank"] = row.rank;
        entry["satisfaction"] = row.satisfaction;
        doc["assignment"].push_back(std::move(entry));
    }
    doc["occupants"] = ordered_json::object();
    for (const auto& [resource, members] : run.assignment.occupants)
        doc["occupants"][resource] = members;
    doc["metrics"] = {{"rank_sum", metrics.rank_sum},
                      {"total_satisfaction", metrics.total_satisfaction},
                      {"mean_satisfaction", metrics.mean_satisfaction},
                      {"rounds", metrics.rounds},
                      {"millis", 0}};
    doc["trace"] = ordered_json::array();
    for (const auto& round : run.rounds) {
        ordered_json r;
        r["round"] = round.round;
        r["vertices"] = ordered_json::array();
        for (const auto& v : round.vertices) {
            ordered_json vertex;
            vertex["label"] = v.label;
            vertex["kind"] = v.is_virtual ? "virtual" : "agent";
            if (v.is_virtual)
                vertex["owns"] = v.owned;
            else if (!v.target.empty())
                vertex["target"] = v.target;
            r["vertices"].push_back(std::move(vertex));
        }
        r["edges"] = ordered_json::array();
        for (const auto& e : round.edges) {
            std::string from, to;
            for (const auto& v : round.vertices) {
                if (v.id == e.from) from = v.label;
                if (v.id == e.to) to = v.label;
            }
            r["edges"].push_back({{"from", from}, {"to", to}, {"delta", e.weight}});
        }
        r["candidates"] = ordered_json::array();
        for (const auto& c : round.candidates) {
            ordered_json cand;
            cand["kind"] = c.is_chain ? "chain" : "cycle";
            cand["vertices"] = c.vertices;
            cand["score"] = c.score;
            cand["resolved"] = c.resolved;
            r["candidates"].push_back(std::move(cand));
        }
        r["finalized"] = ordered_json::array();
        for (const auto& [agent, resource] : round.finalized)
            r["finalized"].push_back({{"agent", agent}, {"resource", resource}});
        doc["trace"].push_back(std::move(r));
    }
    return doc;
}

}  // namespace capttc

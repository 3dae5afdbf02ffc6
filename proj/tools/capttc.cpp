#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "capttc/classical.hpp"
#include "capttc/dot.hpp"
#include "capttc/engine.hpp"
#include "capttc/oracle.hpp"
#include "capttc/scenario.hpp"

using namespace capttc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitExpectationFailed = 1;
constexpr int kExitUsage = 2;

std::string scenario_name(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

void write_output(const std::optional<std::string>& out_path, const std::string& body) {
    if (!out_path) {
        std::cout << body;
        return;
    }
    std::ofstream out(*out_path, std::ios::binary);
    if (!out) throw ScenarioError("cannot write '" + *out_path + "'");
    out << body;
}

Instance with_alpha(const Instance& instance, std::optional<double> alpha) {
    if (!alpha) return instance;
    SatisfactionParams params = instance.params();
    params.alpha = *alpha;
    return Instance(instance.agents(), instance.resources(), params);
}

long long elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start)
        .count();
}

int check_expected(const ScenarioFile& scenario, const Assignment& assignment) {
    if (!scenario.expected) return kExitOk;
    int mismatches = 0;
    for (const auto& [agent, resource] : scenario.expected->assignment) {
        const auto received = assignment.resource_of(agent);
        if (received != resource) {
            std::cerr << "expected " << agent << " -> "
                      << (resource ? *resource : std::string("(none)")) << ", got "
                      << (received ? *received : std::string("(none)")) << "\n";
            ++mismatches;
        }
    }
    if (scenario.expected->total_satisfaction) {
        const double want = *scenario.expected->total_satisfaction;
        const double got = assignment.total_satisfaction();
        if (std::abs(want - got) > 0.01) {
            std::cerr << "expected total satisfaction " << want << ", got " << got << "\n";
            ++mismatches;
        }
    }
    return mismatches == 0 ? kExitOk : kExitExpectationFailed;
}

int cmd_run(const std::string& path, std::optional<double> alpha,
            std::optional<std::string> out_path, const std::string& format,
            const EngineConfig& engine_config) {
    ScenarioFile scenario = parse_scenario_file(path);
    const Instance instance = with_alpha(scenario.instance, alpha);
    const auto start = std::chrono::steady_clock::now();
    const RunResult result = run(instance, engine_config);
    const long long millis = elapsed_ms(start);
    const auto metrics = compute_metrics(instance, result.assignment,
                                         static_cast<int>(result.rounds.size()));
    const std::string name = scenario_name(path);

    std::string body;
    if (format == "csv")
        body = metrics_csv_header() + "\n" + metrics_csv_row(name, instance, metrics) + "\n";
    else
        body = result_document(name, result, metrics).dump(2) + "\n";
    write_output(out_path, body);
    std::cerr << "runtime_ms: " << millis << "\n";
    return check_expected(scenario, result.assignment);
}

int cmd_oracle(const std::string& path) {
    const ScenarioFile scenario = parse_scenario_file(path);
    const Instance& instance = scenario.instance;
    const RunResult result = run(instance);
    const double engine_total = result.assignment.total_satisfaction();
    const auto best = optimize(instance);
    const auto pareto = is_pareto_optimal(instance, result.assignment);
    const auto blocking = find_blocking_coalition(instance, result.assignment);
    const auto rationality = check_individual_rationality(instance, result.assignment);

    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.6f", engine_total);
    std::cout << "scenario: " << scenario_name(path) << "\n";
    std::cout << "engine_total: " << buffer << "\n";
    std::snprintf(buffer, sizeof(buffer), "%.6f", best.best_total);
    std::cout << "oracle_optimum: " << buffer << "\n";
    std::snprintf(buffer, sizeof(buffer), "%.6f", best.best_total - engine_total);
    std::cout << "gap: " << buffer << "\n";
    std::cout << "pareto_optimal: " << (pareto.pareto_optimal ? "yes" : "no") << "\n";
    std::cout << "core_stable: " << (blocking ? "no" : "yes") << "\n";
    std::cout << "individually_rational: "
              << (rationality.individually_rational ? "yes" : "no") << "\n";
    return kExitOk;
}

GeneratorConfig sized_config(std::uint64_t seed, int max_agents, int max_resources,
                             int max_quota) {
    std::mt19937_64 rng(seed * 0x2545F4914F6CDD1Dull + 0x9E3779B97F4A7C15ull);
    GeneratorConfig config;
    config.seed = seed;
    config.resource_count = 1 + static_cast<int>(uniform_below(rng, max_resources));
    config.quota = 1 + static_cast<int>(uniform_below(rng, max_quota));
    const int cap = std::min(max_agents, config.resource_count * config.quota);
    config.agent_count = 1 + static_cast<int>(uniform_below(rng, cap));
    config.min_prefs = 1;
    config.max_prefs = config.resource_count;
    return config;
}

int cmd_verify(int instances, std::uint64_t base_seed, int max_agents, int max_resources,
               int max_quota) {
    struct Tally {
        const char* name;
        int passed = 0;
        std::optional<std::uint64_t> first_failure;
    };
    Tally tallies[] = {{"termination"},
                       {"individual_rationality"},
                       {"pareto_optimality"},
                       {"core_stability"},
                       {"strategy_proofness"}};

    for (int i = 0; i < instances; ++i) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
        const auto instance = generate(sized_config(seed, max_agents, max_resources, max_quota));
        const auto result = run(instance);

        std::size_t preference_entries = 0;
        for (const auto& agent : instance.agents())
            preference_entries += agent.preferences.size();
        const bool verdicts[] = {
            result.rounds.size() <= instance.agents().size() + preference_entries &&
                check_assignment(instance, result.assignment).empty(),
            check_individual_rationality(instance, result.assignment).individually_rational,
            is_pareto_optimal(instance, result.assignment).pareto_optimal,
            !find_blocking_coalition(instance, result.assignment).has_value(),
            check_strategy_proofness(instance).strategy_proof,
        };
        for (int t = 0; t < 5; ++t) {
            if (verdicts[t])
                ++tallies[t].passed;
            else if (!tallies[t].first_failure)
                tallies[t].first_failure = seed;
        }
    }

    std::cout << "instances: " << instances << "\n";
    bool all_passed = true;
    for (const auto& tally : tallies) {
        std::cout << tally.name << ": " << tally.passed << "/" << instances << "\n";
        if (tally.first_failure) {
            all_passed = false;
            std::cout << tally.name << "_reproducer_seed: " << *tally.first_failure << "\n";
        }
    }
    return all_passed ? kExitOk : kExitExpectationFailed;
}

int cmd_gen(const GeneratorConfig& config, std::optional<std::string> out_path) {
    ScenarioFile scenario;
    scenario.instance = generate(config);
    write_output(out_path, emit_scenario(scenario));
    return kExitOk;
}

int cmd_trace(const std::string& path, std::optional<std::string> dot_dir,
              const EngineConfig& engine_config) {
    const ScenarioFile scenario = parse_scenario_file(path);
    const RunResult result = run(scenario.instance, engine_config);
    if (dot_dir) std::filesystem::create_directories(*dot_dir);
    for (const auto& round : result.rounds) {
        std::cout << "round " << round.round << ": " << round.vertices.size() << " vertices, "
                  << round.edges.size() << " edges\n";
        int position = 0;
        for (const auto& candidate : round.candidates) {
            std::cout << "  " << ++position << ". "
                      << (candidate.is_chain ? "chain(" : "cycle(");
            for (std::size_t i = 0; i < candidate.vertices.size(); ++i)
                std::cout << (i ? "," : "") << candidate.vertices[i];
            char buffer[32];
            std::snprintf(buffer, sizeof(buffer), "%.2f", candidate.score);
            std::cout << ") score=" << buffer
                      << (candidate.resolved ? " resolved" : " skipped") << "\n";
        }
        for (const auto& [agent, resource] : round.finalized)
            std::cout << "  " << agent << " -> " << resource << "\n";
        if (dot_dir) {
            char name[32];
            std::snprintf(name, sizeof(name), "round_%03d.dot", round.round);
            std::ofstream out(std::filesystem::path(*dot_dir) / name, std::ios::binary);
            if (!out) throw ScenarioError("cannot write into '" + *dot_dir + "'");
            out << to_dot(round);
        }
    }
    return kExitOk;
}

// Soft trend report. Dense co-ownership rounds can exceed the candidate cap
// (simple-cycle counts grow combinatorially); such sizes are reported, not
// treated as failures.
int cmd_bench(int quota, const std::vector<int>& sizes,
              const EngineConfig& engine_config) {
    std::cout << "agents,resources,quota,rounds,millis,status\n";
    for (int agents : sizes) {
        GeneratorConfig config;
        config.seed = 1234u + static_cast<std::uint64_t>(agents);
        config.agent_count = agents;
        config.quota = quota;
        config.resource_count = std::max(1, agents / quota);
        const auto instance = generate(config);
        const auto start = std::chrono::steady_clock::now();
        try {
            const auto result = run(instance, engine_config);
            const long long millis = elapsed_ms(start);
            if (!check_assignment(instance, result.assignment).empty())
                throw std::logic_error("bench run produced a broken assignment");
            std::cout << agents << "," << config.resource_count << "," << quota << ","
                      << result.rounds.size() << "," << millis << ",ok\n";
        } catch (const CandidateLimitExceeded&) {
            std::cout << agents << "," << config.resource_count << "," << quota << ",,"
                      << elapsed_ms(start) << ",cap-exceeded\n";
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"capacity-aware top-trading-cycles reassignment"};
    app.require_subcommand(1);
    app.fallthrough();  // accept global flags after the subcommand name

    EngineConfig engine_config;
    app.add_option("--max-candidates", engine_config.max_candidates_per_round,
                   "per-round cap on enumerated cycles and chains");

    std::string scenario_path;
    std::optional<double> alpha;
    std::optional<std::string> out_path;
    std::string format = "json";
    auto* run_cmd = app.add_subcommand("run", "run the mechanism on a scenario file");
    run_cmd->add_option("scenario", scenario_path, "scenario file")->required();
    run_cmd->add_option("--alpha", alpha, "override the gain curvature");
    run_cmd->add_option("--out", out_path, "write the result file here instead of stdout");
    run_cmd->add_option("--format", format, "result format")
        ->check(CLI::IsMember({"json", "csv"}));

    std::string oracle_path;
    auto* oracle_cmd =
        app.add_subcommand("oracle", "compare the mechanism against the exhaustive optimum");
    oracle_cmd->add_option("scenario", oracle_path, "scenario file")->required();

    int instances = 100;
    std::uint64_t seed = 1;
    int max_agents = 6;
    int max_resources = 4;
    int max_quota = 3;
    auto* verify_cmd =
        app.add_subcommand("verify", "check the mechanism's guarantees on random markets");
    verify_cmd->add_option("--instances", instances, "number of random markets");
    verify_cmd->add_option("--seed", seed, "base seed");
    verify_cmd->add_option("--max-agents", max_agents, "largest agent count")
        ->check(CLI::Range(1, 8));
    verify_cmd->add_option("--max-resources", max_resources, "largest resource count");
    verify_cmd->add_option("--max-quota", max_quota, "largest uniform quota");

    GeneratorConfig gen_config;
    std::optional<std::string> gen_out;
    auto* gen_cmd = app.add_subcommand("gen", "generate a seeded random scenario");
    gen_cmd->add_option("--seed", gen_config.seed, "generator seed");
    gen_cmd->add_option("--agents", gen_config.agent_count, "agent count");
    gen_cmd->add_option("--resources", gen_config.resource_count, "resource count");
    gen_cmd->add_option("--quota", gen_config.quota, "uniform quota");
    gen_cmd->add_option("--ratio", gen_config.ratio, "agents per slot, overrides --agents");
    gen_cmd->add_option("--min-prefs", gen_config.min_prefs, "shortest preference list");
    gen_cmd->add_option("--max-prefs", gen_config.max_prefs, "longest preference list");
    gen_cmd->add_option("--alpha", gen_config.alpha, "gain curvature");
    gen_cmd->add_option("--out", gen_out, "write the scenario here instead of stdout");

    std::string trace_path;
    std::optional<std::string> dot_dir;
    auto* trace_cmd = app.add_subcommand("trace", "dump the per-round trading graphs");
    trace_cmd->add_option("scenario", trace_path, "scenario file")->required();
    trace_cmd->add_option("--dot", dot_dir, "write one DOT file per round into this directory");

    int bench_quota = 2;
    std::vector<int> bench_sizes = {10, 20, 40, 80, 160};
    auto* bench_cmd = app.add_subcommand("bench", "wall-time trend over growing markets");
    bench_cmd->add_option("--quota", bench_quota, "uniform quota");
    bench_cmd->add_option("--sizes", bench_sizes, "agent counts to time");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (run_cmd->parsed())
            return cmd_run(scenario_path, alpha, out_path, format, engine_config);
        if (oracle_cmd->parsed()) return cmd_oracle(oracle_path);
        if (verify_cmd->parsed())
            return cmd_verify(instances, seed, max_agents, max_resources, max_quota);
        if (gen_cmd->parsed()) return cmd_gen(gen_config, gen_out);
        if (trace_cmd->parsed()) return cmd_trace(trace_path, dot_dir, engine_config);
        if (bench_cmd->parsed()) return cmd_bench(bench_quota, bench_sizes, engine_config);
    } catch (const ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const BudgetExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InvalidInstance& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

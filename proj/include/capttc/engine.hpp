#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "capttc/model.hpp"
#include "capttc/satisfaction.hpp"

namespace capttc {

struct EngineConfig {
    // Simple-cycle enumeration is exponential on pathological graphs. The cap
    // makes the engine refuse loudly instead of truncating silently.
    std::size_t max_candidates_per_round = 10000;
};

class CandidateLimitExceeded : public std::runtime_error {
public:
    explicit CandidateLimitExceeded(std::size_t limit)
        : std::runtime_error("candidate enumeration exceeded the per-round cap of " +
                             std::to_string(limit)) {}
};

class InvalidInstance : public std::invalid_argument {
public:
    explicit InvalidInstance(const std::vector<Violation>& violations)
        : std::invalid_argument(describe(violations)) {}

private:
    static std::string describe(const std::vector<Violation>& violations) {
        std::string msg = "invalid instance";
        for (const auto& v : violations) msg += "; " + v.code + " (" + v.subject + ")";
        return msg;
    }
};

// A resolvable rotation: either a simple directed cycle, or a path ending at
// a virtual owner that gets closed into a cycle by a synthetic edge from the
// terminal back to the head. Vertices are engine vertex ids; cycles are
// stored rotated to start at their smallest id.
struct Candidate {
    std::vector<std::size_t> vertices;
    bool is_chain = false;
    double score = 0.0;
};

struct TraceVertex {
    std::size_t id = 0;
    bool is_virtual = false;
    std::string label;   // agent id, or the synthetic name of a virtual owner
    std::string target;  // resource currently pointed at (empty when none)
    std::string owned;   // resource whose free slot a virtual owner holds
};

struct TraceEdge {
    std::size_t from = 0;
    std::size_t to = 0;
    double weight = 0.0;
};

struct TraceCandidate {
    std::vector<std::string> vertices;  // labels, cycle rotation / path order
    bool is_chain = false;
    double score = 0.0;
    bool resolved = false;  // false: skipped because a vertex was already gone
};

// One round of the mechanism: the graph right after edge construction, the
// candidates in resolution order, and the assignments finalized this round.
struct RoundTrace {
    int round = 0;
    std::vector<TraceVertex> vertices;
    std::vector<TraceEdge> edges;
    std::vector<TraceCandidate> candidates;
    std::vector<std::pair<std::string, std::string>> finalized;
};

struct RunResult {
    Assignment assignment;
    std::vector<RoundTrace> rounds;
};

// Mutable per-run market state: remaining preference lists, slot ownership,
// residual quotas, and the trading graph. One run is strictly sequential;
// distinct runs never share state.
class MarketState {
public:
    explicit MarketState(const Instance& instance, EngineConfig config = {})
        : instance_(&instance), config_(config) {
        const std::size_t n = instance.agents().size();
        const std::size_t m = instance.resources().size();
        remaining_.resize(n);
        sat_by_rank_.resize(n);
        assigned_.assign(n, false);
        result_.assign(n, std::nullopt);
        owners_.resize(m);
        occupants_.resize(m);
        quota_.resize(m);
        target_.assign(n, std::nullopt);

        for (std::size_t j = 0; j < m; ++j) quota_[j] = instance.resources()[j].quota;

        for (std::size_t i = 0; i < n; ++i) {
            const Agent& agent = instance.agents()[i];
            const int usable = acceptable_count(agent);
            remaining_[i].reserve(usable);
            for (int k = 0; k < usable; ++k)
                remaining_[i].push_back(*instance.resource_index(agent.preferences[k]));
            sat_by_rank_[i].resize(usable);
            for (int k = 0; k < usable; ++k)
                sat_by_rank_[i][k] =
                    pt_satisfaction(agent, agent.preferences[k], instance.params());
            verts_.push_back(Vertex{false, i, 0, agent.id, true});
            out_.emplace_back();
            if (agent.endowment)
                owners_[*instance.resource_index(*agent.endowment)].push_back(i);
        }
    }

    // The state keeps a pointer to the instance; a temporary would dangle.
    MarketState(Instance&&, EngineConfig) = delete;
    explicit MarketState(Instance&&) = delete;

    // Step 1. Derive edges for every live agent that lost all its pointers:
    // peek at the head of its remaining list, mint one virtual owner per free
    // slot of that resource, then point at every current owner. Agents that
    // still hold edges are untouched.
    void build_round_graph() {
        for (std::size_t v = 0; v < instance_->agents().size(); ++v) {
            if (!verts_[v].alive || !out_[v].empty() || remaining_[v].empty()) continue;
            const std::size_t r = remaining_[v].front();
            const int free_slots = quota_[r] - static_cast<int>(owners_[r].size());
            for (int k = 0; k < free_slots; ++k) mint_virtual(r);
            const double weight = head_loss(v);
            target_[v] = r;
            for (std::size_t owner : owners_[r]) out_[v].push_back(Edge{owner, weight});
        }
    }

    // Step 2 enumeration: every simple directed cycle of the live graph,
    // each rooted at its smallest vertex id, in lexicographic order. Uses the
    // blocked-set search of Johnson's algorithm so fruitless branches are not
    // re-explored between found cycles.
    std::vector<Candidate> enumerate_simple_cycles() const {
        std::vector<Candidate> cycles;
        std::vector<char> blocked(verts_.size(), 0);
        std::vector<std::vector<std::size_t>> unblock_list(verts_.size());
        std::vector<std::size_t> path;
        for (std::size_t root = 0; root < verts_.size(); ++root) {
            if (!verts_[root].alive || out_[root].empty()) continue;
            for (std::size_t v = root; v < verts_.size(); ++v) {
                blocked[v] = 0;
                unblock_list[v].clear();
            }
            path.clear();
            johnson_circuit(root, root, blocked, unblock_list, path, cycles);
        }
        std::sort(cycles.begin(), cycles.end(),
                  [](const Candidate& a, const Candidate& b) { return a.vertices < b.vertices; });
        return cycles;
    }

    // Step 3 enumeration: maximal simple paths that end at a virtual owner,
    // extended backward to a vertex without in-edges. Valid once the live
    // graph is acyclic.
    std::vector<Candidate> find_chain_paths() const {
        std::vector<std::size_t> in_degree(verts_.size(), 0);
        for (std::size_t v = 0; v < verts_.size(); ++v) {
            if (!verts_[v].alive) continue;
            for (const Edge& e : out_[v]) ++in_degree[e.to];
        }
        std::vector<Candidate> chains;
        std::vector<std::size_t> path;
        for (std::size_t head = 0; head < verts_.size(); ++head) {
            if (!verts_[head].alive || verts_[head].is_virtual) continue;
            if (in_degree[head] != 0 || out_[head].empty()) continue;
            path.clear();
            chain_dfs(head, path, chains);
        }
        std::sort(chains.begin(), chains.end(),
                  [](const Candidate& a, const Candidate& b) { return a.vertices < b.vertices; });
        return chains;
    }

    // Priority of a candidate: the summed weight of its own in-edges into
    // vertices it shares with any other candidate of the same step. The head
    // of a chain has no in-edge inside the path (the closing edge is
    // synthetic) and contributes nothing.
    void score_candidates(std::vector<Candidate>& candidates) const {
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            Candidate& cand = candidates[c];
            double total = 0.0;
            const std::size_t len = cand.vertices.size();
            for (std::size_t i = 0; i < len; ++i) {
                const std::size_t v = cand.vertices[i];
                bool shared = false;
                for (std::size_t o = 0; o < candidates.size() && !shared; ++o)
                    shared = o != c && std::find(candidates[o].vertices.begin(),
                                                 candidates[o].vertices.end(),
                                                 v) != candidates[o].vertices.end();
                if (!shared) continue;
                if (cand.is_chain && i == 0) continue;
                const std::size_t pred = cand.vertices[i == 0 ? len - 1 : i - 1];
                total += edge_weight(pred, v);
            }
            cand.score = total;
        }
    }

    // Resolution order: decreasing score, ties by smaller minimal vertex id,
    // then shorter rotation, then lexicographic vertex sequence.
    static bool resolution_before(const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        const std::size_t amin = *std::min_element(a.vertices.begin(), a.vertices.end());
        const std::size_t bmin = *std::min_element(b.vertices.begin(), b.vertices.end());
        if (amin != bmin) return amin < bmin;
        if (a.vertices.size() != b.vertices.size())
            return a.vertices.size() < b.vertices.size();
        return a.vertices < b.vertices;
    }

    // Trade along the rotation. Every real vertex receives the slot its
    // successor currently owns; the closing edge of a chain instead returns
    // the head's endowed slot to unowned capacity. Returns false (and does
    // nothing) when some vertex was already consumed by an earlier rotation.
    bool resolve(const Candidate& candidate) {
        for (std::size_t v : candidate.vertices)
            if (!verts_[v].alive) return false;
        const std::size_t len = candidate.vertices.size();
        for (std::size_t k = 0; k < len; ++k) {
            const std::size_t from = candidate.vertices[k];
            const std::size_t to = candidate.vertices[(k + 1) % len];
            if (!verts_[from].is_virtual) {
                finalize(verts_[from].agent, owned_resource(to), to);
            } else {
                // Chain closed: the head keeps pointing elsewhere, so its own
                // endowed slot (if any) becomes free, unowned capacity.
                release_endowed_slot(to);
            }
        }
        for (std::size_t v : candidate.vertices) remove_vertex(v);
        return true;
    }

    bool any_active() const {
        for (std::size_t i = 0; i < assigned_.size(); ++i)
            if (!assigned_[i] && !remaining_[i].empty()) return true;
        return false;
    }

    // The residual graph must be acyclic once every complete cycle of the
    // round is resolved or skipped; chains rely on it.
    void require_acyclic() const {
        std::vector<int> out_left(verts_.size(), 0);
        std::vector<std::vector<std::size_t>> preds(verts_.size());
        std::vector<std::size_t> queue;
        std::size_t live = 0;
        for (std::size_t v = 0; v < verts_.size(); ++v) {
            if (!verts_[v].alive) continue;
            ++live;
            out_left[v] = static_cast<int>(out_[v].size());
            for (const Edge& e : out_[v]) preds[e.to].push_back(v);
            if (out_[v].empty()) queue.push_back(v);
        }
        std::size_t seen = 0;
        while (!queue.empty()) {
            const std::size_t v = queue.back();
            queue.pop_back();
            ++seen;
            for (std::size_t p : preds[v])
                if (--out_left[p] == 0) queue.push_back(p);
        }
        if (seen != live)
            throw std::logic_error("cycle survived complete-cycle resolution");
    }

    std::vector<std::pair<std::string, std::string>> take_round_finalized() {
        return std::exchange(round_finalized_, {});
    }

    // Safety net for agents the loop never finalized. Endowed agents always
    // exit through a cycle or chain, so this normally assigns nothing.
    std::vector<std::pair<std::string, std::string>> finalize_leftover_endowed() {
        for (std::size_t i = 0; i < assigned_.size(); ++i) {
            const Agent& agent = instance_->agents()[i];
            if (assigned_[i] || !agent.endowment) continue;
            const std::size_t r = *instance_->resource_index(*agent.endowment);
            finalize(i, r, i);
            remove_vertex(i);
        }
        return take_round_finalized();
    }

    Assignment build_assignment() const {
        Assignment out;
        for (std::size_t i = 0; i < instance_->agents().size(); ++i) {
            const Agent& agent = instance_->agents()[i];
            AgentAssignment row;
            row.agent = agent.id;
            if (result_[i]) {
                const std::string& rid = instance_->resources()[*result_[i]].id;
                row.resource = rid;
                row.rank = assigned_rank(agent, rid);
                row.satisfaction = pt_satisfaction(agent, rid, instance_->params());
            }
            out.agents.push_back(std::move(row));
        }
        for (std::size_t j = 0; j < instance_->resources().size(); ++j) {
            std::vector<std::string> members;
            auto sorted = occupants_[j];
            std::sort(sorted.begin(), sorted.end());
            for (std::size_t agent : sorted) members.push_back(instance_->agents()[agent].id);
            out.occupants.emplace_back(instance_->resources()[j].id, std::move(members));
        }
        return out;
    }

    RoundTrace snapshot(int round) const {
        RoundTrace trace;
        trace.round = round;
        for (std::size_t v = 0; v < verts_.size(); ++v) {
            if (!verts_[v].alive) continue;
            TraceVertex tv;
            tv.id = v;
            tv.is_virtual = verts_[v].is_virtual;
            tv.label = verts_[v].label;
            if (verts_[v].is_virtual)
                tv.owned = instance_->resources()[verts_[v].owned_slot].id;
            else if (!out_[v].empty() && target_[v])
                tv.target = instance_->resources()[*target_[v]].id;
            trace.vertices.push_back(std::move(tv));
            for (const Edge& e : out_[v]) trace.edges.push_back(TraceEdge{v, e.to, e.weight});
        }
        return trace;
    }

    // Labels survive vertex removal, so candidates can be described after
    // they resolve.
    TraceCandidate describe(const Candidate& candidate, bool resolved) const {
        TraceCandidate tc;
        for (std::size_t v : candidate.vertices) tc.vertices.push_back(verts_[v].label);
        tc.is_chain = candidate.is_chain;
        tc.score = candidate.score;
        tc.resolved = resolved;
        return tc;
    }

    std::size_t total_preference_entries() const {
        std::size_t total = 0;
        for (const auto& r : remaining_) total += r.size();
        return total;
    }

private:
    struct Edge {
        std::size_t to;
        double weight;
    };

    struct Vertex {
        bool is_virtual;
        std::size_t agent;      // real vertices: agent index
        std::size_t owned_slot; // virtual vertices: resource index of the free slot
        std::string label;
        bool alive;
    };

    void mint_virtual(std::size_t resource) {
        const std::size_t id = verts_.size();
        ++virtual_counter_;
        std::string label = "v" + std::to_string(virtual_counter_);
        while (instance_->agent_index(label)) label.insert(label.begin(), '~');
        verts_.push_back(Vertex{true, 0, resource, std::move(label), true});
        out_.emplace_back();
        owners_[resource].push_back(id);
    }

    // Edge weight of an agent pointing at the head of its remaining list:
    // satisfaction there minus satisfaction at the next remaining entry.
    double head_loss(std::size_t agent) const {
        const auto& rem = remaining_[agent];
        const double sat_head = sat_at(agent, rem[0]);
        const double sat_next = rem.size() > 1 ? sat_at(agent, rem[1]) : 0.0;
        return sat_head - sat_next;
    }

    double sat_at(std::size_t agent, std::size_t resource) const {
        const Agent& a = instance_->agents()[agent];
        const std::string& rid = instance_->resources()[resource].id;
        const int rank = assigned_rank(a, rid);
        return sat_by_rank_[agent][rank - 1];
    }

    double edge_weight(std::size_t from, std::size_t to) const {
        for (const Edge& e : out_[from])
            if (e.to == to) return e.weight;
        throw std::logic_error("edge weight queried for a missing edge");
    }

    std::size_t owned_resource(std::size_t vertex) const {
        if (verts_[vertex].is_virtual) return verts_[vertex].owned_slot;
        const Agent& agent = instance_->agents()[verts_[vertex].agent];
        if (!agent.endowment)
            throw std::logic_error("unendowed agent appears as a slot owner");
        return *instance_->resource_index(*agent.endowment);
    }

    void finalize(std::size_t agent, std::size_t resource, std::size_t owner_vertex) {
        auto& owners = owners_[resource];
        auto it = std::find(owners.begin(), owners.end(), owner_vertex);
        if (it == owners.end())
            throw std::logic_error("consumed slot has no matching owner");
        owners.erase(it);
        result_[agent] = resource;
        occupants_[resource].push_back(agent);
        assigned_[agent] = true;
        if (--quota_[resource] == 0) erase_everywhere(resource);
        round_finalized_.emplace_back(instance_->agents()[agent].id,
                                      instance_->resources()[resource].id);
    }

    void release_endowed_slot(std::size_t head_vertex) {
        const Agent& agent = instance_->agents()[verts_[head_vertex].agent];
        if (!agent.endowment) return;
        auto& owners = owners_[*instance_->resource_index(*agent.endowment)];
        auto it = std::find(owners.begin(), owners.end(), head_vertex);
        if (it != owners.end()) owners.erase(it);
    }

    void erase_everywhere(std::size_t resource) {
        for (std::size_t i = 0; i < remaining_.size(); ++i) {
            if (assigned_[i]) continue;
            auto& rem = remaining_[i];
            rem.erase(std::remove(rem.begin(), rem.end(), resource), rem.end());
        }
    }

    void remove_vertex(std::size_t v) {
        verts_[v].alive = false;
        out_[v].clear();
        for (std::size_t u = 0; u < verts_.size(); ++u) {
            if (!verts_[u].alive) continue;
            auto& edges = out_[u];
            edges.erase(std::remove_if(edges.begin(), edges.end(),
                                       [v](const Edge& e) { return e.to == v; }),
                        edges.end());
        }
    }

    // One root of Johnson's search: only vertices >= root participate, so
    // every cycle is reported exactly once, rooted at its smallest vertex.
    bool johnson_circuit(std::size_t root, std::size_t v, std::vector<char>& blocked,
                         std::vector<std::vector<std::size_t>>& unblock_list,
                         std::vector<std::size_t>& path,
                         std::vector<Candidate>& cycles) const {
        bool found = false;
        blocked[v] = 1;
        path.push_back(v);
        std::vector<std::size_t> next;
        for (const Edge& e : out_[v])
            if (e.to >= root) next.push_back(e.to);
        std::sort(next.begin(), next.end());
        for (std::size_t w : next) {
            if (w == root) {
                if (cycles.size() >= config_.max_candidates_per_round)
                    throw CandidateLimitExceeded(config_.max_candidates_per_round);
                cycles.push_back(Candidate{path, false, 0.0});
                found = true;
            } else if (!blocked[w]) {
                found = johnson_circuit(root, w, blocked, unblock_list, path, cycles) || found;
            }
        }
        path.pop_back();
        if (found) {
            unblock(v, blocked, unblock_list);
        } else {
            for (std::size_t w : next)
                if (w != root) {
                    auto& lst = unblock_list[w];
                    if (std::find(lst.begin(), lst.end(), v) == lst.end()) lst.push_back(v);
                }
        }
        return found;
    }

    void unblock(std::size_t v, std::vector<char>& blocked,
                 std::vector<std::vector<std::size_t>>& unblock_list) const {
        blocked[v] = 0;
        auto pending = std::exchange(unblock_list[v], {});
        for (std::size_t w : pending)
            if (blocked[w]) unblock(w, blocked, unblock_list);
    }

    void chain_dfs(std::size_t v, std::vector<std::size_t>& path,
                   std::vector<Candidate>& chains) const {
        path.push_back(v);
        if (verts_[v].is_virtual) {
            if (chains.size() >= config_.max_candidates_per_round)
                throw CandidateLimitExceeded(config_.max_candidates_per_round);
            chains.push_back(Candidate{path, true, 0.0});
        } else {
            std::vector<std::size_t> next;
            for (const Edge& e : out_[v]) next.push_back(e.to);
            std::sort(next.begin(), next.end());
            for (std::size_t w : next) chain_dfs(w, path, chains);
        }
        path.pop_back();
    }

    const Instance* instance_;
    EngineConfig config_;
    std::vector<Vertex> verts_;
    std::vector<std::vector<Edge>> out_;
    std::vector<std::vector<std::size_t>> remaining_;   // resource indices, per agent
    std::vector<std::vector<double>> sat_by_rank_;      // per agent, indexed by rank - 1
    std::vector<std::optional<std::size_t>> target_;    // per agent, current pointed resource
    std::vector<char> assigned_;
    std::vector<std::optional<std::size_t>> result_;
    std::vector<std::vector<std::size_t>> owners_;      // per resource: owner vertex ids
    std::vector<std::vector<std::size_t>> occupants_;   // per resource: finalized agents
    std::vector<int> quota_;                            // unconsumed slots per resource
    std::vector<std::pair<std::string, std::string>> round_finalized_;
    std::size_t virtual_counter_ = 0;
};

// The full mechanism: rounds of graph construction, complete-cycle resolution
// in decreasing priority, then chain resolution, until every agent is
// finalized or out of options. Deterministic for a given instance.
inline RunResult run(const Instance& instance, const EngineConfig& config = {}) {
    if (auto violations = validate_instance(instance); !violations.empty())
        throw InvalidInstance(violations);

    MarketState state(instance, config);
    RunResult result;
    const std::size_t round_bound =
        instance.agents().size() + state.total_preference_entries() + 1;
    int round = 0;

    while (state.any_active()) {
        if (static_cast<std::size_t>(++round) > round_bound)
            throw std::logic_error("round bound exceeded; mechanism failed to make progress");

        state.build_round_graph();
        RoundTrace trace = state.snapshot(round);

        auto cycles = state.enumerate_simple_cycles();
        state.score_candidates(cycles);
        std::sort(cycles.begin(), cycles.end(), MarketState::resolution_before);
        for (const Candidate& c : cycles)
            trace.candidates.push_back(state.describe(c, state.resolve(c)));
        state.require_acyclic();

        auto chains = state.find_chain_paths();
        state.score_candidates(chains);
        std::sort(chains.begin(), chains.end(), MarketState::resolution_before);
        for (const Candidate& c : chains)
            trace.candidates.push_back(state.describe(c, state.resolve(c)));

        trace.finalized = state.take_round_finalized();
        result.rounds.push_back(std::move(trace));
    }

    auto leftovers = state.finalize_leftover_endowed();
    if (!leftovers.empty()) {
        RoundTrace tail;
        tail.round = round + 1;
        tail.finalized = std::move(leftovers);
        result.rounds.push_back(std::move(tail));
    }

    result.assignment = state.build_assignment();
    return result;
}

}  // namespace capttc

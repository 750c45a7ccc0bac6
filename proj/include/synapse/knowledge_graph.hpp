#pragma once

#include <algorithm>
#include <cstddef>
#include <istream>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "synapse/concept_id.hpp"
#include "synapse/error.hpp"
#include "synapse/latent.hpp"
#include "synapse/util.hpp"

namespace synapse {

struct GraphEdge {
    std::string head;
    std::string tail;
    std::string relation;
    double weight = 0.0;
};

/// Weighted directed multigraph over concept ids. Parallel edges with
/// distinct relations between the same pair are first-class citizens.
/// Immutable after ingestion and safe to share across threads.
class KnowledgeGraph {
public:
    void add_edge(GraphEdge edge) {
        vertices_.insert(edge.head);
        vertices_.insert(edge.tail);
        by_head_[edge.head].push_back(edges_.size());
        edges_.push_back(std::move(edge));
    }

    const std::vector<GraphEdge>& edges() const { return edges_; }
    std::size_t edge_count() const { return edges_.size(); }
    std::size_t vertex_count() const { return vertices_.size(); }
    bool has_vertex(const std::string& concept_id) const { return vertices_.count(concept_id) > 0; }

    /// Indices into edges() whose head is `concept_id`.
    std::span<const std::size_t> edges_from(const std::string& concept_id) const {
        static const std::vector<std::size_t> empty;
        auto it = by_head_.find(concept_id);
        return it == by_head_.end() ? std::span<const std::size_t>(empty) : std::span<const std::size_t>(it->second);
    }

    std::size_t line_count = 0; // non-blank source lines consumed at ingestion

private:
    std::vector<GraphEdge> edges_;
    std::unordered_set<std::string> vertices_;
    std::unordered_map<std::string, std::vector<std::size_t>> by_head_;
};

/// Parses the edge file format: `head<TAB>relation<TAB>tail<TAB>weight` per
/// line. Endpoints are concept-normalized; negative weights are rejected.
inline KnowledgeGraph ingest_graph(std::istream& source) {
    KnowledgeGraph graph;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (util::trim(line).empty()) continue;
        const std::string where = "graph line " + std::to_string(line_no);
        std::vector<std::string> cols;
        std::size_t start = 0;
        while (true) {
            const auto tab = line.find('\t', start);
            if (tab == std::string::npos) {
                cols.push_back(line.substr(start));
                break;
            }
            cols.push_back(line.substr(start, tab - start));
            start = tab + 1;
        }
        if (cols.size() != 4)
            throw DataError(where + ": expected 'head<TAB>relation<TAB>tail<TAB>weight', got " +
                            std::to_string(cols.size()) + " columns");
        const std::string relation(util::trim(cols[1]));
        if (relation.empty()) throw DataError(where + ": empty relation");
        const double weight = util::parse_double(util::trim(cols[3]), where);
        if (weight < 0.0) throw DataError(where + ": negative weight " + cols[3]);
        std::string head, tail;
        try {
            head = normalize_concept(cols[0]);
            tail = normalize_concept(cols[2]);
        } catch (const DomainError&) {
            throw DataError(where + ": empty head or tail concept");
        }
        graph.add_edge(GraphEdge{std::move(head), std::move(tail), relation, weight});
        graph.line_count = line_no;
    }
    return graph;
}

/// Per-trial candidate subgraph: candidate concepts in rank order plus every
/// graph edge between them that clears the weight threshold. Candidates with
/// no graph presence stay in the vertex set with degree 0, which is what lets
/// the pruning rule treat graph incompleteness as isolation.
struct InducedSubgraph {
    std::vector<std::string> vertices; // concept ids, candidate rank order, deduplicated
    std::vector<GraphEdge> edges;      // both endpoints in vertices, weight >= w_min, no self-loops
    double w_min = 1.0;

    // Undirected simplification used for degree counting: distinct neighbors
    // only, multiplicity and direction ignored.
    std::unordered_map<std::string, std::unordered_set<std::string>> neighbors;

    bool has_vertex(const std::string& concept_id) const {
        return neighbors.find(concept_id) != neighbors.end();
    }
};

inline InducedSubgraph induce_subgraph(const KnowledgeGraph& graph, const CandidateSet& candidates,
                                       double w_min) {
    if (candidates.items.empty()) throw DomainError("induce_subgraph: empty candidate set");
    InducedSubgraph sub;
    sub.w_min = w_min;
    std::unordered_set<std::string> members;
    for (const auto& c : candidates.items) {
        std::string id = normalize_concept(c.word);
        if (members.insert(id).second) {
            sub.neighbors.emplace(id, std::unordered_set<std::string>{});
            sub.vertices.push_back(std::move(id));
        }
    }
    for (const auto& u : sub.vertices) {
        for (std::size_t idx : graph.edges_from(u)) {
            const GraphEdge& e = graph.edges()[idx];
            if (e.weight < w_min) continue;
            if (e.head == e.tail) continue;
            if (members.count(e.tail) == 0) continue;
            sub.edges.push_back(e);
            sub.neighbors[e.head].insert(e.tail);
            sub.neighbors[e.tail].insert(e.head);
        }
    }
    return sub;
}

/// Normalized degree centrality deg(v)/(|V|-1) over the undirected
/// simplification. A single-vertex subgraph yields 0 by definition.
inline double degree_centrality(const InducedSubgraph& sub, const std::string& concept_id) {
    const auto it = sub.neighbors.find(concept_id);
    if (it == sub.neighbors.end())
        throw DomainError("degree_centrality: vertex '" + concept_id + "' not in subgraph");
    if (sub.vertices.size() <= 1) return 0.0;
    return static_cast<double>(it->second.size()) / static_cast<double>(sub.vertices.size() - 1);
}

struct PruningConfig {
    int m = 5;          // priority safeguard size
    double w_min = 1.0; // induction threshold, recorded for reporting
};

struct PrunedVocabulary {
    std::vector<std::string> words; // surviving candidate words, rank order preserved
};

struct PruningReport {
    std::vector<std::string> retained;
    std::vector<std::string> dropped;
    std::vector<std::string> rescued_by_priority; // degree-0 words kept because of the safeguard
    int retained_count = 0;
    int dropped_count = 0;
};

/// Hybrid pruning rule: keep a candidate iff its concept has nonzero degree
/// in the induced subgraph or it sits in the priority safeguard set (the m
/// highest-ranked candidates). Duplicate candidates that normalize to one
/// concept collapse to the highest-ranked occurrence; the lower-ranked
/// duplicates are reported as dropped.
inline std::pair<PrunedVocabulary, PruningReport> prune(const CandidateSet& candidates,
                                                        const InducedSubgraph& sub,
                                                        const PruningConfig& config) {
    if (config.m < 0) throw ConfigError("prune: m must be >= 0");
    const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(config.m), candidates.items.size());

    std::unordered_set<std::string> priority;
    for (std::size_t i = 0; i < m; ++i)
        priority.insert(normalize_concept(candidates.items[i].word));

    PrunedVocabulary pruned;
    PruningReport report;
    std::unordered_set<std::string> seen;
    for (const auto& c : candidates.items) {
        const std::string id = normalize_concept(c.word);
        if (!seen.insert(id).second) {
            report.dropped.push_back(c.word);
            continue;
        }
        const bool connected = degree_centrality(sub, id) > 0.0;
        const bool safeguarded = priority.count(id) > 0;
        if (connected || safeguarded) {
            pruned.words.push_back(c.word);
            report.retained.push_back(c.word);
            if (!connected) report.rescued_by_priority.push_back(c.word);
        } else {
            report.dropped.push_back(c.word);
        }
    }
    report.retained_count = static_cast<int>(report.retained.size());
    report.dropped_count = static_cast<int>(report.dropped.size());
    return {std::move(pruned), std::move(report)};
}

/// Macro aggregate across per-trial pruning reports.
struct PruningStatistics {
    double mean_retained = 0.0;
    double mean_dropped = 0.0;
    double macro_rate = 0.0; // total dropped / total candidates
    int max_dropped = 0;
    int min_dropped = 0;
    std::size_t trials = 0;
};

inline PruningStatistics pruning_statistics(const std::vector<PruningReport>& reports) {
    if (reports.empty()) throw DomainError("pruning_statistics: empty report list");
    PruningStatistics stats;
    stats.trials = reports.size();
    long total_retained = 0;
    long total_dropped = 0;
    stats.max_dropped = reports.front().dropped_count;
    stats.min_dropped = reports.front().dropped_count;
    for (const auto& r : reports) {
        total_retained += r.retained_count;
        total_dropped += r.dropped_count;
        stats.max_dropped = std::max(stats.max_dropped, r.dropped_count);
        stats.min_dropped = std::min(stats.min_dropped, r.dropped_count);
    }
    const double n = static_cast<double>(reports.size());
    stats.mean_retained = static_cast<double>(total_retained) / n;
    stats.mean_dropped = static_cast<double>(total_dropped) / n;
    const long total = total_retained + total_dropped;
    stats.macro_rate = total > 0 ? static_cast<double>(total_dropped) / static_cast<double>(total) : 0.0;
    return stats;
}

} // namespace synapse

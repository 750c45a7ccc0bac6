#pragma once

#include <atomic>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "synapse/error.hpp"
#include "synapse/evaluation.hpp"
#include "synapse/exemplars.hpp"
#include "synapse/facts.hpp"
#include "synapse/knowledge_graph.hpp"
#include "synapse/latent.hpp"
#include "synapse/llm_client.hpp"
#include "synapse/prompt.hpp"
#include "synapse/util.hpp"

namespace synapse {

/// One decoding unit as it arrives on the wire: refined and raw latents plus
/// the upstream classifier's object prediction and the reference caption.
struct TrialRecord {
    std::string id;
    LatentVector z_refined;
    LatentVector x_raw;
    std::string pred_obj;
    double pred_conf = 0.0;
    std::string reference_caption;
};

/// Parses the JSON-lines trial format. Every line is one record with fields
/// id, z_refined, x_raw, pred_obj, pred_conf, reference_caption.
inline std::vector<TrialRecord> load_trials(std::istream& source, std::size_t dimension) {
    std::vector<TrialRecord> trials;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (util::trim(line).empty()) continue;
        const std::string where = "trial line " + std::to_string(line_no);
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& ex) {
            throw DataError(where + ": invalid JSON: " + ex.what());
        }
        try {
            TrialRecord trial;
            trial.id = record.at("id").get<std::string>();
            if (trial.id.empty()) throw DataError(where + ": empty id");
            if (!ids.insert(trial.id).second)
                throw DataError(where + ": duplicate trial id '" + trial.id + "'");
            trial.z_refined = LatentVector::validated(record.at("z_refined").get<std::vector<double>>(),
                                                      LatentKind::refined_z, dimension,
                                                      where + " (z_refined)");
            trial.x_raw = LatentVector::validated(record.at("x_raw").get<std::vector<double>>(),
                                                  LatentKind::raw_x, dimension, where + " (x_raw)");
            trial.pred_obj = record.at("pred_obj").get<std::string>();
            trial.pred_conf = record.at("pred_conf").get<double>();
            if (trial.pred_conf < 0.0 || trial.pred_conf > 1.0)
                throw DataError(where + ": pred_conf must lie in [0, 1]");
            trial.reference_caption = record.value("reference_caption", std::string{});
            trials.push_back(std::move(trial));
        } catch (const nlohmann::json::exception& ex) {
            throw DataError(where + ": " + ex.what());
        }
    }
    return trials;
}

struct RunConfig {
    int k = 15;
    int m = 5;
    double w_min = 1.0;
    int n_facts = 5;
    int n_exemplars = 2;
    std::size_t dimension = 512;
    AblationId ablation = AblationId::A1;
    int concurrency = 1;

    void validate() const {
        if (k < 1) throw ConfigError("k must be >= 1");
        if (m < 0) throw ConfigError("m must be >= 0");
        if (m > k) throw ConfigError("m must be <= k");
        if (n_facts < 0) throw ConfigError("n_facts must be >= 0");
        if (n_exemplars < 1) throw ConfigError("n_exemplars must be >= 1");
        if (dimension == 0) throw ConfigError("dimension must be >= 1");
        if (concurrency < 1) throw ConfigError("concurrency must be >= 1");
    }

    /// A2 is A1's template with the priority safeguard removed upstream.
    int effective_m() const { return ablation == AblationId::A2 ? 0 : m; }
};

/// Shared read-only artifacts for a run. `exemplars` may be null when the
/// configuration never retrieves them.
struct PipelineInputs {
    const VocabularyMatrix* vocabulary = nullptr;
    const KnowledgeGraph* graph = nullptr;
    const ExemplarStore* exemplars = nullptr;
    RelationWhitelist whitelist = RelationWhitelist::defaults();
};

struct TrialOutput {
    std::string id;
    std::optional<std::string> error; // set when a stage failed; later fields reflect completed stages
    CandidateSet candidates;
    PruningReport pruning;
    std::vector<std::string> pruned_words;
    std::optional<FactSet> facts;
    std::optional<ExemplarSet> exemplars;
    std::string prompt;
    std::string caption;
};

struct RunOutput {
    RunConfig config;
    std::string backend;
    std::vector<TrialOutput> trials;
    std::optional<PruningStatistics> pruning;
    std::optional<MetricReport> metrics;
};

namespace detail {

inline TrialOutput run_trial(const TrialRecord& trial, const PipelineInputs& in, const RunConfig& config,
                             LlmClient* client) {
    TrialOutput out;
    out.id = trial.id;
    try {
        const PromptRequirements needs = requirements(config.ablation);
        out.candidates = retrieve_candidates(trial.z_refined, *in.vocabulary, config.k);
        const InducedSubgraph sub = induce_subgraph(*in.graph, out.candidates, config.w_min);
        auto [pruned, report] = prune(out.candidates, sub, PruningConfig{config.effective_m(), config.w_min});
        out.pruning = std::move(report);
        out.pruned_words = std::move(pruned.words);

        PromptPayload payload;
        payload.pruned_words = out.pruned_words;
        if (needs.facts) {
            payload.facts = extract_facts(sub, in.whitelist, config.n_facts);
            out.facts = payload.facts;
        }
        if (needs.exemplars) {
            if (in.exemplars == nullptr)
                throw ConfigError("configuration " + std::string(to_string(config.ablation)) +
                                  " needs an exemplar store");
            payload.exemplars = retrieve_exemplars(trial.x_raw, *in.exemplars, config.n_exemplars);
            out.exemplars = payload.exemplars;
        }
        if (needs.object_anchor) {
            payload.pred_obj = trial.pred_obj;
            payload.pred_conf = trial.pred_conf;
        }
        const RenderedPrompt prompt = render(payload, config.ablation);
        out.prompt = prompt.text;

        if (client != nullptr) {
            const GenerationResult generation = client->generate(prompt);
            out.caption = generation.caption;
        }
    } catch (const std::exception& ex) {
        out.error = ex.what();
    }
    return out;
}

} // namespace detail

/// Full pipeline: retrieval, induction, pruning, grounding, rendering,
/// generation, post-processing. Stage errors abort only their own trial and
/// land in that trial's error field. Pass a null client to stop after
/// rendering (prompts only); trials run on a bounded worker pool but outputs
/// keep input order.
inline RunOutput run_decode(const std::vector<TrialRecord>& trials, const PipelineInputs& in,
                            const RunConfig& config, LlmClient* client) {
    config.validate();
    if (in.vocabulary == nullptr) throw ConfigError("run_decode: missing vocabulary");
    if (in.graph == nullptr) throw ConfigError("run_decode: missing knowledge graph");

    RunOutput out;
    out.config = config;
    out.backend = client == nullptr                               ? "none"
                  : client->descriptor().kind == BackendKind::mock ? "mock"
                                                                    : client->descriptor().model_name;
    out.trials.resize(trials.size());

    const int workers =
        std::min(config.concurrency, static_cast<int>(std::max<std::size_t>(trials.size(), 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < trials.size(); ++i)
            out.trials[i] = detail::run_trial(trials[i], in, config, client);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= trials.size()) return;
                out.trials[i] = detail::run_trial(trials[i], in, config, client);
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<PruningReport> reports;
    for (const auto& t : out.trials)
        if (!t.error || !t.pruning.retained.empty() || !t.pruning.dropped.empty()) reports.push_back(t.pruning);
    if (!reports.empty()) out.pruning = pruning_statistics(reports);

    std::vector<EvalPair> pairs;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const auto& t = out.trials[i];
        if (!t.error && !t.caption.empty() && !trials[i].reference_caption.empty())
            pairs.push_back(EvalPair{t.id, t.caption, {trials[i].reference_caption}});
    }
    if (!pairs.empty()) out.metrics = evaluate_corpus(pairs);
    return out;
}

/// Pipeline truncated after the pruning stage; feeds the macro statistics.
inline RunOutput run_prune_stats(const std::vector<TrialRecord>& trials, const PipelineInputs& in,
                                 const RunConfig& config) {
    config.validate();
    if (in.vocabulary == nullptr) throw ConfigError("run_prune_stats: missing vocabulary");
    if (in.graph == nullptr) throw ConfigError("run_prune_stats: missing knowledge graph");
    RunOutput out;
    out.config = config;
    out.backend = "none";
    out.trials.reserve(trials.size());
    std::vector<PruningReport> reports;
    for (const auto& trial : trials) {
        TrialOutput t;
        t.id = trial.id;
        try {
            t.candidates = retrieve_candidates(trial.z_refined, *in.vocabulary, config.k);
            const InducedSubgraph sub = induce_subgraph(*in.graph, t.candidates, config.w_min);
            auto [pruned, report] = prune(t.candidates, sub, PruningConfig{config.effective_m(), config.w_min});
            t.pruning = std::move(report);
            t.pruned_words = std::move(pruned.words);
            reports.push_back(t.pruning);
        } catch (const std::exception& ex) {
            t.error = ex.what();
        }
        out.trials.push_back(std::move(t));
    }
    if (!reports.empty()) out.pruning = pruning_statistics(reports);
    return out;
}

// ---------------------------------------------------------------------------
// Serialization. All outputs use insertion-ordered JSON so identical runs
// serialize byte-identically.
// ---------------------------------------------------------------------------

using ordered_json = nlohmann::ordered_json;

inline ordered_json to_json(const MetricReport& report) {
    return ordered_json{{"bleu1", report.bleu1 * 100.0},   {"bleu4", report.bleu4 * 100.0},
                        {"rouge1", report.rouge1 * 100.0}, {"rouge2", report.rouge2 * 100.0},
                        {"rougeL", report.rougeL * 100.0}, {"meteor", report.meteor * 100.0},
                        {"pairs", report.pair_count}};
}

inline ordered_json to_json(const PruningStatistics& stats) {
    return ordered_json{{"mean_retained", stats.mean_retained},
                        {"mean_dropped", stats.mean_dropped},
                        {"macro_pruning_rate", stats.macro_rate},
                        {"max_dropped", stats.max_dropped},
                        {"min_dropped", stats.min_dropped},
                        {"trials", stats.trials}};
}

inline ordered_json to_json(const RunConfig& config, const std::string& backend) {
    return ordered_json{{"k", config.k},
                        {"m", config.m},
                        {"w_min", config.w_min},
                        {"n_facts", config.n_facts},
                        {"n_exemplars", config.n_exemplars},
                        {"dimension", config.dimension},
                        {"ablation", to_string(config.ablation)},
                        {"backend", backend}};
}

inline ordered_json to_json(const RunOutput& run) {
    ordered_json doc;
    doc["config"] = to_json(run.config, run.backend);
    ordered_json trials = ordered_json::array();
    for (const auto& t : run.trials) {
        ordered_json row;
        row["id"] = t.id;
        row["error"] = t.error ? ordered_json(*t.error) : ordered_json(nullptr);
        ordered_json candidates = ordered_json::array();
        for (const auto& c : t.candidates.items)
            candidates.push_back(ordered_json{{"word", c.word}, {"score", c.score}, {"rank", c.rank}});
        row["candidates"] = std::move(candidates);
        row["retained"] = t.pruning.retained;
        row["dropped"] = t.pruning.dropped;
        row["rescued_by_priority"] = t.pruning.rescued_by_priority;
        if (t.facts)
            row["facts"] = t.facts->surfaces();
        if (t.exemplars) {
            ordered_json ids = ordered_json::array();
            for (const auto& e : t.exemplars->items) ids.push_back(e.id);
            row["exemplar_ids"] = std::move(ids);
        }
        row["prompt"] = t.prompt;
        row["caption"] = t.caption;
        trials.push_back(std::move(row));
    }
    doc["trials"] = std::move(trials);
    if (run.pruning) doc["pruning"] = to_json(*run.pruning);
    if (run.metrics) doc["metrics"] = to_json(*run.metrics);
    return doc;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << contents;
}

/// Run manifest: configuration plus an FNV-1a fingerprint of every input
/// file, written alongside outputs as a reproducibility audit trail.
inline ordered_json run_manifest(const RunConfig& config, const std::string& backend,
                                 const std::vector<std::pair<std::string, std::string>>& inputs) {
    ordered_json doc;
    doc["config"] = to_json(config, backend);
    ordered_json files = ordered_json::object();
    for (const auto& [name, path] : inputs) {
        char digest[20];
        std::snprintf(digest, sizeof(digest), "%016llx",
                      static_cast<unsigned long long>(util::fnv1a64(read_file(path))));
        files[name] = ordered_json{{"path", path}, {"fnv1a64", digest}};
    }
    doc["inputs"] = std::move(files);
    return doc;
}

} // namespace synapse

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "synapse/error.hpp"
#include "synapse/util.hpp"

namespace synapse {

/// One evaluation unit: a generated caption against one or more references.
struct EvalPair {
    std::string id;
    std::string candidate;
    std::vector<std::string> references;
};

/// Lowercase, split on whitespace, strip leading/trailing punctuation from
/// each token, drop empties.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    for (auto& word : util::split_whitespace(text)) {
        std::size_t begin = 0;
        std::size_t end = word.size();
        while (begin < end && std::ispunct(static_cast<unsigned char>(word[begin]))) ++begin;
        while (end > begin && std::ispunct(static_cast<unsigned char>(word[end - 1]))) --end;
        if (begin == end) continue;
        out.push_back(util::to_lower(std::string_view(word).substr(begin, end - begin)));
    }
    return out;
}

enum class RougeVariant { r1, r2, rL };

struct MetricReport {
    // All values on the [0, 1] scale; multiply by 100 for display.
    double bleu1 = 0.0;
    double bleu4 = 0.0;
    double rouge1 = 0.0;
    double rouge2 = 0.0;
    double rougeL = 0.0;
    double meteor = 0.0;
    std::size_t pair_count = 0;
};

namespace detail {

using TokenList = std::vector<std::string>;
using NgramCounts = std::map<std::string, long>;

inline NgramCounts ngram_counts(const TokenList& tokens, std::size_t n) {
    NgramCounts counts;
    if (tokens.size() < n || n == 0) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (std::size_t j = 1; j < n; ++j) {
            key += '\x1f';
            key += tokens[i + j];
        }
        ++counts[key];
    }
    return counts;
}

inline long total(const NgramCounts& counts) {
    long sum = 0;
    for (const auto& [key, c] : counts) sum += c;
    return sum;
}

struct TokenizedPair {
    std::string id;
    TokenList candidate;
    std::vector<TokenList> references;
};

inline std::vector<TokenizedPair> tokenize_pairs(const std::vector<EvalPair>& pairs) {
    if (pairs.empty()) throw DomainError("evaluation: empty pair list");
    std::vector<TokenizedPair> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        TokenizedPair tp;
        tp.id = p.id;
        tp.candidate = tokenize(p.candidate);
        if (tp.candidate.empty())
            throw DataError("evaluation: candidate for '" + p.id + "' is empty after tokenization");
        if (p.references.empty())
            throw DataError("evaluation: no references for '" + p.id + "'");
        for (const auto& r : p.references) {
            auto tokens = tokenize(r);
            if (tokens.empty())
                throw DataError("evaluation: a reference for '" + p.id + "' is empty after tokenization");
            tp.references.push_back(std::move(tokens));
        }
        out.push_back(std::move(tp));
    }
    return out;
}

// Effective reference length for the brevity penalty: closest to the
// candidate length, ties toward the shorter reference.
inline long effective_reference_length(const TokenizedPair& pair) {
    const long c = static_cast<long>(pair.candidate.size());
    long best = static_cast<long>(pair.references.front().size());
    for (const auto& ref : pair.references) {
        const long r = static_cast<long>(ref.size());
        const long d_new = std::labs(r - c);
        const long d_old = std::labs(best - c);
        if (d_new < d_old || (d_new == d_old && r < best)) best = r;
    }
    return best;
}

inline std::size_t lcs_length(const TokenList& a, const TokenList& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1])
                cur[j] = prev[j - 1] + 1;
            else
                cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

inline double f1(double precision, double recall) {
    const double denom = precision + recall;
    return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

inline double rouge_n_pair(const TokenList& cand, const TokenList& ref, std::size_t n) {
    const auto cand_counts = ngram_counts(cand, n);
    const auto ref_counts = ngram_counts(ref, n);
    const long cand_total = total(cand_counts);
    const long ref_total = total(ref_counts);
    if (cand_total == 0 || ref_total == 0) return 0.0;
    long overlap = 0;
    for (const auto& [gram, count] : cand_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) overlap += std::min(count, it->second);
    }
    return f1(static_cast<double>(overlap) / static_cast<double>(cand_total),
              static_cast<double>(overlap) / static_cast<double>(ref_total));
}

inline double rouge_l_pair(const TokenList& cand, const TokenList& ref) {
    const auto lcs = static_cast<double>(lcs_length(cand, ref));
    if (lcs == 0.0) return 0.0;
    return f1(lcs / static_cast<double>(cand.size()), lcs / static_cast<double>(ref.size()));
}

/// Exact-unigram METEOR for one candidate/reference pair. Alignment is
/// greedy in candidate order (each word takes the first unused identical
/// reference slot); a chunk break happens whenever consecutive matches are
/// not adjacent in both strings.
inline double meteor_pair(const TokenList& cand, const TokenList& ref) {
    std::vector<bool> used(ref.size(), false);
    std::vector<std::pair<std::size_t, std::size_t>> matches; // (cand index, ref index)
    for (std::size_t i = 0; i < cand.size(); ++i) {
        for (std::size_t j = 0; j < ref.size(); ++j) {
            if (!used[j] && ref[j] == cand[i]) {
                used[j] = true;
                matches.emplace_back(i, j);
                break;
            }
        }
    }
    const double m = static_cast<double>(matches.size());
    if (m == 0.0) return 0.0;
    const double precision = m / static_cast<double>(cand.size());
    const double recall = m / static_cast<double>(ref.size());
    const double f_mean = 10.0 * precision * recall / (recall + 9.0 * precision);
    std::size_t chunks = 1;
    for (std::size_t k = 1; k < matches.size(); ++k)
        if (matches[k].first != matches[k - 1].first + 1 || matches[k].second != matches[k - 1].second + 1)
            ++chunks;
    const double frag = static_cast<double>(chunks) / m;
    const double penalty = 0.5 * frag * frag * frag;
    return f_mean * (1.0 - penalty);
}

} // namespace detail

/// Corpus-level BLEU: pooled modified n-gram precisions over orders
/// 1..max_n, geometric mean, corpus brevity penalty, no smoothing. A zero
/// pooled precision at any order zeroes the corpus score.
inline double bleu(const std::vector<EvalPair>& pairs, int max_n) {
    if (max_n != 1 && max_n != 4) throw DomainError("bleu: max_n must be 1 or 4");
    const auto tokenized = detail::tokenize_pairs(pairs);

    std::vector<long> clipped(static_cast<std::size_t>(max_n), 0);
    std::vector<long> totals(static_cast<std::size_t>(max_n), 0);
    long candidate_length = 0;
    long reference_length = 0;
    for (const auto& pair : tokenized) {
        candidate_length += static_cast<long>(pair.candidate.size());
        reference_length += detail::effective_reference_length(pair);
        for (int n = 1; n <= max_n; ++n) {
            const auto cand_counts = detail::ngram_counts(pair.candidate, static_cast<std::size_t>(n));
            detail::NgramCounts max_ref;
            for (const auto& ref : pair.references)
                for (const auto& [gram, count] : detail::ngram_counts(ref, static_cast<std::size_t>(n)))
                    max_ref[gram] = std::max(max_ref[gram], count);
            for (const auto& [gram, count] : cand_counts) {
                auto it = max_ref.find(gram);
                clipped[static_cast<std::size_t>(n - 1)] += it == max_ref.end() ? 0 : std::min(count, it->second);
            }
            totals[static_cast<std::size_t>(n - 1)] += detail::total(cand_counts);
        }
    }

    double log_precision = 0.0;
    for (int n = 0; n < max_n; ++n) {
        if (totals[static_cast<std::size_t>(n)] == 0 || clipped[static_cast<std::size_t>(n)] == 0) return 0.0;
        log_precision += std::log(static_cast<double>(clipped[static_cast<std::size_t>(n)]) /
                                  static_cast<double>(totals[static_cast<std::size_t>(n)]));
    }
    const double brevity = candidate_length > reference_length
                               ? 1.0
                               : std::exp(1.0 - static_cast<double>(reference_length) /
                                                    static_cast<double>(candidate_length));
    return brevity * std::exp(log_precision / max_n);
}

/// Per-pair F1 (overlap counts for n-gram variants, LCS for L), best
/// reference per pair, mean over pairs.
inline double rouge(const std::vector<EvalPair>& pairs, RougeVariant variant) {
    const auto tokenized = detail::tokenize_pairs(pairs);
    double sum = 0.0;
    for (const auto& pair : tokenized) {
        double best = 0.0;
        for (const auto& ref : pair.references) {
            double score = 0.0;
            switch (variant) {
                case RougeVariant::r1: score = detail::rouge_n_pair(pair.candidate, ref, 1); break;
                case RougeVariant::r2: score = detail::rouge_n_pair(pair.candidate, ref, 2); break;
                case RougeVariant::rL: score = detail::rouge_l_pair(pair.candidate, ref); break;
            }
            best = std::max(best, score);
        }
        sum += best;
    }
    return sum / static_cast<double>(tokenized.size());
}

/// Exact-match METEOR, best reference per pair, mean over pairs.
inline double meteor(const std::vector<EvalPair>& pairs) {
    const auto tokenized = detail::tokenize_pairs(pairs);
    double sum = 0.0;
    for (const auto& pair : tokenized) {
        double best = 0.0;
        for (const auto& ref : pair.references) best = std::max(best, detail::meteor_pair(pair.candidate, ref));
        sum += best;
    }
    return sum / static_cast<double>(tokenized.size());
}

inline MetricReport evaluate_corpus(const std::vector<EvalPair>& pairs) {
    MetricReport report;
    report.bleu1 = bleu(pairs, 1);
    report.bleu4 = bleu(pairs, 4);
    report.rouge1 = rouge(pairs, RougeVariant::r1);
    report.rouge2 = rouge(pairs, RougeVariant::r2);
    report.rougeL = rouge(pairs, RougeVariant::rL);
    report.meteor = meteor(pairs);
    report.pair_count = pairs.size();
    return report;
}

struct ReferenceEntry {
    std::string id;
    std::vector<std::string> references;
};

struct GenerationEntry {
    std::string id;
    std::string caption;
};

/// Joins generations with references by id. Ids must match exactly on both
/// sides; the error lists every id missing from either side.
inline std::vector<EvalPair> align(const std::vector<ReferenceEntry>& references,
                                   const std::vector<GenerationEntry>& generations) {
    std::map<std::string, const ReferenceEntry*> by_id;
    for (const auto& r : references)
        if (!by_id.emplace(r.id, &r).second)
            throw DataError("align: duplicate reference id '" + r.id + "'");

    std::set<std::string> generated;
    std::vector<std::string> missing_refs;
    std::vector<EvalPair> pairs;
    for (const auto& g : generations) {
        if (!generated.insert(g.id).second)
            throw DataError("align: duplicate generation id '" + g.id + "'");
        auto it = by_id.find(g.id);
        if (it == by_id.end()) {
            missing_refs.push_back(g.id);
            continue;
        }
        pairs.push_back(EvalPair{g.id, g.caption, it->second->references});
    }
    std::vector<std::string> missing_gens;
    for (const auto& r : references)
        if (generated.count(r.id) == 0) missing_gens.push_back(r.id);

    if (!missing_refs.empty() || !missing_gens.empty()) {
        std::string message = "align: id mismatch";
        if (!missing_refs.empty())
            message += "; generations without references: " + util::join(missing_refs, ", ");
        if (!missing_gens.empty())
            message += "; references without generations: " + util::join(missing_gens, ", ");
        throw DataError(message);
    }
    if (pairs.empty()) throw DataError("align: no aligned pairs");
    return pairs;
}

} // namespace synapse

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "synapse/concept_id.hpp"
#include "synapse/error.hpp"
#include "synapse/util.hpp"

namespace synapse {

enum class LatentKind { refined_z, raw_x };

/// A single neural latent. `refined_z` latents drive vocabulary retrieval,
/// `raw_x` latents drive exemplar retrieval; the two live in different
/// embedding spaces even though they share a dimension.
struct LatentVector {
    std::vector<double> values;
    LatentKind kind = LatentKind::refined_z;

    /// Ingestion-time constructor: enforces dimension, finiteness and a
    /// nonzero norm. `context` names the record in error messages.
    static LatentVector validated(std::vector<double> values, LatentKind kind,
                                  std::size_t dimension, const std::string& context) {
        if (values.size() != dimension)
            throw DataError(context + ": latent has dimension " + std::to_string(values.size()) +
                            ", expected " + std::to_string(dimension));
        double norm_sq = 0.0;
        for (double v : values) {
            if (!std::isfinite(v)) throw DataError(context + ": latent contains a non-finite entry");
            norm_sq += v * v;
        }
        if (norm_sq == 0.0) throw DataError(context + ": latent is the zero vector");
        return LatentVector{std::move(values), kind};
    }
};

/// Scale normalization. Direction is preserved; the result has unit L2 norm.
inline LatentVector l2_normalize(const LatentVector& v) {
    double norm_sq = 0.0;
    for (double x : v.values) norm_sq += x * x;
    const double norm = std::sqrt(norm_sq);
    if (norm == 0.0) throw DomainError("l2_normalize: zero vector");
    LatentVector out{std::vector<double>(v.values.size()), v.kind};
    for (std::size_t i = 0; i < v.values.size(); ++i) out.values[i] = v.values[i] / norm;
    return out;
}

/// Frozen vocabulary matrix. Rows are L2-normalized once at load, so cosine
/// retrieval reduces to a dot product against the normalized query. Row index
/// is the canonical word index (file order) and breaks score ties.
class VocabularyMatrix {
public:
    VocabularyMatrix() = default;
    VocabularyMatrix(std::size_t dimension, std::vector<std::string> words, std::vector<double> normalized_rows)
        : dimension_(dimension), words_(std::move(words)), data_(std::move(normalized_rows)) {}

    std::size_t size() const { return words_.size(); }
    std::size_t dimension() const { return dimension_; }
    const std::string& word(std::size_t index) const { return words_.at(index); }
    std::span<const double> row(std::size_t index) const {
        return std::span<const double>(data_).subspan(index * dimension_, dimension_);
    }

private:
    std::size_t dimension_ = 0;
    std::vector<std::string> words_;
    std::vector<double> data_; // row-major, rows unit-norm
};

struct Candidate {
    std::string word;
    double score = 0.0; // cosine similarity in [-1, 1]
    int rank = 0;       // 1-based
};

struct CandidateSet {
    std::vector<Candidate> items; // score non-increasing, ranks contiguous from 1
    int k = 0;

    std::vector<std::string> words() const {
        std::vector<std::string> out;
        out.reserve(items.size());
        for (const auto& c : items) out.push_back(c.word);
        return out;
    }
};

/// Parses the vocabulary file format: one `word<TAB>v1 v2 ... vd` entry per
/// line. Words must be unique after concept normalization; rows must be
/// nonzero and match `dimension`. Errors name the offending line.
inline VocabularyMatrix load_vocabulary(std::istream& source, std::size_t dimension) {
    if (dimension == 0) throw ConfigError("load_vocabulary: dimension must be positive");
    std::vector<std::string> words;
    std::vector<double> data;
    std::unordered_map<std::string, std::size_t> seen; // concept -> line number
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (util::trim(line).empty()) continue;
        const std::string where = "vocabulary line " + std::to_string(line_no);
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(where + ": expected 'word<TAB>v1 v2 ... vd'");
        const std::string word(util::trim(line.substr(0, tab)));
        if (word.empty()) throw DataError(where + ": empty word");
        const std::string concept_id = normalize_concept(word);
        if (auto it = seen.find(concept_id); it != seen.end())
            throw DataError(where + ": duplicate word '" + word + "' (first seen at line " +
                            std::to_string(it->second) + ")");
        const auto tokens = util::split_whitespace(std::string_view(line).substr(tab + 1));
        if (tokens.size() != dimension)
            throw DataError(where + ": row has dimension " + std::to_string(tokens.size()) +
                            ", expected " + std::to_string(dimension));
        std::vector<double> row(dimension);
        double norm_sq = 0.0;
        for (std::size_t i = 0; i < dimension; ++i) {
            row[i] = util::parse_double(tokens[i], where);
            norm_sq += row[i] * row[i];
        }
        if (norm_sq == 0.0) throw DataError(where + ": zero embedding for word '" + word + "'");
        const double norm = std::sqrt(norm_sq);
        for (double& v : row) v /= norm;
        seen.emplace(concept_id, line_no);
        words.push_back(word);
        data.insert(data.end(), row.begin(), row.end());
    }
    return VocabularyMatrix(dimension, std::move(words), std::move(data));
}

/// Top-k candidate extraction by cosine similarity against the vocabulary.
/// Ties break toward the lower canonical word index, so results are
/// deterministic. Returns all words ranked when k exceeds the vocabulary.
inline CandidateSet retrieve_candidates(const LatentVector& z, const VocabularyMatrix& vocab, int k = 15) {
    if (z.kind != LatentKind::refined_z)
        throw DomainError("retrieve_candidates: query must be a refined_z latent");
    if (k < 1) throw DomainError("retrieve_candidates: k must be >= 1");
    if (vocab.size() == 0) throw DataError("retrieve_candidates: empty vocabulary");
    if (z.values.size() != vocab.dimension())
        throw DomainError("retrieve_candidates: query dimension " + std::to_string(z.values.size()) +
                          " does not match vocabulary dimension " + std::to_string(vocab.dimension()));
    const LatentVector q = l2_normalize(z);

    std::vector<std::pair<double, std::size_t>> scored(vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        const auto row = vocab.row(i);
        double dot = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) dot += q.values[j] * row[j];
        scored[i] = {std::clamp(dot, -1.0, 1.0), i};
    }
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
    const auto better = [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    };
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), better);

    CandidateSet out;
    out.k = k;
    out.items.reserve(take);
    for (std::size_t r = 0; r < take; ++r)
        out.items.push_back(Candidate{vocab.word(scored[r].second), scored[r].first, static_cast<int>(r + 1)});
    return out;
}

} // namespace synapse

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "synapse/error.hpp"
#include "synapse/latent.hpp"
#include "synapse/util.hpp"

namespace synapse {

struct ExemplarRecord {
    std::string id;
    std::vector<double> embedding; // raw latent space
    std::string caption;
};

/// Frozen store of historical trial embeddings and their captions. Rows are
/// L2-normalized at build time; row order is input order and breaks ties.
class ExemplarStore {
public:
    std::size_t size() const { return ids_.size(); }
    std::size_t dimension() const { return dimension_; }
    const std::string& id(std::size_t index) const { return ids_.at(index); }
    const std::string& caption(std::size_t index) const { return captions_.at(index); }
    std::span<const double> row(std::size_t index) const {
        return std::span<const double>(data_).subspan(index * dimension_, dimension_);
    }

    friend ExemplarStore build_store(const std::vector<ExemplarRecord>& records);

private:
    std::size_t dimension_ = 0;
    std::vector<std::string> ids_;
    std::vector<std::string> captions_;
    std::vector<double> data_; // row-major, rows unit-norm
};

inline ExemplarStore build_store(const std::vector<ExemplarRecord>& records) {
    if (records.empty()) throw DataError("build_store: no records");
    ExemplarStore store;
    store.dimension_ = records.front().embedding.size();
    if (store.dimension_ == 0) throw DataError("build_store: record '" + records.front().id + "' has empty embedding");
    std::unordered_set<std::string> seen;
    for (const auto& r : records) {
        if (!seen.insert(r.id).second)
            throw DataError("build_store: duplicate id '" + r.id + "'");
        if (r.embedding.size() != store.dimension_)
            throw DataError("build_store: record '" + r.id + "' has dimension " +
                            std::to_string(r.embedding.size()) + ", expected " +
                            std::to_string(store.dimension_));
        double norm_sq = 0.0;
        for (double v : r.embedding) {
            if (!std::isfinite(v))
                throw DataError("build_store: record '" + r.id + "' has a non-finite entry");
            norm_sq += v * v;
        }
        if (norm_sq == 0.0)
            throw DataError("build_store: record '" + r.id + "' has a zero embedding");
        const double norm = std::sqrt(norm_sq);
        store.ids_.push_back(r.id);
        store.captions_.push_back(r.caption);
        for (double v : r.embedding) store.data_.push_back(v / norm);
    }
    return store;
}

/// Store file format: `id<TAB>caption<TAB>v1 v2 ... vd` per line.
inline ExemplarStore load_exemplar_store(std::istream& source, std::size_t dimension) {
    if (dimension == 0) throw ConfigError("load_exemplar_store: dimension must be positive");
    std::vector<ExemplarRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (util::trim(line).empty()) continue;
        const std::string where = "exemplar line " + std::to_string(line_no);
        const auto tab1 = line.find('\t');
        const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos)
            throw DataError(where + ": expected 'id<TAB>caption<TAB>v1 v2 ... vd'");
        ExemplarRecord rec;
        rec.id = std::string(util::trim(line.substr(0, tab1)));
        rec.caption = std::string(util::trim(line.substr(tab1 + 1, tab2 - tab1 - 1)));
        if (rec.id.empty()) throw DataError(where + ": empty id");
        if (rec.caption.empty()) throw DataError(where + ": empty caption");
        const auto tokens = util::split_whitespace(std::string_view(line).substr(tab2 + 1));
        if (tokens.size() != dimension)
            throw DataError(where + ": row has dimension " + std::to_string(tokens.size()) +
                            ", expected " + std::to_string(dimension));
        rec.embedding.reserve(dimension);
        for (const auto& t : tokens) rec.embedding.push_back(util::parse_double(t, where));
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw DataError("exemplar store file contains no records");
    return build_store(records);
}

struct Exemplar {
    std::string id;
    std::string caption;
    double score = 0.0; // cosine similarity
};

struct ExemplarSet {
    std::vector<Exemplar> items; // score non-increasing
    int k = 2;

    std::vector<std::string> captions() const {
        std::vector<std::string> out;
        out.reserve(items.size());
        for (const auto& e : items) out.push_back(e.caption);
        return out;
    }
};

/// Nearest-neighbor caption lookup over the raw latent space. Both sides are
/// unit-norm so the parallel score vector is a true cosine; ties break toward
/// the lower row index.
inline ExemplarSet retrieve_exemplars(const LatentVector& x, const ExemplarStore& store, int k = 2) {
    if (x.kind != LatentKind::raw_x)
        throw DomainError("retrieve_exemplars: query must be a raw_x latent");
    if (k < 1) throw DomainError("retrieve_exemplars: k must be >= 1");
    if (store.size() == 0) throw DataError("retrieve_exemplars: empty store");
    if (x.values.size() != store.dimension())
        throw DomainError("retrieve_exemplars: query dimension " + std::to_string(x.values.size()) +
                          " does not match store dimension " + std::to_string(store.dimension()));
    const LatentVector q = l2_normalize(x);

    std::vector<std::pair<double, std::size_t>> scored(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
        const auto row = store.row(i);
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

    ExemplarSet out;
    out.k = k;
    out.items.reserve(take);
    for (std::size_t r = 0; r < take; ++r)
        out.items.push_back(Exemplar{store.id(scored[r].second), store.caption(scored[r].second), scored[r].first});
    return out;
}

} // namespace synapse

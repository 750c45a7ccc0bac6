#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "synapse/error.hpp"
#include "synapse/knowledge_graph.hpp"
#include "synapse/util.hpp"

namespace synapse {

/// Relations worth verbalizing, each with its surface template. Relation
/// names compare case-insensitively against graph edge labels; the entry's
/// spelling is canonical. Templates use {h} and {t} placeholders.
class RelationWhitelist {
public:
    struct Entry {
        std::string relation;
        std::string surface_template;
    };

    static RelationWhitelist defaults() {
        RelationWhitelist w;
        w.add("AtLocation", "{h} is typically found at {t}");
        w.add("UsedFor", "{h} is used for {t}");
        w.add("HasProperty", "{h} has the property {t}");
        w.add("CapableOf", "{h} is capable of {t}");
        w.add("PartOf", "{h} is part of {t}");
        return w;
    }

    /// Override file format: `relation<TAB>template-with-{h}-and-{t}` per line.
    static RelationWhitelist load(std::istream& source) {
        RelationWhitelist w;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(source, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (util::trim(line).empty()) continue;
            const std::string where = "whitelist line " + std::to_string(line_no);
            const auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw DataError(where + ": expected 'relation<TAB>template'");
            const std::string relation(util::trim(line.substr(0, tab)));
            const std::string templ(util::trim(line.substr(tab + 1)));
            if (relation.empty()) throw DataError(where + ": empty relation name");
            if (templ.find("{h}") == std::string::npos || templ.find("{t}") == std::string::npos)
                throw DataError(where + ": template must contain {h} and {t}");
            w.add(relation, templ);
        }
        if (w.entries_.empty()) throw DataError("whitelist file contains no entries");
        return w;
    }

    void add(std::string relation, std::string surface_template) {
        const std::string key = util::to_lower(relation);
        if (lookup_.count(key))
            throw DataError("whitelist: duplicate relation '" + relation + "'");
        lookup_.emplace(key, entries_.size());
        entries_.push_back(Entry{std::move(relation), std::move(surface_template)});
    }

    const Entry* find(const std::string& relation) const {
        auto it = lookup_.find(util::to_lower(relation));
        return it == lookup_.end() ? nullptr : &entries_[it->second];
    }

    const std::vector<Entry>& entries() const { return entries_; }

private:
    std::vector<Entry> entries_;
    std::map<std::string, std::size_t> lookup_; // lowercase relation -> entry index
};

struct Fact {
    std::string surface;
    std::string head;
    std::string relation; // canonical whitelist spelling
    std::string tail;
    double weight = 0.0;
};

struct FactSet {
    std::vector<Fact> facts;
    int capacity = 5;

    std::vector<std::string> surfaces() const {
        std::vector<std::string> out;
        out.reserve(facts.size());
        for (const auto& f : facts) out.push_back(f.surface);
        return out;
    }
};

/// Renders one triple through the whitelist's template table. Underscores in
/// concept ids become spaces.
inline std::string verbalize(const std::string& head, const std::string& relation, const std::string& tail,
                             const RelationWhitelist& whitelist = RelationWhitelist::defaults()) {
    const auto* entry = whitelist.find(relation);
    if (entry == nullptr)
        throw DomainError("verbalize: no template for relation '" + relation + "'");
    const auto despace = [](const std::string& id) {
        std::string out = id;
        std::replace(out.begin(), out.end(), '_', ' ');
        return out;
    };
    std::string out = entry->surface_template;
    const auto substitute = [&out](const std::string& placeholder, const std::string& value) {
        for (auto pos = out.find(placeholder); pos != std::string::npos; pos = out.find(placeholder, pos + value.size()))
            out.replace(pos, placeholder.size(), value);
    };
    substitute("{h}", despace(head));
    substitute("{t}", despace(tail));
    return out;
}

/// Harvests whitelisted subgraph edges into verbalized facts. Duplicate
/// triples collapse to their maximum-weight instance; the survivors order by
/// weight descending with a full lexicographic tie-break, then truncate to
/// `capacity`. The ordering makes fact extraction byte-reproducible.
inline FactSet extract_facts(const InducedSubgraph& sub, const RelationWhitelist& whitelist,
                             int capacity = 5) {
    if (capacity < 0) throw ConfigError("extract_facts: capacity must be >= 0");

    std::map<std::tuple<std::string, std::string, std::string>, std::pair<double, const RelationWhitelist::Entry*>> best;
    for (const auto& e : sub.edges) {
        const auto* entry = whitelist.find(e.relation);
        if (entry == nullptr) continue;
        const auto key = std::make_tuple(e.head, entry->relation, e.tail);
        auto it = best.find(key);
        if (it == best.end())
            best.emplace(key, std::make_pair(e.weight, entry));
        else
            it->second.first = std::max(it->second.first, e.weight);
    }

    std::vector<Fact> all;
    all.reserve(best.size());
    for (const auto& [key, value] : best) {
        const auto& [head, relation, tail] = key;
        all.push_back(Fact{verbalize(head, relation, tail, whitelist), head, relation, tail, value.first});
    }
    std::sort(all.begin(), all.end(), [](const Fact& a, const Fact& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        return std::tie(a.head, a.relation, a.tail) < std::tie(b.head, b.relation, b.tail);
    });
    if (all.size() > static_cast<std::size_t>(capacity)) all.resize(static_cast<std::size_t>(capacity));

    FactSet out;
    out.capacity = capacity;
    out.facts = std::move(all);
    return out;
}

} // namespace synapse

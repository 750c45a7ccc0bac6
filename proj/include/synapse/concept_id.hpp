#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include "synapse/error.hpp"

namespace synapse {

/// Canonical concept id for a surface word: lowercase, outer whitespace
/// stripped, internal whitespace runs collapsed to a single underscore.
/// Bridges vocabulary words to graph vertex ids.
inline std::string normalize_concept(std::string_view word) {
    std::string out;
    out.reserve(word.size());
    bool pending_gap = false;
    for (char c : word) {
        const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (space) {
            if (!out.empty()) pending_gap = true;
            continue;
        }
        if (pending_gap) {
            out.push_back('_');
            pending_gap = false;
        }
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        out.push_back(c);
    }
    if (out.empty())
        throw DomainError("normalize_concept: empty or whitespace-only word");
    return out;
}

} // namespace synapse

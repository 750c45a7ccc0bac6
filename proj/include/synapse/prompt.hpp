#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "synapse/error.hpp"
#include "synapse/exemplars.hpp"
#include "synapse/facts.hpp"
#include "synapse/util.hpp"

namespace synapse {

/// Prompt/pipeline variants. The A track targets object-label corpora, the B
/// track the open-vocabulary scaling corpora. A2 shares A1's template; its
/// difference (m = 0) is a pruning parameter applied upstream.
enum class AblationId { A1, A2, A3, A4, A5, A6, B1, B2 };

inline const char* to_string(AblationId id) {
    switch (id) {
        case AblationId::A1: return "A1";
        case AblationId::A2: return "A2";
        case AblationId::A3: return "A3";
        case AblationId::A4: return "A4";
        case AblationId::A5: return "A5";
        case AblationId::A6: return "A6";
        case AblationId::B1: return "B1";
        case AblationId::B2: return "B2";
    }
    throw DomainError("to_string: invalid ablation id");
}

inline AblationId parse_ablation_id(const std::string& name) {
    static const std::unordered_map<std::string, AblationId> table = {
        {"A1", AblationId::A1}, {"A2", AblationId::A2}, {"A3", AblationId::A3},
        {"A4", AblationId::A4}, {"A5", AblationId::A5}, {"A6", AblationId::A6},
        {"B1", AblationId::B1}, {"B2", AblationId::B2},
    };
    std::string upper = name;
    for (char& c : upper)
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    const auto it = table.find(upper);
    if (it == table.end()) throw ConfigError("unknown ablation id '" + name + "'");
    return it->second;
}

constexpr AblationId kAllAblations[] = {AblationId::A1, AblationId::A2, AblationId::A3, AblationId::A4,
                                        AblationId::A5, AblationId::A6, AblationId::B1, AblationId::B2};

/// Which data streams a configuration consumes. Anything a template does not
/// consume must be absent from the payload.
struct PromptRequirements {
    bool facts = false;
    bool exemplars = false;
    bool object_anchor = false;
};

inline PromptRequirements requirements(AblationId id) {
    switch (id) {
        case AblationId::A1:
        case AblationId::A2: return {true, true, true};
        case AblationId::A3: return {true, true, false};
        case AblationId::A4: return {true, false, true};
        case AblationId::A5: return {false, true, true};
        case AblationId::A6: return {false, false, true};
        case AblationId::B1: return {true, true, false};
        case AblationId::B2: return {true, false, false};
    }
    throw DomainError("requirements: invalid ablation id");
}

struct PromptPayload {
    std::vector<std::string> pruned_words;
    std::optional<FactSet> facts;
    std::optional<ExemplarSet> exemplars;
    std::optional<std::string> pred_obj;
    std::optional<double> pred_conf;
};

struct RenderedPrompt {
    std::string text;
    AblationId config = AblationId::A1;
    std::size_t byte_length = 0;
};

namespace detail {

inline constexpr const char* kBlueprintA1 = R"__PB__(You are an advanced neural decoding translation engine. You are provided with a denoised, 
common-sense validated Bag-of-Words extracted from human EEG signals, along with topological 
world constraints and structural sentence guidelines. Your task is to synthesize these 
primitives into a single natural description.

[Structural Layout Guides from Training Set]
{retrieved_exemplars}

[Denoised Brain-Signal Keywords]
[{prompt_words}]

[Topological Common-Sense Relations]
{relational_facts}

[Target Dominant Signal Context]
- Primary Classification Target: '{pred_obj}' (Model Confidence: {pred_conf})

Instructions:
1. Synthesize these primitives into exactly ONE clear, fluent English description 
    (8-20 words).
2. Prioritize concepts verified by both the brain-signal keywords and the common-sense 
    relational constraints.
3. Do NOT include annotations, prefix strings, quotes, or conversational meta-commentary. 
   Output ONLY the raw caption string text.

Output:
)__PB__";

inline constexpr const char* kBlueprintA3 = R"__PB__(You are an advanced neural decoding translation engine. You are provided with a denoised, 
common-sense validated Bag-of-Words extracted from human EEG signals, along with topological 
world constraints and structural sentence guidelines. Your task is to synthesize these 
primitives into a single natural description.

[Structural Layout Guides from Training Set]
{retrieved_exemplars}

[Denoised Brain-Signal Keywords]
[{prompt_words}]

[Topological Common-Sense Relations]
{relational_facts}

Instructions:
1. Synthesize these primitives into exactly ONE clear, fluent English description 
    (8-20 words).
2. Prioritize concepts verified by both the brain-signal keywords and the common-sense
    relational constraints.
3. Do NOT include annotations, prefix strings, quotes, or conversational meta-commentary. 
   Output ONLY the raw caption string text.

Output:
)__PB__";

inline constexpr const char* kBlueprintA4 = R"__PB__(You are an advanced neural decoding translation engine. You are provided with a denoised, 
common-sense validated Bag-of-Words extracted from human EEG signals, along with topological 
world constraints. Your task is to synthesize these primitives into a single 
natural description.

[Denoised Brain-Signal Keywords]
[{prompt_words}]

[Topological Common-Sense Relations]
{relational_facts}

[Target Dominant Signal Context]
- Primary Classification Target: '{pred_obj}' (Model Confidence: {pred_conf})

Instructions:
1. Synthesize these primitives into exactly ONE clear, fluent English description 
    (8-20 words).
2. Prioritize concepts verified by both the brain-signal keywords and the common-sense 
    relational constraints.
3. Do NOT include annotations, prefix strings, quotes, or conversational meta-commentary. 
   Output ONLY the raw caption string text.

Output:
)__PB__";

inline constexpr const char* kBlueprintA5 = R"__PB__(You are an advanced neural decoding translation engine. You are provided with a denoised, 
common-sense validated Bag-of-Words extracted from human EEG signals, along with structural 
sentence guidelines. Your task is to synthesize these primitives into a single 
natural description.

[Denoised Brain-Signal Keywords]
[{prompt_words}]

[Structural Layout Guides from Training Set]
{retrieved_exemplars}

[Target Dominant Signal Context]
- Primary Classification Target: '{pred_obj}' (Model Confidence: {pred_conf})

Instructions:
1. Synthesize these primitives into exactly ONE clear, fluent English description 
    (8-20 words).
2. Prioritize concepts verified by both the brain-signal keywords and the common-sense
    relational constraints.
3. Do NOT include annotations, prefix strings, quotes, or conversational meta-commentary. 
   Output ONLY the raw caption string text.

Output:
)__PB__";

inline constexpr const char* kBlueprintA6 = R"__PB__(You are an advanced neural decoding translation engine. You are provided with a denoised, 
common-sense validated Bag-of-Words extracted from human EEG signals. Your task is to 
synthesize these primitives into a single natural description.

[Denoised Brain-Signal Keywords]
[{prompt_words}]

[Target Dominant Signal Context]
- Primary Classification Target: '{pred_obj}' (Model Confidence: {pred_conf})

Instructions:
1. Synthesize these primitives into exactly ONE clear, fluent English description 
    (8-20 words).
2. Prioritize concepts verified by the brain-signal keywords.
3. Do NOT include annotations, prefix strings, quotes, or conversational meta-commentary. 
   Output ONLY the raw caption string text.

Output:
)__PB__";

inline constexpr const char* kBlueprintB1 = R"__PB__(You are an advanced neural decoding translation engine. You are provided with a denoised, 
common-sense validated Bag-of-Words extracted from human EEG signals, along with topological 
world constraints and exemplar captions from similar samples from training data. Your task is 
to synthesize these primitives into a single natural description.

[Denoised Brain-Signal Keywords]
[{words_str}]

[Topological Common-Sense Relations]
{facts_str}

[Retrieved Exemplars]
{exemplars_str}

Instructions:
1. Synthesize these primitives into exactly ONE clear, fluent English description 
    (8-20 words).
2. Prioritize concepts verified by both the brain-signal keywords and the common-sense 
    relational constraints.
3. Do NOT include annotations, prefix strings, quotes, or conversational meta-commentary. 
   Output ONLY the raw caption string text.

Output:
)__PB__";

inline constexpr const char* kBlueprintB2 = R"__PB__(You are an advanced neural decoding translation engine. You are provided with a denoised, 
common-sense validated Bag-of-Words extracted from human EEG signals, along with topological 
world constraints. Your task is to synthesize these primitives into a single natural 
description.

[Denoised Brain-Signal Keywords]
[{words_str}]

[Topological Common-Sense Relations]
{facts_str}

Instructions:
1. Synthesize these primitives into exactly ONE clear, fluent English description 
    (8-20 words).
2. Prioritize concepts verified by both the brain-signal keywords and the common-sense 
    relational constraints.
3. Do NOT include annotations, prefix strings, quotes, or conversational meta-commentary. 
   Output ONLY the raw caption string text.

Output:
)__PB__";

inline const char* blueprint(AblationId id) {
    switch (id) {
        case AblationId::A1:
        case AblationId::A2: return kBlueprintA1;
        case AblationId::A3: return kBlueprintA3;
        case AblationId::A4: return kBlueprintA4;
        case AblationId::A5: return kBlueprintA5;
        case AblationId::A6: return kBlueprintA6;
        case AblationId::B1: return kBlueprintB1;
        case AblationId::B2: return kBlueprintB2;
    }
    throw DomainError("blueprint: invalid ablation id");
}

inline std::string format_confidence(double confidence) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", confidence);
    return buf;
}

} // namespace detail

/// Renders the decoder prompt for one configuration, byte-exactly. Word lists
/// join with ", "; facts become "- " lines; exemplars become numbered lines;
/// confidence prints with exactly two fraction digits; empty fact or exemplar
/// collections render the literal line "(none)". Substitution is single-pass,
/// so payload text can never be re-expanded.
inline RenderedPrompt render(const PromptPayload& payload, AblationId config) {
    const PromptRequirements needs = requirements(config);
    const std::string name = to_string(config);
    if (needs.facts && !payload.facts)
        throw DomainError("render: config " + name + " requires facts");
    if (!needs.facts && payload.facts)
        throw DomainError("render: config " + name + " excludes facts");
    if (needs.exemplars && !payload.exemplars)
        throw DomainError("render: config " + name + " requires exemplars");
    if (!needs.exemplars && payload.exemplars)
        throw DomainError("render: config " + name + " excludes exemplars");
    if (needs.object_anchor && (!payload.pred_obj || !payload.pred_conf))
        throw DomainError("render: config " + name + " requires pred_obj and pred_conf");
    if (!needs.object_anchor && (payload.pred_obj || payload.pred_conf))
        throw DomainError("render: config " + name + " excludes pred_obj and pred_conf");
    if (payload.pred_conf && (*payload.pred_conf < 0.0 || *payload.pred_conf > 1.0))
        throw DomainError("render: pred_conf must lie in [0, 1]");

    std::unordered_map<std::string, std::string> values;
    values["prompt_words"] = values["words_str"] = util::join(payload.pruned_words, ", ");
    if (payload.facts) {
        std::string block;
        for (const auto& f : payload.facts->facts) {
            if (!block.empty()) block += '\n';
            block += "- " + f.surface;
        }
        if (block.empty()) block = "(none)";
        values["relational_facts"] = values["facts_str"] = block;
    }
    if (payload.exemplars) {
        std::string block;
        std::size_t n = 0;
        for (const auto& e : payload.exemplars->items) {
            if (!block.empty()) block += '\n';
            block += std::to_string(++n) + ". " + e.caption;
        }
        if (block.empty()) block = "(none)";
        values["retrieved_exemplars"] = values["exemplars_str"] = block;
    }
    if (payload.pred_obj) values["pred_obj"] = *payload.pred_obj;
    if (payload.pred_conf) values["pred_conf"] = detail::format_confidence(*payload.pred_conf);

    const std::string tmpl = detail::blueprint(config);
    std::string text;
    text.reserve(tmpl.size() + 256);
    for (std::size_t i = 0; i < tmpl.size();) {
        if (tmpl[i] != '{') {
            text += tmpl[i++];
            continue;
        }
        const auto close = tmpl.find('}', i);
        if (close == std::string::npos)
            throw DomainError("render: unterminated placeholder in blueprint " + name);
        const std::string key = tmpl.substr(i + 1, close - i - 1);
        const auto it = values.find(key);
        if (it == values.end())
            throw DomainError("render: no value for placeholder {" + key + "} in blueprint " + name);
        text += it->second;
        i = close + 1;
    }

    RenderedPrompt out;
    out.text = std::move(text);
    out.config = config;
    out.byte_length = out.text.size();
    return out;
}

} // namespace synapse

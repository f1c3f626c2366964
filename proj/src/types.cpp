#include "tokvar/types.hpp"

#include <string>

#include "tokvar/errors.hpp"

namespace tokvar {

std::string to_string(Dataset d) {
    switch (d) {
        case Dataset::squad_v2: return "squad_v2";
        case Dataset::triviaqa_nocontext: return "triviaqa_nocontext";
        case Dataset::xsum: return "xsum";
        case Dataset::custom: return "custom";
    }
    return "custom";
}

Dataset dataset_from_string(const std::string& name) {
    if (name == "squad_v2") return Dataset::squad_v2;
    if (name == "triviaqa_nocontext") return Dataset::triviaqa_nocontext;
    if (name == "xsum") return Dataset::xsum;
    if (name == "custom") return Dataset::custom;
    throw InputError("unknown dataset tag: \"" + name + "\"");
}

void DecodingConfig::validate() const {
    if (!(temperature > 0.0)) {
        throw ConfigError("temperature must be positive, got " + std::to_string(temperature));
    }
    if (!(top_p > 0.0 && top_p <= 1.0)) {
        throw ConfigError("top_p must be in (0, 1], got " + std::to_string(top_p));
    }
    if (top_k < 0) {
        throw ConfigError("top_k must be >= 0 (0 disables), got " + std::to_string(top_k));
    }
    if (max_new_tokens < 1) {
        throw ConfigError("max_new_tokens must be positive, got " + std::to_string(max_new_tokens));
    }
    if (num_samples < 1) {
        throw ConfigError("num_samples must be >= 1, got " + std::to_string(num_samples));
    }
}

std::string to_string(FinishReason r) {
    switch (r) {
        case FinishReason::length: return "length";
        case FinishReason::stop: return "stop";
        case FinishReason::other: return "other";
    }
    return "other";
}

FinishReason finish_reason_from_string(const std::string& name) {
    if (name == "length") return FinishReason::length;
    if (name == "stop") return FinishReason::stop;
    return FinishReason::other;
}

void GenerationSet::validate() const {
    if (samples.empty()) {
        throw InputError("generation set for prompt \"" + prompt_id + "\" has no samples");
    }
    if (reference_index < 0 || static_cast<std::size_t>(reference_index) >= samples.size()) {
        throw InputError("reference_index " + std::to_string(reference_index) +
                         " out of range for " + std::to_string(samples.size()) +
                         " samples (prompt \"" + prompt_id + "\")");
    }
    for (const auto& sample : samples) {
        if (sample.tokens.size() != sample.logprobs.size()) {
            throw InputError("sample " + std::to_string(sample.sample_index) + " of prompt \"" +
                             prompt_id + "\" has " + std::to_string(sample.tokens.size()) +
                             " tokens but " + std::to_string(sample.logprobs.size()) + " logprobs");
        }
        for (double lp : sample.logprobs) {
            if (lp > 0.0) {
                throw InputError("sample " + std::to_string(sample.sample_index) + " of prompt \"" +
                                 prompt_id + "\" carries a positive logprob " + std::to_string(lp));
            }
        }
    }
}

}  // namespace tokvar

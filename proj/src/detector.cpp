#include "tokvar/detector.hpp"

#include <algorithm>

#include "tokvar/errors.hpp"

namespace tokvar {

std::string to_string(VarianceDenominator d) {
    return d == VarianceDenominator::population_n ? "n" : "n-1";
}

VarianceDenominator denominator_from_string(const std::string& name) {
    if (name == "n" || name == "population" || name == "population_n") {
        return VarianceDenominator::population_n;
    }
    if (name == "n-1" || name == "sample" || name == "sample_n_minus_1") {
        return VarianceDenominator::sample_n_minus_1;
    }
    throw ConfigError("unknown variance denominator: \"" + name + "\" (expected n or n-1)");
}

void DetectorConfig::validate() const {
    if (threshold < 0.0) {
        throw ConfigError("threshold must be >= 0, got " + std::to_string(threshold));
    }
    if (min_support < 2) {
        throw ConfigError("min_support must be >= 2, got " + std::to_string(min_support));
    }
}

PositionStats position_stats(std::span<const double> logprobs, VarianceDenominator denom) {
    const std::size_t n = logprobs.size();
    if (n < 2) {
        throw InputError("insufficient support: variance needs at least 2 samples, got " +
                         std::to_string(n));
    }
    // An all-equal list must yield its value and exactly zero variance; even
    // two-pass summation can leave a residue when sum/n rounds off the value.
    bool all_equal = true;
    for (double lp : logprobs) {
        if (lp != logprobs.front()) {
            all_equal = false;
            break;
        }
    }
    if (all_equal) return {logprobs.front(), 0.0};

    double sum = 0.0;
    for (double lp : logprobs) sum += lp;
    const double mean = sum / static_cast<double>(n);

    double sq_dev = 0.0;
    for (double lp : logprobs) {
        const double d = lp - mean;
        sq_dev += d * d;
    }
    const double divisor = denom == VarianceDenominator::population_n
                               ? static_cast<double>(n)
                               : static_cast<double>(n - 1);
    // clamp: an all-equal list must read exactly 0, never a rounding residue
    const double variance = std::max(0.0, sq_dev / divisor);
    return {mean, variance};
}

ScoredGeneration score_generation_set(const GenerationSet& set, const DetectorConfig& cfg) {
    cfg.validate();
    set.validate();
    if (set.samples.size() < static_cast<std::size_t>(cfg.min_support)) {
        throw InputError("generation set for prompt \"" + set.prompt_id + "\" has " +
                         std::to_string(set.samples.size()) +
                         " sample(s); scoring needs at least " + std::to_string(cfg.min_support));
    }

    const GenerationSample& reference = set.samples[static_cast<std::size_t>(set.reference_index)];

    ScoredGeneration scored;
    scored.prompt_id = set.prompt_id;
    scored.model_id = set.model_id;
    scored.threshold = cfg.threshold;
    for (const auto& token : reference.tokens) scored.answer_text += token;

    std::vector<double> gathered;
    gathered.reserve(set.samples.size());
    for (std::size_t t = 0; t < reference.tokens.size(); ++t) {
        gathered.clear();
        for (const auto& sample : set.samples) {
            if (sample.logprobs.size() > t) gathered.push_back(sample.logprobs[t]);
        }
        // fixed summation order: shuffling samples cannot perturb the result
        std::sort(gathered.begin(), gathered.end());

        TokenScore ts;
        ts.position = static_cast<int>(t);
        ts.token = reference.tokens[t];
        ts.support = static_cast<int>(gathered.size());
        if (!gathered.empty()) {
            double sum = 0.0;
            for (double lp : gathered) sum += lp;
            ts.mean_logprob = sum / static_cast<double>(gathered.size());
        }
        if (ts.support >= cfg.min_support) {
            const PositionStats stats = position_stats(gathered, cfg.denominator);
            ts.mean_logprob = stats.mean;
            ts.variance = stats.variance;
            ts.hallucinated = stats.variance > cfg.threshold;
            ++scored.scored_count;
            if (ts.hallucinated) ++scored.hallucinated_count;
        }
        scored.token_scores.push_back(std::move(ts));
    }
    return scored;
}

CorpusScore score_corpus(const std::vector<GenerationSet>& traces, const DetectorConfig& cfg) {
    CorpusScore result;
    result.scored.reserve(traces.size());
    for (const auto& set : traces) {
        try {
            result.scored.push_back(score_generation_set(set, cfg));
        } catch (const Error& e) {
            result.failures.push_back({set.prompt_id, e.what()});
        }
    }
    return result;
}

}  // namespace tokvar

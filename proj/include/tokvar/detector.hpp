#pragma once

#include <span>
#include <string>
#include <vector>

#include "tokvar/types.hpp"

namespace tokvar {

/// Divisor used for the cross-sample variance. population_n is the written
/// formula (1/n); sample_n_minus_1 is the unbiased alternative.
enum class VarianceDenominator { population_n, sample_n_minus_1 };

std::string to_string(VarianceDenominator d);
VarianceDenominator denominator_from_string(const std::string& name);

struct DetectorConfig {
    double threshold = 0.5;
    VarianceDenominator denominator = VarianceDenominator::population_n;
    int min_support = 2;

    void validate() const;  // throws ConfigError
};

struct PositionStats {
    double mean = 0.0;
    double variance = 0.0;
};

/// Mean and variance of the log probabilities gathered at one position.
/// Two-pass (mean, then squared deviations) so an all-equal list yields a
/// variance of exactly zero; the result is clamped at zero against rounding.
/// Throws InputError for fewer than two values — the variance of a single
/// sample is vacuous.
PositionStats position_stats(std::span<const double> logprobs,
                             VarianceDenominator denom);

/// Annotates the reference sample of `set` position by position. Alignment
/// across samples is strictly positional: index t pairs with index t in every
/// sample long enough, regardless of the token strings emitted there.
/// Positions with fewer than cfg.min_support contributors keep their support
/// count but carry no variance and are excluded from scored_count.
ScoredGeneration score_generation_set(const GenerationSet& set,
                                      const DetectorConfig& cfg);

struct ScoreFailure {
    std::string prompt_id;
    std::string message;
};

struct CorpusScore {
    std::vector<ScoredGeneration> scored;   // input order preserved
    std::vector<ScoreFailure> failures;
};

/// Scores every set, collecting per-set failures instead of aborting.
CorpusScore score_corpus(const std::vector<GenerationSet>& traces,
                         const DetectorConfig& cfg);

}  // namespace tokvar

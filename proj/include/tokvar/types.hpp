#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tokvar {

enum class Dataset { squad_v2, triviaqa_nocontext, xsum, custom };

std::string to_string(Dataset d);
Dataset dataset_from_string(const std::string& name);

/// One evaluation item. For summarization corpora the question field holds
/// the instruction line and the document is the context.
struct PromptRecord {
    std::string id;
    Dataset dataset = Dataset::custom;
    std::string context;   // may be empty for no-context items
    std::string question;
    std::optional<std::string> gold_answer;  // kept for downstream evaluation;
                                             // never consulted by detection

    bool operator==(const PromptRecord&) const = default;
};

struct DecodingConfig {
    double temperature = 0.9;
    double top_p = 0.95;
    int top_k = 50;  // 0 disables the cap
    int max_new_tokens = 40;
    int num_samples = 3;
    std::optional<std::int64_t> seed;

    // throws ConfigError on out-of-range values
    void validate() const;

    bool operator==(const DecodingConfig&) const = default;
};

enum class FinishReason { length, stop, other };

std::string to_string(FinishReason r);
FinishReason finish_reason_from_string(const std::string& name);

/// One stochastic completion: token strings paired one-to-one with the
/// natural-log probabilities the backend reported for them.
struct GenerationSample {
    int sample_index = 0;
    std::vector<std::string> tokens;
    std::vector<double> logprobs;  // each <= 0
    FinishReason finish_reason = FinishReason::length;

    bool operator==(const GenerationSample&) const = default;
};

/// The n completions collected for one prompt/model pair.
struct GenerationSet {
    std::string prompt_id;
    std::string model_id;
    DecodingConfig config;
    std::vector<GenerationSample> samples;
    int reference_index = 0;  // which sample's tokens get annotated

    // throws InputError when samples are empty, reference_index is out of
    // range, a sample's token/logprob lengths differ, or a logprob is > 0
    void validate() const;

    bool operator==(const GenerationSet&) const = default;
};

/// Per-position annotation of the reference sample. variance is only defined
/// where at least min_support samples were long enough to contribute;
/// mean_logprob is defined whenever any sample contributed.
struct TokenScore {
    int position = 0;
    std::string token;
    std::optional<double> mean_logprob;
    std::optional<double> variance;
    int support = 0;
    bool hallucinated = false;

    bool scored() const { return variance.has_value(); }

    bool operator==(const TokenScore&) const = default;
};

struct ScoredGeneration {
    std::string prompt_id;
    std::string model_id;
    std::string answer_text;  // reference tokens concatenated
    double threshold = 0.5;
    std::vector<TokenScore> token_scores;
    int hallucinated_count = 0;
    int scored_count = 0;

    bool operator==(const ScoredGeneration&) const = default;
};

}  // namespace tokvar

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tokvar/types.hpp"

namespace tokvar {

/// A span of positions (inclusive on both ends) whose log-prob noise is
/// larger than the stable background — the planted "hallucination" signal.
struct PlantedRegion {
    int start = 0;
    int end = 0;  // inclusive
    double noise_sd = 1.0;

    bool contains(int position) const { return position >= start && position <= end; }
};

struct MockModelSpec {
    std::int64_t seed = 1234;
    std::vector<std::string> vocab;
    int answer_length = 30;
    double base_logprob = -6.0;
    double stable_noise_sd = 0.05;
    std::vector<PlantedRegion> planted_regions;

    // throws ConfigError: empty vocab, nonpositive answer_length,
    // base_logprob > 0, negative sds, regions out of [0, answer_length) or
    // overlapping, region sd not above the stable sd
    void validate() const;

    double noise_sd_at(int position) const;

    static MockModelSpec defaults();
    static MockModelSpec from_file(const std::filesystem::path& path);
};

/// Deterministic stand-in for a sampling backend: a pure function of
/// (prompt, config.seed, spec.seed). The token at position t is drawn from
/// the vocab and shared by every sample, so positional alignment is exact;
/// each sample's logprob at t is base_logprob plus an independent Gaussian
/// deviate scaled by the sd active at t, clamped to <= 0. The expected
/// cross-sample variance at t is therefore the active region's noise
/// variance. Emits exactly spec.answer_length tokens per sample.
GenerationSet mock_generate(const std::string& prompt_id,
                            const std::string& prompt,
                            const DecodingConfig& config,
                            const MockModelSpec& spec,
                            const std::string& model_id = "mock");

}  // namespace tokvar

#include "tokvar/mock.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "tokvar/errors.hpp"
#include "tokvar/rng.hpp"

namespace tokvar {

void MockModelSpec::validate() const {
    if (vocab.empty()) {
        throw ConfigError("mock spec needs a nonempty vocab");
    }
    if (answer_length < 1) {
        throw ConfigError("mock answer_length must be positive, got " +
                          std::to_string(answer_length));
    }
    if (base_logprob > 0.0) {
        throw ConfigError("mock base_logprob must be <= 0, got " + std::to_string(base_logprob));
    }
    if (stable_noise_sd < 0.0) {
        throw ConfigError("mock stable_noise_sd must be >= 0");
    }
    auto regions = planted_regions;
    std::sort(regions.begin(), regions.end(),
              [](const PlantedRegion& a, const PlantedRegion& b) { return a.start < b.start; });
    int previous_end = -1;
    for (const auto& region : regions) {
        if (region.start < 0 || region.end < region.start || region.end >= answer_length) {
            throw ConfigError("mock planted region [" + std::to_string(region.start) + ", " +
                              std::to_string(region.end) + "] outside positions [0, " +
                              std::to_string(answer_length) + ")");
        }
        if (region.start <= previous_end) {
            throw ConfigError("mock planted regions overlap at position " +
                              std::to_string(region.start));
        }
        if (!(region.noise_sd > stable_noise_sd)) {
            throw ConfigError("mock planted region sd must exceed stable_noise_sd");
        }
        previous_end = region.end;
    }
}

double MockModelSpec::noise_sd_at(int position) const {
    for (const auto& region : planted_regions) {
        if (region.contains(position)) return region.noise_sd;
    }
    return stable_noise_sd;
}

MockModelSpec MockModelSpec::defaults() {
    MockModelSpec spec;
    spec.seed = 1234;
    spec.vocab = {"the",  "of",    "model", "answer", "city",  "river",  "year", "first",
                  "name", "was",   "is",    "in",     "a",     "to",     "and",  "during",
                  "king", "queen", "north", "south",  "state", "record", "who",  "famous",
                  "new",  "old",   "great", "small",  "found", "built",  "won",  "lost"};
    spec.answer_length = 30;
    spec.base_logprob = -6.0;
    spec.stable_noise_sd = 0.05;
    spec.planted_regions = {{10, 20, 1.0}};
    return spec;
}

MockModelSpec MockModelSpec::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open mock spec file: " + path.string());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed mock spec file " + path.string() + ": " + e.what());
    }
    MockModelSpec spec = defaults();
    try {
        if (j.contains("seed")) spec.seed = j["seed"].get<std::int64_t>();
        if (j.contains("vocab")) spec.vocab = j["vocab"].get<std::vector<std::string>>();
        if (j.contains("answer_length")) spec.answer_length = j["answer_length"].get<int>();
        if (j.contains("base_logprob")) spec.base_logprob = j["base_logprob"].get<double>();
        if (j.contains("stable_noise_sd")) spec.stable_noise_sd = j["stable_noise_sd"].get<double>();
        if (j.contains("planted_regions")) {
            spec.planted_regions.clear();
            for (const auto& r : j["planted_regions"]) {
                PlantedRegion region;
                region.start = r.at("start").get<int>();
                region.end = r.at("end").get<int>();
                region.noise_sd = r.at("noise_sd").get<double>();
                spec.planted_regions.push_back(region);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed mock spec file " + path.string() + ": " + e.what());
    }
    spec.validate();
    return spec;
}

GenerationSet mock_generate(const std::string& prompt_id, const std::string& prompt,
                            const DecodingConfig& config, const MockModelSpec& spec,
                            const std::string& model_id) {
    config.validate();
    spec.validate();

    const std::uint64_t prompt_key = fnv1a64(prompt);
    const std::uint64_t config_seed =
        config.seed ? static_cast<std::uint64_t>(*config.seed) : 0ULL;

    // Token choice is shared across samples: one stream per prompt.
    std::vector<std::string> tokens(static_cast<std::size_t>(spec.answer_length));
    DeterministicRng token_rng(mix_seed({static_cast<std::uint64_t>(spec.seed), prompt_key, 0x70ULL}));
    for (auto& token : tokens) {
        token = spec.vocab[token_rng.next_index(spec.vocab.size())];
    }

    GenerationSet set;
    set.prompt_id = prompt_id;
    set.model_id = model_id;
    set.config = config;
    set.reference_index = 0;
    set.samples.reserve(static_cast<std::size_t>(config.num_samples));

    for (int i = 0; i < config.num_samples; ++i) {
        GenerationSample sample;
        sample.sample_index = i;
        sample.tokens = tokens;
        sample.logprobs.resize(tokens.size());
        sample.finish_reason = FinishReason::length;

        DeterministicRng noise_rng(mix_seed({static_cast<std::uint64_t>(spec.seed), config_seed,
                                             prompt_key, static_cast<std::uint64_t>(i), 0x6eULL}));
        for (int t = 0; t < spec.answer_length; ++t) {
            // The underlying deviate stream does not depend on the region
            // layout; only the scale does.
            const double z = noise_rng.next_gaussian();
            const double value = spec.base_logprob + spec.noise_sd_at(t) * z;
            sample.logprobs[static_cast<std::size_t>(t)] = std::min(0.0, value);
        }
        set.samples.push_back(std::move(sample));
    }
    return set;
}

}  // namespace tokvar

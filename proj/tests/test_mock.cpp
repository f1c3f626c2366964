#include <doctest.h>

#include <cstring>

#include "tokvar/detector.hpp"
#include "tokvar/errors.hpp"
#include "tokvar/mock.hpp"

using namespace tokvar;

namespace {

bool same_bits(double a, double b) {
    std::uint64_t ba = 0;
    std::uint64_t bb = 0;
    std::memcpy(&ba, &a, sizeof a);
    std::memcpy(&bb, &b, sizeof b);
    return ba == bb;
}

MockModelSpec quiet_spec() {
    MockModelSpec spec = MockModelSpec::defaults();
    spec.stable_noise_sd = 0.0;
    spec.planted_regions.clear();
    return spec;
}

}  // namespace

TEST_CASE("emits num_samples samples of answer_length tokens") {
    DecodingConfig config;
    config.num_samples = 3;
    const GenerationSet set = mock_generate("p1", "prompt text", config, MockModelSpec::defaults());
    REQUIRE(set.samples.size() == 3);
    for (const auto& sample : set.samples) {
        CHECK(sample.tokens.size() == 30);
        CHECK(sample.logprobs.size() == 30);
        CHECK(sample.finish_reason == FinishReason::length);
        for (double lp : sample.logprobs) CHECK(lp <= 0.0);
    }
    CHECK(set.prompt_id == "p1");
    CHECK(set.model_id == "mock");
}

TEST_CASE("tokens are identical across samples at every position") {
    DecodingConfig config;
    config.num_samples = 5;
    const GenerationSet set = mock_generate("p1", "prompt", config, MockModelSpec::defaults());
    for (const auto& sample : set.samples) {
        CHECK(sample.tokens == set.samples.front().tokens);
    }
}

TEST_CASE("pure function of its seeds: reruns are bit-identical") {
    DecodingConfig config;
    config.seed = 99;
    const MockModelSpec spec = MockModelSpec::defaults();
    const GenerationSet a = mock_generate("p1", "same prompt", config, spec);
    const GenerationSet b = mock_generate("p1", "same prompt", config, spec);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].tokens == b.samples[i].tokens);
        for (std::size_t t = 0; t < a.samples[i].logprobs.size(); ++t) {
            CHECK(same_bits(a.samples[i].logprobs[t], b.samples[i].logprobs[t]));
        }
    }
    CHECK(a == b);
}

TEST_CASE("different prompts, seeds, and sample indices decorrelate the noise") {
    DecodingConfig config;
    config.seed = 1;
    const MockModelSpec spec = MockModelSpec::defaults();
    const GenerationSet base = mock_generate("p1", "prompt A", config, spec);
    CHECK(mock_generate("p1", "prompt B", config, spec) != base);
    DecodingConfig other_seed = config;
    other_seed.seed = 2;
    CHECK(mock_generate("p1", "prompt A", other_seed, spec) != base);
    CHECK(base.samples[0].logprobs != base.samples[1].logprobs);
}

TEST_CASE("zero noise means every logprob equals base and every variance is zero") {
    DecodingConfig config;
    config.num_samples = 4;
    const GenerationSet set = mock_generate("p1", "prompt", config, quiet_spec());
    for (const auto& sample : set.samples) {
        for (double lp : sample.logprobs) CHECK(lp == -6.0);
    }
    const ScoredGeneration scored = score_generation_set(set, DetectorConfig{});
    for (const auto& ts : scored.token_scores) {
        CHECK(*ts.variance == 0.0);
        CHECK_FALSE(ts.hallucinated);
    }
}

TEST_CASE("planted-region variance matches the closed-form noise variance") {
    // Population variance of n=50 N(0,1) draws lies in chi2_49/50 bands.
    // Constants frozen from tests/oracle/planted_signal_oracle.py:
    //   single position (99.998%): [0.351590, 2.062331]
    //   mean over 220 draws:       [0.917853, 1.044765]
    MockModelSpec spec = MockModelSpec::defaults();
    spec.stable_noise_sd = 0.0;
    spec.planted_regions = {{10, 20, 1.0}};
    DecodingConfig config;
    config.num_samples = 50;
    config.seed = 7;

    DetectorConfig detector;
    double in_region_sum = 0.0;
    int in_region_count = 0;
    for (int p = 0; p < 20; ++p) {
        const GenerationSet set =
            mock_generate("p" + std::to_string(p), "prompt " + std::to_string(p), config, spec);
        const ScoredGeneration scored = score_generation_set(set, detector);
        for (const auto& ts : scored.token_scores) {
            const double variance = *ts.variance;
            if (ts.position >= 10 && ts.position <= 20) {
                CHECK(variance >= 0.351590);
                CHECK(variance <= 2.062331);
                in_region_sum += variance;
                ++in_region_count;
            } else {
                CHECK(variance == 0.0);
            }
        }
    }
    REQUIRE(in_region_count == 220);
    const double mean_variance = in_region_sum / in_region_count;
    CHECK(mean_variance >= 0.917853);
    CHECK(mean_variance <= 1.044765);
}

TEST_CASE("stable noise below threshold leaves out-of-region positions unflagged") {
    // P(Var > 0.5) for n=3, sd=0.1 is ~2.7e-33 (oracle closed form): flags
    // outside the planted region should be literally absent.
    MockModelSpec spec = MockModelSpec::defaults();
    spec.stable_noise_sd = 0.1;
    DecodingConfig config;
    config.num_samples = 3;
    config.seed = 3;
    DetectorConfig detector;  // tau = 0.5
    int outside_flags = 0;
    for (int p = 0; p < 100; ++p) {
        const GenerationSet set =
            mock_generate("p" + std::to_string(p), "q " + std::to_string(p), config, spec);
        const ScoredGeneration scored = score_generation_set(set, detector);
        for (const auto& ts : scored.token_scores) {
            if (!spec.planted_regions.front().contains(ts.position) && ts.hallucinated) {
                ++outside_flags;
            }
        }
    }
    CHECK(outside_flags == 0);
}

TEST_CASE("spec validation rejects bad shapes") {
    MockModelSpec spec = MockModelSpec::defaults();
    spec.vocab.clear();
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    spec = MockModelSpec::defaults();
    spec.planted_regions = {{5, 40, 1.0}};  // end outside [0, answer_length)
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    spec = MockModelSpec::defaults();
    spec.planted_regions = {{5, 10, 1.0}, {8, 12, 1.5}};  // overlap
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    spec = MockModelSpec::defaults();
    spec.planted_regions = {{5, 10, 0.01}};  // not above stable sd
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    spec = MockModelSpec::defaults();
    spec.base_logprob = 0.5;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
}

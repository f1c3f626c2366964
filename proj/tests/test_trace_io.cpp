#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "tokvar/errors.hpp"
#include "tokvar/trace_io.hpp"

using namespace tokvar;

namespace {

bool same_bits(double a, double b) {
    std::uint64_t ba = 0;
    std::uint64_t bb = 0;
    std::memcpy(&ba, &a, sizeof a);
    std::memcpy(&bb, &b, sizeof b);
    return ba == bb;
}

GenerationSet small_set() {
    GenerationSet set;
    set.prompt_id = "q1";
    set.model_id = "mock";
    set.config.seed = 42;
    for (int i = 0; i < 3; ++i) {
        GenerationSample sample;
        sample.sample_index = i;
        sample.tokens = {"Marie", "Curie", "discovered"};
        sample.logprobs = {-0.5 - i, -1.25, -2.0 + 0.125 * i};
        sample.finish_reason = FinishReason::length;
        set.samples.push_back(std::move(sample));
    }
    return set;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

GenerationSet random_set(std::mt19937_64& rng, const std::string& id) {
    std::uniform_int_distribution<int> n_dist(1, 6);
    std::uniform_int_distribution<int> len_dist(0, 12);
    std::uniform_real_distribution<double> lp_dist(-20.0, 0.0);
    GenerationSet set;
    set.prompt_id = id;
    set.model_id = "m" + std::to_string(rng() % 3);
    set.config.num_samples = n_dist(rng);
    if (rng() % 2) set.config.seed = static_cast<std::int64_t>(rng());
    const int n = set.config.num_samples;
    for (int i = 0; i < n; ++i) {
        GenerationSample sample;
        sample.sample_index = i;
        const int len = len_dist(rng);
        for (int t = 0; t < len; ++t) {
            sample.tokens.push_back("tok" + std::to_string(rng() % 50));
            sample.logprobs.push_back(std::min(0.0, lp_dist(rng)));
        }
        sample.finish_reason = (rng() % 2) ? FinishReason::length : FinishReason::stop;
        set.samples.push_back(std::move(sample));
    }
    set.reference_index = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
    return set;
}

void check_identical(const GenerationSet& a, const GenerationSet& b) {
    REQUIRE(a.samples.size() == b.samples.size());
    CHECK(a.prompt_id == b.prompt_id);
    CHECK(a.model_id == b.model_id);
    CHECK(a.reference_index == b.reference_index);
    CHECK(a.config == b.config);
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].tokens == b.samples[i].tokens);
        CHECK(a.samples[i].finish_reason == b.samples[i].finish_reason);
        REQUIRE(a.samples[i].logprobs.size() == b.samples[i].logprobs.size());
        for (std::size_t t = 0; t < a.samples[i].logprobs.size(); ++t) {
            CHECK(same_bits(a.samples[i].logprobs[t], b.samples[i].logprobs[t]));
        }
    }
}

}  // namespace

TEST_CASE("trace round trip is the identity") {
    const auto path = temp_file("traces_roundtrip.jsonl");
    const std::vector<GenerationSet> sets = {small_set()};
    write_traces(sets, path);
    const auto loaded = read_traces(path);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0] == sets[0]);
}

TEST_CASE("an awkward logprob survives the round trip exactly") {
    GenerationSet set = small_set();
    set.samples[0].logprobs[0] = -1.0000000000000002;
    const GenerationSet loaded = parse_trace_line(trace_line(set), 1);
    CHECK(same_bits(loaded.samples[0].logprobs[0], -1.0000000000000002));
}

TEST_CASE("randomized sets round trip with bit-exact logprobs") {
    std::mt19937_64 rng(20240809);
    for (int trial = 0; trial < 300; ++trial) {
        const GenerationSet set = random_set(rng, "rt" + std::to_string(trial));
        const GenerationSet loaded = parse_trace_line(trace_line(set), 1);
        check_identical(set, loaded);
        CHECK(loaded == set);
    }
}

TEST_CASE("token/logprob length mismatch is rejected") {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(trace_line(small_set()));
    j["samples"][0]["logprobs"].erase(2);  // 3 tokens, 2 logprobs
    CHECK_THROWS_WITH_AS(parse_trace_line(j.dump(), 7), doctest::Contains("3 tokens"), InputError);
}

TEST_CASE("positive logprobs are rejected") {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(trace_line(small_set()));
    j["samples"][1]["logprobs"][0] = 0.25;
    CHECK_THROWS_AS(parse_trace_line(j.dump(), 1), InputError);
}

TEST_CASE("schema version mismatch names both versions") {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(trace_line(small_set()));
    j["schema_version"] = "99";
    CHECK_THROWS_WITH_AS(parse_trace_line(j.dump(), 3), doctest::Contains("\"99\""), InputError);
    CHECK_THROWS_WITH_AS(parse_trace_line(j.dump(), 3), doctest::Contains("line 3"), InputError);
}

TEST_CASE("scored lines carry the token/variance/hallucinated shape") {
    ScoredGeneration scored;
    scored.prompt_id = "q1";
    scored.model_id = "mock";
    scored.answer_text = "MarieCuriediscovered";
    scored.threshold = 0.5;
    scored.token_scores = {
        {0, "Marie", -2.0, 0.72, 3, true},
        {1, "Curie", -2.5, 0.75, 3, true},
        {2, "discovered", -1.0, 0.10, 3, false},
    };
    scored.hallucinated_count = 2;
    scored.scored_count = 3;

    const std::string line = scored_line(scored);
    const auto j = nlohmann::json::parse(line);
    REQUIRE(j["tokens"].size() == 3);
    CHECK(j["tokens"][0]["token"] == "Marie");
    CHECK(j["tokens"][0]["variance"] == 0.72);
    CHECK(j["tokens"][0]["hallucinated"] == true);
    CHECK(j["tokens"][2]["token"] == "discovered");
    CHECK(j["tokens"][2]["variance"] == 0.10);
    CHECK(j["tokens"][2]["hallucinated"] == false);
    // flag is re-checkable from the serialized fields alone
    for (const auto& t : j["tokens"]) {
        CHECK(t["hallucinated"].get<bool>() ==
              (t["variance"].get<double>() > j["threshold"].get<double>()));
    }
    CHECK(j["tokens"][0].contains("mean_logprob"));
    CHECK(j["tokens"][0].contains("position"));
    CHECK(j["tokens"][0].contains("support"));

    const ScoredGeneration loaded = parse_scored_line(line, 1);
    CHECK(loaded == scored);
}

TEST_CASE("empty token list serializes as a valid record") {
    ScoredGeneration scored;
    scored.prompt_id = "q-empty";
    scored.model_id = "mock";
    scored.threshold = 0.5;
    const ScoredGeneration loaded = parse_scored_line(scored_line(scored), 1);
    CHECK(loaded.scored_count == 0);
    CHECK(loaded.token_scores.empty());
}

TEST_CASE("unscored positions serialize variance as null") {
    ScoredGeneration scored;
    scored.prompt_id = "q1";
    scored.model_id = "mock";
    scored.threshold = 0.5;
    TokenScore ts;
    ts.position = 0;
    ts.token = "tail";
    ts.mean_logprob = -1.0;
    ts.support = 1;  // below min_support: no variance
    scored.token_scores.push_back(ts);
    const auto j = nlohmann::json::parse(scored_line(scored));
    CHECK(j["tokens"][0]["variance"].is_null());
    const ScoredGeneration loaded = parse_scored_line(scored_line(scored), 1);
    CHECK_FALSE(loaded.token_scores[0].variance.has_value());
    CHECK(loaded.token_scores[0].support == 1);
}

TEST_CASE("scan_trace_index tolerates only a torn final line") {
    const auto path = temp_file("traces_torn.jsonl");
    {
        std::ofstream out(path, std::ios::trunc);
        out << trace_line(small_set()) << '\n';
        out << R"({"schema_version":"1","prompt_id":"q2",)";  // interrupted append
    }
    const TraceIndex index = scan_trace_index(path);
    CHECK(index.complete_lines == 1);
    CHECK(index.torn_tail);
    CHECK(index.contains("q1", "mock"));
    CHECK_FALSE(index.contains("q2", "mock"));

    // garbage in the middle is a real error
    {
        std::ofstream out(path, std::ios::trunc);
        out << "{garbage\n" << trace_line(small_set()) << '\n';
    }
    CHECK_THROWS_AS(scan_trace_index(path), InputError);
}

TEST_CASE("scan_trace_index of a missing file is empty") {
    const TraceIndex index = scan_trace_index("/nonexistent/traces.jsonl");
    CHECK(index.complete_lines == 0);
    CHECK(index.keys.empty());
}

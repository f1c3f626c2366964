#include <doctest.h>

#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "tokvar/backend.hpp"
#include "tokvar/errors.hpp"
#include "tokvar/rng.hpp"

using namespace tokvar;
using json = nlohmann::json;

namespace {

// In-process completion endpoint whose behavior is a plain handler function.
class TestServer {
  public:
    using Handler = std::function<void(const json& request, httplib::Response& response, int hit)>;

    explicit TestServer(Handler handler) : handler_(std::move(handler)) {
        server_.Post("/v1/completions",
                     [this](const httplib::Request& req, httplib::Response& res) {
                         json body = json::parse(req.body);
                         {
                             std::lock_guard<std::mutex> lock(mutex_);
                             requests_.push_back(body);
                             auto auth = req.get_header_value("Authorization");
                             if (!auth.empty()) auth_headers_.insert(auth);
                         }
                         handler_(body, res, ++hits_);
                     });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~TestServer() {
        server_.stop();
        thread_.join();
    }

    BackendConfig config() const {
        BackendConfig cfg;
        cfg.base_url = "http://127.0.0.1:" + std::to_string(port_);
        cfg.model_id = "test-model";
        cfg.max_retries = 3;
        cfg.retry_backoff = std::chrono::milliseconds(1);
        cfg.request_timeout = std::chrono::milliseconds(5000);
        return cfg;
    }

    std::vector<json> requests() {
        std::lock_guard<std::mutex> lock(mutex_);
        return requests_;
    }

    std::set<std::string> auth_headers() {
        std::lock_guard<std::mutex> lock(mutex_);
        return auth_headers_;
    }

  private:
    httplib::Server server_;
    Handler handler_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> hits_{0};
    std::mutex mutex_;
    std::vector<json> requests_;
    std::set<std::string> auth_headers_;
};

void respond_with(httplib::Response& res, const std::vector<std::string>& tokens,
                  const std::vector<double>& logprobs, const std::string& finish = "length") {
    json j;
    std::string text;
    for (const auto& t : tokens) text += t;
    j["choices"] = json::array({{{"text", text},
                                 {"finish_reason", finish},
                                 {"logprobs", {{"tokens", tokens}, {"token_logprobs", logprobs}}}}});
    res.set_content(j.dump(), "application/json");
}

DecodingConfig decoding(int n, std::optional<std::int64_t> seed = std::nullopt) {
    DecodingConfig cfg;
    cfg.num_samples = n;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("happy path returns n samples with per-token logprobs") {
    TestServer server([](const json&, httplib::Response& res, int) {
        respond_with(res, {"Paris", " is", " large"}, {-0.25, -1.5, -3.0});
    });
    const GenerationSet set =
        sample_generations("p1", "Q: capital?\nA:", decoding(3), server.config());
    REQUIRE(set.samples.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(set.samples[i].sample_index == i);
        CHECK(set.samples[i].tokens == std::vector<std::string>{"Paris", " is", " large"});
        CHECK(set.samples[i].logprobs == std::vector<double>{-0.25, -1.5, -3.0});
        CHECK(set.samples[i].finish_reason == FinishReason::length);
    }
    CHECK(set.model_id == "test-model");
    CHECK(set.prompt_id == "p1");

    const auto requests = server.requests();
    REQUIRE(requests.size() == 3);
    for (const auto& r : requests) {
        CHECK(r["n"] == 1);
        CHECK(r["logprobs"] == true);
        CHECK(r["prompt"] == "Q: capital?\nA:");
        CHECK(r["top_k"] == 50);
    }
}

TEST_CASE("a backend without logprobs raises a capability error") {
    TestServer server([](const json&, httplib::Response& res, int) {
        json j;
        j["choices"] = json::array({{{"text", "Paris"}, {"finish_reason", "stop"}}});
        res.set_content(j.dump(), "application/json");
    });
    CHECK_THROWS_AS(sample_generations("p1", "q", decoding(2), server.config()), CapabilityError);
}

TEST_CASE("null logprob entries raise a capability error") {
    TestServer server([](const json&, httplib::Response& res, int) {
        json j;
        j["choices"] = json::array(
            {{{"text", "x"},
              {"finish_reason", "stop"},
              {"logprobs", {{"tokens", {"x"}}, {"token_logprobs", {nullptr}}}}}});
        res.set_content(j.dump(), "application/json");
    });
    CHECK_THROWS_AS(sample_generations("p1", "q", decoding(2), server.config()), CapabilityError);
}

TEST_CASE("transient 5xx and 429 are retried without duplicating samples") {
    std::atomic<int> failures{0};
    TestServer server([&failures](const json&, httplib::Response& res, int hit) {
        if (hit <= 2) {
            ++failures;
            res.status = (hit == 1) ? 500 : 429;
            res.set_content("busy", "text/plain");
            return;
        }
        respond_with(res, {"ok"}, {-0.5});
    });
    const GenerationSet set = sample_generations("p1", "q", decoding(3), server.config());
    CHECK(failures.load() == 2);
    REQUIRE(set.samples.size() == 3);
    std::set<int> indices;
    for (const auto& sample : set.samples) indices.insert(sample.sample_index);
    CHECK(indices == std::set<int>{0, 1, 2});
}

TEST_CASE("exhausted retries report how many samples succeeded") {
    DecodingConfig cfg = decoding(3, 11);
    const std::int64_t poisoned = static_cast<std::int64_t>(
        mix_seed({static_cast<std::uint64_t>(11), static_cast<std::uint64_t>(1)}));
    TestServer server([poisoned](const json& request, httplib::Response& res, int) {
        if (request.contains("seed") && request["seed"].get<std::int64_t>() == poisoned) {
            res.status = 503;
            res.set_content("down", "text/plain");
            return;
        }
        respond_with(res, {"ok"}, {-0.5});
    });
    CHECK_THROWS_WITH_AS(sample_generations("p1", "q", cfg, server.config()),
                         doctest::Contains("2 of 3"), BackendError);
}

TEST_CASE("a hard 4xx fails fast without retries") {
    std::atomic<int> hits{0};
    TestServer server([&hits](const json&, httplib::Response& res, int) {
        ++hits;
        res.status = 404;
        res.set_content("no such model", "text/plain");
    });
    CHECK_THROWS_AS(sample_generations("p1", "q", decoding(1), server.config()), BackendError);
    CHECK(hits.load() == 1);
}

TEST_CASE("bearer token from the config reaches the wire") {
    TestServer server([](const json&, httplib::Response& res, int) {
        respond_with(res, {"ok"}, {-1.0});
    });
    BackendConfig cfg = server.config();
    cfg.api_key = "sk-test-123";
    sample_generations("p1", "q", decoding(1), cfg);
    CHECK(server.auth_headers() == std::set<std::string>{"Bearer sk-test-123"});
}

TEST_CASE("in-flight requests never exceed max_concurrency") {
    std::atomic<int> in_flight{0};
    std::atomic<int> peak{0};
    TestServer server([&](const json&, httplib::Response& res, int) {
        const int now = ++in_flight;
        int expected = peak.load();
        while (now > expected && !peak.compare_exchange_weak(expected, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(25));
        --in_flight;
        respond_with(res, {"ok"}, {-0.5});
    });
    BackendConfig cfg = server.config();
    cfg.max_concurrency = 2;
    const GenerationSet set = sample_generations("p1", "q", decoding(8), cfg);
    CHECK(set.samples.size() == 8);
    CHECK(peak.load() <= 2);
    CHECK(peak.load() >= 1);
}

TEST_CASE("distinct sub-seeds are sent when a run seed is set") {
    TestServer server([](const json&, httplib::Response& res, int) {
        respond_with(res, {"ok"}, {-0.5});
    });
    sample_generations("p1", "q", decoding(4, 42), server.config());
    std::set<std::int64_t> seeds;
    for (const auto& r : server.requests()) {
        REQUIRE(r.contains("seed"));
        seeds.insert(r["seed"].get<std::int64_t>());
    }
    CHECK(seeds.size() == 4);

    // without a run seed, no seed field goes out
    TestServer unseeded([](const json&, httplib::Response& res, int) {
        respond_with(res, {"ok"}, {-0.5});
    });
    sample_generations("p1", "q", decoding(2), unseeded.config());
    for (const auto& r : unseeded.requests()) CHECK_FALSE(r.contains("seed"));
}

TEST_CASE("a backend that rejects top_k gets it dropped with a warning") {
    TestServer server([](const json& request, httplib::Response& res, int) {
        if (request.contains("top_k")) {
            res.status = 400;
            res.set_content(R"({"error":"unknown parameter: top_k"})", "application/json");
            return;
        }
        respond_with(res, {"ok"}, {-0.5});
    });
    std::vector<std::string> warnings;
    HttpBackend backend(server.config(), [&warnings](const std::string& w) {
        warnings.push_back(w);
    });
    const GenerationSet set = backend.generate("p1", "q", decoding(3));
    CHECK(set.samples.size() == 3);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("top_k") != std::string::npos);
    // after the switch every request goes out without top_k
    int with_top_k = 0;
    for (const auto& r : server.requests()) {
        if (r.contains("top_k")) ++with_top_k;
    }
    CHECK(with_top_k >= 1);
    CHECK(with_top_k < static_cast<int>(server.requests().size()));
}

TEST_CASE("finish reasons map onto the enum") {
    TestServer server([](const json&, httplib::Response& res, int hit) {
        respond_with(res, {"ok"}, {-0.5}, hit == 1 ? "stop" : "content_filter");
    });
    const GenerationSet set = sample_generations("p1", "q", decoding(2), server.config());
    std::set<FinishReason> reasons;
    for (const auto& sample : set.samples) reasons.insert(sample.finish_reason);
    CHECK(reasons == std::set<FinishReason>{FinishReason::stop, FinishReason::other});
}

TEST_CASE("an unreachable backend surfaces a transport error") {
    BackendConfig cfg;
    cfg.base_url = "http://127.0.0.1:9";  // discard port, nothing listens
    cfg.model_id = "m";
    cfg.max_retries = 0;
    cfg.request_timeout = std::chrono::milliseconds(500);
    CHECK_THROWS_AS(sample_generations("p1", "q", decoding(1), cfg), BackendError);
}

TEST_CASE("backend config validation") {
    BackendConfig cfg;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // empty url
    cfg.base_url = "http://x";
    cfg.max_concurrency = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

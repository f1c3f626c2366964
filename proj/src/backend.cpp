#include "tokvar/backend.hpp"

#include <atomic>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "tokvar/errors.hpp"
#include "tokvar/rng.hpp"

namespace tokvar {

using json = nlohmann::json;

void BackendConfig::validate() const {
    if (base_url.empty()) {
        throw ConfigError("backend base_url must not be empty");
    }
    if (max_concurrency < 1) {
        throw ConfigError("max_concurrency must be >= 1, got " + std::to_string(max_concurrency));
    }
    if (max_retries < 0) {
        throw ConfigError("max_retries must be >= 0, got " + std::to_string(max_retries));
    }
}

namespace {

constexpr const char* kCompletionsPath = "/v1/completions";

struct SlotOutcome {
    GenerationSample sample;
    bool ok = false;
    bool capability_failure = false;
    std::string error;
};

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

GenerationSample parse_completion_response(const std::string& body, int sample_index) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw BackendError(std::string("unparseable completion response: ") + e.what());
    }
    if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
        throw BackendError("completion response carries no choices");
    }
    const json& choice = j["choices"][0];
    if (!choice.contains("logprobs") || choice["logprobs"].is_null()) {
        throw CapabilityError(
            "backend returned no log probabilities; token-level scoring is impossible "
            "(request the completion endpoint with logprobs enabled)");
    }
    const json& logprobs = choice["logprobs"];
    if (!logprobs.contains("tokens") || !logprobs.contains("token_logprobs") ||
        logprobs["tokens"].is_null() || logprobs["token_logprobs"].is_null()) {
        throw CapabilityError("backend logprobs lack tokens/token_logprobs arrays");
    }

    GenerationSample sample;
    sample.sample_index = sample_index;
    sample.tokens = logprobs["tokens"].get<std::vector<std::string>>();
    sample.logprobs.reserve(logprobs["token_logprobs"].size());
    for (const auto& lp : logprobs["token_logprobs"]) {
        if (lp.is_null()) {
            throw CapabilityError("backend reported a null token logprob");
        }
        double value = lp.get<double>();
        if (value > 0.0) {
            if (value > 1e-9) {
                throw BackendError("backend reported a positive logprob " + std::to_string(value));
            }
            value = 0.0;  // rounding fuzz from the backend
        }
        sample.logprobs.push_back(value);
    }
    if (sample.tokens.size() != sample.logprobs.size()) {
        throw BackendError("backend returned " + std::to_string(sample.tokens.size()) +
                           " tokens but " + std::to_string(sample.logprobs.size()) + " logprobs");
    }
    sample.finish_reason = finish_reason_from_string(choice.value("finish_reason", "other"));
    return sample;
}

}  // namespace

struct HttpBackend::Impl {
    BackendConfig config;
    WarningSink warn;
    std::atomic<bool> drop_top_k{false};
    std::once_flag top_k_warned;

    void warn_once_top_k() {
        std::call_once(top_k_warned, [this] {
            const std::string message =
                "backend rejected top_k; continuing with top_k omitted for this run";
            if (warn) {
                warn(message);
            } else {
                std::cerr << "warning: " << message << '\n';
            }
        });
    }

    json build_request(const std::string& prompt, const DecodingConfig& decoding,
                       int sample_index) const {
        json body;
        body["model"] = config.model_id;
        body["prompt"] = prompt;
        body["max_tokens"] = decoding.max_new_tokens;
        body["temperature"] = decoding.temperature;
        body["top_p"] = decoding.top_p;
        if (decoding.top_k > 0 && !drop_top_k.load()) {
            body["top_k"] = decoding.top_k;
        }
        body["n"] = 1;
        body["logprobs"] = true;
        if (decoding.seed) {
            // distinct sub-seed per sample so retries and reordering cannot
            // hand two slots the same stream
            body["seed"] = static_cast<std::int64_t>(
                mix_seed({static_cast<std::uint64_t>(*decoding.seed),
                          static_cast<std::uint64_t>(sample_index)}));
        }
        return body;
    }

    httplib::Headers headers() const {
        httplib::Headers h;
        if (config.api_key && !config.api_key->empty()) {
            h.emplace("Authorization", "Bearer " + *config.api_key);
        }
        return h;
    }

    // One slot: POST with retries on transport errors and 429/5xx. A 400 that
    // names top_k flips the client-wide drop flag and retries without it.
    GenerationSample fetch_sample(const std::string& prompt, const DecodingConfig& decoding,
                                  int sample_index) {
        httplib::Client client(config.base_url);
        const auto timeout = config.request_timeout;
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);

        int attempt = 0;
        std::string last_error;
        while (attempt <= config.max_retries) {
            const json body = build_request(prompt, decoding, sample_index);
            auto res = client.Post(kCompletionsPath, headers(), body.dump(), "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
            } else if (res->status == 200) {
                return parse_completion_response(res->body, sample_index);
            } else if (res->status == 400 && body.contains("top_k") &&
                       res->body.find("top_k") != std::string::npos) {
                drop_top_k.store(true);
                warn_once_top_k();
                continue;  // config adjustment, not a retry
            } else if (retryable_status(res->status)) {
                last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
            } else {
                throw BackendError("HTTP " + std::to_string(res->status) + " from backend: " +
                                   res->body);
            }
            ++attempt;
            if (attempt <= config.max_retries) {
                std::this_thread::sleep_for(config.retry_backoff * attempt);
            }
        }
        throw BackendError("request failed after " + std::to_string(config.max_retries + 1) +
                           " attempts: " + last_error);
    }
};

HttpBackend::HttpBackend(BackendConfig config, WarningSink warn)
    : impl_(std::make_unique<Impl>()) {
    config.validate();
    impl_->config = std::move(config);
    impl_->warn = std::move(warn);
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::model_id() const { return impl_->config.model_id; }

GenerationSet HttpBackend::generate(const std::string& prompt_id, const std::string& prompt,
                                    const DecodingConfig& config) {
    config.validate();
    const int n = config.num_samples;

    std::vector<SlotOutcome> outcomes(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    const int workers = std::min(impl_->config.max_concurrency, n);

    auto work = [&] {
        for (int slot = next.fetch_add(1); slot < n; slot = next.fetch_add(1)) {
            auto& outcome = outcomes[static_cast<std::size_t>(slot)];
            try {
                outcome.sample = impl_->fetch_sample(prompt, config, slot);
                outcome.ok = true;
            } catch (const CapabilityError& e) {
                outcome.capability_failure = true;
                outcome.error = e.what();
            } catch (const Error& e) {
                outcome.error = e.what();
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();

    int succeeded = 0;
    for (const auto& outcome : outcomes) succeeded += outcome.ok ? 1 : 0;
    if (succeeded != n) {
        for (const auto& outcome : outcomes) {
            if (outcome.capability_failure) throw CapabilityError(outcome.error);
        }
        std::string first_error;
        for (const auto& outcome : outcomes) {
            if (!outcome.ok) {
                first_error = outcome.error;
                break;
            }
        }
        throw BackendError("collected " + std::to_string(succeeded) + " of " + std::to_string(n) +
                           " samples for prompt \"" + prompt_id + "\": " + first_error);
    }

    GenerationSet set;
    set.prompt_id = prompt_id;
    set.model_id = impl_->config.model_id;
    set.config = config;
    set.samples.reserve(static_cast<std::size_t>(n));
    for (auto& outcome : outcomes) set.samples.push_back(std::move(outcome.sample));
    set.reference_index = 0;
    set.validate();
    return set;
}

GenerationSet sample_generations(const std::string& prompt_id, const std::string& prompt,
                                 const DecodingConfig& config, const BackendConfig& backend) {
    HttpBackend client(backend);
    return client.generate(prompt_id, prompt, config);
}

}  // namespace tokvar

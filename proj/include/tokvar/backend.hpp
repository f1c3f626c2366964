#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "tokvar/mock.hpp"
#include "tokvar/types.hpp"

namespace tokvar {

// Environment variable holding the bearer token for non-mock backends.
inline constexpr const char* kApiKeyEnvVar = "TOKVAR_API_KEY";

struct BackendConfig {
    std::string base_url;  // scheme://host[:port]
    std::optional<std::string> api_key;
    std::string model_id;
    std::chrono::milliseconds request_timeout{30000};
    int max_retries = 3;       // transport errors and HTTP 429/5xx only
    int max_concurrency = 2;   // simultaneous in-flight requests per prompt
    std::chrono::milliseconds retry_backoff{250};

    void validate() const;  // throws ConfigError
};

/// Anything that can produce the n samples for one prompt.
class SampleSource {
  public:
    virtual ~SampleSource() = default;

    virtual GenerationSet generate(const std::string& prompt_id,
                                   const std::string& prompt,
                                   const DecodingConfig& config) = 0;
    virtual std::string model_id() const = 0;
};

/// HTTP completion client. One POST to {base_url}/v1/completions per sample
/// (n=1 each) with a flag requesting per-token log probabilities; the fan-out
/// never exceeds max_concurrency in-flight requests and samples are
/// reassembled in index order. Requests carry distinct sub-seeds derived from
/// config.seed when it is set.
///
/// Expected response shape per choice:
///   {"text": ..., "finish_reason": "length"|"stop"|...,
///    "logprobs": {"tokens": [...], "token_logprobs": [...]}}
/// A response without usable logprobs raises CapabilityError. Backends that
/// reject top_k get it dropped for the rest of the client's lifetime, with a
/// warning through the warning sink.
class HttpBackend : public SampleSource {
  public:
    using WarningSink = std::function<void(const std::string&)>;

    explicit HttpBackend(BackendConfig config, WarningSink warn = {});
    ~HttpBackend() override;

    GenerationSet generate(const std::string& prompt_id,
                           const std::string& prompt,
                           const DecodingConfig& config) override;
    std::string model_id() const override;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Mock-backed source for offline runs and tests.
class MockBackend : public SampleSource {
  public:
    MockBackend(MockModelSpec spec, std::string model_id = "mock")
        : spec_(std::move(spec)), model_id_(std::move(model_id)) {
        spec_.validate();
    }

    GenerationSet generate(const std::string& prompt_id,
                           const std::string& prompt,
                           const DecodingConfig& config) override {
        return mock_generate(prompt_id, prompt, config, spec_, model_id_);
    }
    std::string model_id() const override { return model_id_; }

    const MockModelSpec& spec() const { return spec_; }

  private:
    MockModelSpec spec_;
    std::string model_id_;
};

/// Collects config.num_samples completions for one prompt over HTTP.
GenerationSet sample_generations(const std::string& prompt_id,
                                 const std::string& prompt,
                                 const DecodingConfig& config,
                                 const BackendConfig& backend);

}  // namespace tokvar

#include "tokvar/manifest.hpp"

#include <ctime>

#include <json.hpp>

#include "tokvar/errors.hpp"
#include "tokvar/ioutil.hpp"
#include "tokvar/rng.hpp"

namespace tokvar {

using ordered_json = nlohmann::ordered_json;

std::string hex_digest(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string hex(16, '0');
    for (int i = 15; i >= 0; --i) {
        hex[static_cast<std::size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return hex;
}

std::uint64_t digest_file(const std::filesystem::path& path) {
    return fnv1a64(read_file(path));
}

std::string iso8601_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buffer;
}

namespace {

ordered_json decoding_to_json(const DecodingConfig& config) {
    ordered_json j;
    j["temperature"] = config.temperature;
    j["top_p"] = config.top_p;
    j["top_k"] = config.top_k;
    j["max_new_tokens"] = config.max_new_tokens;
    j["num_samples"] = config.num_samples;
    j["seed"] = config.seed ? ordered_json(*config.seed) : ordered_json(nullptr);
    return j;
}

ordered_json detector_to_json(const DetectorConfig& config) {
    ordered_json j;
    j["threshold"] = config.threshold;
    j["denominator"] = to_string(config.denominator);
    j["min_support"] = config.min_support;
    return j;
}

}  // namespace

void write_manifest(const std::filesystem::path& out_dir, const RunManifest& manifest) {
    ordered_json j;
    j["toolkit_version"] = manifest.toolkit_version;
    j["command"] = manifest.command;
    j["command_line"] = manifest.command_line;
    j["started_at"] = manifest.started_at;
    j["finished_at"] = manifest.finished_at;
    j["decoding"] = manifest.decoding ? decoding_to_json(*manifest.decoding) : ordered_json(nullptr);
    j["detector"] = manifest.detector ? detector_to_json(*manifest.detector) : ordered_json(nullptr);
    ordered_json backend;
    if (manifest.backend_url_hash || manifest.backend_model_id) {
        backend["url_fnv1a64"] =
            manifest.backend_url_hash ? ordered_json(*manifest.backend_url_hash) : ordered_json(nullptr);
        backend["model_id"] =
            manifest.backend_model_id ? ordered_json(*manifest.backend_model_id) : ordered_json(nullptr);
    } else {
        backend = nullptr;
    }
    j["backend"] = std::move(backend);
    j["run_seed"] = manifest.run_seed ? ordered_json(*manifest.run_seed) : ordered_json(nullptr);
    j["inputs"] = ordered_json::array();
    for (const auto& input : manifest.inputs) {
        ordered_json entry;
        entry["path"] = input.path;
        entry["fnv1a64"] = input.digest;
        j["inputs"].push_back(std::move(entry));
    }
    j["outputs"] = manifest.outputs;
    write_file_atomic(out_dir / kManifestFilename, j.dump(2) + "\n");
}

}  // namespace tokvar

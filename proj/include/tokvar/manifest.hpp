#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tokvar/detector.hpp"
#include "tokvar/types.hpp"

namespace tokvar {

inline constexpr const char* kManifestFilename = "manifest.json";

/// Everything needed to re-run a command: resolved configuration, input
/// digests, and the invocation itself. Digests are FNV-1a 64 over file bytes,
/// rendered as 16 hex digits. Timestamps live only here, never in data files,
/// so trace/scored/report outputs stay byte-reproducible.
struct RunManifest {
    std::string toolkit_version;
    std::string command;       // subcommand name
    std::string command_line;  // full invocation
    std::string started_at;    // ISO 8601 UTC
    std::string finished_at;

    std::optional<DecodingConfig> decoding;
    std::optional<DetectorConfig> detector;

    // backend identity: url hash (never the url itself) + model id
    std::optional<std::string> backend_url_hash;
    std::optional<std::string> backend_model_id;

    std::optional<std::int64_t> run_seed;

    struct InputDigest {
        std::string path;    // as given on the command line
        std::string digest;  // fnv1a64 hex
    };
    std::vector<InputDigest> inputs;
    std::vector<std::string> outputs;  // filenames written into out_dir
};

std::string hex_digest(std::uint64_t value);
std::uint64_t digest_file(const std::filesystem::path& path);  // throws InputError
std::string iso8601_utc_now();

/// Serializes the manifest into out_dir/manifest.json (atomic write; an
/// output directory holds exactly one, last command wins).
void write_manifest(const std::filesystem::path& out_dir, const RunManifest& manifest);

}  // namespace tokvar

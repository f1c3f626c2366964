#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "tokvar/backend.hpp"
#include "tokvar/prompt.hpp"
#include "tokvar/types.hpp"

namespace tokvar {

struct SidecarEntry {
    std::string prompt_id;
    std::string stage;  // "sample"
    std::string message;
};

struct SamplingReport {
    std::size_t written = 0;
    std::size_t skipped = 0;  // already present in the trace file
    std::vector<SidecarEntry> failures;
};

// traces.jsonl -> traces.errors.jsonl, next to the trace file
std::filesystem::path sidecar_path_for(const std::filesystem::path& trace_path);

std::vector<SidecarEntry> read_sidecar(const std::filesystem::path& path);

/// Samples every prompt through `source`, appending one GenerationSet line
/// per prompt to out_path. Resumable: prompts whose (id, model) already
/// appear in out_path are skipped. A failing prompt is recorded in the error
/// sidecar and the batch continues. When config.seed is set, prompt i runs
/// with sub-seed mix(seed, i) so appending prompts never shifts the
/// randomness of earlier ones.
SamplingReport run_sampling(const std::vector<PromptRecord>& prompts,
                            const DecodingConfig& config,
                            SampleSource& source,
                            const std::filesystem::path& out_path,
                            std::size_t context_limit = kDefaultContextLimit);

}  // namespace tokvar

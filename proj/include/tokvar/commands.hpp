#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tokvar/analytics.hpp"
#include "tokvar/corpus.hpp"
#include "tokvar/detector.hpp"
#include "tokvar/types.hpp"

namespace tokvar {

// Subcommand implementations. The CLI front end only parses flags; these are
// callable directly (the end-to-end tests drive them in-process). Fatal
// problems surface as tokvar::Error; the caller maps kinds to exit codes.

struct SampleOptions {
    std::filesystem::path corpus;
    CorpusAdapter adapter = CorpusAdapter::jsonl;

    bool mock = false;
    std::optional<std::filesystem::path> mock_spec;

    std::string backend_url;  // required when not mock
    std::string model_id;     // defaults to "mock" under --mock

    DecodingConfig decoding;
    std::size_t context_limit = 300;

    std::filesystem::path out_dir;
    std::string command_line;
};

struct ScoreOptions {
    std::filesystem::path trace_file;
    DetectorConfig detector;
    std::filesystem::path out_dir;
    std::string command_line;
};

struct AnalyzeOptions {
    std::vector<std::filesystem::path> scored_files;
    int bins = kDefaultBins;
    int max_position = 40;
    std::optional<std::string> heatmap_prompt;
    std::filesystem::path out_dir;
    std::string command_line;
};

struct CompareOptions {
    std::filesystem::path scored_a;
    std::filesystem::path scored_b;
    int bins = kDefaultBins;
    int max_position = 40;
    std::filesystem::path out_dir;
    std::string command_line;
};

struct AblateOptions {
    std::filesystem::path trace_file;
    AblationAxis axis = AblationAxis::threshold;
    std::vector<double> values;
    DetectorConfig detector;
    std::filesystem::path out_dir;
    std::string command_line;
};

// Each returns 0 on success and throws tokvar::Error otherwise.
int cmd_sample(const SampleOptions& opts);
int cmd_score(const ScoreOptions& opts);
int cmd_analyze(const AnalyzeOptions& opts);
int cmd_compare(const CompareOptions& opts);
int cmd_ablate(const AblateOptions& opts);

}  // namespace tokvar

#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tokvar/types.hpp"

namespace tokvar {

inline constexpr const char* kTraceSchemaVersion = "1";
inline constexpr const char* kScoredSchemaVersion = "1";

// One JSON line per GenerationSet / ScoredGeneration. Log probabilities are
// serialized with enough decimal digits that reading them back reproduces the
// original doubles bit for bit.

std::string trace_line(const GenerationSet& set);
GenerationSet parse_trace_line(const std::string& line, std::size_t line_no);

std::string scored_line(const ScoredGeneration& scored);
ScoredGeneration parse_scored_line(const std::string& line, std::size_t line_no);

void write_traces(const std::vector<GenerationSet>& sets,
                  const std::filesystem::path& path);
std::vector<GenerationSet> read_traces(const std::filesystem::path& path);

void write_scored(const std::vector<ScoredGeneration>& scored,
                  const std::filesystem::path& path);
std::vector<ScoredGeneration> read_scored(const std::filesystem::path& path);

/// Resume index over an existing trace file: which (prompt_id, model_id)
/// pairs are already present. Unlike read_traces, a torn final line (crash
/// mid-append) is tolerated and reported instead of raising.
struct TraceIndex {
    std::set<std::pair<std::string, std::string>> keys;
    std::size_t complete_lines = 0;
    bool torn_tail = false;

    bool contains(const std::string& prompt_id, const std::string& model_id) const {
        return keys.count({prompt_id, model_id}) > 0;
    }
};

TraceIndex scan_trace_index(const std::filesystem::path& path);

/// Append-mode trace writer. Each set is written as one line and flushed, so
/// an interrupted run leaves a valid prefix that a rerun resumes from.
class TraceWriter {
  public:
    explicit TraceWriter(const std::filesystem::path& path);

    void append(const GenerationSet& set);
    std::size_t written() const { return written_; }

  private:
    std::ofstream out_;
    std::size_t written_ = 0;
};

}  // namespace tokvar

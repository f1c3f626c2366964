#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tokvar/types.hpp"

namespace tokvar {

/// Which source layout read_prompts should expect.
///   jsonl    — one PromptRecord object per line (the toolkit's own format)
///   squad_v2 — SQuAD v2 JSON tree (data/paragraphs/qas)
///   triviaqa — TriviaQA JSON ({"Data": [...]}), used context-free
///   xsum     — line-delimited {"id", "document", "summary"} objects
enum class CorpusAdapter { jsonl, squad_v2, triviaqa, xsum };

CorpusAdapter adapter_from_string(const std::string& name);
std::string to_string(CorpusAdapter adapter);

// Instruction line used as the question for summarization items.
inline constexpr const char* kXsumInstruction =
    "Summarize the article in one sentence.";

// Reads and validates a prompt corpus. Errors name the offending line number
// (line-delimited layouts) or record, and duplicate ids name the id.
std::vector<PromptRecord> read_prompts(const std::filesystem::path& path,
                                       CorpusAdapter adapter = CorpusAdapter::jsonl);

}  // namespace tokvar

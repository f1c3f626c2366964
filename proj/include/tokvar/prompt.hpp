#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "tokvar/types.hpp"

namespace tokvar {

inline constexpr std::size_t kDefaultContextLimit = 300;

// Number of Unicode scalar values in a UTF-8 string (continuation bytes are
// not counted; each malformed byte counts as one).
std::size_t count_chars(std::string_view text);

// First `limit` characters of `text`. Counts Unicode scalar values, not
// bytes, so multi-byte sequences are never split.
std::string truncate_chars(std::string_view text, std::size_t limit);

// truncate(context, context_limit) + "\n\nQ: " + question + "\nA:"
// An empty context yields a prompt with an empty context block.
std::string build_prompt(const PromptRecord& record,
                         std::size_t context_limit = kDefaultContextLimit);

}  // namespace tokvar

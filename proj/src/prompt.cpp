#include "tokvar/prompt.hpp"

namespace tokvar {

namespace {

bool is_continuation_byte(unsigned char b) {
    return (b & 0xC0) == 0x80;
}

}  // namespace

std::size_t count_chars(std::string_view text) {
    std::size_t n = 0;
    for (unsigned char b : text) {
        if (!is_continuation_byte(b)) ++n;
    }
    return n;
}

std::string truncate_chars(std::string_view text, std::size_t limit) {
    std::size_t chars = 0;
    std::size_t cut = text.size();
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (is_continuation_byte(static_cast<unsigned char>(text[i]))) continue;
        if (chars == limit) {
            cut = i;
            break;
        }
        ++chars;
    }
    return std::string(text.substr(0, cut));
}

std::string build_prompt(const PromptRecord& record, std::size_t context_limit) {
    std::string prompt = truncate_chars(record.context, context_limit);
    prompt += "\n\nQ: ";
    prompt += record.question;
    prompt += "\nA:";
    return prompt;
}

}  // namespace tokvar

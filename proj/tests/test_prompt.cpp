#include <doctest.h>

#include <random>
#include <string>

#include "tokvar/prompt.hpp"

using namespace tokvar;

namespace {

PromptRecord record_with(std::string context, std::string question) {
    PromptRecord record;
    record.id = "p";
    record.context = std::move(context);
    record.question = std::move(question);
    return record;
}

std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
    std::size_t count = 0;
    for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
         pos = haystack.find(needle, pos + 1)) {
        ++count;
    }
    return count;
}

}  // namespace

TEST_CASE("template matches the fixed QA layout byte for byte") {
    CHECK(build_prompt(record_with("ctx", "Who?")) == "ctx\n\nQ: Who?\nA:");
}

TEST_CASE("long context keeps exactly the first 300 characters") {
    const std::string context(500, 'C');
    const std::string prompt = build_prompt(record_with(context, "Who?"));
    CHECK(prompt == std::string(300, 'C') + "\n\nQ: Who?\nA:");
}

TEST_CASE("empty context yields an empty context block") {
    CHECK(build_prompt(record_with("", "Who?")) == "\n\nQ: Who?\nA:");
}

TEST_CASE("custom limit truncates mid-context") {
    CHECK(build_prompt(record_with("abc", "q"), 2) == "ab\n\nQ: q\nA:");
}

TEST_CASE("limit zero drops the whole context") {
    CHECK(build_prompt(record_with("abc", "q"), 0) == "\n\nQ: q\nA:");
}

TEST_CASE("truncation counts characters, not bytes") {
    // U+00E9 is two bytes in UTF-8; 300 of them exceed 300 bytes
    std::string context;
    for (int i = 0; i < 400; ++i) context += "\xC3\xA9";
    const std::string prompt = build_prompt(record_with(context, "q"));
    std::string expected;
    for (int i = 0; i < 300; ++i) expected += "\xC3\xA9";
    CHECK(prompt == expected + "\n\nQ: q\nA:");
}

TEST_CASE("truncation never splits a multi-byte character") {
    // 299 ASCII chars then a 4-byte scalar: the cut at 300 keeps it whole
    std::string context(299, 'a');
    context += "\xF0\x9F\x99\x82";  // 4-byte sequence
    context += "tail";
    const std::string truncated = truncate_chars(context, 300);
    CHECK(truncated == std::string(299, 'a') + "\xF0\x9F\x99\x82");
    CHECK(count_chars(truncated) == 300);
}

TEST_CASE("count_chars treats continuation bytes as part of one character") {
    CHECK(count_chars("") == 0);
    CHECK(count_chars("abc") == 3);
    CHECK(count_chars("\xC3\xA9") == 1);
    CHECK(count_chars("a\xF0\x9F\x99\x82z") == 3);
}

TEST_CASE("prompt structure invariants hold over random realistic inputs") {
    std::mt19937_64 rng(7);
    const std::string alphabet = "abcdefghijklmnopqrstuvwxyz ,.'-";
    auto random_text = [&](std::size_t max_len) {
        std::string text(rng() % max_len, ' ');
        for (auto& c : text) c = alphabet[rng() % alphabet.size()];
        return text;
    };
    for (int trial = 0; trial < 200; ++trial) {
        const auto record = record_with(random_text(600), random_text(80));
        const std::string prompt = build_prompt(record);
        CAPTURE(prompt);
        CHECK(count_occurrences(prompt, "\n\nQ: ") == 1);
        CHECK(prompt.ends_with("\nA:"));
        // truncation only touches the context: everything after the
        // separator is the untouched question + suffix
        const std::size_t sep = prompt.find("\n\nQ: ");
        CHECK(prompt.substr(sep) == "\n\nQ: " + record.question + "\nA:");
        CHECK(count_chars(prompt.substr(0, sep)) <= 300);
    }
}

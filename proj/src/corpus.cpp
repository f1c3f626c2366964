#include "tokvar/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tokvar/errors.hpp"

namespace tokvar {

using json = nlohmann::json;

namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open corpus file: " + path.string());
    }
    return in;
}

void check_record(const PromptRecord& record, std::set<std::string>& seen,
                  const std::string& where) {
    if (record.id.empty()) {
        throw InputError("empty prompt id at " + where);
    }
    if (!seen.insert(record.id).second) {
        throw InputError("duplicate prompt id \"" + record.id + "\" at " + where);
    }
}

std::optional<std::string> normalize_gold(const json& value) {
    if (value.is_null()) return std::nullopt;
    std::string text = value.get<std::string>();
    if (text.empty()) return std::nullopt;
    return text;
}

// One PromptRecord object per line.
std::vector<PromptRecord> read_jsonl(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    std::vector<PromptRecord> records;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
            PromptRecord record;
            record.id = obj.at("id").get<std::string>();
            record.dataset = obj.contains("dataset")
                                 ? dataset_from_string(obj["dataset"].get<std::string>())
                                 : Dataset::custom;
            record.context = obj.value("context", std::string{});
            record.question = obj.at("question").get<std::string>();
            if (obj.contains("gold_answer")) {
                record.gold_answer = normalize_gold(obj["gold_answer"]);
            }
            check_record(record, seen, path.filename().string() + ":" + std::to_string(line_no));
            records.push_back(std::move(record));
        } catch (const json::exception& e) {
            throw InputError("malformed prompt record at " + path.filename().string() + ":" +
                             std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

// SQuAD v2 tree: data -> paragraphs -> qas. Unanswerable items keep an empty
// gold answer.
std::vector<PromptRecord> read_squad(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    json root;
    try {
        root = json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("malformed SQuAD file " + path.filename().string() + ": " + e.what());
    }
    std::vector<PromptRecord> records;
    std::set<std::string> seen;
    try {
        for (const auto& article : root.at("data")) {
            for (const auto& paragraph : article.at("paragraphs")) {
                const std::string context = paragraph.at("context").get<std::string>();
                for (const auto& qa : paragraph.at("qas")) {
                    PromptRecord record;
                    record.id = qa.at("id").get<std::string>();
                    record.dataset = Dataset::squad_v2;
                    record.context = context;
                    record.question = qa.at("question").get<std::string>();
                    const bool impossible = qa.value("is_impossible", false);
                    const auto& answers = qa.at("answers");
                    if (!impossible && !answers.empty()) {
                        record.gold_answer = normalize_gold(answers.front().at("text"));
                    }
                    check_record(record, seen, path.filename().string() + " qas id");
                    records.push_back(std::move(record));
                }
            }
        }
    } catch (const json::exception& e) {
        throw InputError("malformed SQuAD file " + path.filename().string() + ": " + e.what());
    }
    return records;
}

// TriviaQA {"Data": [...]}; used as a no-context corpus.
std::vector<PromptRecord> read_triviaqa(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    json root;
    try {
        root = json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("malformed TriviaQA file " + path.filename().string() + ": " + e.what());
    }
    std::vector<PromptRecord> records;
    std::set<std::string> seen;
    try {
        for (const auto& item : root.at("Data")) {
            PromptRecord record;
            record.id = item.at("QuestionId").get<std::string>();
            record.dataset = Dataset::triviaqa_nocontext;
            record.question = item.at("Question").get<std::string>();
            if (item.contains("Answer") && item["Answer"].contains("Value")) {
                record.gold_answer = normalize_gold(item["Answer"]["Value"]);
            }
            check_record(record, seen, path.filename().string() + " QuestionId");
            records.push_back(std::move(record));
        }
    } catch (const json::exception& e) {
        throw InputError("malformed TriviaQA file " + path.filename().string() + ": " + e.what());
    }
    return records;
}

// XSum: line-delimited {"id", "document", "summary"}. The document becomes
// the context; a fixed instruction becomes the question so one prompt
// template serves both QA and summarization.
std::vector<PromptRecord> read_xsum(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    std::vector<PromptRecord> records;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json obj = json::parse(line);
            PromptRecord record;
            if (obj.at("id").is_string()) {
                record.id = obj["id"].get<std::string>();
            } else {
                record.id = std::to_string(obj["id"].get<std::int64_t>());
            }
            record.dataset = Dataset::xsum;
            record.context = obj.at("document").get<std::string>();
            record.question = kXsumInstruction;
            if (obj.contains("summary")) {
                record.gold_answer = normalize_gold(obj["summary"]);
            }
            check_record(record, seen, path.filename().string() + ":" + std::to_string(line_no));
            records.push_back(std::move(record));
        } catch (const json::exception& e) {
            throw InputError("malformed XSum record at " + path.filename().string() + ":" +
                             std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

}  // namespace

CorpusAdapter adapter_from_string(const std::string& name) {
    if (name == "jsonl") return CorpusAdapter::jsonl;
    if (name == "squad") return CorpusAdapter::squad_v2;
    if (name == "squad_v2") return CorpusAdapter::squad_v2;
    if (name == "triviaqa") return CorpusAdapter::triviaqa;
    if (name == "xsum") return CorpusAdapter::xsum;
    throw ConfigError("unknown corpus adapter: \"" + name +
                      "\" (expected jsonl, squad, triviaqa, or xsum)");
}

std::string to_string(CorpusAdapter adapter) {
    switch (adapter) {
        case CorpusAdapter::jsonl: return "jsonl";
        case CorpusAdapter::squad_v2: return "squad";
        case CorpusAdapter::triviaqa: return "triviaqa";
        case CorpusAdapter::xsum: return "xsum";
    }
    return "jsonl";
}

std::vector<PromptRecord> read_prompts(const std::filesystem::path& path, CorpusAdapter adapter) {
    switch (adapter) {
        case CorpusAdapter::jsonl: return read_jsonl(path);
        case CorpusAdapter::squad_v2: return read_squad(path);
        case CorpusAdapter::triviaqa: return read_triviaqa(path);
        case CorpusAdapter::xsum: return read_xsum(path);
    }
    throw InternalError("unhandled corpus adapter");
}

}  // namespace tokvar

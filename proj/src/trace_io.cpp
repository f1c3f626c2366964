#include "tokvar/trace_io.hpp"

#include <json.hpp>

#include "tokvar/errors.hpp"

namespace tokvar {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json config_to_json(const DecodingConfig& config) {
    ordered_json j;
    j["temperature"] = config.temperature;
    j["top_p"] = config.top_p;
    j["top_k"] = config.top_k;
    j["max_new_tokens"] = config.max_new_tokens;
    j["num_samples"] = config.num_samples;
    if (config.seed) j["seed"] = *config.seed;
    return j;
}

DecodingConfig config_from_json(const ordered_json& j) {
    DecodingConfig config;
    config.temperature = j.at("temperature").get<double>();
    config.top_p = j.at("top_p").get<double>();
    config.top_k = j.at("top_k").get<int>();
    config.max_new_tokens = j.at("max_new_tokens").get<int>();
    config.num_samples = j.at("num_samples").get<int>();
    if (j.contains("seed") && !j["seed"].is_null()) {
        config.seed = j["seed"].get<std::int64_t>();
    }
    return config;
}

void check_schema_version(const ordered_json& j, const char* expected,
                          const std::string& where) {
    const std::string found = j.value("schema_version", std::string{"<missing>"});
    if (found != expected) {
        throw InputError("unsupported schema_version \"" + found + "\" at " + where +
                         " (this build reads version \"" + expected + "\")");
    }
}

std::ifstream open_input(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) {
        throw InputError(std::string("cannot open ") + what + " file: " + path.string());
    }
    return in;
}

}  // namespace

std::string trace_line(const GenerationSet& set) {
    ordered_json j;
    j["schema_version"] = kTraceSchemaVersion;
    j["prompt_id"] = set.prompt_id;
    j["model_id"] = set.model_id;
    j["config"] = config_to_json(set.config);
    j["reference_index"] = set.reference_index;
    ordered_json samples = ordered_json::array();
    for (const auto& sample : set.samples) {
        ordered_json s;
        s["sample_index"] = sample.sample_index;
        s["tokens"] = sample.tokens;
        s["logprobs"] = sample.logprobs;
        s["finish_reason"] = to_string(sample.finish_reason);
        samples.push_back(std::move(s));
    }
    j["samples"] = std::move(samples);
    return j.dump();
}

GenerationSet parse_trace_line(const std::string& line, std::size_t line_no) {
    const std::string where = "line " + std::to_string(line_no);
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const ordered_json::exception& e) {
        throw InputError("malformed trace record at " + where + ": " + e.what());
    }
    check_schema_version(j, kTraceSchemaVersion, where);
    GenerationSet set;
    try {
        set.prompt_id = j.at("prompt_id").get<std::string>();
        set.model_id = j.at("model_id").get<std::string>();
        set.config = config_from_json(j.at("config"));
        set.reference_index = j.value("reference_index", 0);
        for (const auto& s : j.at("samples")) {
            GenerationSample sample;
            sample.sample_index = s.at("sample_index").get<int>();
            sample.tokens = s.at("tokens").get<std::vector<std::string>>();
            sample.logprobs = s.at("logprobs").get<std::vector<double>>();
            sample.finish_reason = finish_reason_from_string(s.value("finish_reason", "other"));
            set.samples.push_back(std::move(sample));
        }
    } catch (const ordered_json::exception& e) {
        throw InputError("malformed trace record at " + where + ": " + e.what());
    }
    try {
        set.validate();
    } catch (const Error& e) {
        throw InputError(std::string(e.what()) + " (at " + where + ")");
    }
    return set;
}

std::string scored_line(const ScoredGeneration& scored) {
    ordered_json j;
    j["schema_version"] = kScoredSchemaVersion;
    j["prompt_id"] = scored.prompt_id;
    j["model_id"] = scored.model_id;
    j["answer_text"] = scored.answer_text;
    j["threshold"] = scored.threshold;
    j["scored_count"] = scored.scored_count;
    j["hallucinated_count"] = scored.hallucinated_count;
    ordered_json tokens = ordered_json::array();
    for (const auto& ts : scored.token_scores) {
        ordered_json t;
        t["position"] = ts.position;
        t["token"] = ts.token;
        if (ts.mean_logprob) {
            t["mean_logprob"] = *ts.mean_logprob;
        } else {
            t["mean_logprob"] = nullptr;
        }
        if (ts.variance) {
            t["variance"] = *ts.variance;
        } else {
            t["variance"] = nullptr;
        }
        t["hallucinated"] = ts.hallucinated;
        t["support"] = ts.support;
        tokens.push_back(std::move(t));
    }
    j["tokens"] = std::move(tokens);
    return j.dump();
}

ScoredGeneration parse_scored_line(const std::string& line, std::size_t line_no) {
    const std::string where = "line " + std::to_string(line_no);
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const ordered_json::exception& e) {
        throw InputError("malformed scored record at " + where + ": " + e.what());
    }
    check_schema_version(j, kScoredSchemaVersion, where);
    ScoredGeneration scored;
    try {
        scored.prompt_id = j.at("prompt_id").get<std::string>();
        scored.model_id = j.at("model_id").get<std::string>();
        scored.answer_text = j.at("answer_text").get<std::string>();
        scored.threshold = j.at("threshold").get<double>();
        scored.scored_count = j.at("scored_count").get<int>();
        scored.hallucinated_count = j.at("hallucinated_count").get<int>();
        for (const auto& t : j.at("tokens")) {
            TokenScore ts;
            ts.position = t.at("position").get<int>();
            ts.token = t.at("token").get<std::string>();
            if (!t.at("mean_logprob").is_null()) {
                ts.mean_logprob = t["mean_logprob"].get<double>();
            }
            if (!t.at("variance").is_null()) {
                ts.variance = t["variance"].get<double>();
            }
            ts.hallucinated = t.at("hallucinated").get<bool>();
            ts.support = t.at("support").get<int>();
            scored.token_scores.push_back(std::move(ts));
        }
    } catch (const ordered_json::exception& e) {
        throw InputError("malformed scored record at " + where + ": " + e.what());
    }
    return scored;
}

void write_traces(const std::vector<GenerationSet>& sets, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw InputError("cannot open trace file for writing: " + path.string());
    }
    for (const auto& set : sets) {
        out << trace_line(set) << '\n';
    }
    if (!out) {
        throw InputError("failed writing trace file: " + path.string());
    }
}

std::vector<GenerationSet> read_traces(const std::filesystem::path& path) {
    auto in = open_input(path, "trace");
    std::vector<GenerationSet> sets;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        sets.push_back(parse_trace_line(line, line_no));
    }
    return sets;
}

void write_scored(const std::vector<ScoredGeneration>& scored, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw InputError("cannot open scored file for writing: " + path.string());
    }
    for (const auto& record : scored) {
        out << scored_line(record) << '\n';
    }
    if (!out) {
        throw InputError("failed writing scored file: " + path.string());
    }
}

std::vector<ScoredGeneration> read_scored(const std::filesystem::path& path) {
    auto in = open_input(path, "scored");
    std::vector<ScoredGeneration> scored;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        scored.push_back(parse_scored_line(line, line_no));
    }
    return scored;
}

TraceIndex scan_trace_index(const std::filesystem::path& path) {
    TraceIndex index;
    std::ifstream in(path);
    if (!in) return index;  // nothing to resume from
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (!ordered_json::accept(line)) {
            // A syntactically torn final line (interrupted append) is
            // tolerated; anything earlier is a real input error.
            if (in.peek() == std::char_traits<char>::eof()) {
                index.torn_tail = true;
                return index;
            }
            throw InputError("malformed trace record at line " + std::to_string(line_no));
        }
        GenerationSet set = parse_trace_line(line, line_no);
        index.keys.insert({set.prompt_id, set.model_id});
        ++index.complete_lines;
    }
    return index;
}

TraceWriter::TraceWriter(const std::filesystem::path& path)
    : out_(path, std::ios::app) {
    if (!out_) {
        throw InputError("cannot open trace file for appending: " + path.string());
    }
}

void TraceWriter::append(const GenerationSet& set) {
    out_ << trace_line(set) << '\n';
    out_.flush();
    if (!out_) {
        throw InputError("failed appending to trace file");
    }
    ++written_;
}

}  // namespace tokvar

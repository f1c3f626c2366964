#include "tokvar/sampler.hpp"

#include <fstream>

#include <json.hpp>

#include "tokvar/errors.hpp"
#include "tokvar/rng.hpp"
#include "tokvar/trace_io.hpp"

namespace tokvar {

std::filesystem::path sidecar_path_for(const std::filesystem::path& trace_path) {
    std::filesystem::path p = trace_path;
    p.replace_extension();
    p += ".errors.jsonl";
    return p;
}

std::vector<SidecarEntry> read_sidecar(const std::filesystem::path& path) {
    std::vector<SidecarEntry> entries;
    std::ifstream in(path);
    if (!in) return entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) continue;
        entries.push_back({j.value("prompt_id", ""), j.value("stage", ""), j.value("message", "")});
    }
    return entries;
}

namespace {

class SidecarWriter {
  public:
    explicit SidecarWriter(std::filesystem::path path) : path_(std::move(path)) {}

    void append(const SidecarEntry& entry) {
        if (!out_.is_open()) {
            out_.open(path_, std::ios::app);
            if (!out_) {
                throw InputError("cannot open error sidecar for writing: " + path_.string());
            }
        }
        nlohmann::ordered_json j;
        j["prompt_id"] = entry.prompt_id;
        j["stage"] = entry.stage;
        j["message"] = entry.message;
        out_ << j.dump() << '\n';
        out_.flush();
    }

  private:
    std::filesystem::path path_;
    std::ofstream out_;
};

}  // namespace

SamplingReport run_sampling(const std::vector<PromptRecord>& prompts,
                            const DecodingConfig& config, SampleSource& source,
                            const std::filesystem::path& out_path, std::size_t context_limit) {
    config.validate();

    const TraceIndex existing = scan_trace_index(out_path);
    const std::string model = source.model_id();

    SamplingReport report;
    TraceWriter writer(out_path);
    SidecarWriter sidecar(sidecar_path_for(out_path));

    for (std::size_t i = 0; i < prompts.size(); ++i) {
        const PromptRecord& record = prompts[i];
        if (existing.contains(record.id, model)) {
            ++report.skipped;
            continue;
        }

        DecodingConfig prompt_config = config;
        if (config.seed) {
            // prompt-position sub-seed: appending prompts to the corpus never
            // shifts the randomness of earlier ones
            prompt_config.seed = static_cast<std::int64_t>(
                mix_seed({static_cast<std::uint64_t>(*config.seed), static_cast<std::uint64_t>(i)}));
        }

        try {
            const std::string prompt = build_prompt(record, context_limit);
            GenerationSet set = source.generate(record.id, prompt, prompt_config);
            set.validate();
            writer.append(set);
            ++report.written;
        } catch (const Error& e) {
            SidecarEntry entry{record.id, "sample", e.what()};
            sidecar.append(entry);
            report.failures.push_back(std::move(entry));
        }
    }
    return report;
}

}  // namespace tokvar

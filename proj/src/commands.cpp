#include "tokvar/commands.hpp"

#include <cstdlib>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "tokvar/backend.hpp"
#include "tokvar/errors.hpp"
#include "tokvar/ioutil.hpp"
#include "tokvar/manifest.hpp"
#include "tokvar/report.hpp"
#include "tokvar/rng.hpp"
#include "tokvar/sampler.hpp"
#include "tokvar/trace_io.hpp"
#include "tokvar/version.hpp"

namespace tokvar {

namespace {

constexpr const char* kTraceFilename = "traces.jsonl";
constexpr const char* kScoredFilename = "scored.jsonl";

void ensure_out_dir(const std::filesystem::path& out_dir) {
    if (out_dir.empty()) {
        throw ConfigError("--out directory is required");
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory " + out_dir.string() + ": " +
                          ec.message());
    }
}

RunManifest base_manifest(const std::string& command, const std::string& command_line) {
    RunManifest manifest;
    manifest.toolkit_version = kToolkitVersion;
    manifest.command = command;
    manifest.command_line = command_line;
    manifest.started_at = iso8601_utc_now();
    return manifest;
}

void add_input(RunManifest& manifest, const std::filesystem::path& path) {
    manifest.inputs.push_back({path.string(), hex_digest(digest_file(path))});
}

}  // namespace

int cmd_sample(const SampleOptions& opts) {
    opts.decoding.validate();
    ensure_out_dir(opts.out_dir);

    RunManifest manifest = base_manifest("sample", opts.command_line);
    manifest.decoding = opts.decoding;
    manifest.run_seed = opts.decoding.seed;

    std::unique_ptr<SampleSource> source;
    if (opts.mock) {
        MockModelSpec spec =
            opts.mock_spec ? MockModelSpec::from_file(*opts.mock_spec) : MockModelSpec::defaults();
        const std::string model_id = opts.model_id.empty() ? "mock" : opts.model_id;
        source = std::make_unique<MockBackend>(std::move(spec), model_id);
        manifest.backend_url_hash = hex_digest(fnv1a64("mock"));
        manifest.backend_model_id = model_id;
    } else {
        // fail fast on configuration before any request goes out
        if (opts.backend_url.empty()) {
            throw ConfigError("--backend-url is required unless --mock is given");
        }
        if (opts.model_id.empty()) {
            throw ConfigError("--model is required unless --mock is given");
        }
        const char* key = std::getenv(kApiKeyEnvVar);
        if (key == nullptr || *key == '\0') {
            throw ConfigError(std::string("environment variable ") + kApiKeyEnvVar +
                              " must hold the backend API key (bearer token)");
        }
        BackendConfig backend;
        backend.base_url = opts.backend_url;
        backend.api_key = std::string(key);
        backend.model_id = opts.model_id;
        backend.validate();
        manifest.backend_url_hash = hex_digest(fnv1a64(backend.base_url));
        manifest.backend_model_id = backend.model_id;
        source = std::make_unique<HttpBackend>(std::move(backend));
    }

    const std::vector<PromptRecord> prompts = read_prompts(opts.corpus, opts.adapter);
    add_input(manifest, opts.corpus);

    const std::filesystem::path trace_path = opts.out_dir / kTraceFilename;
    const SamplingReport report =
        run_sampling(prompts, opts.decoding, *source, trace_path, opts.context_limit);

    manifest.outputs.push_back(kTraceFilename);
    if (!report.failures.empty()) {
        manifest.outputs.push_back(sidecar_path_for(trace_path).filename().string());
    }
    manifest.finished_at = iso8601_utc_now();
    write_manifest(opts.out_dir, manifest);

    for (const auto& failure : report.failures) {
        std::cerr << "warning: prompt \"" << failure.prompt_id << "\" failed: " << failure.message
                  << '\n';
    }
    std::cout << "sampled " << report.written << " prompt(s), skipped " << report.skipped
              << " already present, " << report.failures.size() << " failure(s) -> "
              << trace_path.string() << '\n';

    if (report.written == 0 && report.skipped == 0 && !report.failures.empty()) {
        throw BackendError("all " + std::to_string(report.failures.size()) +
                           " prompts failed; first: " + report.failures.front().message);
    }
    return 0;
}

int cmd_score(const ScoreOptions& opts) {
    opts.detector.validate();
    ensure_out_dir(opts.out_dir);

    RunManifest manifest = base_manifest("score", opts.command_line);
    manifest.detector = opts.detector;

    const std::vector<GenerationSet> traces = read_traces(opts.trace_file);
    add_input(manifest, opts.trace_file);
    if (traces.empty()) {
        throw InputError("trace file " + opts.trace_file.string() + " holds no generation sets");
    }

    const CorpusScore result = score_corpus(traces, opts.detector);
    for (const auto& failure : result.failures) {
        std::cerr << "warning: prompt \"" << failure.prompt_id
                  << "\" not scored: " << failure.message << '\n';
    }
    if (result.scored.empty()) {
        throw InputError("no generation set could be scored; first failure: " +
                         result.failures.front().message);
    }

    std::ostringstream lines;
    std::int64_t flagged = 0;
    std::int64_t scored_tokens = 0;
    for (const auto& record : result.scored) {
        lines << scored_line(record) << '\n';
        flagged += record.hallucinated_count;
        scored_tokens += record.scored_count;
    }
    const std::filesystem::path scored_path = opts.out_dir / kScoredFilename;
    write_file_atomic(scored_path, lines.str());

    manifest.outputs.push_back(kScoredFilename);
    manifest.finished_at = iso8601_utc_now();
    write_manifest(opts.out_dir, manifest);

    std::cout << "scored " << result.scored.size() << " generation(s): " << flagged << " of "
              << scored_tokens << " scored tokens flagged (threshold "
              << format_double(opts.detector.threshold) << ") -> " << scored_path.string() << '\n';
    return 0;
}

int cmd_analyze(const AnalyzeOptions& opts) {
    if (opts.scored_files.empty()) {
        throw ConfigError("analyze needs at least one scored file");
    }
    ensure_out_dir(opts.out_dir);

    RunManifest manifest = base_manifest("analyze", opts.command_line);

    std::vector<std::vector<ScoredGeneration>> corpora;
    corpora.reserve(opts.scored_files.size());
    std::size_t total_records = 0;
    for (const auto& path : opts.scored_files) {
        corpora.push_back(read_scored(path));
        total_records += corpora.back().size();
        add_input(manifest, path);
    }
    if (total_records == 0) {
        throw InputError("scored input is empty; nothing to analyze");
    }

    std::vector<RateSummary> rates;
    std::vector<PositionProfile> profiles;
    for (const auto& corpus : corpora) {
        rates.push_back(hallucination_rate(corpus));
        profiles.push_back(position_profile(corpus, opts.max_position));
    }

    // shared bin edges across every model being compared
    std::vector<const std::vector<ScoredGeneration>*> corpus_ptrs;
    for (const auto& corpus : corpora) corpus_ptrs.push_back(&corpus);
    const std::vector<double> edges =
        uniform_edges(0.0, max_scored_variance(corpus_ptrs), opts.bins);
    std::vector<VarianceDistribution> distributions;
    for (const auto& corpus : corpora) {
        distributions.push_back(variance_distribution(corpus, edges));
    }

    write_rates_csv(opts.out_dir / "rates.csv", rates);
    write_position_profile_csv(opts.out_dir / "position_profile.csv", profiles);
    write_histogram_csv(opts.out_dir / "variance_histogram.csv", distributions);
    write_cdf_csv(opts.out_dir / "variance_cdf.csv", distributions);
    write_report_json(opts.out_dir / "report.json", rates, profiles, distributions);
    manifest.outputs = {"rates.csv", "position_profile.csv", "variance_histogram.csv",
                        "variance_cdf.csv", "report.json"};

    if (opts.heatmap_prompt) {
        std::vector<ScoredGeneration> rows;
        for (std::size_t i = 0; i < corpora.size(); ++i) {
            bool found = false;
            for (const auto& record : corpora[i]) {
                if (record.prompt_id == *opts.heatmap_prompt) {
                    rows.push_back(record);
                    found = true;
                    break;
                }
            }
            if (!found) {
                throw InputError("heatmap prompt id \"" + *opts.heatmap_prompt +
                                 "\" not present in " + opts.scored_files[i].string());
            }
        }
        write_heatmap_csv(opts.out_dir / "heatmap.csv", heatmap_matrix(rows));
        manifest.outputs.push_back("heatmap.csv");
    }

    manifest.finished_at = iso8601_utc_now();
    write_manifest(opts.out_dir, manifest);

    std::cout << "model_id\ttotal\tscored\tflagged\trate%\n";
    for (const auto& rate : rates) {
        std::cout << rate.model_id << '\t' << rate.total_tokens << '\t' << rate.scored_tokens
                  << '\t' << rate.hallucinated_tokens << '\t' << rate.rate_display << '\n';
    }
    return 0;
}

int cmd_compare(const CompareOptions& opts) {
    ensure_out_dir(opts.out_dir);

    RunManifest manifest = base_manifest("compare", opts.command_line);
    std::vector<ScoredGeneration> corpus_a = read_scored(opts.scored_a);
    std::vector<ScoredGeneration> corpus_b = read_scored(opts.scored_b);
    add_input(manifest, opts.scored_a);
    add_input(manifest, opts.scored_b);
    if (corpus_a.empty() || corpus_b.empty()) {
        throw InputError("compare needs two nonempty scored files");
    }

    // restrict both sides to the prompts they share, so the positional
    // aggregates describe the same inputs
    std::set<std::string> ids_a;
    for (const auto& record : corpus_a) ids_a.insert(record.prompt_id);
    std::set<std::string> shared;
    for (const auto& record : corpus_b) {
        if (ids_a.count(record.prompt_id)) shared.insert(record.prompt_id);
    }
    auto keep_shared = [&shared](std::vector<ScoredGeneration>& corpus) {
        std::erase_if(corpus,
                      [&shared](const ScoredGeneration& r) { return !shared.count(r.prompt_id); });
    };

    ModelComparison cmp;
    if (shared.empty()) {
        std::cerr << "warning: the two scored files share no prompt ids; comparison is empty\n";
        cmp.model_a = corpus_a.front().model_id;
        cmp.model_b = corpus_b.front().model_id;
        cmp.disjoint = true;
    } else {
        keep_shared(corpus_a);
        keep_shared(corpus_b);
        ComparisonOptions comparison;
        comparison.bins = opts.bins;
        comparison.max_position = opts.max_position;
        cmp = positionwise_comparison(corpus_a, corpus_b, comparison);
        if (cmp.disjoint) {
            std::cerr << "warning: no co-supported positions; comparison is empty\n";
        }
    }

    write_kl_csv(opts.out_dir / "kl.csv", cmp);
    write_mean_diff_csv(opts.out_dir / "mean_diff.csv", cmp);
    write_kl_overall_csv(opts.out_dir / "kl_overall.csv", cmp);
    manifest.outputs = {"kl.csv", "mean_diff.csv", "kl_overall.csv"};
    manifest.finished_at = iso8601_utc_now();
    write_manifest(opts.out_dir, manifest);

    std::cout << "compared " << cmp.model_a << " vs " << cmp.model_b << " over "
              << cmp.positions.size() << " position(s)\n";
    return 0;
}

int cmd_ablate(const AblateOptions& opts) {
    opts.detector.validate();
    ensure_out_dir(opts.out_dir);

    RunManifest manifest = base_manifest("ablate", opts.command_line);
    manifest.detector = opts.detector;

    const std::vector<GenerationSet> traces = read_traces(opts.trace_file);
    add_input(manifest, opts.trace_file);
    if (traces.empty()) {
        throw InputError("trace file " + opts.trace_file.string() + " holds no generation sets");
    }

    const AblationGrid grid = ablation_sweep(traces, opts.axis, opts.values, opts.detector);
    for (const auto& error : grid.errors) {
        std::cerr << "warning: axis value " << format_double(error.axis_value)
                  << " rejected: " << error.message << '\n';
    }
    if (grid.points.empty()) {
        throw ConfigError("no usable axis values; first rejection: " +
                          (grid.errors.empty() ? std::string("none given")
                                               : grid.errors.front().message));
    }

    write_ablation_csv(opts.out_dir / "ablation.csv", grid);
    manifest.outputs = {"ablation.csv"};
    manifest.finished_at = iso8601_utc_now();
    write_manifest(opts.out_dir, manifest);

    std::cout << "ablation over " << to_string(grid.axis) << ": " << grid.points.size()
              << " point(s), " << grid.errors.size() << " rejected value(s)\n";
    return 0;
}

}  // namespace tokvar

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tokvar/commands.hpp"
#include "tokvar/errors.hpp"
#include "tokvar/version.hpp"

namespace {

std::string joined_command_line(int argc, char** argv) {
    std::string line;
    for (int i = 0; i < argc; ++i) {
        if (i > 0) line += ' ';
        line += argv[i];
    }
    return line;
}

void print_error(tokvar::ErrorKind kind, const std::string& message) {
    nlohmann::ordered_json j;
    j["error"]["kind"] = tokvar::to_string(kind);
    j["error"]["message"] = message;
    std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    using namespace tokvar;

    CLI::App app{"Token-level hallucination diagnostics from cross-sample "
                 "log-probability variance"};
    app.set_version_flag("--version", kToolkitVersion);
    app.require_subcommand(1);

    const std::string command_line = joined_command_line(argc, argv);

    // ---- sample ------------------------------------------------------------
    SampleOptions sample;
    sample.command_line = command_line;
    std::string adapter_name = "jsonl";
    auto* cmd_sample_app = app.add_subcommand(
        "sample", "Collect n stochastic generations per prompt into a trace file");
    cmd_sample_app->add_option("--corpus", sample.corpus, "Prompt corpus file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd_sample_app->add_option("--adapter", adapter_name,
                               "Corpus layout: jsonl, squad, triviaqa, xsum");
    cmd_sample_app->add_flag("--mock", sample.mock, "Use the deterministic mock backend");
    cmd_sample_app->add_option("--mock-spec", sample.mock_spec,
                               "Mock model spec JSON (implies --mock)");
    cmd_sample_app->add_option("--backend-url", sample.backend_url,
                               "Completion endpoint base URL (scheme://host[:port])");
    cmd_sample_app->add_option("--model", sample.model_id, "Model identifier sent to the backend");
    cmd_sample_app->add_option("--num-samples", sample.decoding.num_samples,
                               "Generations per prompt");
    cmd_sample_app->add_option("--temperature", sample.decoding.temperature, "Sampling temperature");
    cmd_sample_app->add_option("--top-p", sample.decoding.top_p, "Nucleus sampling mass");
    cmd_sample_app->add_option("--top-k", sample.decoding.top_k, "Top-k cutoff (0 disables)");
    cmd_sample_app->add_option("--max-new-tokens", sample.decoding.max_new_tokens,
                               "Completion length cap");
    std::int64_t seed_value = 0;
    auto* seed_opt = cmd_sample_app->add_option("--seed", seed_value, "Run seed");
    cmd_sample_app->add_option("--out", sample.out_dir, "Output directory")->required();

    // ---- score -------------------------------------------------------------
    ScoreOptions score;
    score.command_line = command_line;
    std::string denominator_name = "n";
    auto* cmd_score_app =
        app.add_subcommand("score", "Annotate traces with per-token variance and flags");
    cmd_score_app->add_option("trace", score.trace_file, "Trace file from `sample`")
        ->required()
        ->check(CLI::ExistingFile);
    cmd_score_app->add_option("--threshold", score.detector.threshold,
                              "Variance threshold for the hallucinated flag");
    cmd_score_app->add_option("--denominator", denominator_name, "Variance divisor: n or n-1");
    cmd_score_app->add_option("--min-support", score.detector.min_support,
                              "Samples required before a position is scored");
    cmd_score_app->add_option("--out", score.out_dir, "Output directory")->required();

    // ---- analyze -----------------------------------------------------------
    AnalyzeOptions analyze;
    analyze.command_line = command_line;
    std::string heatmap_prompt;
    auto* cmd_analyze_app = app.add_subcommand(
        "analyze", "Corpus-level rates, position profiles, and variance distributions");
    cmd_analyze_app
        ->add_option("scored", analyze.scored_files, "Scored files, one per model")
        ->required()
        ->check(CLI::ExistingFile);
    cmd_analyze_app->add_option("--bins", analyze.bins, "Histogram bins");
    cmd_analyze_app->add_option("--max-position", analyze.max_position,
                                "Positions covered by the profile");
    auto* heatmap_opt = cmd_analyze_app->add_option(
        "--heatmap-prompt", heatmap_prompt, "Emit the variance heatmap for this prompt id");
    cmd_analyze_app->add_option("--out", analyze.out_dir, "Output directory")->required();

    // ---- compare -----------------------------------------------------------
    CompareOptions compare;
    compare.command_line = command_line;
    auto* cmd_compare_app = app.add_subcommand(
        "compare", "Pairwise per-position KL divergence and mean-variance gaps");
    cmd_compare_app->add_option("scored_a", compare.scored_a, "First scored file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd_compare_app->add_option("scored_b", compare.scored_b, "Second scored file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd_compare_app->add_option("--bins", compare.bins, "Histogram bins");
    cmd_compare_app->add_option("--max-position", compare.max_position,
                                "Positions covered by the comparison");
    cmd_compare_app->add_option("--out", compare.out_dir, "Output directory")->required();

    // ---- ablate ------------------------------------------------------------
    AblateOptions ablate;
    ablate.command_line = command_line;
    std::string axis_name = "threshold";
    std::string ablate_denominator = "n";
    auto* cmd_ablate_app =
        app.add_subcommand("ablate", "Sweep threshold, sample count, or length buckets");
    cmd_ablate_app->add_option("trace", ablate.trace_file, "Trace file from `sample`")
        ->required()
        ->check(CLI::ExistingFile);
    cmd_ablate_app->add_option("--axis", axis_name,
                               "Sweep axis: threshold, num_samples, length_bucket");
    cmd_ablate_app->add_option("--values", ablate.values, "Comma-separated axis values")
        ->required()
        ->delimiter(',');
    cmd_ablate_app->add_option("--threshold", ablate.detector.threshold, "Base variance threshold");
    cmd_ablate_app->add_option("--denominator", ablate_denominator, "Variance divisor: n or n-1");
    cmd_ablate_app->add_option("--min-support", ablate.detector.min_support,
                               "Samples required before a position is scored");
    cmd_ablate_app->add_option("--out", ablate.out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        if (code == 0) return 0;  // --help / --version
        print_error(ErrorKind::config, e.what());
        return exit_code_for(ErrorKind::config);
    }

    try {
        if (cmd_sample_app->parsed()) {
            sample.adapter = adapter_from_string(adapter_name);
            if (seed_opt->count() > 0) sample.decoding.seed = seed_value;
            if (sample.mock_spec) sample.mock = true;
            return cmd_sample(sample);
        }
        if (cmd_score_app->parsed()) {
            score.detector.denominator = denominator_from_string(denominator_name);
            return cmd_score(score);
        }
        if (cmd_analyze_app->parsed()) {
            if (heatmap_opt->count() > 0) analyze.heatmap_prompt = heatmap_prompt;
            return cmd_analyze(analyze);
        }
        if (cmd_compare_app->parsed()) {
            return cmd_compare(compare);
        }
        if (cmd_ablate_app->parsed()) {
            ablate.axis = axis_from_string(axis_name);
            ablate.detector.denominator = denominator_from_string(ablate_denominator);
            return cmd_ablate(ablate);
        }
        print_error(ErrorKind::config, "no subcommand given");
        return exit_code_for(ErrorKind::config);
    } catch (const Error& e) {
        print_error(e.kind(), e.what());
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        print_error(ErrorKind::internal, e.what());
        return exit_code_for(ErrorKind::internal);
    }
}

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tokvar/detector.hpp"
#include "tokvar/types.hpp"

namespace tokvar {

// ---------------------------------------------------------------------------
// Rates

struct RateSummary {
    std::string model_id;
    std::int64_t total_tokens = 0;       // every annotated position
    std::int64_t scored_tokens = 0;      // positions with enough support
    std::int64_t hallucinated_tokens = 0;
    double rate_percent = 0.0;           // raw 100 * hallucinated / scored
    std::string rate_display;            // two decimals, round-half-even
};

/// Exact decimal formatting of 100*hallucinated/scored to two places with
/// round-half-even, computed on integers so display never depends on binary
/// rounding of the raw rate.
std::string format_rate_percent(std::int64_t hallucinated, std::int64_t scored);

RateSummary make_rate_summary(const std::string& model_id, std::int64_t total,
                              std::int64_t scored, std::int64_t hallucinated);

/// Aggregates counts across records. All records must share one model_id.
RateSummary hallucination_rate(const std::vector<ScoredGeneration>& scored);

// ---------------------------------------------------------------------------
// Position profile

struct PositionBucket {
    std::int64_t support_count = 0;  // scored tokens observed at this position
    std::int64_t flagged_count = 0;
    std::optional<double> flag_probability;  // defined when support_count > 0
    std::optional<double> mean_variance;
};

struct PositionProfile {
    std::string model_id;
    int max_position = 40;
    std::vector<PositionBucket> positions;  // size == max_position
};

PositionProfile position_profile(const std::vector<ScoredGeneration>& scored,
                                 int max_position = 40);

// ---------------------------------------------------------------------------
// Variance distribution (histogram + empirical CDF)

inline constexpr int kDefaultBins = 50;

struct VarianceDistribution {
    std::string model_id;
    std::vector<double> bin_edges;     // bins + 1 strictly increasing values
    std::vector<std::int64_t> bin_counts;
    // (bin upper edge, cumulative fraction through that bin); final fraction
    // is 1 whenever any token was scored
    std::vector<std::pair<double, double>> cdf_points;

    std::int64_t total() const;
    bool empty() const { return total() == 0; }
};

/// bins+1 uniformly spaced edges over [lo, hi]; hi is bumped when the range
/// would be degenerate.
std::vector<double> uniform_edges(double lo, double hi, int bins);

/// Largest scored variance across corpora — the default shared upper edge.
double max_scored_variance(const std::vector<const std::vector<ScoredGeneration>*>& corpora);

/// Histogram of all scored variances over the given shared edges. Values
/// outside the edge range are clamped into the boundary bins so the CDF
/// always terminates at 1.
VarianceDistribution variance_distribution(const std::vector<ScoredGeneration>& scored,
                                           const std::vector<double>& edges);

/// Convenience overload: `bins` uniform bins over [0, max observed variance].
VarianceDistribution variance_distribution(const std::vector<ScoredGeneration>& scored,
                                           int bins = kDefaultBins);

// ---------------------------------------------------------------------------
// Heatmap for one shared prompt

struct HeatmapCell {
    std::string token;
    std::optional<double> variance;  // missing marker: nullopt
};

struct HeatmapMatrix {
    std::string prompt_id;
    std::vector<std::string> model_ids;        // row order
    std::size_t width = 0;                     // max annotated length
    std::vector<std::vector<HeatmapCell>> rows;  // each padded to width
};

/// One row per entry (one model each); every entry must carry the same
/// prompt_id. Rows are padded with missing markers past each model's length,
/// and unscored positions inside a row are missing as well.
HeatmapMatrix heatmap_matrix(const std::vector<ScoredGeneration>& per_model);

// ---------------------------------------------------------------------------
// KL divergence between binned variance distributions

struct KlResult {
    double kl_pq = 0.0;
    double kl_qp = 0.0;
    double kl_sym = 0.0;  // (kl_pq + kl_qp) / 2
};

inline constexpr double kDefaultKlEpsilon = 1e-9;

/// KL(P||Q) = sum p_i ln(p_i/q_i) over shared-edge histograms, after
/// normalizing counts to probabilities with additive-epsilon smoothing and
/// renormalization. Throws InputError on mismatched bin edges.
KlResult kl_divergence(const VarianceDistribution& p, const VarianceDistribution& q,
                       double epsilon = kDefaultKlEpsilon);

// ---------------------------------------------------------------------------
// Pairwise model comparison

struct PositionComparison {
    int position = 0;
    std::int64_t support_a = 0;
    std::int64_t support_b = 0;
    double kl_ab = 0.0;
    double kl_ba = 0.0;
    double kl_sym = 0.0;
    double abs_mean_variance_diff = 0.0;
};

struct ModelComparison {
    std::string model_a;
    std::string model_b;
    std::vector<PositionComparison> positions;  // co-supported positions only
    KlResult overall;       // whole-distribution divergence
    bool overall_defined = false;
    bool disjoint = false;  // no co-supported position
};

struct ComparisonOptions {
    int bins = kDefaultBins;
    int max_position = 40;
    double epsilon = kDefaultKlEpsilon;
};

/// Per-position KL between the two models' variance distributions (shared
/// edges across both corpora) plus |mean_var_a - mean_var_b|, restricted to
/// positions both models support. Also reports the whole-distribution KL.
ModelComparison positionwise_comparison(const std::vector<ScoredGeneration>& a,
                                        const std::vector<ScoredGeneration>& b,
                                        const ComparisonOptions& opts = {});

// ---------------------------------------------------------------------------
// Ablation sweeps

enum class AblationAxis { threshold, num_samples, length_bucket };

std::string to_string(AblationAxis axis);
AblationAxis axis_from_string(const std::string& name);

struct AblationPoint {
    double axis_value = 0.0;
    RateSummary summary;
};

struct AblationError {
    double axis_value = 0.0;
    std::string message;
};

struct AblationGrid {
    AblationAxis axis = AblationAxis::threshold;
    std::vector<AblationPoint> points;   // axis values strictly increasing
    std::vector<AblationError> errors;   // rejected values; sweep continues
};

/// threshold     — scores once, then re-thresholds the stored variances.
/// num_samples   — rescores using only the first k samples of each set;
///                 k=1 is rejected (variance needs at least 2 samples).
/// length_bucket — values are bucket lower bounds on scored length; the last
///                 bucket is open-ended.
AblationGrid ablation_sweep(const std::vector<GenerationSet>& traces,
                            AblationAxis axis, const std::vector<double>& values,
                            const DetectorConfig& base_cfg);

}  // namespace tokvar

#include "tokvar/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tokvar/errors.hpp"

namespace tokvar {

// ---------------------------------------------------------------------------
// Rates

std::string format_rate_percent(std::int64_t hallucinated, std::int64_t scored) {
    if (scored <= 0) return "0.00";
    // hundredths of a percent, rounded half to even on exact integers
    const std::int64_t numerator = 10000 * hallucinated;
    std::int64_t q = numerator / scored;
    const std::int64_t r = numerator % scored;
    if (2 * r > scored) {
        ++q;
    } else if (2 * r == scored && (q % 2) != 0) {
        ++q;
    }
    std::string fraction = std::to_string(q % 100);
    if (fraction.size() < 2) fraction.insert(fraction.begin(), '0');
    return std::to_string(q / 100) + "." + fraction;
}

RateSummary make_rate_summary(const std::string& model_id, std::int64_t total,
                              std::int64_t scored, std::int64_t hallucinated) {
    if (hallucinated < 0 || scored < hallucinated || total < scored) {
        throw InputError("inconsistent rate counts: total " + std::to_string(total) + ", scored " +
                         std::to_string(scored) + ", hallucinated " + std::to_string(hallucinated));
    }
    RateSummary summary;
    summary.model_id = model_id;
    summary.total_tokens = total;
    summary.scored_tokens = scored;
    summary.hallucinated_tokens = hallucinated;
    summary.rate_percent =
        scored > 0 ? 100.0 * static_cast<double>(hallucinated) / static_cast<double>(scored) : 0.0;
    summary.rate_display = format_rate_percent(hallucinated, scored);
    return summary;
}

RateSummary hallucination_rate(const std::vector<ScoredGeneration>& scored) {
    std::string model_id;
    std::int64_t total = 0;
    std::int64_t scored_tokens = 0;
    std::int64_t hallucinated = 0;
    for (const auto& record : scored) {
        if (model_id.empty()) {
            model_id = record.model_id;
        } else if (record.model_id != model_id) {
            throw InputError("mixed model ids in rate aggregation: \"" + model_id + "\" vs \"" +
                             record.model_id + "\" (prompt \"" + record.prompt_id + "\")");
        }
        total += static_cast<std::int64_t>(record.token_scores.size());
        scored_tokens += record.scored_count;
        hallucinated += record.hallucinated_count;
    }
    return make_rate_summary(model_id, total, scored_tokens, hallucinated);
}

// ---------------------------------------------------------------------------
// Position profile

PositionProfile position_profile(const std::vector<ScoredGeneration>& scored, int max_position) {
    if (max_position < 1) {
        throw ConfigError("max_position must be >= 1, got " + std::to_string(max_position));
    }
    PositionProfile profile;
    profile.model_id = scored.empty() ? std::string{} : scored.front().model_id;
    profile.max_position = max_position;
    profile.positions.resize(static_cast<std::size_t>(max_position));

    std::vector<double> variance_sums(static_cast<std::size_t>(max_position), 0.0);
    for (const auto& record : scored) {
        for (const auto& ts : record.token_scores) {
            if (!ts.scored() || ts.position >= max_position) continue;
            auto& bucket = profile.positions[static_cast<std::size_t>(ts.position)];
            ++bucket.support_count;
            if (ts.hallucinated) ++bucket.flagged_count;
            variance_sums[static_cast<std::size_t>(ts.position)] += *ts.variance;
        }
    }
    for (std::size_t t = 0; t < profile.positions.size(); ++t) {
        auto& bucket = profile.positions[t];
        if (bucket.support_count > 0) {
            bucket.flag_probability = static_cast<double>(bucket.flagged_count) /
                                      static_cast<double>(bucket.support_count);
            bucket.mean_variance = variance_sums[t] / static_cast<double>(bucket.support_count);
        }
    }
    return profile;
}

// ---------------------------------------------------------------------------
// Variance distribution

std::int64_t VarianceDistribution::total() const {
    std::int64_t sum = 0;
    for (auto c : bin_counts) sum += c;
    return sum;
}

std::vector<double> uniform_edges(double lo, double hi, int bins) {
    if (bins < 2) {
        throw ConfigError("need at least 2 bins, got " + std::to_string(bins));
    }
    if (!(hi > lo)) hi = lo + 1.0;  // degenerate range (e.g. all-zero variances)
    std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i) {
        edges[static_cast<std::size_t>(i)] =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    }
    edges.back() = hi;
    return edges;
}

double max_scored_variance(const std::vector<const std::vector<ScoredGeneration>*>& corpora) {
    double max_var = 0.0;
    for (const auto* corpus : corpora) {
        for (const auto& record : *corpus) {
            for (const auto& ts : record.token_scores) {
                if (ts.scored()) max_var = std::max(max_var, *ts.variance);
            }
        }
    }
    return max_var;
}

namespace {

void check_edges(const std::vector<double>& edges) {
    if (edges.size() < 3) {
        throw InputError("histogram needs at least 2 bins (3 edges), got " +
                         std::to_string(edges.size()) + " edges");
    }
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i] > edges[i - 1])) {
            throw InputError("histogram bin edges must be strictly increasing");
        }
    }
}

std::size_t bin_for(const std::vector<double>& edges, double value) {
    // [edge_i, edge_{i+1}) buckets; out-of-range values clamp into the
    // boundary bins so the CDF always terminates at 1
    const auto it = std::upper_bound(edges.begin(), edges.end(), value);
    const std::ptrdiff_t raw = (it - edges.begin()) - 1;
    const std::ptrdiff_t last = static_cast<std::ptrdiff_t>(edges.size()) - 2;
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(raw, 0, last));
}

}  // namespace

VarianceDistribution variance_distribution(const std::vector<ScoredGeneration>& scored,
                                           const std::vector<double>& edges) {
    check_edges(edges);
    VarianceDistribution dist;
    dist.model_id = scored.empty() ? std::string{} : scored.front().model_id;
    dist.bin_edges = edges;
    dist.bin_counts.assign(edges.size() - 1, 0);
    for (const auto& record : scored) {
        for (const auto& ts : record.token_scores) {
            if (ts.scored()) ++dist.bin_counts[bin_for(edges, *ts.variance)];
        }
    }
    const std::int64_t total = dist.total();
    if (total > 0) {
        std::int64_t cumulative = 0;
        dist.cdf_points.reserve(dist.bin_counts.size());
        for (std::size_t i = 0; i < dist.bin_counts.size(); ++i) {
            cumulative += dist.bin_counts[i];
            dist.cdf_points.emplace_back(edges[i + 1], static_cast<double>(cumulative) /
                                                           static_cast<double>(total));
        }
    }
    return dist;
}

VarianceDistribution variance_distribution(const std::vector<ScoredGeneration>& scored, int bins) {
    const double hi = max_scored_variance({&scored});
    return variance_distribution(scored, uniform_edges(0.0, hi, bins));
}

// ---------------------------------------------------------------------------
// Heatmap

HeatmapMatrix heatmap_matrix(const std::vector<ScoredGeneration>& per_model) {
    if (per_model.empty()) {
        throw InputError("heatmap needs at least one scored generation");
    }
    HeatmapMatrix heatmap;
    heatmap.prompt_id = per_model.front().prompt_id;
    for (const auto& record : per_model) {
        if (record.prompt_id != heatmap.prompt_id) {
            throw InputError("heatmap rows must share one prompt id: \"" + heatmap.prompt_id +
                             "\" vs \"" + record.prompt_id + "\"");
        }
        heatmap.width = std::max(heatmap.width, record.token_scores.size());
    }
    for (const auto& record : per_model) {
        heatmap.model_ids.push_back(record.model_id);
        std::vector<HeatmapCell> row;
        row.reserve(heatmap.width);
        for (const auto& ts : record.token_scores) {
            row.push_back({ts.token, ts.variance});
        }
        row.resize(heatmap.width);  // missing markers past this model's length
        heatmap.rows.push_back(std::move(row));
    }
    return heatmap;
}

// ---------------------------------------------------------------------------
// KL divergence

namespace {

double directed_kl(const std::vector<double>& p, const std::vector<double>& q) {
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        kl += p[i] * std::log(p[i] / q[i]);
    }
    // round-off can leave a negligible negative residue; a real negative
    // value would be a bug worth surfacing
    if (kl < 0.0 && kl > -1e-12) kl = 0.0;
    return kl;
}

std::vector<double> smoothed_probabilities(const VarianceDistribution& dist, double epsilon) {
    const double total = static_cast<double>(dist.total());
    const double bins = static_cast<double>(dist.bin_counts.size());
    std::vector<double> p(dist.bin_counts.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = (static_cast<double>(dist.bin_counts[i]) / total + epsilon) / (1.0 + bins * epsilon);
    }
    return p;
}

}  // namespace

KlResult kl_divergence(const VarianceDistribution& p, const VarianceDistribution& q,
                       double epsilon) {
    if (p.bin_edges != q.bin_edges) {
        throw InputError("KL divergence needs identical bin edges on both distributions");
    }
    if (!(epsilon > 0.0)) {
        throw ConfigError("KL smoothing epsilon must be positive");
    }
    if (p.empty() || q.empty()) {
        throw InputError("KL divergence is undefined for an empty distribution");
    }
    const std::vector<double> pp = smoothed_probabilities(p, epsilon);
    const std::vector<double> qq = smoothed_probabilities(q, epsilon);
    KlResult result;
    result.kl_pq = directed_kl(pp, qq);
    result.kl_qp = directed_kl(qq, pp);
    result.kl_sym = 0.5 * (result.kl_pq + result.kl_qp);
    return result;
}

// ---------------------------------------------------------------------------
// Pairwise comparison

namespace {

struct PositionSlice {
    std::vector<double> variances;
    double mean() const {
        double sum = 0.0;
        for (double v : variances) sum += v;
        return sum / static_cast<double>(variances.size());
    }
};

std::vector<PositionSlice> slice_by_position(const std::vector<ScoredGeneration>& corpus,
                                             int max_position) {
    std::vector<PositionSlice> slices(static_cast<std::size_t>(max_position));
    for (const auto& record : corpus) {
        for (const auto& ts : record.token_scores) {
            if (!ts.scored() || ts.position >= max_position) continue;
            slices[static_cast<std::size_t>(ts.position)].variances.push_back(*ts.variance);
        }
    }
    return slices;
}

VarianceDistribution histogram_of(const std::vector<double>& values,
                                  const std::vector<double>& edges) {
    VarianceDistribution dist;
    dist.bin_edges = edges;
    dist.bin_counts.assign(edges.size() - 1, 0);
    for (double v : values) ++dist.bin_counts[bin_for(edges, v)];
    return dist;
}

}  // namespace

ModelComparison positionwise_comparison(const std::vector<ScoredGeneration>& a,
                                        const std::vector<ScoredGeneration>& b,
                                        const ComparisonOptions& opts) {
    if (opts.max_position < 1) {
        throw ConfigError("max_position must be >= 1");
    }
    ModelComparison cmp;
    cmp.model_a = a.empty() ? std::string{} : a.front().model_id;
    cmp.model_b = b.empty() ? std::string{} : b.front().model_id;

    // shared edges across both corpora keep every KL comparable
    const double hi = max_scored_variance({&a, &b});
    const std::vector<double> edges = uniform_edges(0.0, hi, opts.bins);

    const VarianceDistribution dist_a = variance_distribution(a, edges);
    const VarianceDistribution dist_b = variance_distribution(b, edges);
    if (!dist_a.empty() && !dist_b.empty()) {
        cmp.overall = kl_divergence(dist_a, dist_b, opts.epsilon);
        cmp.overall_defined = true;
    }

    const auto slices_a = slice_by_position(a, opts.max_position);
    const auto slices_b = slice_by_position(b, opts.max_position);
    for (int t = 0; t < opts.max_position; ++t) {
        const auto& slice_a = slices_a[static_cast<std::size_t>(t)];
        const auto& slice_b = slices_b[static_cast<std::size_t>(t)];
        if (slice_a.variances.empty() || slice_b.variances.empty()) continue;

        const KlResult kl = kl_divergence(histogram_of(slice_a.variances, edges),
                                          histogram_of(slice_b.variances, edges), opts.epsilon);
        PositionComparison pc;
        pc.position = t;
        pc.support_a = static_cast<std::int64_t>(slice_a.variances.size());
        pc.support_b = static_cast<std::int64_t>(slice_b.variances.size());
        pc.kl_ab = kl.kl_pq;
        pc.kl_ba = kl.kl_qp;
        pc.kl_sym = kl.kl_sym;
        pc.abs_mean_variance_diff = std::fabs(slice_a.mean() - slice_b.mean());
        cmp.positions.push_back(pc);
    }
    cmp.disjoint = cmp.positions.empty();
    return cmp;
}

// ---------------------------------------------------------------------------
// Ablation sweeps

std::string to_string(AblationAxis axis) {
    switch (axis) {
        case AblationAxis::threshold: return "threshold";
        case AblationAxis::num_samples: return "num_samples";
        case AblationAxis::length_bucket: return "length_bucket";
    }
    return "threshold";
}

AblationAxis axis_from_string(const std::string& name) {
    if (name == "threshold") return AblationAxis::threshold;
    if (name == "num_samples") return AblationAxis::num_samples;
    if (name == "length_bucket") return AblationAxis::length_bucket;
    throw ConfigError("unknown ablation axis: \"" + name +
                      "\" (expected threshold, num_samples, or length_bucket)");
}

namespace {

std::string require_uniform_model(const std::vector<GenerationSet>& traces) {
    std::string model_id;
    for (const auto& set : traces) {
        if (model_id.empty()) {
            model_id = set.model_id;
        } else if (set.model_id != model_id) {
            throw InputError("ablation needs a single-model trace file; found \"" + model_id +
                             "\" and \"" + set.model_id + "\"");
        }
    }
    return model_id;
}

std::vector<double> sorted_unique_values(const std::vector<double>& values,
                                         std::vector<AblationError>& errors) {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> unique;
    for (double v : sorted) {
        if (!unique.empty() && unique.back() == v) {
            errors.push_back({v, "duplicate axis value"});
            continue;
        }
        unique.push_back(v);
    }
    return unique;
}

RateSummary summarize_scored(const std::string& model_id,
                             const std::vector<ScoredGeneration>& scored, double threshold) {
    std::int64_t total = 0;
    std::int64_t scored_tokens = 0;
    std::int64_t flagged = 0;
    for (const auto& record : scored) {
        total += static_cast<std::int64_t>(record.token_scores.size());
        for (const auto& ts : record.token_scores) {
            if (!ts.scored()) continue;
            ++scored_tokens;
            if (*ts.variance > threshold) ++flagged;
        }
    }
    return make_rate_summary(model_id, total, scored_tokens, flagged);
}

}  // namespace

AblationGrid ablation_sweep(const std::vector<GenerationSet>& traces, AblationAxis axis,
                            const std::vector<double>& values, const DetectorConfig& base_cfg) {
    base_cfg.validate();
    if (values.empty()) {
        throw ConfigError("ablation sweep needs at least one axis value");
    }
    const std::string model_id = require_uniform_model(traces);

    AblationGrid grid;
    grid.axis = axis;
    const std::vector<double> axis_values = sorted_unique_values(values, grid.errors);

    switch (axis) {
        case AblationAxis::threshold: {
            // one scoring pass; every threshold re-reads the stored variances
            const CorpusScore base = score_corpus(traces, base_cfg);
            for (double tau : axis_values) {
                if (tau < 0.0) {
                    grid.errors.push_back({tau, "threshold must be >= 0"});
                    continue;
                }
                grid.points.push_back({tau, summarize_scored(model_id, base.scored, tau)});
            }
            break;
        }
        case AblationAxis::num_samples: {
            std::size_t available = 0;
            if (!traces.empty()) {
                available = traces.front().samples.size();
                for (const auto& set : traces) available = std::min(available, set.samples.size());
            }
            for (double value : axis_values) {
                if (value != std::floor(value)) {
                    grid.errors.push_back({value, "num_samples must be an integer"});
                    continue;
                }
                const auto k = static_cast<std::int64_t>(value);
                if (k < 2) {
                    grid.errors.push_back(
                        {value, "num_samples " + std::to_string(k) +
                                    " rejected: variance needs at least 2 samples"});
                    continue;
                }
                if (!traces.empty() && static_cast<std::size_t>(k) > available) {
                    grid.errors.push_back(
                        {value, "num_samples " + std::to_string(k) + " exceeds the " +
                                    std::to_string(available) + " samples available"});
                    continue;
                }
                std::vector<GenerationSet> truncated = traces;
                for (auto& set : truncated) {
                    set.samples.resize(static_cast<std::size_t>(k));
                    if (set.reference_index >= k) set.reference_index = 0;
                }
                const CorpusScore rescored = score_corpus(truncated, base_cfg);
                grid.points.push_back(
                    {value, summarize_scored(model_id, rescored.scored, base_cfg.threshold)});
            }
            break;
        }
        case AblationAxis::length_bucket: {
            const CorpusScore base = score_corpus(traces, base_cfg);
            std::vector<double> bounds;
            for (double value : axis_values) {
                if (value < 0.0) {
                    grid.errors.push_back({value, "length bound must be >= 0"});
                    continue;
                }
                bounds.push_back(value);
            }
            for (std::size_t i = 0; i < bounds.size(); ++i) {
                const double lo = bounds[i];
                const double hi = (i + 1 < bounds.size())
                                      ? bounds[i + 1]
                                      : std::numeric_limits<double>::infinity();
                std::vector<ScoredGeneration> bucket;
                for (const auto& record : base.scored) {
                    const auto length = static_cast<double>(record.scored_count);
                    if (length >= lo && length < hi) bucket.push_back(record);
                }
                grid.points.push_back({lo, summarize_scored(model_id, bucket, base_cfg.threshold)});
            }
            break;
        }
    }
    return grid;
}

}  // namespace tokvar

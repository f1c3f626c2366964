#include "tokvar/report.hpp"

#include <sstream>

#include <json.hpp>

#include "tokvar/ioutil.hpp"

namespace tokvar {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::string opt_cell(const std::optional<double>& value) {
    return value ? format_double(*value) : std::string{};
}

}  // namespace

void write_rates_csv(const std::filesystem::path& path, const std::vector<RateSummary>& rates) {
    std::ostringstream out;
    out << "model_id,total_tokens,scored_tokens,hallucinated_tokens,rate_percent,rate_display\n";
    for (const auto& rate : rates) {
        out << csv_escape(rate.model_id) << ',' << rate.total_tokens << ',' << rate.scored_tokens
            << ',' << rate.hallucinated_tokens << ',' << format_double(rate.rate_percent) << ','
            << rate.rate_display << '\n';
    }
    write_file_atomic(path, out.str());
}

void write_position_profile_csv(const std::filesystem::path& path,
                                const std::vector<PositionProfile>& profiles) {
    std::ostringstream out;
    out << "model_id,position,support_count,flagged_count,flag_probability,mean_variance\n";
    for (const auto& profile : profiles) {
        for (std::size_t t = 0; t < profile.positions.size(); ++t) {
            const auto& bucket = profile.positions[t];
            out << csv_escape(profile.model_id) << ',' << t << ',' << bucket.support_count << ','
                << bucket.flagged_count << ',' << opt_cell(bucket.flag_probability) << ','
                << opt_cell(bucket.mean_variance) << '\n';
        }
    }
    write_file_atomic(path, out.str());
}

void write_histogram_csv(const std::filesystem::path& path,
                         const std::vector<VarianceDistribution>& dists) {
    std::ostringstream out;
    out << "model_id,bin_index,bin_lo,bin_hi,count\n";
    for (const auto& dist : dists) {
        for (std::size_t i = 0; i < dist.bin_counts.size(); ++i) {
            out << csv_escape(dist.model_id) << ',' << i << ',' << format_double(dist.bin_edges[i])
                << ',' << format_double(dist.bin_edges[i + 1]) << ',' << dist.bin_counts[i] << '\n';
        }
    }
    write_file_atomic(path, out.str());
}

void write_cdf_csv(const std::filesystem::path& path,
                   const std::vector<VarianceDistribution>& dists) {
    std::ostringstream out;
    out << "model_id,variance_value,cumulative_fraction\n";
    for (const auto& dist : dists) {
        for (const auto& [edge, fraction] : dist.cdf_points) {
            out << csv_escape(dist.model_id) << ',' << format_double(edge) << ','
                << format_double(fraction) << '\n';
        }
    }
    write_file_atomic(path, out.str());
}

void write_heatmap_csv(const std::filesystem::path& path, const HeatmapMatrix& heatmap) {
    std::ostringstream out;
    out << "prompt_id,model_id,position,token,variance\n";
    for (std::size_t row = 0; row < heatmap.rows.size(); ++row) {
        for (std::size_t t = 0; t < heatmap.rows[row].size(); ++t) {
            const HeatmapCell& cell = heatmap.rows[row][t];
            out << csv_escape(heatmap.prompt_id) << ',' << csv_escape(heatmap.model_ids[row]) << ','
                << t << ',' << csv_escape(cell.token) << ',' << opt_cell(cell.variance) << '\n';
        }
    }
    write_file_atomic(path, out.str());
}

void write_kl_csv(const std::filesystem::path& path, const ModelComparison& cmp) {
    std::ostringstream out;
    out << "model_a,model_b,position,support_a,support_b,kl_ab,kl_ba,kl_sym\n";
    for (const auto& pc : cmp.positions) {
        out << csv_escape(cmp.model_a) << ',' << csv_escape(cmp.model_b) << ',' << pc.position
            << ',' << pc.support_a << ',' << pc.support_b << ',' << format_double(pc.kl_ab) << ','
            << format_double(pc.kl_ba) << ',' << format_double(pc.kl_sym) << '\n';
    }
    write_file_atomic(path, out.str());
}

void write_mean_diff_csv(const std::filesystem::path& path, const ModelComparison& cmp) {
    std::ostringstream out;
    out << "model_a,model_b,position,abs_mean_variance_diff\n";
    for (const auto& pc : cmp.positions) {
        out << csv_escape(cmp.model_a) << ',' << csv_escape(cmp.model_b) << ',' << pc.position
            << ',' << format_double(pc.abs_mean_variance_diff) << '\n';
    }
    write_file_atomic(path, out.str());
}

void write_kl_overall_csv(const std::filesystem::path& path, const ModelComparison& cmp) {
    std::ostringstream out;
    out << "model_a,model_b,kl_ab,kl_ba,kl_sym\n";
    if (cmp.overall_defined) {
        out << csv_escape(cmp.model_a) << ',' << csv_escape(cmp.model_b) << ','
            << format_double(cmp.overall.kl_pq) << ',' << format_double(cmp.overall.kl_qp) << ','
            << format_double(cmp.overall.kl_sym) << '\n';
    }
    write_file_atomic(path, out.str());
}

void write_ablation_csv(const std::filesystem::path& path, const AblationGrid& grid) {
    std::ostringstream out;
    out << "axis,axis_value,model_id,total_tokens,scored_tokens,hallucinated_tokens,"
           "rate_percent,rate_display\n";
    for (const auto& point : grid.points) {
        out << to_string(grid.axis) << ',' << format_double(point.axis_value) << ','
            << csv_escape(point.summary.model_id) << ',' << point.summary.total_tokens << ','
            << point.summary.scored_tokens << ',' << point.summary.hallucinated_tokens << ','
            << format_double(point.summary.rate_percent) << ',' << point.summary.rate_display
            << '\n';
    }
    write_file_atomic(path, out.str());
}

namespace {

ordered_json rate_to_json(const RateSummary& rate) {
    ordered_json j;
    j["model_id"] = rate.model_id;
    j["total_tokens"] = rate.total_tokens;
    j["scored_tokens"] = rate.scored_tokens;
    j["hallucinated_tokens"] = rate.hallucinated_tokens;
    j["rate_percent"] = rate.rate_percent;
    j["rate_display"] = rate.rate_display;
    return j;
}

ordered_json profile_to_json(const PositionProfile& profile) {
    ordered_json j;
    j["model_id"] = profile.model_id;
    j["max_position"] = profile.max_position;
    ordered_json positions = ordered_json::array();
    for (std::size_t t = 0; t < profile.positions.size(); ++t) {
        const auto& bucket = profile.positions[t];
        ordered_json b;
        b["position"] = t;
        b["support_count"] = bucket.support_count;
        b["flagged_count"] = bucket.flagged_count;
        b["flag_probability"] =
            bucket.flag_probability ? ordered_json(*bucket.flag_probability) : ordered_json(nullptr);
        b["mean_variance"] =
            bucket.mean_variance ? ordered_json(*bucket.mean_variance) : ordered_json(nullptr);
        positions.push_back(std::move(b));
    }
    j["positions"] = std::move(positions);
    return j;
}

ordered_json distribution_to_json(const VarianceDistribution& dist) {
    ordered_json j;
    j["model_id"] = dist.model_id;
    j["bin_edges"] = dist.bin_edges;
    j["bin_counts"] = dist.bin_counts;
    ordered_json cdf = ordered_json::array();
    for (const auto& [edge, fraction] : dist.cdf_points) {
        cdf.push_back(ordered_json::array({edge, fraction}));
    }
    j["cdf"] = std::move(cdf);
    return j;
}

}  // namespace

void write_report_json(const std::filesystem::path& path, const std::vector<RateSummary>& rates,
                       const std::vector<PositionProfile>& profiles,
                       const std::vector<VarianceDistribution>& dists) {
    ordered_json report;
    report["rates"] = ordered_json::array();
    for (const auto& rate : rates) report["rates"].push_back(rate_to_json(rate));
    report["position_profiles"] = ordered_json::array();
    for (const auto& profile : profiles) {
        report["position_profiles"].push_back(profile_to_json(profile));
    }
    report["variance_distributions"] = ordered_json::array();
    for (const auto& dist : dists) {
        report["variance_distributions"].push_back(distribution_to_json(dist));
    }
    write_file_atomic(path, report.dump(2) + "\n");
}

}  // namespace tokvar

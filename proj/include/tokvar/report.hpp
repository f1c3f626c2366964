#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tokvar/analytics.hpp"

namespace tokvar {

// Plot-ready CSV emission, one file per figure family, plus the combined
// JSON report. All writes are atomic (temp file + rename) and deterministic:
// doubles are rendered with shortest round-trip formatting.

// shortest decimal form that parses back to the same double
std::string format_double(double value);

void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

void write_rates_csv(const std::filesystem::path& path,
                     const std::vector<RateSummary>& rates);
void write_position_profile_csv(const std::filesystem::path& path,
                                const std::vector<PositionProfile>& profiles);
void write_histogram_csv(const std::filesystem::path& path,
                         const std::vector<VarianceDistribution>& dists);
void write_cdf_csv(const std::filesystem::path& path,
                   const std::vector<VarianceDistribution>& dists);
void write_heatmap_csv(const std::filesystem::path& path, const HeatmapMatrix& heatmap);
void write_kl_csv(const std::filesystem::path& path, const ModelComparison& cmp);
void write_mean_diff_csv(const std::filesystem::path& path, const ModelComparison& cmp);
void write_kl_overall_csv(const std::filesystem::path& path, const ModelComparison& cmp);
void write_ablation_csv(const std::filesystem::path& path, const AblationGrid& grid);

/// Combined structured report for one analyze run.
void write_report_json(const std::filesystem::path& path,
                       const std::vector<RateSummary>& rates,
                       const std::vector<PositionProfile>& profiles,
                       const std::vector<VarianceDistribution>& dists);

}  // namespace tokvar

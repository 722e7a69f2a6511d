#pragma once

// Metric report files. CSV columns:
//   case_id,region,dice,sensitivity,specificity,hd95_mm,flags
// one row per (case, region); undefined values are empty fields and flags are
// ';'-separated tokens. Numbers use 6 significant digits (printf %.6g).

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "voxmix/seg_metrics.hpp"

namespace voxmix {

enum class ReportFormat { Csv, Json };

inline constexpr std::string_view kReportCsvHeader =
    "case_id,region,dice,sensitivity,specificity,hd95_mm,flags";

std::string format_g6(double v);

std::string format_report_csv(std::span<const MetricsReport> reports);
/// Throws FormatError on a malformed document.
std::vector<MetricsReport> parse_report_csv(std::string_view text);

nlohmann::json report_to_json(std::span<const MetricsReport> reports);
nlohmann::json summary_to_json(const ReportSummary& summary);

/// Throws ConfigError for an empty list, DataError on I/O failure.
void write_report(std::span<const MetricsReport> reports, const std::filesystem::path& path,
                  ReportFormat format);

}  // namespace voxmix

#include "voxmix/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "voxmix/error.hpp"

namespace voxmix {

using nlohmann::json;

std::string format_g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

namespace {

std::string opt_field(const std::optional<double>& v) { return v ? format_g6(*v) : std::string(); }

std::string join_flags(std::uint32_t flags) {
  std::string out;
  for (const auto& t : flag_tokens(flags)) {
    if (!out.empty()) out += ';';
    out += t;
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw FormatError("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw FormatError("bad number '" + s + "'");
  }
}

// Round to what the CSV would show, so JSON and CSV carry the same values.
json g6_value(const std::optional<double>& v) {
  if (!v) return nullptr;
  return std::stod(format_g6(*v));
}

}  // namespace

std::string format_report_csv(std::span<const MetricsReport> reports) {
  std::string out(kReportCsvHeader);
  out += '\n';
  for (const auto& r : reports) {
    for (const auto& m : r.regions) {
      out += r.case_id + ',' + m.region + ',' + format_g6(m.dice) + ',' +
             opt_field(m.sensitivity) + ',' + opt_field(m.specificity) + ',' +
             opt_field(m.hd95_mm) + ',' + join_flags(m.flags) + '\n';
    }
  }
  return out;
}

std::vector<MetricsReport> parse_report_csv(std::string_view text) {
  auto lines = split(text, '\n');
  if (lines.empty() || lines.front() != kReportCsvHeader) {
    throw FormatError("report CSV: missing or wrong header");
  }
  std::vector<MetricsReport> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.empty()) {
      if (i + 1 == lines.size()) break;
      throw FormatError("report CSV: blank line " + std::to_string(i + 1));
    }
    auto f = split(line, ',');
    if (f.size() != 7) throw FormatError("report CSV: line " + std::to_string(i + 1) + " has " +
                                         std::to_string(f.size()) + " fields");
    RegionMetrics m;
    m.region = f[1];
    const auto d = parse_number(f[2]);
    if (!d) throw FormatError("report CSV: empty dice on line " + std::to_string(i + 1));
    m.dice = *d;
    m.sensitivity = parse_number(f[3]);
    m.specificity = parse_number(f[4]);
    m.hd95_mm = parse_number(f[5]);
    if (!f[6].empty()) {
      for (const auto& t : split(f[6], ';')) m.flags |= parse_flag_token(t);
    }
    if (out.empty() || out.back().case_id != f[0]) out.push_back({f[0], {}});
    out.back().regions.push_back(std::move(m));
  }
  return out;
}

json report_to_json(std::span<const MetricsReport> reports) {
  json rows = json::array();
  for (const auto& r : reports) {
    for (const auto& m : r.regions) {
      rows.push_back({{"case_id", r.case_id},
                      {"region", m.region},
                      {"dice", g6_value(m.dice)},
                      {"sensitivity", g6_value(m.sensitivity)},
                      {"specificity", g6_value(m.specificity)},
                      {"hd95_mm", g6_value(m.hd95_mm)},
                      {"flags", flag_tokens(m.flags)}});
    }
  }
  return rows;
}

json summary_to_json(const ReportSummary& summary) {
  json regions = json::object();
  for (const auto& region : summary.region_order) {
    json metrics = json::object();
    for (const auto& name : metric_names()) {
      const auto& s = summary.stats.at(region).at(name);
      metrics[name] = {{"count", s.count},     {"excluded", s.excluded},
                       {"mean", g6_value(s.mean)}, {"median", g6_value(s.median)},
                       {"q1", g6_value(s.q1)},     {"q3", g6_value(s.q3)},
                       {"min", g6_value(s.min)},   {"max", g6_value(s.max)}};
    }
    regions[region] = metrics;
  }
  return {{"cases", summary.cases}, {"regions", regions}};
}

void write_report(std::span<const MetricsReport> reports, const std::filesystem::path& path,
                  ReportFormat format) {
  if (reports.empty()) throw ConfigError("write_report: no reports");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  if (format == ReportFormat::Csv) {
    out << format_report_csv(reports);
  } else {
    out << report_to_json(reports).dump(2) << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace voxmix

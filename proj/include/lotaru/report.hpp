#pragma once

#include "lotaru/evaluation.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace lotaru {

enum class ReportFormat { Csv, Svg };

ReportFormat parse_report_format(const std::string& text);

struct NamedCdf {
    std::string name;
    std::vector<CdfPoint> points;
};

/// Fixed six-significant-digit rendering used in every report.
std::string format_number(double v);

void write_summary_csv(std::ostream& out, const std::vector<ErrorSummary>& summaries,
                       const std::vector<GroupKey>& group_by);
void write_cdf_csv(std::ostream& out, const std::vector<NamedCdf>& cdfs);
void write_grid_csv(std::ostream& out, const MpeGrid& grid);

/// Step-line chart of one or more error CDFs.
void write_cdf_svg(std::ostream& out, const std::vector<NamedCdf>& cdfs, const std::string& title = "Error CDF");

/// Bar chart of MPE per summary group with a p95 whisker.
void write_summary_svg(std::ostream& out, const std::vector<ErrorSummary>& summaries,
                       const std::string& title = "Median prediction error");

/// Writes summary.<ext> and, when CDFs are given, cdf.<ext> into `dir`.
/// Returns the written paths. Throws on empty summaries or unwritable paths.
std::vector<std::filesystem::path> emit_report(const std::filesystem::path& dir,
                                               const std::vector<ErrorSummary>& summaries,
                                               const std::vector<NamedCdf>& cdfs, ReportFormat format,
                                               const std::vector<GroupKey>& group_by);

}  // namespace lotaru

#include "lotaru/report.hpp"

#include "lotaru/csv.hpp"
#include "lotaru/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace lotaru {

namespace {

constexpr const char* kModule = "report";

constexpr std::array<const char*, 6> kPalette = {"#1f77b4", "#d62728", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b"};

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

// Minimal SVG document builder: fixed canvas, plot area with margins.
class Svg {
public:
    static constexpr double kWidth = 640, kHeight = 400;
    static constexpr double kLeft = 60, kRight = 150, kTop = 40, kBottom = 50;

    explicit Svg(const std::string& title) {
        body_ << fmt::format(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n", kWidth,
            kHeight, kWidth, kHeight);
        body_ << "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        text(kWidth / 2, 22, title, "middle", 15);
    }

    double plot_w() const { return kWidth - kLeft - kRight; }
    double plot_h() const { return kHeight - kTop - kBottom; }
    double px(double fx) const { return kLeft + fx * plot_w(); }
    double py(double fy) const { return kTop + (1.0 - fy) * plot_h(); }

    void line(double x1, double y1, double x2, double y2, const char* stroke, double width = 1.0) {
        body_ << fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" "
                             "stroke-width=\"{}\"/>\n",
                             x1, y1, x2, y2, stroke, width);
    }
    void rect(double x, double y, double w, double h, const char* fill) {
        body_ << fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n", x,
                             y, w, h, fill);
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, const char* stroke) {
        body_ << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << stroke << "\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            body_ << (i ? " " : "") << fmt::format("{:.2f},{:.2f}", pts[i].first, pts[i].second);
        }
        body_ << "\"/>\n";
    }
    void text(double x, double y, std::string_view s, const char* anchor = "start", int size = 11) {
        body_ << fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"{}\" "
                             "text-anchor=\"{}\">{}</text>\n",
                             x, y, size, anchor, xml_escape(s));
    }

    // Frame with y ticks 0..1 scaled to `y_max` and x ticks 0..x_max.
    void axes(double x_max, double y_max, const std::string& x_label, const std::string& y_label, bool x_ticks = true) {
        line(px(0), py(0), px(1), py(0), "black");
        line(px(0), py(0), px(0), py(1), "black");
        for (int i = 0; i <= 4; ++i) {
            const double f = i / 4.0;
            line(px(0) - 4, py(f), px(0), py(f), "black");
            text(px(0) - 6, py(f) + 4, format_number(f * y_max), "end", 10);
            if (x_ticks) {
                line(px(f), py(0), px(f), py(0) + 4, "black");
                text(px(f), py(0) + 16, format_number(f * x_max), "middle", 10);
            }
        }
        text(px(0.5), kHeight - 10, x_label, "middle");
        text(14, py(0.5), y_label, "middle");
    }

    void legend(std::size_t i, const std::string& name) {
        const double y = kTop + 10 + 18.0 * static_cast<double>(i);
        rect(kWidth - kRight + 15, y - 9, 12, 12, kPalette[i % kPalette.size()]);
        text(kWidth - kRight + 32, y + 1, name);
    }

    std::string finish() {
        body_ << "</svg>\n";
        return body_.str();
    }

private:
    std::ostringstream body_;
};

std::string ext(ReportFormat f) { return f == ReportFormat::Csv ? ".csv" : ".svg"; }

std::string summary_label(const ErrorSummary& s) {
    std::string label;
    for (std::size_t i = 0; i < s.key.size(); ++i) label += (i ? "/" : "") + s.key[i];
    return label.empty() ? "all" : label;
}

}  // namespace

ReportFormat parse_report_format(const std::string& text) {
    if (text == "csv") return ReportFormat::Csv;
    if (text == "svg") return ReportFormat::Svg;
    throw ValidationError(kModule, "unknown report format '" + text + "'");
}

std::string format_number(double v) { return fmt::format("{:.6g}", v); }

void write_summary_csv(std::ostream& out, const std::vector<ErrorSummary>& summaries,
                       const std::vector<GroupKey>& group_by) {
    std::vector<std::string> header;
    for (auto k : group_by) header.push_back(to_string(k));
    for (const char* h : {"count", "mpe", "mean", "p50", "p75", "p90", "p95", "min", "max", "stddev"}) {
        header.emplace_back(h);
    }
    out << csv::join(header) << '\n';
    for (const auto& s : summaries) {
        auto row = s.key;
        row.push_back(std::to_string(s.count));
        for (double v : {s.mpe, s.mean, s.p50, s.p75, s.p90, s.p95, s.min, s.max, s.stddev}) {
            row.push_back(format_number(v));
        }
        out << csv::join(row) << '\n';
    }
}

void write_cdf_csv(std::ostream& out, const std::vector<NamedCdf>& cdfs) {
    out << "series,err,fraction\n";
    for (const auto& c : cdfs) {
        for (const auto& p : c.points) {
            out << csv::join({c.name, format_number(p.err), format_number(p.fraction)}) << '\n';
        }
    }
}

void write_grid_csv(std::ostream& out, const MpeGrid& grid) {
    std::set<std::string> nodes;
    for (const auto& [est, row] : grid) {
        for (const auto& [node, v] : row) {
            if (node != kAllNodes) nodes.insert(node);
        }
    }
    std::vector<std::string> header{"estimator"};
    header.insert(header.end(), nodes.begin(), nodes.end());
    header.emplace_back(kAllNodes);
    out << csv::join(header) << '\n';
    for (const auto& [est, row] : grid) {
        std::vector<std::string> cells{est};
        for (std::size_t i = 1; i < header.size(); ++i) {
            const auto it = row.find(header[i]);
            cells.push_back(it == row.end() ? "" : format_number(it->second));
        }
        out << csv::join(cells) << '\n';
    }
}

void write_cdf_svg(std::ostream& out, const std::vector<NamedCdf>& cdfs, const std::string& title) {
    double x_max = 0.0;
    for (const auto& c : cdfs) {
        if (!c.points.empty()) x_max = std::max(x_max, c.points.back().err);
    }
    if (!(x_max > 0.0)) x_max = 1.0;

    Svg svg(title);
    svg.axes(x_max, 1.0, "prediction error", "fraction");
    for (std::size_t i = 0; i < cdfs.size(); ++i) {
        std::vector<std::pair<double, double>> pts{{svg.px(0), svg.py(0)}};
        double prev = 0.0;
        for (const auto& p : cdfs[i].points) {
            const double x = svg.px(p.err / x_max);
            pts.emplace_back(x, svg.py(prev));
            pts.emplace_back(x, svg.py(p.fraction));
            prev = p.fraction;
        }
        svg.polyline(pts, kPalette[i % kPalette.size()]);
        svg.legend(i, cdfs[i].name);
    }
    out << svg.finish();
}

void write_summary_svg(std::ostream& out, const std::vector<ErrorSummary>& summaries, const std::string& title) {
    double y_max = 0.0;
    for (const auto& s : summaries) y_max = std::max(y_max, s.p95);
    if (!(y_max > 0.0)) y_max = 1.0;

    Svg svg(title);
    svg.axes(1.0, y_max, "group", "error", false);
    const double slot = 1.0 / static_cast<double>(std::max<std::size_t>(summaries.size(), 1));
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        const auto& s = summaries[i];
        const double x0 = svg.px(slot * (static_cast<double>(i) + 0.15));
        const double w = svg.px(slot * 0.7) - svg.px(0);
        const char* color = kPalette[i % kPalette.size()];
        svg.rect(x0, svg.py(s.mpe / y_max), w, svg.py(0) - svg.py(s.mpe / y_max), color);
        const double cx = x0 + w / 2;
        svg.line(cx, svg.py(s.p75 / y_max), cx, svg.py(s.p95 / y_max), "black");
        svg.line(cx - w / 4, svg.py(s.p95 / y_max), cx + w / 4, svg.py(s.p95 / y_max), "black");
        svg.legend(i, summary_label(s));
    }
    out << svg.finish();
}

std::vector<std::filesystem::path> emit_report(const std::filesystem::path& dir,
                                               const std::vector<ErrorSummary>& summaries,
                                               const std::vector<NamedCdf>& cdfs, ReportFormat format,
                                               const std::vector<GroupKey>& group_by) {
    if (summaries.empty()) throw ValidationError(kModule, "no summaries to report");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(kModule, "cannot create report directory " + dir.string() + ": " + ec.message());

    std::vector<std::filesystem::path> written;
    auto write = [&](const std::string& stem, auto&& body) {
        const auto path = dir / (stem + ext(format));
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(kModule, "cannot write " + path.string());
        body(out);
        out.flush();
        if (!out) throw Error(kModule, "write failed for " + path.string());
        written.push_back(path);
    };
    write("summary", [&](std::ostream& out) {
        if (format == ReportFormat::Csv) write_summary_csv(out, summaries, group_by);
        else write_summary_svg(out, summaries);
    });
    if (!cdfs.empty()) {
        write("cdf", [&](std::ostream& out) {
            if (format == ReportFormat::Csv) write_cdf_csv(out, cdfs);
            else write_cdf_svg(out, cdfs);
        });
    }
    return written;
}

}  // namespace lotaru

#include "lotaru/trace.hpp"

#include "lotaru/csv.hpp"
#include "lotaru/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <tuple>

namespace lotaru {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::optional<double> to_double(std::string_view text) {
    text = csv::trim(text);
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

double size_multiplier(SizeUnit unit) {
    switch (unit) {
        case SizeUnit::Bytes: return 1.0;
        case SizeUnit::KB: return 1024.0;
        case SizeUnit::MB: return 1024.0 * 1024.0;
        case SizeUnit::GB: return 1024.0 * 1024.0 * 1024.0;
    }
    return 1.0;
}

SizeUnit parse_size_unit(const std::string& text) {
    const auto t = lower(text);
    if (t == "b" || t == "bytes") return SizeUnit::Bytes;
    if (t == "kb" || t == "kib") return SizeUnit::KB;
    if (t == "mb" || t == "mib") return SizeUnit::MB;
    if (t == "gb" || t == "gib") return SizeUnit::GB;
    throw ValidationError("trace-data", "unknown size unit '" + text + "'");
}

TimeUnit parse_time_unit(const std::string& text) {
    const auto t = lower(text);
    if (t == "ms" || t == "milliseconds") return TimeUnit::Milliseconds;
    if (t == "s" || t == "sec" || t == "seconds") return TimeUnit::Seconds;
    throw ValidationError("trace-data", "unknown time unit '" + text + "'");
}

bool is_absent(std::string_view cell) {
    cell = csv::trim(cell);
    return cell.empty() || cell == "-" || cell == "NA";
}

// Reads "# key = value" metadata comments.
void read_metadata_comment(std::string_view line, TraceMetadata& metadata) {
    line.remove_prefix(1);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) return;
    const auto key = csv::trim(line.substr(0, eq));
    const auto value = csv::trim(line.substr(eq + 1));
    if (!key.empty()) metadata[std::string(key)] = std::string(value);
}

}  // namespace

std::string to_string(FreqMode mode) {
    return mode == FreqMode::Normal ? "Normal" : "Reduced";
}

std::optional<FreqMode> parse_freq_mode(const std::string& text) {
    const auto t = lower(csv::trim(text));
    if (t == "normal" || t == "n" || t == "old") return FreqMode::Normal;
    if (t == "reduced" || t == "r" || t == "new") return FreqMode::Reduced;
    return std::nullopt;
}

ColumnMapping parse_column_mapping(std::istream& in) {
    ColumnMapping m;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = csv::trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ValidationError("trace-data", fmt::format("schema line {}: expected key = value", line_no));
        }
        const std::string key(csv::trim(body.substr(0, eq)));
        const std::string value(csv::trim(body.substr(eq + 1)));
        if (key == "workflow") m.workflow = value;
        else if (key == "task") m.task = value;
        else if (key == "node") m.node = {value};
        else if (key == "realtime" || key == "runtime") m.realtime = value;
        else if (key == "cpu_percent") m.cpu_percent = value;
        else if (key == "rss") m.rss = value;
        else if (key == "size_compressed") m.size_compressed = value;
        else if (key == "size_uncompressed") m.size_uncompressed = value;
        else if (key == "freq_mode") m.freq_mode = value;
        else if (key == "partition_label") m.partition_label = value;
        else if (key == "size_unit") m.size_unit = parse_size_unit(value);
        else if (key == "time_unit") m.time_unit = parse_time_unit(value);
        else if (key == "delimiter") {
            if (value == "\\t" || value == "tab") m.delimiter = '\t';
            else if (value.size() == 1) m.delimiter = value[0];
            else throw ValidationError("trace-data", "delimiter must be a single character");
        } else if (key == "freq_mode.default") {
            m.default_freq_mode = parse_freq_mode(value);
            if (!m.default_freq_mode) throw ValidationError("trace-data", "bad freq_mode.default '" + value + "'");
        } else {
            throw ValidationError("trace-data", fmt::format("schema line {}: unknown key '{}'", line_no, key));
        }
    }
    return m;
}

ParseResult parse_traces(std::istream& in, const ColumnMapping& schema) {
    ParseResult result;
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        const auto body = csv::trim(line);
        if (body.empty()) continue;
        if (body.front() == '#') {
            read_metadata_comment(body, result.metadata);
            continue;
        }
        header = csv::split_line(body, schema.delimiter);
        for (auto& h : header) h = std::string(csv::trim(h));
        break;
    }
    if (header.empty()) throw ValidationError("trace-data", "trace file has no header row");

    auto find = [&](const std::string& name) -> std::optional<std::size_t> {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    };
    auto require = [&](const std::string& name) {
        auto idx = find(name);
        if (!idx) throw ValidationError("trace-data", "missing required column '" + name + "'");
        return *idx;
    };

    const std::size_t c_workflow = require(schema.workflow);
    const std::size_t c_task = require(schema.task);
    std::optional<std::size_t> c_node_opt;
    for (const auto& alias : schema.node) {
        if ((c_node_opt = find(alias))) break;
    }
    if (!c_node_opt) {
        throw ValidationError("trace-data", "missing required column '" +
                                                (schema.node.empty() ? std::string("Node") : schema.node.front()) + "'");
    }
    const std::size_t c_node = *c_node_opt;
    const std::size_t c_realtime = require(schema.realtime);
    const std::size_t c_comp = require(schema.size_compressed);
    const std::size_t c_uncomp = require(schema.size_uncompressed);
    std::optional<std::size_t> c_freq = find(schema.freq_mode);
    if (!c_freq && !schema.default_freq_mode) require(schema.freq_mode);
    const std::size_t c_label = require(schema.partition_label);
    const auto c_cpu = find(schema.cpu_percent);
    const auto c_rss = find(schema.rss);

    const double size_mult = size_multiplier(schema.size_unit);
    const double time_mult = schema.time_unit == TimeUnit::Seconds ? 1000.0 : 1.0;

    std::size_t row = 0;
    while (std::getline(in, line)) {
        const auto body = csv::trim(line);
        if (body.empty() || body.front() == '#') continue;
        ++row;
        const auto cells = csv::split_line(body, schema.delimiter);
        auto cell = [&](std::size_t idx) -> std::string_view {
            return idx < cells.size() ? csv::trim(cells[idx]) : std::string_view{};
        };
        auto fail = [&](std::string msg) { result.errors.push_back({row, std::move(msg)}); };

        if (cells.size() < header.size()) {
            fail(fmt::format("expected {} columns, found {}", header.size(), cells.size()));
            continue;
        }

        RunRecord r;
        r.workflow = std::string(cell(c_workflow));
        r.task = std::string(cell(c_task));
        r.node = std::string(cell(c_node));
        r.partition_label = std::string(cell(c_label));
        if (r.task.empty()) { fail("empty task"); continue; }
        if (r.node.empty()) { fail("empty node"); continue; }

        const auto runtime = to_double(cell(c_realtime));
        if (!runtime) { fail(fmt::format("non-numeric runtime '{}'", cell(c_realtime))); continue; }
        r.runtime_ms = *runtime * time_mult;
        if (!(r.runtime_ms > 0.0)) { fail("runtime must be > 0"); continue; }

        bool size_ok = true;
        auto read_size = [&](std::size_t idx, std::optional<Bytes>& dst, const char* what) {
            if (is_absent(cell(idx))) return;
            const auto v = to_double(cell(idx));
            if (!v || *v < 0.0) {
                fail(fmt::format("invalid {} size '{}'", what, cell(idx)));
                size_ok = false;
                return;
            }
            dst = static_cast<Bytes>(std::llround(*v * size_mult));
        };
        read_size(c_comp, r.input_size_compressed, "compressed");
        if (!size_ok) continue;
        read_size(c_uncomp, r.input_size_uncompressed, "uncompressed");
        if (!size_ok) continue;

        if (c_freq) {
            const auto mode = parse_freq_mode(std::string(cell(*c_freq)));
            if (!mode) { fail(fmt::format("unknown freq mode '{}'", cell(*c_freq))); continue; }
            r.freq_mode = *mode;
        } else {
            r.freq_mode = *schema.default_freq_mode;
        }
        if (c_cpu && !is_absent(cell(*c_cpu))) r.cpu_percent = to_double(cell(*c_cpu));
        if (c_rss && !is_absent(cell(*c_rss))) r.rss_bytes = to_double(cell(*c_rss));

        if (r.input_size_compressed && r.input_size_uncompressed &&
            *r.input_size_uncompressed < *r.input_size_compressed) {
            result.warnings.push_back(fmt::format("row {}: uncompressed size smaller than compressed size", row));
        }
        result.records.push_back(std::move(r));
    }
    return result;
}

void write_traces(std::ostream& out, const std::vector<RunRecord>& records, const TraceMetadata& metadata) {
    for (const auto& [key, value] : metadata) out << "# " << key << " = " << value << '\n';
    out << "Workflow,Task,Node,Realtime,%cpu,rss,InputSizeCompressed,InputSizeUncompressed,FreqMode,PartitionLabel\n";
    auto opt_num = [](const auto& v) { return v ? fmt::format("{}", *v) : std::string{}; };
    for (const auto& r : records) {
        out << csv::join({r.workflow, r.task, r.node, fmt::format("{}", r.runtime_ms), opt_num(r.cpu_percent),
                          opt_num(r.rss_bytes), opt_num(r.input_size_compressed), opt_num(r.input_size_uncompressed),
                          to_string(r.freq_mode), r.partition_label})
            << '\n';
    }
}

EffectiveSize effective_input_size(const RunRecord& r) {
    if (r.input_size_uncompressed && (*r.input_size_uncompressed > 0 || !r.input_size_compressed)) {
        return {*r.input_size_uncompressed, false};
    }
    if (r.input_size_compressed) return {*r.input_size_compressed, true};
    throw ValidationError("trace-data", "record for task '" + r.task + "' has no input size");
}

std::map<std::string, TrainingSet> build_training_sets(const std::vector<RunRecord>& records) {
    std::map<std::string, TrainingSet> sets;
    std::set<std::tuple<std::string, std::string, FreqMode>> seen;
    std::map<std::pair<std::string, std::string>, double> normal_by_label;
    std::vector<const RunRecord*> reduced;

    for (const auto& r : records) {
        if (r.node != records.front().node) {
            throw ValidationError("trace-data", fmt::format("training records span several nodes ('{}' and '{}')",
                                                            records.front().node, r.node));
        }
        if (!seen.emplace(r.task, r.partition_label, r.freq_mode).second) {
            throw ValidationError("trace-data", fmt::format("duplicate record for task '{}', partition '{}', mode {}",
                                                            r.task, r.partition_label, to_string(r.freq_mode)));
        }
        auto& ts = sets[r.task];
        ts.task = r.task;
        const SizeRuntime point{static_cast<double>(effective_input_size(r).bytes), r.runtime_ms};
        if (r.freq_mode == FreqMode::Normal) {
            ts.normal_runs.push_back(point);
            normal_by_label[{r.task, r.partition_label}] = r.runtime_ms;
        } else {
            ts.reduced_runs.push_back(point);
            reduced.push_back(&r);
        }
    }
    for (const RunRecord* r : reduced) {
        const auto it = normal_by_label.find({r->task, r->partition_label});
        if (it == normal_by_label.end()) continue;
        sets[r->task].pairs.push_back({r->partition_label, it->second, r->runtime_ms});
    }
    return sets;
}

}  // namespace lotaru

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lotaru {

using Bytes = std::uint64_t;

enum class FreqMode { Normal, Reduced };

std::string to_string(FreqMode mode);
std::optional<FreqMode> parse_freq_mode(const std::string& text);

/// One observed task execution.
struct RunRecord {
    std::string workflow;
    std::string task;
    std::string node;
    std::optional<Bytes> input_size_compressed;
    std::optional<Bytes> input_size_uncompressed;
    double runtime_ms = 0.0;
    FreqMode freq_mode = FreqMode::Normal;
    std::string partition_label;
    std::optional<double> cpu_percent;
    std::optional<double> rss_bytes;

    bool operator==(const RunRecord&) const = default;
};

enum class SizeUnit { Bytes, KB, MB, GB };
enum class TimeUnit { Milliseconds, Seconds };

/// Maps logical RunRecord fields to CSV header names and declares the units
/// the file uses. Sizes and times are converted to bytes and milliseconds.
struct ColumnMapping {
    std::string workflow = "Workflow";
    std::string task = "Task";
    std::vector<std::string> node = {"Node", "Machine"};
    std::string realtime = "Realtime";
    std::string cpu_percent = "%cpu";
    std::string rss = "rss";
    std::string size_compressed = "InputSizeCompressed";
    std::string size_uncompressed = "InputSizeUncompressed";
    std::string freq_mode = "FreqMode";
    std::string partition_label = "PartitionLabel";

    SizeUnit size_unit = SizeUnit::Bytes;
    TimeUnit time_unit = TimeUnit::Milliseconds;
    char delimiter = ',';

    /// Used when the freq-mode column is absent from the file.
    std::optional<FreqMode> default_freq_mode;
};

/// Reads a flat `key = value` schema document. Recognized keys are the
/// ColumnMapping field names plus `size_unit`, `time_unit`, `delimiter`,
/// and `freq_mode.default`.
ColumnMapping parse_column_mapping(std::istream& in);

struct RowError {
    std::size_t row = 0;  // 1-based data row, header excluded
    std::string message;
};

/// Metadata carried in `# key = value` comment lines ahead of the header.
using TraceMetadata = std::map<std::string, std::string>;

struct ParseResult {
    std::vector<RunRecord> records;
    std::vector<RowError> errors;
    std::vector<std::string> warnings;
    TraceMetadata metadata;
};

/// Parses delimiter-separated trace rows. A missing required column throws
/// ValidationError; bad rows are collected and parsing continues.
ParseResult parse_traces(std::istream& in, const ColumnMapping& schema = {});

/// Writes records with the default column names, sizes in bytes and
/// runtimes in milliseconds.
void write_traces(std::ostream& out, const std::vector<RunRecord>& records,
                  const TraceMetadata& metadata = {});

struct EffectiveSize {
    Bytes bytes = 0;
    bool compressed_fallback = false;
};

/// Uncompressed size when present (and non-zero), otherwise the compressed
/// size flagged as a fallback. Throws when neither is available.
EffectiveSize effective_input_size(const RunRecord& r);

struct SizeRuntime {
    double x = 0.0;  // bytes
    double y = 0.0;  // ms
    bool operator==(const SizeRuntime&) const = default;
};

struct RunPair {
    std::string partition_label;
    double time_old_ms = 0.0;
    double time_new_ms = 0.0;
};

struct TrainingSet {
    std::string task;
    std::vector<SizeRuntime> normal_runs;
    std::vector<SizeRuntime> reduced_runs;
    std::vector<RunPair> pairs;
};

/// Groups records by task and pairs Normal/Reduced runs on partition label.
/// Throws ValidationError on a duplicate (task, label, mode) triple.
std::map<std::string, TrainingSet> build_training_sets(const std::vector<RunRecord>& records);

}  // namespace lotaru

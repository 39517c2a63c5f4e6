#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace lotaru {

struct ErrorRecord {
    std::string workflow;
    std::string task;
    std::string node;
    std::string estimator;
    double predicted_ms = 0.0;
    double actual_ms = 0.0;
    double err = 0.0;
};

/// |predicted - actual| / actual. Throws when actual <= 0.
double task_error(double predicted_ms, double actual_ms);

ErrorRecord make_error_record(std::string workflow, std::string task, std::string node, std::string estimator,
                              double predicted_ms, double actual_ms);

enum class GroupKey { Workflow, Task, Node, Estimator };

std::string to_string(GroupKey key);
/// Parses "workflow,node" style lists.
std::vector<GroupKey> parse_group_keys(const std::string& text);

struct ErrorSummary {
    std::vector<std::string> key;  // one value per group-by key
    double mpe = 0.0;              // median of err
    double mean = 0.0;
    double p50 = 0.0;
    double p75 = 0.0;
    double p90 = 0.0;
    double p95 = 0.0;
    double min = 0.0;
    double max = 0.0;
    double stddev = 0.0;
    std::size_t count = 0;
};

/// One summary per distinct key, sorted by key. Throws on empty input.
std::vector<ErrorSummary> summarize(std::span<const ErrorRecord> records, const std::vector<GroupKey>& group_by);

struct CdfPoint {
    double err = 0.0;
    double fraction = 0.0;

    bool operator==(const CdfPoint&) const = default;
};

/// Empirical CDF: one point per distinct error value.
std::vector<CdfPoint> error_cdf(std::span<const ErrorRecord> records);
std::vector<CdfPoint> error_cdf(std::vector<double> errs);

/// Smallest error reached by at least `fraction` of the records.
double cdf_quantile(std::span<const CdfPoint> cdf, double fraction);

/// MPE per estimator (rows) and node (columns), plus an "all" column.
using MpeGrid = std::map<std::string, std::map<std::string, double>>;
MpeGrid mpe_grid(std::span<const ErrorRecord> records);

inline constexpr const char* kAllNodes = "all";

/// lotaru < online-p <= online-m < naive on the "all" column. Estimators
/// missing from the grid are skipped.
bool qualitative_ordering_holds(const MpeGrid& grid);

}  // namespace lotaru

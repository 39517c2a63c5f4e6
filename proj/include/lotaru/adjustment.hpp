#pragma once

#include "lotaru/estimator.hpp"
#include "lotaru/microbench.hpp"
#include "lotaru/trace.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace lotaru {

/// Weight used when a task has no reduced-frequency pairs.
inline constexpr double kDefaultCpuWeight = 0.5;

/// Clock frequencies of the normal and the reduced local run. Only the
/// ratio matters, so any consistent unit works.
struct FrequencySetting {
    double freq_old = 1000.0;
    double freq_new = 800.0;
};

struct TaskWeight {
    std::string task;
    double median_dev = 0.0;
    double w = kDefaultCpuWeight;
    std::size_t pair_count = 0;
    bool no_reduced_run = false;

    bool operator==(const TaskWeight&) const = default;
};

/// (time_new - time_old) / time_old. Throws when time_old <= 0.
double runtime_deviation(double time_new_ms, double time_old_ms);

/// w = clamp(median_dev / (freq_old / freq_new - 1), 0, 1).
double cpu_weight(double median_dev, double freq_old, double freq_new);

/// Median deviation over the task's paired runs fed through cpu_weight.
TaskWeight task_weight(const TrainingSet& ts, const FrequencySetting& freq);

/// f_t = w * cpu_local / cpu_target + (1 - w) * io_local / io_target, where
/// the I/O score is sequential read IOPS.
double node_factor(double w, const NodeProfile& local, const NodeProfile& target);

/// Truncates a factor to two decimals, as displayed in worked examples.
double truncate_factor(double f);

struct MatrixOptions {
    std::set<double> levels = {0.5, 0.95};
    bool truncate_factor = false;
};

struct EstimateCell {
    std::string task;
    std::string node;
    double input_size = 0.0;
    Prediction prediction;  // already scaled by factor
    double factor = 1.0;
    double w = kDefaultCpuWeight;
};

struct EstimateQuery {
    std::string task;
    double input_size = 0.0;
};

/// Task x node runtime estimates. Cells are ordered by query, then node with
/// the local node first and the rest by name.
struct EstimateMatrix {
    std::vector<EstimateCell> cells;

    const EstimateCell& at(const std::string& task, const std::string& node) const;
};

/// Orders profiles local-first, then by node name.
std::vector<const NodeProfile*> ordered_nodes(const std::map<std::string, NodeProfile>& profiles,
                                              const std::string& local);

EstimateMatrix build_estimate_matrix(const std::map<std::string, TaskModel>& models,
                                     const std::map<std::string, TaskWeight>& weights,
                                     const std::map<std::string, NodeProfile>& profiles, const std::string& local,
                                     const std::vector<EstimateQuery>& queries, const MatrixOptions& options = {});

/// Scales a prediction's mean and interval bounds by a positive factor.
Prediction scale_prediction(Prediction p, double factor);

/// "133.00 s" style rendering of a millisecond value.
std::string format_seconds(double ms);

}  // namespace lotaru

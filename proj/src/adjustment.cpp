#include "lotaru/adjustment.hpp"

#include "lotaru/error.hpp"
#include "lotaru/stats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace lotaru {

namespace {
constexpr const char* kModule = "adjustment";
}

double runtime_deviation(double time_new_ms, double time_old_ms) {
    if (!(time_old_ms > 0.0)) throw ValidationError(kModule, "time_old must be > 0");
    return (time_new_ms - time_old_ms) / time_old_ms;
}

double cpu_weight(double median_dev, double freq_old, double freq_new) {
    if (!(freq_new > 0.0)) throw ValidationError(kModule, "reduced frequency must be > 0");
    if (!(freq_old > freq_new)) {
        throw ValidationError(kModule, fmt::format("normal frequency ({}) must exceed reduced frequency ({})",
                                                   freq_old, freq_new));
    }
    const double expected = freq_old / freq_new - 1.0;
    return std::max(0.0, std::min(1.0, median_dev / expected));
}

TaskWeight task_weight(const TrainingSet& ts, const FrequencySetting& freq) {
    TaskWeight tw;
    tw.task = ts.task;
    tw.pair_count = ts.pairs.size();
    if (ts.pairs.empty()) {
        tw.no_reduced_run = true;
        tw.w = kDefaultCpuWeight;
        return tw;
    }
    std::vector<double> devs;
    devs.reserve(ts.pairs.size());
    for (const auto& p : ts.pairs) devs.push_back(runtime_deviation(p.time_new_ms, p.time_old_ms));
    tw.median_dev = stats::median(devs);
    tw.w = cpu_weight(tw.median_dev, freq.freq_old, freq.freq_new);
    return tw;
}

double node_factor(double w, const NodeProfile& local, const NodeProfile& target) {
    for (const auto* p : {&local, &target}) {
        if (!(p->cpu_events_per_sec > 0.0) || !(p->read_iops > 0.0)) {
            throw ValidationError(kModule, "node '" + p->node + "' lacks a positive CPU or read I/O score");
        }
    }
    if (!(w >= 0.0 && w <= 1.0)) throw ValidationError(kModule, fmt::format("weight {} outside [0, 1]", w));
    const double cpu_ratio = local.cpu_events_per_sec / target.cpu_events_per_sec;
    const double io_ratio = local.read_iops / target.read_iops;
    // Same value as w*cpu + (1-w)*io, but exactly 1 when both ratios are 1.
    return io_ratio + w * (cpu_ratio - io_ratio);
}

double truncate_factor(double f) {
    const double t = std::floor(f * 100.0 + 1e-9) / 100.0;
    return t > 0.0 ? t : f;
}

const EstimateCell& EstimateMatrix::at(const std::string& task, const std::string& node) const {
    const auto it = std::find_if(cells.begin(), cells.end(),
                                 [&](const EstimateCell& c) { return c.task == task && c.node == node; });
    if (it == cells.end()) throw ValidationError(kModule, "no estimate for (" + task + ", " + node + ")");
    return *it;
}

std::vector<const NodeProfile*> ordered_nodes(const std::map<std::string, NodeProfile>& profiles,
                                              const std::string& local) {
    const auto it = profiles.find(local);
    if (it == profiles.end()) throw ValidationError(kModule, "unknown local node '" + local + "'");
    std::vector<const NodeProfile*> out{&it->second};
    for (const auto& [name, profile] : profiles) {
        if (name != local) out.push_back(&profile);
    }
    return out;
}

Prediction scale_prediction(Prediction p, double factor) {
    p.mean_ms *= factor;
    for (auto& [level, iv] : p.intervals) {
        iv.lower *= factor;
        iv.upper *= factor;
    }
    return p;
}

EstimateMatrix build_estimate_matrix(const std::map<std::string, TaskModel>& models,
                                     const std::map<std::string, TaskWeight>& weights,
                                     const std::map<std::string, NodeProfile>& profiles, const std::string& local,
                                     const std::vector<EstimateQuery>& queries, const MatrixOptions& options) {
    const auto nodes = ordered_nodes(profiles, local);
    const NodeProfile& local_profile = *nodes.front();

    EstimateMatrix matrix;
    for (const auto& q : queries) {
        const auto model = models.find(q.task);
        if (model == models.end()) throw ValidationError(kModule, "no model for task '" + q.task + "'");
        const auto weight = weights.find(q.task);
        if (weight == weights.end()) throw ValidationError(kModule, "no weight for task '" + q.task + "'");
        if (!(q.input_size >= 0.0)) throw ValidationError(kModule, "query input size must be >= 0");

        const Prediction local_prediction = predict(model->second, q.input_size, options.levels);
        for (const NodeProfile* node : nodes) {
            double f = node_factor(weight->second.w, local_profile, *node);
            if (options.truncate_factor) f = truncate_factor(f);
            matrix.cells.push_back(
                {q.task, node->node, q.input_size, scale_prediction(local_prediction, f), f, weight->second.w});
        }
    }
    return matrix;
}

std::string format_seconds(double ms) { return fmt::format("{:.2f} s", ms / 1000.0); }

}  // namespace lotaru

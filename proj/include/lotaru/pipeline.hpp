#pragma once

#include "lotaru/adjustment.hpp"
#include "lotaru/baselines.hpp"
#include "lotaru/evaluation.hpp"
#include "lotaru/microbench.hpp"
#include "lotaru/model_file.hpp"
#include "lotaru/trace.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lotaru {

enum class EstimatorKind { Lotaru, Naive, OnlineM, OnlineP };

std::string to_string(EstimatorKind kind);
EstimatorKind parse_estimator(const std::string& text);
/// Comma-separated names, or "all".
std::vector<EstimatorKind> parse_estimators(const std::string& text);

/// Worker count from LOTARU_THREADS, else the hardware concurrency (>= 1).
unsigned default_thread_count();

/// Runs fn(0..n-1) on up to `threads` workers; rethrows the first failure.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Reads `freq_old` / `freq_new` from trace metadata; falls back to a 20 %
/// reduction (1000 -> 800) when absent. Throws if freq_old <= freq_new.
FrequencySetting frequency_from_metadata(const TraceMetadata& metadata);

struct TrainOptions {
    ModelOptions model;
    FrequencySetting freq;
    unsigned threads = 1;
};

/// Fits one ModelFile per (workflow, task) from local training records.
/// Output is sorted by (workflow, task) regardless of thread count.
std::vector<ModelFile> train_models(const std::vector<RunRecord>& records, const TrainOptions& options);

/// Runtime prediction on `target` for an input of `x_bytes`. Lotaru scales
/// its local prediction by the node factor; the baselines have no notion of
/// node speed and return their local prediction unchanged.
double estimate_runtime(EstimatorKind kind, const ModelFile& model, double x_bytes, const NodeProfile& local,
                        const NodeProfile& target, bool truncate = false);

struct EvaluationSetup {
    std::string local;
    /// Local records with this partition label are held out as
    /// homogeneous-cluster targets instead of being used for training.
    std::string target_label = "full";
    std::vector<EstimatorKind> estimators = {EstimatorKind::Lotaru, EstimatorKind::Naive, EstimatorKind::OnlineM,
                                             EstimatorKind::OnlineP};
    TrainOptions train;
    bool truncate = false;
};

struct EvaluationResult {
    std::vector<ErrorRecord> errors;
    std::vector<std::string> warnings;
};

/// Trains on the local node's partition runs and scores every estimator
/// against the Normal-mode runs on other nodes (and held-out local runs).
EvaluationResult evaluate_traces(const std::vector<RunRecord>& records,
                                 const std::map<std::string, NodeProfile>& profiles, const EvaluationSetup& setup);

std::map<std::string, NodeProfile> index_profiles(const std::vector<NodeProfile>& profiles);

}  // namespace lotaru

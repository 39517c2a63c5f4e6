#include "lotaru/pipeline.hpp"

#include "lotaru/csv.hpp"
#include "lotaru/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace lotaru {

namespace {

constexpr const char* kModule = "pipeline";

// Everything needed to answer a query for one (workflow, task).
struct TaskEstimators {
    ModelFile file;
    std::optional<NaiveModel> naive;  // absent when some training size is 0
    OnlineModel online_m;
    OnlineModel online_p;
};

TaskEstimators make_estimators(ModelFile file) {
    TaskEstimators e{std::move(file), std::nullopt, {}, {}};
    const auto& samples = e.file.model.samples;
    const bool sizes_positive = std::all_of(samples.begin(), samples.end(), [](const auto& s) { return s.x > 0.0; });
    if (sizes_positive) e.naive = naive_fit(samples, e.file.model.task);
    e.online_m = online_fit(samples, OnlineVariant::M, e.file.model.task);
    e.online_p = online_fit(samples, OnlineVariant::P, e.file.model.task);
    return e;
}

double estimate(const TaskEstimators& e, EstimatorKind kind, double x, const NodeProfile& local,
                const NodeProfile& target, bool truncate) {
    switch (kind) {
        case EstimatorKind::Lotaru: {
            double f = node_factor(e.file.weight.w, local, target);
            if (truncate) f = truncate_factor(f);
            return predict(e.file.model, x, {}).mean_ms * f;
        }
        case EstimatorKind::Naive:
            if (!e.naive) throw ValidationError(kModule, "naive model needs training sizes > 0");
            return naive_predict(*e.naive, x);
        case EstimatorKind::OnlineM: return online_predict(e.online_m, x);
        case EstimatorKind::OnlineP: return online_predict(e.online_p, x);
    }
    return 0.0;
}

}  // namespace

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Lotaru: return "lotaru";
        case EstimatorKind::Naive: return "naive";
        case EstimatorKind::OnlineM: return "online-m";
        case EstimatorKind::OnlineP: return "online-p";
    }
    return {};
}

EstimatorKind parse_estimator(const std::string& text) {
    for (auto k : {EstimatorKind::Lotaru, EstimatorKind::Naive, EstimatorKind::OnlineM, EstimatorKind::OnlineP}) {
        if (to_string(k) == text) return k;
    }
    throw ValidationError(kModule, "unknown estimator '" + text + "'");
}

std::vector<EstimatorKind> parse_estimators(const std::string& text) {
    if (text == "all") {
        return {EstimatorKind::Lotaru, EstimatorKind::Naive, EstimatorKind::OnlineM, EstimatorKind::OnlineP};
    }
    std::vector<EstimatorKind> out;
    std::stringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        const auto k = parse_estimator(std::string(csv::trim(tok)));
        if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
    }
    if (out.empty()) throw ValidationError(kModule, "no estimator selected");
    return out;
}

unsigned default_thread_count() {
    if (const char* env = std::getenv("LOTARU_THREADS")) {
        unsigned n = 0;
        const std::string_view s(env);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
        if (ec == std::errc{} && ptr == s.data() + s.size() && n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1u, threads));
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < std::min(workers, n); ++t) {
            pool.emplace_back([&] {
                for (std::size_t i; (i = next++) < n;) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

FrequencySetting frequency_from_metadata(const TraceMetadata& metadata) {
    FrequencySetting f;
    auto read = [&](const char* key, double& dst) {
        const auto it = metadata.find(key);
        if (it == metadata.end()) return;
        const auto& s = it->second;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), dst);
        if (ec != std::errc{} || ptr != s.data() + s.size()) {
            throw ValidationError(kModule, fmt::format("trace metadata '{}' is not a number: '{}'", key, s));
        }
    };
    read("freq_old", f.freq_old);
    read("freq_new", f.freq_new);
    if (!(f.freq_new > 0.0 && f.freq_old > f.freq_new)) {
        throw ValidationError(kModule, "freq_old must exceed freq_new and both must be > 0");
    }
    return f;
}

std::vector<ModelFile> train_models(const std::vector<RunRecord>& records, const TrainOptions& options) {
    std::map<std::string, std::vector<RunRecord>> by_workflow;
    for (const auto& r : records) by_workflow[r.workflow].push_back(r);

    struct Job {
        std::string workflow;
        TrainingSet set;
    };
    std::vector<Job> jobs;
    for (const auto& [workflow, recs] : by_workflow) {
        for (auto& [task, set] : build_training_sets(recs)) jobs.push_back({workflow, std::move(set)});
    }

    std::vector<ModelFile> out(jobs.size());
    parallel_for(jobs.size(), options.threads, [&](std::size_t i) {
        const auto& job = jobs[i];
        if (job.set.normal_runs.empty()) {
            throw ValidationError(kModule, fmt::format("task '{}' has reduced-frequency runs only", job.set.task));
        }
        out[i].workflow = job.workflow;
        out[i].model = fit_task_model(job.set, options.model);
        out[i].weight = task_weight(job.set, options.freq);
    });
    return out;
}

double estimate_runtime(EstimatorKind kind, const ModelFile& model, double x_bytes, const NodeProfile& local,
                        const NodeProfile& target, bool truncate) {
    return estimate(make_estimators(model), kind, x_bytes, local, target, truncate);
}

std::map<std::string, NodeProfile> index_profiles(const std::vector<NodeProfile>& profiles) {
    std::map<std::string, NodeProfile> out;
    for (const auto& p : profiles) {
        if (!out.emplace(p.node, p).second) throw ValidationError(kModule, "duplicate profile for '" + p.node + "'");
    }
    return out;
}

EvaluationResult evaluate_traces(const std::vector<RunRecord>& records,
                                 const std::map<std::string, NodeProfile>& profiles, const EvaluationSetup& setup) {
    const auto local_it = profiles.find(setup.local);
    if (local_it == profiles.end()) throw ValidationError(kModule, "no profile for local node '" + setup.local + "'");

    std::vector<RunRecord> training;
    std::vector<const RunRecord*> targets;
    for (const auto& r : records) {
        const bool is_local = r.node == setup.local;
        if (is_local && r.partition_label != setup.target_label) {
            training.push_back(r);
        } else if (r.freq_mode == FreqMode::Normal) {
            targets.push_back(&r);
        }
    }
    if (training.empty()) throw ValidationError(kModule, "no training records for local node '" + setup.local + "'");

    std::map<std::pair<std::string, std::string>, TaskEstimators> estimators;
    for (auto& file : train_models(training, setup.train)) {
        auto key = std::make_pair(file.workflow, file.model.task);
        estimators.emplace(std::move(key), make_estimators(std::move(file)));
    }

    EvaluationResult result;
    std::set<std::string> reported;
    for (const RunRecord* r : targets) {
        const auto est = estimators.find({r->workflow, r->task});
        if (est == estimators.end()) {
            if (reported.insert(r->workflow + "/" + r->task).second) {
                result.warnings.push_back(fmt::format("no local training data for {}/{}; skipped", r->workflow, r->task));
            }
            continue;
        }
        const auto node = profiles.find(r->node);
        if (node == profiles.end()) throw ValidationError(kModule, "no profile for node '" + r->node + "'");
        const double x = static_cast<double>(effective_input_size(*r).bytes);
        for (auto kind : setup.estimators) {
            const double predicted = estimate(est->second, kind, x, local_it->second, node->second, setup.truncate);
            result.errors.push_back(
                make_error_record(r->workflow, r->task, r->node, to_string(kind), predicted, r->runtime_ms));
        }
    }
    if (result.errors.empty()) throw ValidationError(kModule, "no evaluation targets matched a trained task");
    return result;
}

}  // namespace lotaru

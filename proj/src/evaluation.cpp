#include "lotaru/evaluation.hpp"

#include "lotaru/csv.hpp"
#include "lotaru/error.hpp"
#include "lotaru/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lotaru {

namespace {
constexpr const char* kModule = "evaluation";

const std::string& field(const ErrorRecord& r, GroupKey k) {
    switch (k) {
        case GroupKey::Workflow: return r.workflow;
        case GroupKey::Task: return r.task;
        case GroupKey::Node: return r.node;
        case GroupKey::Estimator: return r.estimator;
    }
    return r.workflow;
}
}  // namespace

double task_error(double predicted_ms, double actual_ms) {
    if (!(actual_ms > 0.0)) throw ValidationError(kModule, "actual runtime must be > 0");
    return std::abs((predicted_ms - actual_ms) / actual_ms);
}

ErrorRecord make_error_record(std::string workflow, std::string task, std::string node, std::string estimator,
                              double predicted_ms, double actual_ms) {
    return {std::move(workflow), std::move(task), std::move(node), std::move(estimator), predicted_ms, actual_ms,
            task_error(predicted_ms, actual_ms)};
}

std::string to_string(GroupKey key) {
    switch (key) {
        case GroupKey::Workflow: return "workflow";
        case GroupKey::Task: return "task";
        case GroupKey::Node: return "node";
        case GroupKey::Estimator: return "estimator";
    }
    return {};
}

std::vector<GroupKey> parse_group_keys(const std::string& text) {
    std::vector<GroupKey> keys;
    std::stringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        const auto t = std::string(csv::trim(tok));
        if (t.empty()) continue;
        if (t == "workflow") keys.push_back(GroupKey::Workflow);
        else if (t == "task") keys.push_back(GroupKey::Task);
        else if (t == "node") keys.push_back(GroupKey::Node);
        else if (t == "estimator") keys.push_back(GroupKey::Estimator);
        else throw ValidationError(kModule, "unknown group-by key '" + t + "'");
    }
    return keys;
}

std::vector<ErrorSummary> summarize(std::span<const ErrorRecord> records, const std::vector<GroupKey>& group_by) {
    if (records.empty()) throw ValidationError(kModule, "no error records to summarize");
    std::map<std::vector<std::string>, std::vector<double>> groups;
    for (const auto& r : records) {
        std::vector<std::string> key;
        for (auto k : group_by) key.push_back(field(r, k));
        groups[key].push_back(r.err);
    }
    std::vector<ErrorSummary> out;
    for (auto& [key, errs] : groups) {
        std::sort(errs.begin(), errs.end());
        ErrorSummary s;
        s.key = key;
        s.count = errs.size();
        s.mpe = stats::median(errs);
        s.mean = stats::mean(errs);
        s.p50 = stats::quantile_sorted(errs, 0.50);
        s.p75 = stats::quantile_sorted(errs, 0.75);
        s.p90 = stats::quantile_sorted(errs, 0.90);
        s.p95 = stats::quantile_sorted(errs, 0.95);
        s.min = errs.front();
        s.max = errs.back();
        s.stddev = stats::stddev(errs);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<CdfPoint> error_cdf(std::vector<double> errs) {
    std::sort(errs.begin(), errs.end());
    std::vector<CdfPoint> out;
    const auto n = static_cast<double>(errs.size());
    for (std::size_t i = 0; i < errs.size(); ++i) {
        if (i + 1 < errs.size() && errs[i + 1] == errs[i]) continue;
        out.push_back({errs[i], static_cast<double>(i + 1) / n});
    }
    return out;
}

std::vector<CdfPoint> error_cdf(std::span<const ErrorRecord> records) {
    std::vector<double> errs;
    errs.reserve(records.size());
    for (const auto& r : records) errs.push_back(r.err);
    return error_cdf(std::move(errs));
}

double cdf_quantile(std::span<const CdfPoint> cdf, double fraction) {
    if (cdf.empty()) throw ValidationError(kModule, "empty CDF");
    for (const auto& p : cdf) {
        if (p.fraction >= fraction) return p.err;
    }
    return cdf.back().err;
}

MpeGrid mpe_grid(std::span<const ErrorRecord> records) {
    MpeGrid grid;
    for (const auto& s : summarize(records, {GroupKey::Estimator, GroupKey::Node})) {
        grid[s.key[0]][s.key[1]] = s.mpe;
    }
    for (const auto& s : summarize(records, {GroupKey::Estimator})) grid[s.key[0]][kAllNodes] = s.mpe;
    return grid;
}

bool qualitative_ordering_holds(const MpeGrid& grid) {
    const char* order[] = {"lotaru", "online-p", "online-m", "naive"};
    std::vector<std::pair<std::string, double>> present;
    for (const char* name : order) {
        const auto row = grid.find(name);
        if (row == grid.end()) continue;
        const auto cell = row->second.find(kAllNodes);
        if (cell != row->second.end()) present.emplace_back(name, cell->second);
    }
    for (std::size_t i = 1; i < present.size(); ++i) {
        const bool p_vs_m = present[i - 1].first == "online-p" && present[i].first == "online-m";
        const bool ok = p_vs_m ? present[i - 1].second <= present[i].second : present[i - 1].second < present[i].second;
        if (!ok) return false;
    }
    return true;
}

}  // namespace lotaru

#include "lotaru/estimator.hpp"

#include "lotaru/error.hpp"
#include "lotaru/stats.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace lotaru {

namespace {

constexpr const char* kModule = "estimator";

void check_pairs(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        throw ValidationError(kModule, fmt::format("length mismatch: {} xs vs {} ys", xs.size(), ys.size()));
    }
    if (xs.size() < 2) throw ValidationError(kModule, "at least two points are required");
}

Mat2 transform_matrix(const Standardization& s) {
    return {{{1.0, -s.x_mean / s.x_scale}, {0.0, 1.0 / s.x_scale}}};
}

}  // namespace

bool passes_gate(std::optional<double> p, PearsonGate gate) {
    if (!p) return false;
    const double v = gate == PearsonGate::Absolute ? std::abs(*p) : *p;
    return v > kPearsonThreshold;
}

PearsonResult pearson(std::span<const double> xs, std::span<const double> ys, PearsonGate gate) {
    check_pairs(xs, ys);
    const double mx = stats::mean(xs);
    const double my = stats::mean(ys);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    PearsonResult r;
    if (sxx > 0.0 && syy > 0.0) {
        r.p = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    }
    r.significant = passes_gate(r.p, gate);
    return r;
}

double BayesPosterior::intercept() const {
    const auto& s = standardization;
    return s.y_mean + mean[0] - mean[1] * s.x_mean / s.x_scale;
}

double BayesPosterior::slope() const { return mean[1] / standardization.x_scale; }

Mat2 BayesPosterior::coefficient_scale() const {
    const Mat2 t = transform_matrix(standardization);
    const double noise = scale / shape;
    Mat2 out{};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 2; ++k) {
                for (int l = 0; l < 2; ++l) acc += t[i][k] * covariance[k][l] * t[j][l];
            }
            out[i][j] = noise * acc;
        }
    }
    return out;
}

BayesPosterior fit_bayes_lr(std::span<const double> xs, std::span<const double> ys, const BayesPrior& prior) {
    check_pairs(xs, ys);
    if (!(prior.precision >= 0.0) || !(prior.noise_shape > 0.0) || !(prior.noise_scale > 0.0)) {
        throw ValidationError(kModule, "prior precision must be >= 0 and noise hyperparameters > 0");
    }
    const auto n = static_cast<double>(xs.size());

    Standardization s;
    s.x_mean = stats::mean(xs);
    s.y_mean = stats::mean(ys);
    double sxx = 0.0;
    for (double x : xs) sxx += (x - s.x_mean) * (x - s.x_mean);
    s.x_scale = std::sqrt(sxx / n);
    if (!(s.x_scale > 0.0) || !std::isfinite(s.x_scale)) {
        throw SingularDesignError("all input sizes are equal; use the median fallback");
    }

    // Precision = lambda*I + X'X and X'y with rows [1, x'].
    double s0 = 0.0, s1 = 0.0, s11 = 0.0, t0 = 0.0, t1 = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double xz = (xs[i] - s.x_mean) / s.x_scale;
        const double yc = ys[i] - s.y_mean;
        s0 += 1.0;
        s1 += xz;
        s11 += xz * xz;
        t0 += yc;
        t1 += xz * yc;
    }
    const double a = prior.precision + s0;
    const double b = s1;
    const double d = prior.precision + s11;
    const double det = a * d - b * b;
    if (!(det > 1e-12 * a * d)) throw SingularDesignError("posterior precision is singular");

    BayesPosterior post;
    post.standardization = s;
    post.covariance = {{{d / det, -b / det}, {-b / det, a / det}}};
    post.mean = {post.covariance[0][0] * t0 + post.covariance[0][1] * t1,
                 post.covariance[1][0] * t0 + post.covariance[1][1] * t1};

    // y'y - mu' Lambda mu == ||y' - X mu||^2 + lambda ||mu||^2, which stays >= 0.
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double xz = (xs[i] - s.x_mean) / s.x_scale;
        const double r = (ys[i] - s.y_mean) - post.mean[0] - post.mean[1] * xz;
        rss += r * r;
    }
    rss += prior.precision * (post.mean[0] * post.mean[0] + post.mean[1] * post.mean[1]);
    post.shape = prior.noise_shape + 0.5 * n;
    post.scale = prior.noise_scale + 0.5 * rss;
    return post;
}

std::string to_string(ModelKind kind) { return kind == ModelKind::Regression ? "regression" : "median"; }

TaskModel fit_task_model(const TrainingSet& ts, const ModelOptions& options) {
    if (ts.normal_runs.empty()) throw ValidationError(kModule, "task '" + ts.task + "' has no training runs");

    TaskModel model;
    model.task = ts.task;
    model.samples = ts.normal_runs;
    model.training_size = ts.normal_runs.size();

    std::vector<double> xs, ys;
    for (const auto& r : ts.normal_runs) {
        xs.push_back(r.x);
        ys.push_back(r.y);
    }
    auto median_fit = [&] {
        MedianModel m;
        m.median_ms = stats::lower_median(ys);
        m.runtimes = ys;
        std::sort(m.runtimes.begin(), m.runtimes.end());
        return m;
    };

    if (xs.size() < 2) {
        model.low_confidence = true;
        model.fit = median_fit();
        return model;
    }
    model.pearson = pearson(xs, ys, options.gate);
    if (model.pearson.significant) {
        try {
            model.fit = fit_bayes_lr(xs, ys, options.prior);
            return model;
        } catch (const SingularDesignError&) {
        }
    }
    model.fit = median_fit();
    return model;
}

Prediction predict(const TaskModel& model, double x_bytes, const std::set<double>& levels) {
    for (double level : levels) {
        if (!(level > 0.0 && level < 1.0)) {
            throw ValidationError(kModule, fmt::format("credible level {} outside (0, 1)", level));
        }
    }
    Prediction out;
    out.kind = model.kind();

    if (const auto* post = std::get_if<BayesPosterior>(&model.fit)) {
        const auto& s = post->standardization;
        const double xz = (x_bytes - s.x_mean) / s.x_scale;
        out.mean_ms = s.y_mean + post->mean[0] + post->mean[1] * xz;
        const auto& c = post->covariance;
        const double leverage = c[0][0] + 2.0 * c[0][1] * xz + c[1][1] * xz * xz;
        const double spread = std::sqrt(post->scale / post->shape * (1.0 + leverage));
        const boost::math::students_t dist(post->dof());
        for (double level : levels) {
            const double q = boost::math::quantile(dist, 0.5 + 0.5 * level);
            out.intervals[level] = {out.mean_ms - q * spread, out.mean_ms + q * spread};
        }
        return out;
    }

    const auto& m = std::get<MedianModel>(model.fit);
    out.mean_ms = m.median_ms;
    for (double level : levels) {
        const double lo = stats::quantile_sorted(m.runtimes, 0.5 - 0.5 * level);
        const double hi = stats::quantile_sorted(m.runtimes, 0.5 + 0.5 * level);
        out.intervals[level] = {std::min(lo, out.mean_ms), std::max(hi, out.mean_ms)};
    }
    return out;
}

}  // namespace lotaru

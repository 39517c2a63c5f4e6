#include "lotaru/baselines.hpp"

#include "lotaru/error.hpp"
#include "lotaru/stats.hpp"

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <functional>

namespace lotaru {

namespace {

constexpr const char* kModule = "baselines";

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const auto n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

}  // namespace

NaiveModel naive_fit(std::span<const SizeRuntime> tuples, std::string task) {
    if (tuples.empty()) throw ValidationError(kModule, "naive model needs at least one tuple");
    double sum = 0.0;
    for (const auto& t : tuples) {
        if (!(t.x > 0.0)) throw ValidationError(kModule, "naive model needs input sizes > 0");
        sum += t.y / t.x;
    }
    return {std::move(task), sum / static_cast<double>(tuples.size())};
}

double naive_predict(const NaiveModel& m, double d_bytes) { return m.mean_ratio * d_bytes; }

double ks_distance_normal(std::span<const double> sample, double mean, double sd) {
    const boost::math::normal dist(mean, sd);
    return ks_distance({sample.begin(), sample.end()}, [&](double x) { return boost::math::cdf(dist, x); });
}

double ks_distance_gamma(std::span<const double> sample, double shape, double scale) {
    const boost::math::gamma_distribution<> dist(shape, scale);
    return ks_distance({sample.begin(), sample.end()},
                       [&](double x) { return x <= 0.0 ? 0.0 : boost::math::cdf(dist, x); });
}

OnlineModel online_fit(std::span<const SizeRuntime> tuples, OnlineVariant variant, std::string task) {
    if (tuples.empty()) throw ValidationError(kModule, "online model needs at least one tuple");
    OnlineModel m;
    m.task = std::move(task);
    m.variant = variant;
    m.tuples.assign(tuples.begin(), tuples.end());
    std::stable_sort(m.tuples.begin(), m.tuples.end(), [](const auto& a, const auto& b) { return a.x < b.x; });

    std::vector<double> xs, ys;
    for (const auto& t : m.tuples) {
        xs.push_back(t.x);
        ys.push_back(t.y);
    }
    if (m.tuples.size() >= 2) m.correlation = pearson(xs, ys);
    m.runtime_mean = stats::mean(ys);

    if (variant == OnlineVariant::P && !m.correlated()) {
        const double sd = stats::stddev(ys);
        if (sd > 0.0) {
            m.distribution = FittedDistribution::Normal;
            const bool positive = std::all_of(ys.begin(), ys.end(), [](double y) { return y > 0.0; });
            if (positive) {
                const double shape = m.runtime_mean * m.runtime_mean / (sd * sd);
                const double scale = sd * sd / m.runtime_mean;
                if (ks_distance_gamma(ys, shape, scale) < ks_distance_normal(ys, m.runtime_mean, sd)) {
                    m.distribution = FittedDistribution::Gamma;
                }
            }
        }
    }
    return m;
}

double online_predict(const OnlineModel& m, double d_bytes) {
    if (!m.correlated()) {
        // Both moment fits share the sample mean, so the chosen distribution's
        // mean is the sample mean for either variant.
        return m.runtime_mean;
    }
    const SizeRuntime* nearest = &m.tuples.front();
    for (const auto& t : m.tuples) {
        if (std::abs(t.x - d_bytes) < std::abs(nearest->x - d_bytes)) nearest = &t;
    }
    if (nearest->x <= 0.0) return nearest->y;
    return nearest->y / nearest->x * d_bytes;
}

}  // namespace lotaru

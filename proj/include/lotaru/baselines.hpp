#pragma once

#include "lotaru/estimator.hpp"
#include "lotaru/trace.hpp"

#include <span>
#include <string>
#include <vector>

namespace lotaru {

/// Mean runtime-per-byte ratio over the training tuples.
struct NaiveModel {
    std::string task;
    double mean_ratio = 0.0;  // ms per byte
};

/// Throws ValidationError on an empty tuple list or a zero input size.
NaiveModel naive_fit(std::span<const SizeRuntime> tuples, std::string task = {});
double naive_predict(const NaiveModel& m, double d_bytes);

enum class OnlineVariant { M, P };

/// Distribution chosen by the Online-P uncorrelated branch.
enum class FittedDistribution { None, Normal, Gamma };

struct OnlineModel {
    std::string task;
    OnlineVariant variant = OnlineVariant::M;
    std::vector<SizeRuntime> tuples;  // sorted by input size
    PearsonResult correlation;
    FittedDistribution distribution = FittedDistribution::None;
    double runtime_mean = 0.0;

    bool correlated() const { return correlation.significant; }
};

/// Stores the tuples and their size/runtime correlation. Fewer than two
/// tuples always take the uncorrelated path. Online-P additionally fits
/// Normal and Gamma by moments and keeps the one with the smaller
/// Kolmogorov-Smirnov distance.
OnlineModel online_fit(std::span<const SizeRuntime> tuples, OnlineVariant variant, std::string task = {});

/// Correlated: ratio of the nearest stored tuple (ties toward the smaller
/// size) times d. Uncorrelated: the mean runtime (for Online-P, the mean of
/// the chosen distribution).
double online_predict(const OnlineModel& m, double d_bytes);

/// One-sample Kolmogorov-Smirnov distances against moment-fitted families.
double ks_distance_normal(std::span<const double> sample, double mean, double sd);
double ks_distance_gamma(std::span<const double> sample, double shape, double scale);

}  // namespace lotaru

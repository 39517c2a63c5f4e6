#pragma once

#include "lotaru/trace.hpp"

#include <array>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace lotaru {

inline constexpr double kPearsonThreshold = 0.8;

/// Whether the correlation gate tests p or |p| against the threshold.
enum class PearsonGate { Positive, Absolute };

struct PearsonResult {
    std::optional<double> p;  // nullopt when either variance is zero
    bool significant = false;

    bool operator==(const PearsonResult&) const = default;
};

/// Strict `p > 0.8` (or `|p| > 0.8` with PearsonGate::Absolute).
bool passes_gate(std::optional<double> p, PearsonGate gate = PearsonGate::Positive);

/// Sample Pearson correlation. Throws ValidationError on length mismatch or
/// fewer than two points.
PearsonResult pearson(std::span<const double> xs, std::span<const double> ys,
                      PearsonGate gate = PearsonGate::Positive);

/// Normal-inverse-gamma prior over standardized coefficients:
/// b | s2 ~ N(0, s2 / precision * I), s2 ~ InvGamma(noise_shape, noise_scale).
struct BayesPrior {
    double precision = 1e-6;
    double noise_shape = 1e-6;
    double noise_scale = 1e-6;
};

/// x' = (x - x_mean) / x_scale, y' = y - y_mean.
struct Standardization {
    double x_mean = 0.0;
    double x_scale = 1.0;
    double y_mean = 0.0;

    bool operator==(const Standardization&) const = default;
};

using Mat2 = std::array<std::array<double, 2>, 2>;

/// Conjugate posterior over (intercept, slope) in standardized coordinates.
/// `covariance` is the inverse posterior precision; the coefficient
/// covariance is that matrix times the noise variance.
struct BayesPosterior {
    std::array<double, 2> mean{};
    Mat2 covariance{};
    double shape = 0.0;  // a_n
    double scale = 0.0;  // b_n
    Standardization standardization;

    double dof() const { return 2.0 * shape; }
    /// Posterior-mean coefficients in original units (ms, ms per byte).
    double intercept() const;
    double slope() const;
    /// Scale matrix of the Student-t marginal over (intercept, slope) in
    /// original units.
    Mat2 coefficient_scale() const;

    bool operator==(const BayesPosterior&) const = default;
};

/// Throws SingularDesignError when all xs are equal.
BayesPosterior fit_bayes_lr(std::span<const double> xs, std::span<const double> ys, const BayesPrior& prior = {});

enum class ModelKind { Regression, Median };

std::string to_string(ModelKind kind);

struct MedianModel {
    double median_ms = 0.0;
    std::vector<double> runtimes;  // sorted training runtimes

    bool operator==(const MedianModel&) const = default;
};

struct TaskModel {
    std::string task;
    std::variant<BayesPosterior, MedianModel> fit;
    PearsonResult pearson;
    std::size_t training_size = 0;
    bool low_confidence = false;       // fewer than two training points
    std::vector<SizeRuntime> samples;  // normal-speed training points

    ModelKind kind() const {
        return std::holds_alternative<BayesPosterior>(fit) ? ModelKind::Regression : ModelKind::Median;
    }

    bool operator==(const TaskModel&) const = default;
};

struct ModelOptions {
    BayesPrior prior;
    PearsonGate gate = PearsonGate::Positive;
};

/// Regression when the size/runtime correlation passes the gate, otherwise
/// the lower median of the training runtimes.
TaskModel fit_task_model(const TrainingSet& ts, const ModelOptions& options = {});

struct Interval {
    double lower = 0.0;
    double upper = 0.0;

    bool operator==(const Interval&) const = default;
};

struct Prediction {
    double mean_ms = 0.0;
    std::map<double, Interval> intervals;  // keyed by credible level
    ModelKind kind = ModelKind::Regression;
};

inline const std::set<double> kDefaultLevels = {0.5, 0.75, 0.95};

/// Posterior predictive mean and central credible intervals at `levels`.
Prediction predict(const TaskModel& model, double x_bytes, const std::set<double>& levels = kDefaultLevels);

}  // namespace lotaru

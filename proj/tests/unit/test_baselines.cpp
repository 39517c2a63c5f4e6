#include "lotaru/baselines.hpp"
#include "lotaru/error.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace lotaru;

namespace {

// Kolmogorov-Smirnov statistic against an explicit CDF.
template <typename Cdf>
double ks_oracle(std::vector<double> xs, Cdf cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

double normal_cdf(double x, double mean, double sd) { return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0))); }

// Gamma CDF for an integer shape (Erlang), in closed form.
double erlang_cdf(double x, int shape, double scale) {
    if (x <= 0.0) return 0.0;
    const double t = x / scale;
    double term = 1.0, sum = 0.0;
    for (int k = 0; k < shape; ++k) {
        if (k > 0) term *= t / k;
        sum += term;
    }
    return 1.0 - std::exp(-t) * sum;
}

std::vector<SizeRuntime> tuples(const std::vector<double>& xs, const std::vector<double>& ys) {
    std::vector<SizeRuntime> out;
    for (std::size_t i = 0; i < xs.size(); ++i) out.push_back({xs[i], ys[i]});
    return out;
}

}  // namespace

TEST(Naive, Examples) {
    const auto m = naive_fit(tuples({10, 20}, {20, 60}));
    EXPECT_DOUBLE_EQ(m.mean_ratio, 2.5);
    EXPECT_DOUBLE_EQ(naive_predict(m, 40), 100);
    EXPECT_DOUBLE_EQ(naive_fit(tuples({5}, {5})).mean_ratio, 1.0);
    EXPECT_DOUBLE_EQ(naive_predict(m, 0), 0);
    EXPECT_DOUBLE_EQ(naive_predict(naive_fit(tuples({1, 2, 3}, {2, 4, 6})), 4), 8);
}

TEST(Naive, Errors) {
    EXPECT_THROW(naive_fit({}), ValidationError);
    EXPECT_THROW(naive_fit(tuples({0}, {1})), ValidationError);
}

TEST(Online, CorrelationState) {
    EXPECT_TRUE(online_fit(tuples({1, 2, 3}, {2, 4, 6}), OnlineVariant::M).correlated());
    EXPECT_FALSE(online_fit(tuples({1, 2, 3}, {5, 5, 5}), OnlineVariant::M).correlated());
    const auto single = online_fit(tuples({4}, {9}), OnlineVariant::P);
    EXPECT_FALSE(single.correlated());
    EXPECT_FALSE(single.correlation.p.has_value());
    EXPECT_DOUBLE_EQ(online_predict(single, 100), 9);
}

TEST(Online, NearestTupleRatio) {
    for (auto v : {OnlineVariant::M, OnlineVariant::P}) {
        const auto m = online_fit(tuples({1, 2, 3}, {2, 4, 6}), v);
        EXPECT_DOUBLE_EQ(online_predict(m, 4), 8);
    }
}

TEST(Online, HandVerifiedCorrelatedFixtures) {
    // Sizes 10, 20, 40 with ratios 3, 2.5, 2.25.
    const auto data = tuples({20, 10, 40}, {50, 30, 90});
    const auto m = online_fit(data, OnlineVariant::M);
    const auto p = online_fit(data, OnlineVariant::P);
    ASSERT_TRUE(m.correlated());
    EXPECT_DOUBLE_EQ(online_predict(m, 12), 36);    // nearest 10, ratio 3
    EXPECT_DOUBLE_EQ(online_predict(m, 26), 65);    // nearest 20, ratio 2.5
    EXPECT_DOUBLE_EQ(online_predict(m, 100), 225);  // nearest 40, ratio 2.25
    EXPECT_DOUBLE_EQ(online_predict(m, 15), 45);    // tie 10/20 goes to the smaller size
    for (double d : {1.0, 12.0, 15.0, 26.0, 35.0, 100.0}) EXPECT_EQ(online_predict(m, d), online_predict(p, d));
}

TEST(Online, VariantsAgreeOnRandomCorrelatedData) {
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> xs, ys;
        for (int i = 0; i < 8; ++i) {
            xs.push_back(1e6 * (1 + 100 * u(rng)));
            ys.push_back(50 + xs.back() * 1e-4 * (1 + 0.05 * u(rng)));
        }
        const auto m = online_fit(tuples(xs, ys), OnlineVariant::M);
        const auto p = online_fit(tuples(xs, ys), OnlineVariant::P);
        ASSERT_TRUE(m.correlated());
        const double d = 1e6 * 200 * u(rng);
        EXPECT_EQ(online_predict(m, d), online_predict(p, d));
    }
}

TEST(Online, UncorrelatedMean) {
    const auto m = online_fit(tuples({1, 2, 3}, {5, 5, 5}), OnlineVariant::M);
    EXPECT_DOUBLE_EQ(online_predict(m, 1e9), 5);
}

TEST(Online, SymmetricSampleChoosesNormal) {
    const std::vector<double> ys{10, 5, 15, 15, 5};  // mean 10, variance 25, uncorrelated with 1..5
    const auto p = online_fit(tuples({1, 2, 3, 4, 5}, ys), OnlineVariant::P);
    ASSERT_FALSE(p.correlated());
    // Moment fits: Normal(10, 5) and Gamma(shape 4, scale 2.5).
    const double dn = ks_oracle(ys, [](double x) { return normal_cdf(x, 10, 5); });
    const double dg = ks_oracle(ys, [](double x) { return erlang_cdf(x, 4, 2.5); });
    EXPECT_LT(dn, dg);
    EXPECT_EQ(p.distribution, FittedDistribution::Normal);
    EXPECT_DOUBLE_EQ(online_predict(p, 123), 10);
}

TEST(Online, SkewedSampleChoosesGamma) {
    const std::vector<double> ys{1, 1.2, 1.1, 1.3, 1.0, 9.0, 1.4, 1.15};
    const auto p = online_fit(tuples({8, 1, 3, 6, 2, 4, 7, 5}, ys), OnlineVariant::P);
    ASSERT_FALSE(p.correlated());
    EXPECT_EQ(p.distribution, FittedDistribution::Gamma);
}

TEST(KsDistance, MatchesOracle) {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> u(0.1, 30.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> xs;
        for (int i = 0; i < 12; ++i) xs.push_back(u(rng));
        const double mean = u(rng), sd = u(rng);
        EXPECT_NEAR(ks_distance_normal(xs, mean, sd), ks_oracle(xs, [&](double x) { return normal_cdf(x, mean, sd); }),
                    1e-12);
        const int shape = 1 + trial % 6;
        const double scale = u(rng);
        EXPECT_NEAR(ks_distance_gamma(xs, shape, scale),
                    ks_oracle(xs, [&](double x) { return erlang_cdf(x, shape, scale); }), 1e-10);
    }
}

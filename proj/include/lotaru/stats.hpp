#pragma once

#include <span>
#include <vector>

namespace lotaru::stats {

double mean(std::span<const double> xs);

/// Median with the mean-of-middle-two convention for even counts.
double median(std::vector<double> xs);

/// Lower median: element floor((n-1)/2) of the sorted values.
double lower_median(std::vector<double> xs);

/// Linear-interpolation quantile (Hyndman-Fan type 7) on unsorted data.
double quantile(std::vector<double> xs, double q);

/// Same, but `sorted` must already be ascending.
double quantile_sorted(std::span<const double> sorted, double q);

/// Sample standard deviation (n-1 denominator); 0 for a single value.
double stddev(std::span<const double> xs);

}  // namespace lotaru::stats

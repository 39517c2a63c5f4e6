#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lotaru {

/// Halving ladder of partition sizes cut from one input of `original_size`.
struct PartitionPlan {
    std::uint64_t original_size = 0;
    std::vector<std::uint64_t> sizes;
    std::vector<std::string> labels;
};

/// s_1 = ceil(X/2), s_k = max(1, floor(s_{k-1}/2)); labels p1..pn.
/// Throws ValidationError when n < 1 or the ladder would exceed X.
PartitionPlan plan_partitions(std::uint64_t original_size, std::size_t count);

/// Iterates all subsets of {0..n-1} with at least `k_min` members, as
/// bitmasks in increasing numeric order.
class CombinationRange {
public:
    class iterator {
    public:
        using iterator_category = std::input_iterator_tag;
        using value_type = std::uint64_t;
        using difference_type = std::ptrdiff_t;
        using pointer = const std::uint64_t*;
        using reference = std::uint64_t;

        iterator() = default;
        std::uint64_t operator*() const { return mask_; }
        iterator& operator++();
        iterator operator++(int) {
            auto copy = *this;
            ++*this;
            return copy;
        }
        bool operator==(const iterator& o) const { return mask_ == o.mask_; }

    private:
        friend class CombinationRange;
        iterator(std::uint64_t mask, std::uint64_t end, std::size_t k_min);
        void skip_small();

        std::uint64_t mask_ = 0;
        std::uint64_t end_ = 0;
        std::size_t k_min_ = 0;
    };

    CombinationRange(std::size_t n, std::size_t k_min);

    iterator begin() const;
    iterator end() const;

    /// Closed form: sum_{k=k_min}^{n} C(n, k).
    std::uint64_t count() const;
    std::size_t n() const { return n_; }

private:
    std::size_t n_;
    std::size_t k_min_;
};

CombinationRange enumerate_combinations(std::size_t n, std::size_t k_min = 2);

/// Expands a bitmask into ascending member indices.
std::vector<std::size_t> subset_members(std::uint64_t mask);

struct Coverage {
    double fraction = 0.0;
    bool below_threshold = false;
};

inline constexpr double kCoverageThreshold = 0.10;

/// Sum of the chosen partition sizes over the original size.
Coverage coverage_fraction(std::span<const std::uint64_t> subset_sizes, std::uint64_t original_size);

/// Describes a line-oriented record format: how many lines form a record and
/// how to validate one. The validator returns an empty string when the record
/// is well formed, else a description of the problem.
struct RecordFormat {
    std::size_t lines_per_record = 4;
    std::function<std::string(std::span<const std::string>)> validate;
};

RecordFormat fastq_format();

/// Generic block format with no content checks.
RecordFormat line_block_format(std::size_t lines_per_record);

struct SplitResult {
    std::uint64_t total_records = 0;
    std::vector<std::uint64_t> partition_records;
};

/// Record counts each partition receives: floor(total * s_k / X).
std::vector<std::uint64_t> partition_record_counts(const PartitionPlan& plan, std::uint64_t total_records);

/// Counts (and validates) records in a stream.
std::uint64_t count_records(std::istream& in, const RecordFormat& format);

/// Writes disjoint contiguous slices of the input to `outputs` (one stream per
/// plan entry). `total_records` is the record count of the whole input; the
/// stream is read once and validated to the end. Throws ValidationError naming
/// the 0-based record index of the first malformed record.
SplitResult split_records(std::istream& in, const PartitionPlan& plan, std::uint64_t total_records,
                          std::span<std::ostream* const> outputs, const RecordFormat& format);

inline SplitResult split_fastq(std::istream& in, const PartitionPlan& plan, std::uint64_t total_records,
                               std::span<std::ostream* const> outputs) {
    return split_records(in, plan, total_records, outputs, fastq_format());
}

}  // namespace lotaru

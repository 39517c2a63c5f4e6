#include "lotaru/sampling.hpp"

#include "lotaru/error.hpp"

#include <fmt/format.h>

#include <bit>
#include <istream>
#include <numeric>
#include <ostream>

namespace lotaru {

namespace {
constexpr const char* kModule = "sampling";
}

PartitionPlan plan_partitions(std::uint64_t original_size, std::size_t count) {
    if (count < 1) throw ValidationError(kModule, "partition count must be >= 1");
    if (original_size < 2) throw ValidationError(kModule, "input too small to partition");
    PartitionPlan plan;
    plan.original_size = original_size;
    std::uint64_t size = original_size - original_size / 2;
    std::uint64_t sum = 0;
    for (std::size_t k = 1; k <= count; ++k) {
        plan.sizes.push_back(size);
        plan.labels.push_back(fmt::format("p{}", k));
        sum += size;
        size = std::max<std::uint64_t>(1, size / 2);
    }
    if (sum > original_size) {
        throw ValidationError(kModule, fmt::format("input of size {} is too small for {} halvings", original_size, count));
    }
    return plan;
}

CombinationRange::iterator::iterator(std::uint64_t mask, std::uint64_t end, std::size_t k_min)
    : mask_(mask), end_(end), k_min_(k_min) {
    skip_small();
}

void CombinationRange::iterator::skip_small() {
    while (mask_ < end_ && static_cast<std::size_t>(std::popcount(mask_)) < k_min_) ++mask_;
}

CombinationRange::iterator& CombinationRange::iterator::operator++() {
    ++mask_;
    skip_small();
    return *this;
}

CombinationRange::CombinationRange(std::size_t n, std::size_t k_min) : n_(n), k_min_(k_min) {
    if (k_min < 1 || k_min > n) throw ValidationError(kModule, "combination size bounds require 1 <= k_min <= n");
    if (n > 62) throw ValidationError(kModule, "at most 62 partitions can be enumerated");
}

CombinationRange::iterator CombinationRange::begin() const {
    return iterator(1, std::uint64_t{1} << n_, k_min_);
}

CombinationRange::iterator CombinationRange::end() const {
    const std::uint64_t e = std::uint64_t{1} << n_;
    return iterator(e, e, k_min_);
}

std::uint64_t CombinationRange::count() const {
    std::uint64_t total = 0;
    std::uint64_t binom = 1;  // C(n, k), updated incrementally
    for (std::size_t k = 0; k <= n_; ++k) {
        if (k >= k_min_) total += binom;
        binom = binom * (n_ - k) / (k + 1);
    }
    return total;
}

CombinationRange enumerate_combinations(std::size_t n, std::size_t k_min) { return CombinationRange(n, k_min); }

std::vector<std::size_t> subset_members(std::uint64_t mask) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; mask; ++i, mask >>= 1) {
        if (mask & 1) out.push_back(i);
    }
    return out;
}

Coverage coverage_fraction(std::span<const std::uint64_t> subset_sizes, std::uint64_t original_size) {
    if (original_size == 0) throw ValidationError(kModule, "original size must be > 0");
    const auto sum = std::accumulate(subset_sizes.begin(), subset_sizes.end(), std::uint64_t{0});
    const double fraction = static_cast<double>(sum) / static_cast<double>(original_size);
    return {fraction, fraction < kCoverageThreshold};
}

RecordFormat fastq_format() {
    return {4, [](std::span<const std::string> lines) -> std::string {
                if (lines[0].empty() || lines[0][0] != '@') return "header line does not start with '@'";
                if (lines[2].empty() || lines[2][0] != '+') return "separator line does not start with '+'";
                if (lines[1].size() != lines[3].size()) return "sequence and quality lengths differ";
                return {};
            }};
}

RecordFormat line_block_format(std::size_t lines_per_record) {
    if (lines_per_record == 0) throw ValidationError(kModule, "lines per record must be >= 1");
    return {lines_per_record, [](std::span<const std::string>) { return std::string{}; }};
}

std::vector<std::uint64_t> partition_record_counts(const PartitionPlan& plan, std::uint64_t total_records) {
    if (plan.original_size == 0) throw ValidationError(kModule, "plan has zero original size");
    std::vector<std::uint64_t> counts;
    for (auto s : plan.sizes) {
        const auto exact = static_cast<unsigned __int128>(total_records) * s / plan.original_size;
        counts.push_back(static_cast<std::uint64_t>(exact));
    }
    return counts;
}

namespace {

// Reads the next record; returns false at clean EOF.
bool read_record(std::istream& in, const RecordFormat& format, std::vector<std::string>& lines,
                 std::uint64_t index) {
    lines.resize(format.lines_per_record);
    for (std::size_t i = 0; i < format.lines_per_record; ++i) {
        if (!std::getline(in, lines[i])) {
            if (i == 0) return false;
            throw ValidationError(kModule, fmt::format("record {}: truncated after {} of {} lines", index, i,
                                                       format.lines_per_record));
        }
        if (!lines[i].empty() && lines[i].back() == '\r') lines[i].pop_back();
    }
    if (format.validate) {
        if (auto problem = format.validate(lines); !problem.empty()) {
            throw ValidationError(kModule, fmt::format("record {}: {}", index, problem));
        }
    }
    return true;
}

}  // namespace

std::uint64_t count_records(std::istream& in, const RecordFormat& format) {
    std::vector<std::string> lines;
    std::uint64_t n = 0;
    while (read_record(in, format, lines, n)) ++n;
    return n;
}

SplitResult split_records(std::istream& in, const PartitionPlan& plan, std::uint64_t total_records,
                          std::span<std::ostream* const> outputs, const RecordFormat& format) {
    if (outputs.size() != plan.sizes.size()) {
        throw ValidationError(kModule, "one output stream per partition is required");
    }
    SplitResult result;
    result.partition_records = partition_record_counts(plan, total_records);

    std::size_t part = 0;
    std::uint64_t written = 0;
    std::vector<std::string> lines;
    std::uint64_t index = 0;
    while (read_record(in, format, lines, index)) {
        while (part < outputs.size() && written == result.partition_records[part]) {
            ++part;
            written = 0;
        }
        if (part < outputs.size()) {
            for (const auto& l : lines) *outputs[part] << l << '\n';
            ++written;
        }
        ++index;
    }
    result.total_records = index;
    if (index != total_records) {
        throw ValidationError(kModule, fmt::format("expected {} records, stream held {}", total_records, index));
    }
    return result;
}

}  // namespace lotaru

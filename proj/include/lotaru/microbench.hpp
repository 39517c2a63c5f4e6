#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lotaru {

/// Single-core microbenchmark scores for one node. CPU and I/O scores feed
/// the node factor; flops and memory are diagnostics.
struct NodeProfile {
    std::string node;
    double cpu_events_per_sec = 0.0;
    std::optional<double> flops;
    std::optional<double> mem_score;  // MB/s
    double read_iops = 0.0;
    double write_iops = 0.0;

    bool operator==(const NodeProfile&) const = default;
};

/// Throws ValidationError if a mandatory score is missing or not positive.
void validate(const NodeProfile& profile);

/// Parses either a `key = value` document or a two-line CSV (header + row).
/// Numbers may carry thousands separators ("3,959,800"); "-" or an empty
/// value marks an optional score as absent.
NodeProfile parse_profile(std::istream& in);

/// Parses a CSV with one node per row.
std::vector<NodeProfile> parse_profile_table(std::istream& in);

/// Writes the `key = value` form; values round-trip exactly.
void write_profile(std::ostream& out, const NodeProfile& profile);

/// Loads every *.profile / *.csv file below `path`, or the single file.
std::vector<NodeProfile> load_profiles(const std::filesystem::path& path);

namespace bench {

/// Held for the duration of any benchmark run. Acquiring a second token in
/// the same process throws instead of blocking.
class RunToken {
public:
    RunToken();
    ~RunToken();
    RunToken(const RunToken&) = delete;
    RunToken& operator=(const RunToken&) = delete;
};

struct PrimeResult {
    double events_per_sec = 0.0;
    std::uint64_t events = 0;
    std::uint64_t primes_per_event = 0;
    double elapsed_sec = 0.0;
};

/// One event = trial-division check of every integer in [3, max_prime].
/// Runs on the calling thread until `limit` has elapsed.
PrimeResult cpu_prime(std::chrono::duration<double> limit, std::uint64_t max_prime = 20000);

/// Number of primes found in one event; used to keep the loop observable.
std::uint64_t count_primes(std::uint64_t max_prime);

/// Operation count charged for one n x n LU solve.
double lu_work(std::size_t n);

struct FlopsResult {
    double flops = 0.0;
    double best_sec = 0.0;
    std::uint64_t iterations = 0;
    double work_per_iteration = 0.0;
};

/// Repeats a partial-pivoting LU solve on a fixed random system until
/// `min_duration` has elapsed and reports work over the best iteration.
FlopsResult flops(std::size_t n = 200, std::chrono::duration<double> min_duration = std::chrono::seconds(1));

/// Sequential write-then-read over a reused `block`-byte buffer until
/// `total` bytes have been written. Returns MB/s over the bytes written.
double memory(std::uint64_t block = 1ull << 20, std::uint64_t total = 100ull << 30);

struct IoResult {
    double read_iops = 0.0;
    double write_iops = 0.0;
    bool direct_io = false;  // false: write+fsync+fadvise fallback was used
};

/// Sequential write then read of a fresh temp file in `dir`, `block` bytes per
/// operation. Reports the median of `passes` runs. The file is always removed.
IoResult io_sequential(std::uint64_t file_size, std::uint64_t block, const std::filesystem::path& dir,
                       int passes = 3);

}  // namespace bench

}  // namespace lotaru

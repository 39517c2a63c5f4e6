#include "lotaru/microbench.hpp"

#include "lotaru/csv.hpp"
#include "lotaru/error.hpp"
#include "lotaru/stats.hpp"

#include <fmt/format.h>

extern "C" {
#include <fcntl.h>
#include <unistd.h>
}

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace lotaru {

namespace {

using Clock = std::chrono::steady_clock;

constexpr const char* kModule = "microbench";

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::optional<double> parse_score(std::string_view text, const std::string& key) {
    text = csv::trim(text);
    if (text.empty() || text == "-") return std::nullopt;
    std::string digits;
    for (char c : text) {
        if (c != ',' && c != '_') digits.push_back(c);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
        throw ValidationError(kModule, fmt::format("field '{}': '{}' is not a number", key, text));
    }
    return value;
}

void assign_field(NodeProfile& p, std::vector<std::string>& seen, const std::string& key, std::string_view value) {
    if (key == "node") {
        p.node = std::string(csv::trim(value));
    } else if (key == "cpu_events_per_sec") {
        p.cpu_events_per_sec = parse_score(value, key).value_or(0.0);
    } else if (key == "flops") {
        p.flops = parse_score(value, key);
    } else if (key == "mem_score") {
        p.mem_score = parse_score(value, key);
    } else if (key == "read_iops") {
        p.read_iops = parse_score(value, key).value_or(0.0);
    } else if (key == "write_iops") {
        p.write_iops = parse_score(value, key).value_or(0.0);
    } else {
        throw ValidationError(kModule, "unknown profile field '" + key + "'");
    }
    seen.push_back(key);
}

void require_fields(const NodeProfile& p, const std::vector<std::string>& seen) {
    for (const char* key : {"node", "cpu_events_per_sec", "read_iops", "write_iops"}) {
        if (std::find(seen.begin(), seen.end(), key) == seen.end()) {
            throw ValidationError(kModule, fmt::format("profile is missing mandatory field '{}'", key));
        }
    }
    validate(p);
}

std::vector<NodeProfile> parse_csv_rows(const std::vector<std::string>& lines) {
    const auto header = csv::split_line(lines.front());
    std::vector<NodeProfile> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = csv::split_line(lines[i]);
        if (cells.size() != header.size()) {
            throw ValidationError(kModule, fmt::format("profile row {} has {} fields, header has {}", i,
                                                       cells.size(), header.size()));
        }
        NodeProfile p;
        std::vector<std::string> seen;
        for (std::size_t c = 0; c < header.size(); ++c) {
            assign_field(p, seen, std::string(csv::trim(header[c])), cells[c]);
        }
        require_fields(p, seen);
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<std::string> content_lines(std::istream& in) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        const auto body = csv::trim(line);
        if (body.empty() || body.front() == '#') continue;
        lines.emplace_back(body);
    }
    return lines;
}

}  // namespace

void validate(const NodeProfile& p) {
    if (p.node.empty()) throw ValidationError(kModule, "profile has an empty node name");
    auto positive = [&](double v, const char* key) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ValidationError(kModule, fmt::format("profile '{}': {} must be > 0", p.node, key));
        }
    };
    positive(p.cpu_events_per_sec, "cpu_events_per_sec");
    positive(p.read_iops, "read_iops");
    positive(p.write_iops, "write_iops");
    if (p.flops) positive(*p.flops, "flops");
    if (p.mem_score) positive(*p.mem_score, "mem_score");
}

NodeProfile parse_profile(std::istream& in) {
    const auto lines = content_lines(in);
    if (lines.empty()) throw ValidationError(kModule, "empty profile");
    if (lines.front().find('=') == std::string::npos) {
        auto rows = parse_csv_rows(lines);
        if (rows.size() != 1) throw ValidationError(kModule, "expected exactly one profile row");
        return rows.front();
    }
    NodeProfile p;
    std::vector<std::string> seen;
    for (const auto& line : lines) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ValidationError(kModule, "expected key = value: '" + line + "'");
        const std::string key(csv::trim(std::string_view(line).substr(0, eq)));
        assign_field(p, seen, key, std::string_view(line).substr(eq + 1));
    }
    require_fields(p, seen);
    return p;
}

std::vector<NodeProfile> parse_profile_table(std::istream& in) {
    const auto lines = content_lines(in);
    if (lines.empty()) throw ValidationError(kModule, "empty profile table");
    return parse_csv_rows(lines);
}

void write_profile(std::ostream& out, const NodeProfile& p) {
    out << "node = " << p.node << '\n';
    out << fmt::format("cpu_events_per_sec = {}\n", p.cpu_events_per_sec);
    out << "flops = " << (p.flops ? fmt::format("{}", *p.flops) : "-") << '\n';
    out << "mem_score = " << (p.mem_score ? fmt::format("{}", *p.mem_score) : "-") << '\n';
    out << fmt::format("read_iops = {}\n", p.read_iops);
    out << fmt::format("write_iops = {}\n", p.write_iops);
}

std::vector<NodeProfile> load_profiles(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    auto load_file = [](const fs::path& file, std::vector<NodeProfile>& out) {
        std::ifstream in(file);
        if (!in) throw ValidationError(kModule, "cannot open profile file " + file.string());
        try {
            if (file.extension() == ".csv") {
                for (auto& p : parse_profile_table(in)) out.push_back(std::move(p));
            } else {
                out.push_back(parse_profile(in));
            }
        } catch (const ValidationError& e) {
            throw ValidationError(kModule, file.filename().string() + ": " + e.what());
        }
    };
    std::vector<NodeProfile> profiles;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path)) {
            const auto ext = entry.path().extension();
            if (entry.is_regular_file() && (ext == ".profile" || ext == ".csv")) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) load_file(f, profiles);
    } else if (fs::is_regular_file(path)) {
        load_file(path, profiles);
    } else {
        throw ValidationError(kModule, "profile path not found: " + path.string());
    }
    if (profiles.empty()) throw ValidationError(kModule, "no profiles found in " + path.string());
    std::sort(profiles.begin(), profiles.end(), [](const auto& a, const auto& b) { return a.node < b.node; });
    for (std::size_t i = 1; i < profiles.size(); ++i) {
        if (profiles[i].node == profiles[i - 1].node) {
            throw ValidationError(kModule, "duplicate profile for node '" + profiles[i].node + "'");
        }
    }
    return profiles;
}

namespace bench {

namespace {
std::atomic_flag g_running = ATOMIC_FLAG_INIT;
}

RunToken::RunToken() {
    if (g_running.test_and_set()) throw Error(kModule, "another benchmark is already running in this process");
}

RunToken::~RunToken() { g_running.clear(); }

std::uint64_t count_primes(std::uint64_t max_prime) {
    std::uint64_t found = 0;
    for (std::uint64_t c = 3; c <= max_prime; ++c) {
        const auto limit = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(c)));
        std::uint64_t l = 2;
        for (; l <= limit; ++l) {
            if (c % l == 0) break;
        }
        if (l > limit) ++found;
    }
    return found;
}

PrimeResult cpu_prime(std::chrono::duration<double> limit, std::uint64_t max_prime) {
    if (!(limit.count() > 0.0)) throw ValidationError(kModule, "cpu benchmark time limit must be > 0");
    if (max_prime < 3) throw ValidationError(kModule, "max prime must be >= 3");
    RunToken token;

    PrimeResult r;
    volatile std::uint64_t sink = 0;
    const auto start = Clock::now();
    double elapsed = 0.0;
    do {
        sink = count_primes(max_prime);
        ++r.events;
        elapsed = seconds_since(start);
    } while (elapsed < limit.count());
    r.primes_per_event = sink;
    r.elapsed_sec = elapsed;
    r.events_per_sec = static_cast<double>(r.events) / elapsed;
    return r;
}

double lu_work(std::size_t n) {
    const double d = static_cast<double>(n);
    return 2.0 / 3.0 * d * d * d + 2.0 * d * d;
}

FlopsResult flops(std::size_t n, std::chrono::duration<double> min_duration) {
    if (n < 2) throw ValidationError(kModule, "matrix dimension must be >= 2");
    RunToken token;

    std::mt19937_64 rng(1325);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    std::vector<double> a0(n * n), b0(n);
    for (auto& v : a0) v = dist(rng);
    for (auto& v : b0) v = dist(rng);

    std::vector<double> a(n * n), b(n);
    FlopsResult r;
    r.work_per_iteration = lu_work(n);
    r.best_sec = std::numeric_limits<double>::infinity();
    volatile double sink = 0.0;
    const auto start = Clock::now();
    do {
        const auto t0 = Clock::now();
        std::copy(a0.begin(), a0.end(), a.begin());
        std::copy(b0.begin(), b0.end(), b.begin());
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t piv = k;
            for (std::size_t i = k + 1; i < n; ++i) {
                if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
            }
            if (piv != k) {
                std::swap_ranges(a.begin() + k * n, a.begin() + (k + 1) * n, a.begin() + piv * n);
                std::swap(b[k], b[piv]);
            }
            const double pivot = a[k * n + k];
            if (pivot == 0.0) continue;
            for (std::size_t i = k + 1; i < n; ++i) {
                const double m = a[i * n + k] / pivot;
                a[i * n + k] = m;
                for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= m * a[k * n + j];
                b[i] -= m * b[k];
            }
        }
        for (std::size_t i = n; i-- > 0;) {
            double s = b[i];
            for (std::size_t j = i + 1; j < n; ++j) s -= a[i * n + j] * b[j];
            b[i] = a[i * n + i] != 0.0 ? s / a[i * n + i] : 0.0;
        }
        sink = sink + b[0];
        r.best_sec = std::min(r.best_sec, seconds_since(t0));
        ++r.iterations;
    } while (seconds_since(start) < min_duration.count());
    r.best_sec = std::max(r.best_sec, 1e-9);
    r.flops = r.work_per_iteration / r.best_sec;
    return r;
}

double memory(std::uint64_t block, std::uint64_t total) {
    if (block < 4096) throw ValidationError(kModule, "memory block must be >= 4 KiB");
    if (block > total) throw ValidationError(kModule, "memory block larger than total");
    if (total % block != 0) throw ValidationError(kModule, "memory total must be a multiple of the block size");
    RunToken token;

    std::vector<std::uint64_t> buffer(block / sizeof(std::uint64_t));
    volatile std::uint64_t sink = 0;
    const std::uint64_t passes = total / block;
    const auto start = Clock::now();
    for (std::uint64_t i = 0; i < passes; ++i) {
        std::fill(buffer.begin(), buffer.end(), i);
        sink = sink + std::accumulate(buffer.begin(), buffer.end(), std::uint64_t{0});
    }
    const double elapsed = std::max(seconds_since(start), 1e-9);
    return static_cast<double>(total) / (1024.0 * 1024.0) / elapsed;
}

namespace {

struct AlignedFree {
    void operator()(void* p) const { std::free(p); }
};

class TempFile {
public:
    explicit TempFile(std::filesystem::path path) : path_(std::move(path)) {}
    ~TempFile() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    TempFile(const TempFile&) = delete;
    TempFile& operator=(const TempFile&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

class Fd {
public:
    explicit Fd(int fd) : fd_(fd) {}
    ~Fd() {
        if (fd_ >= 0) ::close(fd_);
    }
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    int get() const { return fd_; }

private:
    int fd_;
};

[[noreturn]] void throw_errno(const std::string& what) {
    throw Error(kModule, what + ": " + std::strerror(errno));
}

// Opens with O_DIRECT when allowed, otherwise plain.
int open_file(const std::filesystem::path& path, int flags, bool& direct) {
    if (direct) {
        const int fd = ::open(path.c_str(), flags | O_DIRECT, 0600);
        if (fd >= 0) return fd;
        if (errno != EINVAL) throw_errno("open " + path.string());
        direct = false;
    }
    const int fd = ::open(path.c_str(), flags, 0600);
    if (fd < 0) throw_errno("open " + path.string());
    return fd;
}

struct PassResult {
    double read_iops;
    double write_iops;
    bool direct;
};

PassResult run_pass(const std::filesystem::path& file, std::uint64_t blocks, std::uint64_t block, char* buf,
                    bool allow_direct) {
    bool direct = allow_direct && block % 4096 == 0;
    PassResult r{};

    {
        Fd fd(open_file(file, O_WRONLY | O_CREAT | O_TRUNC, direct));
        const auto start = Clock::now();
        for (std::uint64_t i = 0; i < blocks; ++i) {
            buf[0] = static_cast<char>(i);
            const auto n = ::write(fd.get(), buf, block);
            if (n < 0 && errno == EINVAL && direct) {
                // Some filesystems accept O_DIRECT on open but reject the write.
                return run_pass(file, blocks, block, buf, false);
            }
            if (n != static_cast<ssize_t>(block)) throw_errno("write " + file.string());
        }
        if (::fsync(fd.get()) != 0) throw_errno("fsync " + file.string());
        r.write_iops = static_cast<double>(blocks) / std::max(seconds_since(start), 1e-9);
        if (!direct) ::posix_fadvise(fd.get(), 0, 0, POSIX_FADV_DONTNEED);
    }

    bool read_direct = direct;
    Fd fd(open_file(file, O_RDONLY, read_direct));
    if (!read_direct) ::posix_fadvise(fd.get(), 0, 0, POSIX_FADV_DONTNEED);
    const auto start = Clock::now();
    for (std::uint64_t i = 0; i < blocks; ++i) {
        const auto n = ::read(fd.get(), buf, block);
        if (n != static_cast<ssize_t>(block)) throw_errno("read " + file.string());
    }
    r.read_iops = static_cast<double>(blocks) / std::max(seconds_since(start), 1e-9);
    r.direct = direct && read_direct;
    return r;
}

}  // namespace

IoResult io_sequential(std::uint64_t file_size, std::uint64_t block, const std::filesystem::path& dir, int passes) {
    if (file_size == 0) throw ValidationError(kModule, "I/O file size must be > 0");
    if (block == 0 || block > file_size) throw ValidationError(kModule, "I/O block must be in (0, file size]");
    if (passes < 1) throw ValidationError(kModule, "I/O passes must be >= 1");
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) throw Error(kModule, "I/O path is not a directory: " + dir.string());
    const auto space = std::filesystem::space(dir, ec);
    if (!ec && space.available < file_size) {
        throw Error(kModule, fmt::format("insufficient space in {}: need {} bytes, {} available", dir.string(),
                                         file_size, space.available));
    }
    RunToken token;

    const std::uint64_t blocks = (file_size + block - 1) / block;
    const std::uint64_t alloc = (block + 4095) / 4096 * 4096;
    std::unique_ptr<char, AlignedFree> buf(static_cast<char*>(std::aligned_alloc(4096, alloc)));
    if (!buf) throw Error(kModule, "cannot allocate I/O buffer");
    std::memset(buf.get(), 0x5a, alloc);

    static std::atomic<unsigned> counter{0};
    TempFile file(dir / fmt::format("lotaru-io-{}-{}.tmp", ::getpid(), counter++));

    std::vector<double> reads, writes;
    bool direct = true;
    for (int p = 0; p < passes; ++p) {
        const auto r = run_pass(file.path(), blocks, block, buf.get(), true);
        reads.push_back(r.read_iops);
        writes.push_back(r.write_iops);
        direct = direct && r.direct;
    }
    return {stats::median(reads), stats::median(writes), direct};
}

}  // namespace bench

}  // namespace lotaru

#include "lotaru/cli.hpp"

#include "lotaru/csv.hpp"
#include "lotaru/error.hpp"
#include "lotaru/pipeline.hpp"
#include "lotaru/report.hpp"
#include "lotaru/sampling.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace fs = std::filesystem;

namespace lotaru::cli {

namespace {

constexpr const char* kModule = "cli";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- config

// Flat `key = value` file; keys are long option names without dashes.
std::vector<std::pair<std::string, std::string>> read_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(kModule, "cannot read config file " + path.string());
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        const auto body = csv::trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ValidationError(kModule, fmt::format("{}:{}: expected key = value", path.string(), n));
        }
        out.emplace_back(csv::trim(body.substr(0, eq)), csv::trim(body.substr(eq + 1)));
    }
    return out;
}

// Fills options the user did not pass on the command line.
void apply_config(CLI::App& sub, const std::string& config_path) {
    if (config_path.empty()) return;
    for (const auto& [key, value] : read_config(config_path)) {
        if (key == "config") continue;
        CLI::Option* opt = nullptr;
        try {
            opt = sub.get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            throw UsageError(fmt::format("config: unknown option '{}' for {}", key, sub.get_name()));
        }
        if (opt->count() > 0) continue;
        if (opt->get_type_size() == 0) {
            // Flags take true/false style values.
            const bool on = value == "1" || value == "true" || value == "yes" || value == "on";
            if (on) opt->add_result("true");
            else continue;
        } else {
            opt->add_result(value);
        }
        opt->run_callback();
    }
}

// ---------------------------------------------------------------- helpers

void require(const std::string& value, const char* flag) {
    if (value.empty()) throw UsageError(fmt::format("{} is required", flag));
}

void require_exists(const fs::path& p, const char* flag) {
    if (!fs::exists(p)) throw ValidationError(kModule, fmt::format("{}: path not found: {}", flag, p.string()));
}

std::vector<RunRecord> load_traces(const fs::path& path, const std::string& schema_path, std::ostream& err,
                                   TraceMetadata* metadata) {
    ColumnMapping schema;
    if (!schema_path.empty()) {
        std::ifstream s(schema_path);
        if (!s) throw ValidationError(kModule, "cannot read schema " + schema_path);
        schema = parse_column_mapping(s);
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(kModule, "cannot read traces " + path.string());
    auto parsed = parse_traces(in, schema);
    for (const auto& e : parsed.errors) fmt::print(err, "warning: trace-data: row {}: {}\n", e.row, e.message);
    for (const auto& w : parsed.warnings) fmt::print(err, "warning: trace-data: {}\n", w);
    if (parsed.records.empty()) throw ValidationError("trace-data", "no valid records in " + path.string());
    if (metadata) *metadata = std::move(parsed.metadata);
    return std::move(parsed.records);
}

// Output file when `path` is set, otherwise `fallback`.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (path.empty()) return;
        const fs::path p(path);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        file_ = std::make_unique<std::ofstream>(p, std::ios::binary);
        if (!*file_) throw Error(kModule, "cannot write " + path);
        stream_ = file_.get();
    }
    std::ostream& get() { return *stream_; }
    void close() {
        stream_->flush();
        if (!*stream_) throw Error(kModule, "write failed");
    }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

std::string hostname() {
    char buf[256] = {};
    if (::gethostname(buf, sizeof buf - 1) != 0 || buf[0] == '\0') return "local";
    return buf;
}

std::string level_label(double level) { return fmt::format("{:g}", level * 100.0); }

std::set<double> parse_levels(const std::string& text) {
    std::set<double> out;
    std::stringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        const auto t = csv::trim(tok);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || ptr != t.data() + t.size() || !(v > 0.0 && v < 1.0)) {
            throw ValidationError(kModule, "credible level must be in (0, 1): '" + std::string(t) + "'");
        }
        out.insert(v);
    }
    if (out.empty()) throw ValidationError(kModule, "no credible levels given");
    return out;
}

EstimateQuery parse_query(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0) {
        throw ValidationError(kModule, "query must look like task:size, got '" + text + "'");
    }
    EstimateQuery q{text.substr(0, colon), 0.0};
    const auto size = text.substr(colon + 1);
    const auto [ptr, ec] = std::from_chars(size.data(), size.data() + size.size(), q.input_size);
    if (ec != std::errc{} || ptr != size.data() + size.size() || q.input_size < 0.0) {
        throw ValidationError(kModule, "bad query size in '" + text + "'");
    }
    return q;
}

// CSV with a `task,input_size` header.
std::vector<EstimateQuery> read_queries(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(kModule, "cannot read queries " + path.string());
    std::string line;
    std::vector<EstimateQuery> out;
    bool header = true;
    while (std::getline(in, line)) {
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split_line(line);
        if (header) {
            header = false;
            if (fields.size() >= 2 && csv::trim(fields[0]) == "task") continue;
        }
        if (fields.size() != 2) throw ValidationError(kModule, "query rows need task,input_size: '" + line + "'");
        out.push_back(parse_query(std::string(csv::trim(fields[0])) + ":" + std::string(csv::trim(fields[1]))));
    }
    return out;
}

FrequencySetting resolve_frequency(const TraceMetadata& metadata, double freq_old, double freq_new) {
    FrequencySetting f = frequency_from_metadata(metadata);
    if (freq_old > 0.0) f.freq_old = freq_old;
    if (freq_new > 0.0) f.freq_new = freq_new;
    if (!(f.freq_old > f.freq_new && f.freq_new > 0.0)) {
        throw ValidationError(kModule, fmt::format("freq-old ({}) must exceed freq-new ({})", f.freq_old, f.freq_new));
    }
    return f;
}

std::map<std::string, NodeProfile> read_profiles(const std::string& path) {
    require(path, "--profiles");
    require_exists(path, "--profiles");
    return index_profiles(load_profiles(path));
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
    std::string node;
    double cpu_limit = 10.0;
    std::uint64_t max_prime = 20000;
    std::size_t flops_n = 200;
    std::uint64_t mem_block = 1ull << 20;
    std::uint64_t mem_total = 100ull << 30;
    std::uint64_t io_file_size = 1ull << 30;
    std::uint64_t io_block = 1ull << 20;
    std::string io_path;
    std::string out;
    bool skip_flops = false;
    bool skip_mem = false;
};

int run_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
    NodeProfile p;
    p.node = a.node.empty() ? hostname() : a.node;
    const fs::path io_dir = a.io_path.empty() ? fs::temp_directory_path() : fs::path(a.io_path);

    fmt::print(err, "cpu: prime verification up to {} for {} s\n", a.max_prime, a.cpu_limit);
    p.cpu_events_per_sec = bench::cpu_prime(std::chrono::duration<double>(a.cpu_limit), a.max_prime).events_per_sec;
    if (!a.skip_flops) {
        fmt::print(err, "flops: LU solve n={}\n", a.flops_n);
        p.flops = bench::flops(a.flops_n).flops;
    }
    if (!a.skip_mem) {
        fmt::print(err, "memory: block {} B, total {} B\n", a.mem_block, a.mem_total);
        p.mem_score = bench::memory(a.mem_block, a.mem_total);
    }
    fmt::print(err, "io: {} B file, {} B blocks in {}\n", a.io_file_size, a.io_block, io_dir.string());
    const auto io = bench::io_sequential(a.io_file_size, a.io_block, io_dir);
    if (!io.direct_io) fmt::print(err, "note: direct I/O unavailable; used fsync + cache drop fallback\n");
    p.read_iops = io.read_iops;
    p.write_iops = io.write_iops;

    Sink sink(a.out, out);
    write_profile(sink.get(), p);
    sink.close();
    return kExitOk;
}

// ---------------------------------------------------------------- plan-samples

struct PlanArgs {
    std::uint64_t size = 0;
    std::size_t count = 10;
    bool enumerate = false;
    std::size_t k_min = 2;
};

int run_plan(const PlanArgs& a, std::ostream& out) {
    if (a.size == 0) throw UsageError("--size is required and must be > 0");
    const auto plan = plan_partitions(a.size, a.count);
    if (!a.enumerate) {
        out << "label,size,cumulative,fraction\n";
        std::uint64_t cumulative = 0;
        for (std::size_t i = 0; i < plan.sizes.size(); ++i) {
            cumulative += plan.sizes[i];
            out << csv::join({plan.labels[i], std::to_string(plan.sizes[i]), std::to_string(cumulative),
                              format_number(static_cast<double>(plan.sizes[i]) / static_cast<double>(a.size))})
                << '\n';
        }
        return kExitOk;
    }
    out << "members,size,coverage,below_threshold\n";
    std::vector<std::uint64_t> sizes;
    for (const auto mask : enumerate_combinations(plan.sizes.size(), a.k_min)) {
        sizes.clear();
        std::string members;
        for (const auto i : subset_members(mask)) {
            sizes.push_back(plan.sizes[i]);
            members += (members.empty() ? "" : "+") + plan.labels[i];
        }
        const auto cov = coverage_fraction(sizes, a.size);
        std::uint64_t total = 0;
        for (auto s : sizes) total += s;
        out << csv::join({members, std::to_string(total), format_number(cov.fraction),
                          cov.below_threshold ? "1" : "0"})
            << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------- split

struct SplitArgs {
    std::string input;
    std::size_t count = 10;
    std::string out_dir;
    std::string prefix = "part";
    std::size_t lines_per_record = 4;
    bool generic = false;
};

int run_split(const SplitArgs& a, std::ostream& out) {
    require(a.input, "--input");
    require(a.out_dir, "--out-dir");
    require_exists(a.input, "--input");
    if (a.lines_per_record == 0) throw UsageError("--lines-per-record must be > 0");
    const RecordFormat format =
        (a.generic || a.lines_per_record != 4) ? line_block_format(a.lines_per_record) : fastq_format();

    std::uint64_t total = 0;
    {
        std::ifstream in(a.input, std::ios::binary);
        if (!in) throw ValidationError(kModule, "cannot read " + a.input);
        total = count_records(in, format);
    }
    const auto plan = plan_partitions(total, a.count);

    fs::create_directories(a.out_dir);
    const auto ext = fs::path(a.input).extension().string();
    std::vector<fs::path> paths;
    std::vector<std::unique_ptr<std::ofstream>> files;
    std::vector<std::ostream*> outputs;
    for (const auto& label : plan.labels) {
        auto p = fs::path(a.out_dir) / (a.prefix + "_" + label + ext);
        if (fs::exists(p) && fs::equivalent(p, a.input)) {
            throw ValidationError(kModule, "output would overwrite the input: " + p.string());
        }
        files.push_back(std::make_unique<std::ofstream>(p, std::ios::binary));
        if (!*files.back()) throw Error(kModule, "cannot write " + p.string());
        outputs.push_back(files.back().get());
        paths.push_back(std::move(p));
    }

    std::ifstream in(a.input, std::ios::binary);
    const auto result = split_records(in, plan, total, outputs, format);
    out << "label,records,path\n";
    for (std::size_t i = 0; i < paths.size(); ++i) {
        files[i]->flush();
        if (!*files[i]) throw Error(kModule, "write failed for " + paths[i].string());
        out << csv::join({plan.labels[i], std::to_string(result.partition_records[i]), paths[i].string()}) << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    std::string traces;
    std::string out;
    std::string local;
    std::string schema;
    double freq_old = 0.0;
    double freq_new = 0.0;
    bool pearson_abs = false;
    double prior_precision = BayesPrior{}.precision;
};

int run_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
    require(a.traces, "--traces");
    require(a.out, "--out");
    require_exists(a.traces, "--traces");

    TraceMetadata metadata;
    auto records = load_traces(a.traces, a.schema, err, &metadata);
    if (!a.local.empty()) {
        std::erase_if(records, [&](const RunRecord& r) { return r.node != a.local; });
        if (records.empty()) throw ValidationError(kModule, "no records for node '" + a.local + "'");
    }

    TrainOptions options;
    options.freq = resolve_frequency(metadata, a.freq_old, a.freq_new);
    options.model.gate = a.pearson_abs ? PearsonGate::Absolute : PearsonGate::Positive;
    if (!(a.prior_precision >= 0.0)) throw ValidationError(kModule, "--prior-precision must be >= 0");
    options.model.prior.precision = a.prior_precision;
    options.threads = default_thread_count();
    const auto models = train_models(records, options);

    fs::create_directories(a.out);
    out << "workflow,task,kind,training_size,w,file\n";
    for (const auto& m : models) {
        const auto path = fs::path(a.out) / model_file_name(m.workflow, m.model.task);
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error("model-file", "cannot write " + path.string());
        write_model_file(f, m);
        f.flush();
        if (!f) throw Error("model-file", "write failed for " + path.string());
        if (m.model.low_confidence) {
            fmt::print(err, "warning: estimator: {} has a single training point; low confidence\n", m.model.task);
        }
        if (m.weight.no_reduced_run) {
            fmt::print(err, "warning: adjustment: {} has no reduced-frequency run; w = {}\n", m.model.task,
                       m.weight.w);
        }
        out << csv::join({m.workflow, m.model.task, to_string(m.model.kind()), std::to_string(m.model.training_size),
                          format_number(m.weight.w), path.filename().string()})
            << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
    std::string models;
    std::string profiles;
    std::string local;
    std::string queries;
    std::vector<std::string> query;
    std::string workflow;
    std::string out;
    std::string levels = "0.5,0.95";
    bool truncate = false;
    std::string estimator = "lotaru";
};

int run_predict(const PredictArgs& a, std::ostream& out) {
    require(a.models, "--models");
    require(a.profiles, "--profiles");
    require(a.local, "--local");
    if (a.queries.empty() && a.query.empty()) throw UsageError("--queries or --query is required");
    require_exists(a.models, "--models");
    if (!a.queries.empty()) require_exists(a.queries, "--queries");

    const auto profiles = read_profiles(a.profiles);
    const auto levels = parse_levels(a.levels);
    const auto kind = parse_estimator(a.estimator);

    std::vector<EstimateQuery> queries;
    if (!a.queries.empty()) queries = read_queries(a.queries);
    for (const auto& q : a.query) queries.push_back(parse_query(q));
    if (queries.empty()) throw ValidationError(kModule, "no queries given");

    std::map<std::string, ModelFile> files;
    for (auto& m : load_model_dir(a.models)) {
        if (!a.workflow.empty() && m.workflow != a.workflow) continue;
        const auto task = m.model.task;
        if (!files.emplace(task, std::move(m)).second) {
            throw ValidationError(kModule, "task '" + task + "' appears in several workflows; pass --workflow");
        }
    }

    std::vector<std::string> header{"task", "node", "input_size", "mean_ms"};
    for (double l : levels) {
        header.push_back("lo" + level_label(l));
        header.push_back("hi" + level_label(l));
    }
    for (const char* h : {"factor", "w", "model_kind"}) header.emplace_back(h);

    std::vector<std::vector<std::string>> rows;
    if (kind == EstimatorKind::Lotaru) {
        std::map<std::string, TaskModel> models;
        std::map<std::string, TaskWeight> weights;
        for (const auto& [task, f] : files) {
            models.emplace(task, f.model);
            weights.emplace(task, f.weight);
        }
        const auto matrix =
            build_estimate_matrix(models, weights, profiles, a.local, queries, MatrixOptions{levels, a.truncate});
        for (const auto& c : matrix.cells) {
            std::vector<std::string> row{c.task, c.node, fmt::format("{}", c.input_size),
                                         fmt::format("{:.2f}", c.prediction.mean_ms)};
            for (double l : levels) {
                const auto& iv = c.prediction.intervals.at(l);
                row.push_back(fmt::format("{:.2f}", iv.lower));
                row.push_back(fmt::format("{:.2f}", iv.upper));
            }
            row.push_back(format_number(c.factor));
            row.push_back(format_number(c.w));
            row.push_back(to_string(c.prediction.kind));
            rows.push_back(std::move(row));
        }
    } else {
        // Baselines give point estimates only and ignore node speed.
        const auto nodes = ordered_nodes(profiles, a.local);
        for (const auto& q : queries) {
            const auto it = files.find(q.task);
            if (it == files.end()) throw ValidationError(kModule, "no model for task '" + q.task + "'");
            for (const NodeProfile* node : nodes) {
                const double v = estimate_runtime(kind, it->second, q.input_size, *nodes.front(), *node);
                std::vector<std::string> row{q.task, node->node, fmt::format("{}", q.input_size),
                                             fmt::format("{:.2f}", v)};
                for (std::size_t i = 0; i < 2 * levels.size(); ++i) row.emplace_back();
                row.push_back(format_number(1.0));
                row.push_back(format_number(it->second.weight.w));
                row.push_back(to_string(kind));
                rows.push_back(std::move(row));
            }
        }
    }

    Sink sink(a.out, out);
    sink.get() << csv::join(header) << '\n';
    for (const auto& r : rows) sink.get() << csv::join(r) << '\n';
    sink.close();
    return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::string traces;
    std::string profiles;
    std::string local;
    std::string schema;
    std::string estimator = "all";
    std::string group_by = "estimator,node";
    std::string out;
    std::string format = "csv";
    std::string target_label = "full";
    double freq_old = 0.0;
    double freq_new = 0.0;
    bool truncate = false;
    bool pearson_abs = false;
};

int run_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
    require(a.traces, "--traces");
    require(a.profiles, "--profiles");
    require(a.local, "--local");
    require(a.out, "--out");
    require_exists(a.traces, "--traces");

    const auto profiles = read_profiles(a.profiles);
    const auto group_by = parse_group_keys(a.group_by);
    const auto format = parse_report_format(a.format);

    TraceMetadata metadata;
    const auto records = load_traces(a.traces, a.schema, err, &metadata);

    EvaluationSetup setup;
    setup.local = a.local;
    setup.target_label = a.target_label;
    setup.estimators = parse_estimators(a.estimator);
    setup.truncate = a.truncate;
    setup.train.freq = resolve_frequency(metadata, a.freq_old, a.freq_new);
    setup.train.model.gate = a.pearson_abs ? PearsonGate::Absolute : PearsonGate::Positive;
    setup.train.threads = default_thread_count();

    const auto result = evaluate_traces(records, profiles, setup);
    for (const auto& w : result.warnings) fmt::print(err, "warning: evaluation: {}\n", w);

    const auto summaries = summarize(result.errors, group_by);
    std::vector<NamedCdf> cdfs;
    for (const auto kind : setup.estimators) {
        std::vector<double> errs;
        for (const auto& r : result.errors) {
            if (r.estimator == to_string(kind)) errs.push_back(r.err);
        }
        if (!errs.empty()) cdfs.push_back({to_string(kind), error_cdf(std::move(errs))});
    }
    auto written = emit_report(a.out, summaries, cdfs, format, group_by);

    const auto grid = mpe_grid(result.errors);
    const auto grid_path = fs::path(a.out) / "grid.csv";
    {
        std::ofstream g(grid_path, std::ios::binary);
        if (!g) throw Error("evaluation", "cannot write " + grid_path.string());
        write_grid_csv(g, grid);
        g.flush();
        if (!g) throw Error("evaluation", "write failed for " + grid_path.string());
    }
    written.push_back(grid_path);

    for (const auto& p : written) out << p.string() << '\n';
    if (setup.estimators.size() == 4) {
        fmt::print(err, "qualitative ordering lotaru < online-p <= online-m < naive: {}\n",
                   qualitative_ordering_holds(grid) ? "holds" : "violated");
    }
    return kExitOk;
}

// ---------------------------------------------------------------- wiring

template <typename T>
CLI::Option* size_option(CLI::App* app, const std::string& name, T& target, const std::string& desc) {
    return app->add_option(name, target, desc)->transform(CLI::AsSizeValue(false));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Local runtime prediction for scientific workflow tasks on heterogeneous clusters", "lotaru"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    std::map<CLI::App*, std::string> configs;
    auto add_sub = [&](const char* name, const char* desc) {
        auto* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", configs[sub], "Flat key = value file; flags take precedence");
        return sub;
    };

    BenchArgs bench;
    auto* b = add_sub("bench", "Profile this node with single-threaded microbenchmarks");
    b->add_option("--node", bench.node, "Node name (default: hostname)");
    b->add_option("--cpu-limit-secs", bench.cpu_limit, "CPU benchmark duration")->capture_default_str();
    b->add_option("--max-prime", bench.max_prime, "Largest number checked per event")->capture_default_str();
    b->add_option("--flops-n", bench.flops_n, "LU matrix dimension")->capture_default_str();
    size_option(b, "--mem-block", bench.mem_block, "Memory benchmark block (e.g. 1MiB)");
    size_option(b, "--mem-total", bench.mem_total, "Memory benchmark total bytes (e.g. 100GiB)");
    size_option(b, "--io-file-size", bench.io_file_size, "I/O benchmark file size");
    size_option(b, "--io-block", bench.io_block, "I/O block size");
    b->add_option("--io-path", bench.io_path, "Directory for the I/O temp file");
    b->add_option("--out", bench.out, "Profile output file (default: stdout)");
    b->add_flag("--skip-flops", bench.skip_flops, "Skip the FLOPS benchmark");
    b->add_flag("--skip-mem", bench.skip_mem, "Skip the memory benchmark");

    PlanArgs plan;
    auto* ps = add_sub("plan-samples", "Print the halving partition plan for an input");
    size_option(ps, "--size", plan.size, "Original input size");
    ps->add_option("--count", plan.count, "Number of partitions")->capture_default_str();
    ps->add_flag("--enumerate", plan.enumerate, "List partition combinations with coverage");
    ps->add_option("--k-min", plan.k_min, "Smallest combination size")->capture_default_str();

    SplitArgs split;
    auto* sp = add_sub("split", "Split a record file into halving partitions");
    sp->add_option("--input", split.input, "Input file (uncompressed)");
    sp->add_option("--count", split.count, "Number of partitions")->capture_default_str();
    sp->add_option("--out-dir", split.out_dir, "Output directory");
    sp->add_option("--prefix", split.prefix, "Output file prefix")->capture_default_str();
    sp->add_option("--lines-per-record", split.lines_per_record, "Lines per record (4 = FASTQ)")
        ->capture_default_str();
    sp->add_flag("--generic", split.generic, "Skip FASTQ validation");

    TrainArgs train;
    auto* tr = add_sub("train", "Fit one model per task from local traces");
    tr->add_option("--traces", train.traces, "Trace CSV");
    tr->add_option("--out", train.out, "Model directory");
    tr->add_option("--local", train.local, "Use only records from this node");
    tr->add_option("--schema", train.schema, "Column mapping file");
    tr->add_option("--freq-old", train.freq_old, "Normal CPU frequency (overrides trace metadata)");
    tr->add_option("--freq-new", train.freq_new, "Reduced CPU frequency (overrides trace metadata)");
    tr->add_flag("--pearson-abs", train.pearson_abs, "Gate on |p| instead of p");
    tr->add_option("--prior-precision", train.prior_precision, "Prior precision on coefficients")
        ->capture_default_str();

    PredictArgs pred;
    auto* pr = add_sub("predict", "Predict task runtimes on every profiled node");
    pr->add_option("--models", pred.models, "Model directory");
    pr->add_option("--profiles", pred.profiles, "Profile file or directory");
    pr->add_option("--local", pred.local, "Node the models were trained on");
    pr->add_option("--queries", pred.queries, "CSV of task,input_size");
    pr->add_option("--query", pred.query, "task:size (repeatable)");
    pr->add_option("--workflow", pred.workflow, "Restrict to models of this workflow");
    pr->add_option("--out", pred.out, "Output CSV (default: stdout)");
    pr->add_option("--levels", pred.levels, "Credible levels")->capture_default_str();
    pr->add_flag("--truncate-factor", pred.truncate, "Truncate node factors to two decimals");
    pr->add_option("--estimator", pred.estimator, "lotaru, naive, online-m or online-p")->capture_default_str();

    EvaluateArgs eval;
    auto* ev = add_sub("evaluate", "Score estimators against cluster traces");
    ev->add_option("--traces", eval.traces, "Trace CSV");
    ev->add_option("--profiles", eval.profiles, "Profile file or directory");
    ev->add_option("--local", eval.local, "Local (training) node");
    ev->add_option("--schema", eval.schema, "Column mapping file");
    ev->add_option("--estimator", eval.estimator, "Comma list or 'all'")->capture_default_str();
    ev->add_option("--group-by", eval.group_by, "Summary keys")->capture_default_str();
    ev->add_option("--out", eval.out, "Report directory");
    ev->add_option("--format", eval.format, "csv or svg")->capture_default_str();
    ev->add_option("--target-label", eval.target_label, "Local partition label held out as target")
        ->capture_default_str();
    ev->add_option("--freq-old", eval.freq_old, "Normal CPU frequency");
    ev->add_option("--freq-new", eval.freq_new, "Reduced CPU frequency");
    ev->add_flag("--truncate-factor", eval.truncate, "Truncate node factors to two decimals");
    ev->add_flag("--pearson-abs", eval.pearson_abs, "Gate on |p| instead of p");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        fmt::print(err, "error: {}\n", e.what());
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        apply_config(*sub, configs[sub]);
        if (sub == b) return run_bench(bench, out, err);
        if (sub == ps) return run_plan(plan, out);
        if (sub == sp) return run_split(split, out);
        if (sub == tr) return run_train(train, out, err);
        if (sub == pr) return run_predict(pred, out);
        return run_evaluate(eval, out, err);
    } catch (const UsageError& e) {
        fmt::print(err, "error: {}\n{}", e.what(), sub->help());
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        fmt::print(err, "error: config: {}\n", e.what());
        return kExitUsage;
    } catch (const ValidationError& e) {
        fmt::print(err, "error: {}: {}\n", e.module(), e.what());
        return kExitUsage;
    } catch (const Error& e) {
        fmt::print(err, "error: {}: {}\n", e.module(), e.what());
        return kExitFailure;
    } catch (const fs::filesystem_error& e) {
        fmt::print(err, "error: {}: {}\n", kModule, e.what());
        return kExitFailure;
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}: {}\n", sub->get_name(), e.what());
        return kExitFailure;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace lotaru::cli

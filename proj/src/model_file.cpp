#include "lotaru/model_file.hpp"

#include "lotaru/csv.hpp"
#include "lotaru/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace lotaru {

namespace {

constexpr const char* kModule = "model-file";

std::string num(double v) { return fmt::format("{}", v); }

double parse_num(const std::string& text, const std::string& key) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ValidationError(kModule, fmt::format("key '{}': '{}' is not a number", key, text));
    }
    return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) out.push_back(parse_num(tok, key));
    return out;
}

std::string join_nums(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out.push_back(' ');
        out += num(xs[i]);
    }
    return out;
}

class KeyValues {
public:
    explicit KeyValues(std::istream& in) {
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto body = csv::trim(line);
            if (body.empty() || body.front() == '#') continue;
            const auto eq = body.find('=');
            if (eq == std::string_view::npos) {
                throw ValidationError(kModule, fmt::format("line {}: expected key = value", line_no));
            }
            entries_.emplace(std::string(csv::trim(body.substr(0, eq))), std::string(csv::trim(body.substr(eq + 1))));
        }
    }

    const std::string& get(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) throw ValidationError(kModule, "missing key '" + key + "'");
        return it->second;
    }
    double number(const std::string& key) const { return parse_num(get(key), key); }
    bool flag(const std::string& key) const { return get(key) == "1"; }
    std::vector<std::string> all(const std::string& key) const {
        std::vector<std::string> out;
        const auto [lo, hi] = entries_.equal_range(key);
        for (auto it = lo; it != hi; ++it) out.push_back(it->second);
        return out;
    }

private:
    std::multimap<std::string, std::string> entries_;
};

}  // namespace

void write_model_file(std::ostream& out, const ModelFile& file) {
    const auto& m = file.model;
    out << "format = lotaru-model\n";
    out << "version = " << kModelFileVersion << '\n';
    out << "workflow = " << file.workflow << '\n';
    out << "task = " << m.task << '\n';
    out << "kind = " << to_string(m.kind()) << '\n';
    out << "training_size = " << m.training_size << '\n';
    out << "low_confidence = " << (m.low_confidence ? 1 : 0) << '\n';
    out << "pearson = " << (m.pearson.p ? num(*m.pearson.p) : "-") << '\n';
    out << "pearson_significant = " << (m.pearson.significant ? 1 : 0) << '\n';
    if (const auto* post = std::get_if<BayesPosterior>(&m.fit)) {
        const auto& s = post->standardization;
        out << "x_mean = " << num(s.x_mean) << '\n';
        out << "x_scale = " << num(s.x_scale) << '\n';
        out << "y_mean = " << num(s.y_mean) << '\n';
        out << "posterior_mean = " << join_nums({post->mean[0], post->mean[1]}) << '\n';
        out << "posterior_covariance = "
            << join_nums({post->covariance[0][0], post->covariance[0][1], post->covariance[1][0],
                          post->covariance[1][1]})
            << '\n';
        out << "noise_shape = " << num(post->shape) << '\n';
        out << "noise_scale = " << num(post->scale) << '\n';
    } else {
        const auto& med = std::get<MedianModel>(m.fit);
        out << "median_ms = " << num(med.median_ms) << '\n';
        out << "runtimes = " << join_nums(med.runtimes) << '\n';
    }
    const auto& w = file.weight;
    out << "weight.median_dev = " << num(w.median_dev) << '\n';
    out << "weight.w = " << num(w.w) << '\n';
    out << "weight.pair_count = " << w.pair_count << '\n';
    out << "weight.no_reduced_run = " << (w.no_reduced_run ? 1 : 0) << '\n';
    for (const auto& s : m.samples) out << "sample = " << num(s.x) << ' ' << num(s.y) << '\n';
}

ModelFile read_model_file(std::istream& in) {
    const KeyValues kv(in);
    if (kv.get("format") != "lotaru-model") throw ValidationError(kModule, "not a model file");
    const auto version = kv.number("version");
    if (version != kModelFileVersion) {
        throw ValidationError(kModule, fmt::format("unsupported model file version {}", version));
    }

    ModelFile file;
    auto& m = file.model;
    file.workflow = kv.get("workflow");
    m.task = kv.get("task");
    m.training_size = static_cast<std::size_t>(kv.number("training_size"));
    m.low_confidence = kv.flag("low_confidence");
    if (kv.get("pearson") != "-") m.pearson.p = kv.number("pearson");
    m.pearson.significant = kv.flag("pearson_significant");

    const auto& kind = kv.get("kind");
    if (kind == "regression") {
        BayesPosterior post;
        post.standardization = {kv.number("x_mean"), kv.number("x_scale"), kv.number("y_mean")};
        const auto mean = parse_list(kv.get("posterior_mean"), "posterior_mean");
        const auto cov = parse_list(kv.get("posterior_covariance"), "posterior_covariance");
        if (mean.size() != 2 || cov.size() != 4) throw ValidationError(kModule, "malformed posterior");
        post.mean = {mean[0], mean[1]};
        post.covariance = {{{cov[0], cov[1]}, {cov[2], cov[3]}}};
        post.shape = kv.number("noise_shape");
        post.scale = kv.number("noise_scale");
        m.fit = post;
    } else if (kind == "median") {
        MedianModel med;
        med.median_ms = kv.number("median_ms");
        med.runtimes = parse_list(kv.get("runtimes"), "runtimes");
        if (med.runtimes.empty()) throw ValidationError(kModule, "median model without runtimes");
        m.fit = med;
    } else {
        throw ValidationError(kModule, "unknown model kind '" + kind + "'");
    }

    auto& w = file.weight;
    w.task = m.task;
    w.median_dev = kv.number("weight.median_dev");
    w.w = kv.number("weight.w");
    w.pair_count = static_cast<std::size_t>(kv.number("weight.pair_count"));
    w.no_reduced_run = kv.flag("weight.no_reduced_run");

    for (const auto& s : kv.all("sample")) {
        const auto xy = parse_list(s, "sample");
        if (xy.size() != 2) throw ValidationError(kModule, "sample needs two values");
        m.samples.push_back({xy[0], xy[1]});
    }
    return file;
}

std::string model_file_name(const std::string& workflow, const std::string& task) {
    auto encode = [](const std::string& s) {
        std::string out;
        for (unsigned char c : s) {
            if (std::isalnum(c) || c == '-' || c == '.' || c == '_') {
                out.push_back(static_cast<char>(c));
            } else {
                out += fmt::format("%{:02X}", c);
            }
        }
        return out;
    };
    // '_' doubles as the separator, so it is encoded inside the workflow part.
    std::string wf = encode(workflow);
    std::string escaped;
    for (char c : wf) escaped += c == '_' ? std::string("%5F") : std::string(1, c);
    return (workflow.empty() ? "" : escaped + "__") + encode(task) + ".model";
}

std::vector<ModelFile> load_model_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ValidationError(kModule, "model directory not found: " + dir.string());
    std::vector<std::filesystem::path> paths;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".model") paths.push_back(e.path());
    }
    std::sort(paths.begin(), paths.end());
    std::vector<ModelFile> out;
    for (const auto& p : paths) {
        std::ifstream in(p);
        try {
            out.push_back(read_model_file(in));
        } catch (const ValidationError& e) {
            throw ValidationError(kModule, p.filename().string() + ": " + e.what());
        }
    }
    if (out.empty()) throw ValidationError(kModule, "no model files in " + dir.string());
    return out;
}

}  // namespace lotaru

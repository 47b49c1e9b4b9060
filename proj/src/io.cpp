#include "shapval/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "shapval/errors.hpp"

namespace shapval {

using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hash_hex(std::uint64_t hash) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

double parse_double_value(const std::string& key, const std::string& text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw_config("config", "key '" + key + "': '" + text + "' is not a number");
    }
    return v;
}

long long parse_int_value(const std::string& key, const std::string& text) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw_config("config", "key '" + key + "': '" + text + "' is not an integer");
    }
    return v;
}

std::uint64_t parse_u64_value(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw_config("config", "key '" + key + "': '" + text + "' is not an unsigned integer");
    }
    return v;
}

bool parse_bool_value(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw_config("config", "key '" + key + "': '" + text + "' is not a boolean");
}

}  // namespace

ConfigMap parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_config("config", "cannot open config file " + path);
    ConfigMap map;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw_config("config", path + ":" + std::to_string(line_no) + ": unterminated section");
            }
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw_config("config", path + ":" + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw_config("config", path + ":" + std::to_string(line_no) + ": empty key");
        }
        map[section.empty() ? key : section + "." + key] = value;
    }
    return map;
}

void apply_override(ConfigMap& map, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw_config("config", "override '" + assignment + "' must be section.key=value");
    }
    map[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

ConfigMap RunConfig::to_map() const {
    ConfigMap m;
    m["dataset.kind"] = dataset_kind;
    m["dataset.path"] = csv_path;
    m["dataset.label_column"] = label_column;
    m["dataset.eval_fraction"] = format_double(eval_fraction);
    m["dataset.n_train"] = std::to_string(n_train);
    m["dataset.n_eval"] = std::to_string(n_eval);
    m["dataset.dim"] = std::to_string(dim);
    m["dataset.separation"] = format_double(separation);
    m["dataset.label_noise"] = format_double(label_noise);
    m["dataset.standardize"] = standardize ? "true" : "false";
    m["model.regime"] = regime;
    m["model.lambda"] = format_double(lambda);
    m["model.loss_bound"] = format_double(loss_bound);
    m["model.step_scale"] = format_double(step_scale);
    m["model.sgd_steps"] = std::to_string(sgd_steps);
    m["model.epochs"] = std::to_string(epochs);
    m["model.schedule"] = schedule;
    m["model.learning_rate"] = format_double(learning_rate);
    m["model.hidden_units"] = std::to_string(hidden_units);
    m["model.activation"] = activation;
    m["model.warm_start"] = warm_start_path;
    m["model.lipschitz"] = format_double(lipschitz);
    m["model.smoothness"] = format_double(smoothness);
    m["model.kernel_bound"] = format_double(kernel_bound);
    m["run.method"] = method;
    m["run.mode"] = mode;
    m["run.h"] = std::to_string(h);
    m["run.additive_error"] = format_double(additive_error);
    m["run.failure_prob"] = format_double(failure_prob);
    m["run.band"] = band;
    m["run.layer_cap"] = std::to_string(layer_cap);
    m["run.h_cap"] = std::to_string(h_cap);
    m["run.iteration_cap"] = std::to_string(iteration_cap);
    m["run.convergence"] = convergence ? "true" : "false";
    m["run.points"] = points;
    m["run.seed"] = std::to_string(seed);
    m["run.workers"] = std::to_string(workers);
    m["run.out"] = out_dir;
    return m;
}

RunConfig RunConfig::from_map(const ConfigMap& map) {
    RunConfig c;
    const ConfigMap known = c.to_map();
    for (const auto& [key, value] : map) {
        if (!known.count(key)) throw_config("config", "unknown config key '" + key + "'");
    }
    auto str = [&](const char* key, std::string& out) {
        auto it = map.find(key);
        if (it != map.end()) out = it->second;
    };
    auto dbl = [&](const char* key, double& out) {
        auto it = map.find(key);
        if (it != map.end()) out = parse_double_value(key, it->second);
    };
    auto i64 = [&](const char* key, auto& out) {
        auto it = map.find(key);
        if (it != map.end()) out = static_cast<std::remove_reference_t<decltype(out)>>(parse_int_value(key, it->second));
    };
    auto bol = [&](const char* key, bool& out) {
        auto it = map.find(key);
        if (it != map.end()) out = parse_bool_value(key, it->second);
    };
    str("dataset.kind", c.dataset_kind);
    str("dataset.path", c.csv_path);
    str("dataset.label_column", c.label_column);
    dbl("dataset.eval_fraction", c.eval_fraction);
    i64("dataset.n_train", c.n_train);
    i64("dataset.n_eval", c.n_eval);
    i64("dataset.dim", c.dim);
    dbl("dataset.separation", c.separation);
    dbl("dataset.label_noise", c.label_noise);
    bol("dataset.standardize", c.standardize);
    str("model.regime", c.regime);
    dbl("model.lambda", c.lambda);
    dbl("model.loss_bound", c.loss_bound);
    dbl("model.step_scale", c.step_scale);
    i64("model.sgd_steps", c.sgd_steps);
    i64("model.epochs", c.epochs);
    str("model.schedule", c.schedule);
    dbl("model.learning_rate", c.learning_rate);
    i64("model.hidden_units", c.hidden_units);
    str("model.activation", c.activation);
    str("model.warm_start", c.warm_start_path);
    dbl("model.lipschitz", c.lipschitz);
    dbl("model.smoothness", c.smoothness);
    dbl("model.kernel_bound", c.kernel_bound);
    str("run.method", c.method);
    str("run.mode", c.mode);
    i64("run.h", c.h);
    dbl("run.additive_error", c.additive_error);
    dbl("run.failure_prob", c.failure_prob);
    str("run.band", c.band);
    i64("run.layer_cap", c.layer_cap);
    i64("run.h_cap", c.h_cap);
    i64("run.iteration_cap", c.iteration_cap);
    bol("run.convergence", c.convergence);
    str("run.points", c.points);
    if (auto it = map.find("run.seed"); it != map.end()) c.seed = parse_u64_value("run.seed", it->second);
    i64("run.workers", c.workers);
    str("run.out", c.out_dir);
    return c;
}

Dataset build_dataset(const RunConfig& config, const SeedTree& seeds) {
    if (config.dataset_kind == "csv") {
        if (config.csv_path.empty()) throw_config("config", "dataset.path required for kind csv");
        return load_csv(config.csv_path, config.label_column, config.eval_fraction,
                        seeds.child("dataset"));
    }
    SynthSpec spec;
    if (config.dataset_kind == "blobs") {
        spec.kind = SynthKind::GaussianBlobs;
    } else if (config.dataset_kind == "images") {
        spec.kind = SynthKind::TwoClassImages;
    } else {
        throw_config("config", "unknown dataset kind '" + config.dataset_kind + "'");
    }
    spec.n_train = config.n_train;
    spec.n_eval = config.n_eval;
    spec.dim = config.dim;
    spec.separation = config.separation;
    spec.label_noise = config.label_noise;
    spec.standardize = config.standardize;
    spec.name = config.dataset_kind;
    return synth_dataset(spec, seeds.child("dataset"));
}

TrainConfig build_train_config(const RunConfig& config, const Dataset& data) {
    TrainConfig t;
    t.regime = regime_from_string(config.regime);
    t.schedule = schedule_from_string(config.schedule);
    t.learning_rate = config.learning_rate;
    t.epochs = config.epochs;
    t.hidden_units = static_cast<int>(config.hidden_units);
    t.activation = activation_from_string(config.activation);
    t.constants.strong_convexity = config.lambda;
    t.constants.loss_bound = config.loss_bound;
    t.constants.step_scale = config.step_scale;
    t.constants.kernel_bound = config.kernel_bound;
    t.constants.sgd_steps = config.sgd_steps;
    if (t.constants.sgd_steps <= 0 && config.epochs > 0) {
        // worst-case step count across layers, used by the sample-size formulas
        t.constants.sgd_steps = config.epochs * data.train_count();
    }
    if (!config.warm_start_path.empty()) {
        t.warm_start = ModelParams::from_json(read_text_file(config.warm_start_path));
    }
    const LossConstants estimated = estimate_constants(data, t);
    t.constants.lipschitz = config.lipschitz > 0 ? config.lipschitz : estimated.lipschitz;
    t.constants.smoothness = config.smoothness > 0 ? config.smoothness : estimated.smoothness;
    t.validate();
    return t;
}

SemiValueSpec build_band(const RunConfig& config, int n) {
    if (config.band == "mid" || config.band == "low") {
        return band_presets(n, band_preset_from_string(config.band));
    }
    const std::size_t colon = config.band.find(':');
    if (colon == std::string::npos) {
        throw_config("invalid-band", "band must be 'mid', 'low', or 'lo:hi'");
    }
    const long long lo = parse_int_value("run.band", config.band.substr(0, colon));
    const long long hi = parse_int_value("run.band", config.band.substr(colon + 1));
    return SemiValueSpec::banded_uniform(n, static_cast<int>(lo), static_cast<int>(hi));
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        if (t.empty()) continue;
        out.push_back(static_cast<int>(parse_int_value("list", t)));
    }
    return out;
}

std::vector<int> parse_point_list(const std::string& text, int n) {
    std::vector<int> points;
    if (text == "all" || text.empty()) {
        points.resize(n);
        for (int i = 0; i < n; ++i) points[i] = i;
        return points;
    }
    points = parse_int_list(text);
    if (points.empty()) throw_config("points", "empty point list");
    std::vector<int> sorted = points;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw_config("points", "duplicate point in list");
    }
    for (int p : points) {
        if (p < 0 || p >= n) throw_config("points", "point outside [0, n)");
    }
    return points;
}

std::string result_to_json(const ValuationResult& r) {
    json j;
    j["method"] = r.method;
    j["seed"] = r.seed;
    j["dataset_hash"] = hash_hex(r.dataset_hash);
    j["points"] = r.points;
    j["values"] = r.values;
    j["trainings_performed"] = r.trainings_performed;
    j["cache_hits"] = r.cache_hits;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    json diag = json::array();
    for (const LayerEstimate& e : r.diagnostics) {
        diag.push_back({{"point", e.point},
                        {"layer", e.layer},
                        {"mean_contribution", e.mean_contribution},
                        {"contribution_variance", e.contribution_variance},
                        {"samples_used", e.samples_used},
                        {"theoretical_mk", e.theoretical_mk}});
    }
    j["diagnostics"] = std::move(diag);
    json trace = json::array();
    for (const ConvergencePoint& p : r.convergence_trace) {
        trace.push_back({{"iteration", p.iteration}, {"deviation", p.deviation}});
    }
    j["convergence_trace"] = std::move(trace);
    j["timing"] = {{"wall_time_seconds", r.wall_time_seconds}};
    return j.dump(2) + "\n";
}

ValuationResult result_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw_data("parse", "result JSON does not parse");
    ValuationResult r;
    try {
        r.method = j.at("method").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.dataset_hash = std::stoull(j.at("dataset_hash").get<std::string>(), nullptr, 16);
        r.points = j.at("points").get<std::vector<int>>();
        r.values = j.at("values").get<std::vector<double>>();
        r.trainings_performed = j.at("trainings_performed").get<std::int64_t>();
        r.cache_hits = j.value("cache_hits", std::int64_t{0});
        r.iterations = j.value("iterations", std::int64_t{0});
        r.converged = j.value("converged", false);
        if (j.contains("timing")) {
            r.wall_time_seconds = j["timing"].value("wall_time_seconds", 0.0);
        }
        if (j.contains("diagnostics")) {
            for (const json& d : j["diagnostics"]) {
                LayerEstimate e;
                e.point = d.at("point").get<int>();
                e.layer = d.at("layer").get<int>();
                e.mean_contribution = d.at("mean_contribution").get<double>();
                e.contribution_variance = d.at("contribution_variance").get<double>();
                e.samples_used = d.at("samples_used").get<std::int64_t>();
                e.theoretical_mk = d.at("theoretical_mk").get<double>();
                r.diagnostics.push_back(e);
            }
        }
        if (j.contains("convergence_trace")) {
            for (const json& p : j["convergence_trace"]) {
                r.convergence_trace.push_back(
                    {p.at("iteration").get<std::int64_t>(), p.at("deviation").get<double>()});
            }
        }
    } catch (const json::exception& e) {
        throw_data("parse", std::string("result JSON missing field: ") + e.what());
    }
    if (r.points.size() != r.values.size()) {
        throw_data("parse", "result JSON points/values length mismatch");
    }
    return r;
}

ValuationResult load_result(const std::string& path) {
    return result_from_json(read_text_file(path));
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_data("write-failed", "cannot write " + path);
    out << content;
    if (!out) throw_data("write-failed", "failed writing " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_data("file-not-found", "cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string values_csv(const ValuationResult& r) {
    std::ostringstream out;
    out << "point_id,value,method,seed,dataset_hash\n";
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        out << r.points[i] << ',' << format_double(r.values[i]) << ',' << r.method << ','
            << r.seed << ',' << hash_hex(r.dataset_hash) << '\n';
    }
    return out.str();
}

ValuesFile parse_values_csv(const std::string& content) {
    std::stringstream in(content);
    std::string line;
    if (!std::getline(in, line)) throw_data("parse", "empty values CSV");
    ValuesFile file;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ',')) cells.push_back(trim(cell));
        if (cells.size() < 2) throw_data("parse", "values CSV row needs point_id,value");
        file.points.push_back(static_cast<int>(parse_int_value("point_id", cells[0])));
        file.values.push_back(parse_double_value("value", cells[1]));
        if (cells.size() >= 5) file.dataset_hash = cells[4];
    }
    if (file.points.empty()) throw_data("parse", "values CSV has no rows");
    return file;
}

std::string comparison_csv(const std::vector<MethodComparison>& rows) {
    std::ostringstream out;
    out << "method,spearman_rho,trainings,wall_time_seconds,training_speedup,time_speedup\n";
    for (const MethodComparison& r : rows) {
        out << r.method << ',' << format_double(r.spearman_rho) << ',' << r.trainings << ','
            << format_double(r.wall_time_seconds) << ',' << format_double(r.training_speedup)
            << ',' << format_double(r.time_speedup) << '\n';
    }
    return out.str();
}

std::string comparison_json(const std::vector<MethodComparison>& rows,
                            const ValuationResult& reference) {
    json j;
    j["reference"] = {{"method", reference.method},
                      {"trainings", reference.trainings_performed},
                      {"wall_time_seconds", reference.wall_time_seconds},
                      {"dataset_hash", hash_hex(reference.dataset_hash)}};
    json arr = json::array();
    for (const MethodComparison& r : rows) {
        arr.push_back({{"method", r.method},
                       {"spearman_rho", r.spearman_rho},
                       {"trainings", r.trainings},
                       {"wall_time_seconds", r.wall_time_seconds},
                       {"training_speedup", r.training_speedup},
                       {"time_speedup", r.time_speedup}});
    }
    j["methods"] = std::move(arr);
    return j.dump(2) + "\n";
}

std::string profile_csv(const StabilityProfile& profile) {
    std::ostringstream out;
    out << "layer,mean_abs,median_abs,max_abs,std_abs,samples\n";
    for (const LayerStats& s : profile.layers) {
        out << s.layer << ',' << format_double(s.mean_abs) << ',' << format_double(s.median_abs)
            << ',' << format_double(s.max_abs) << ',' << format_double(s.std_abs) << ','
            << s.samples << '\n';
    }
    return out.str();
}

std::string profile_json(const StabilityProfile& profile) {
    json arr = json::array();
    for (const LayerStats& s : profile.layers) {
        arr.push_back({{"layer", s.layer},
                       {"mean_abs", s.mean_abs},
                       {"median_abs", s.median_abs},
                       {"max_abs", s.max_abs},
                       {"std_abs", s.std_abs},
                       {"samples", s.samples}});
    }
    json j;
    j["layers"] = std::move(arr);
    return j.dump(2) + "\n";
}

std::string removal_csv(const RemovalCurve& curve) {
    std::ostringstream out;
    out << "fraction_removed,accuracy,direction,truncated\n";
    for (std::size_t i = 0; i < curve.fractions_removed.size(); ++i) {
        out << format_double(curve.fractions_removed[i]) << ','
            << format_double(curve.accuracies[i]) << ',' << curve.direction << ','
            << (curve.truncated ? "true" : "false") << '\n';
    }
    return out.str();
}

std::string manifest_json(const std::string& command, const RunConfig& config,
                          std::uint64_t dataset_hash, const ConfigMap& resolved) {
    json j;
    j["version"] = kVersion;
    j["command"] = command;
    j["seed"] = config.seed;
    j["dataset_hash"] = hash_hex(dataset_hash);
    json cfg;
    for (const auto& [key, value] : config.to_map()) cfg[key] = value;
    j["config"] = std::move(cfg);
    if (!resolved.empty()) {
        json res;
        for (const auto& [key, value] : resolved) res[key] = value;
        j["resolved"] = std::move(res);
    }
    const auto now = std::chrono::system_clock::now();
    j["timestamp_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count();
    return j.dump(2) + "\n";
}

}  // namespace shapval

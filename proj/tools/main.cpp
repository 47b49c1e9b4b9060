#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shapval/errors.hpp"
#include "shapval/io.hpp"

namespace fs = std::filesystem;
using namespace shapval;

namespace {

struct CommonFlags {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::int64_t seed = -1;
    int workers = -1;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "INI-style config file");
    cmd->add_option("--set", flags.overrides, "override a config key, section.key=value")
        ->take_all();
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--seed", flags.seed, "master seed");
    cmd->add_option("--workers", flags.workers, "worker threads (0 = all cores)");
}

RunConfig resolve_config(const CommonFlags& flags) {
    ConfigMap map;
    if (!flags.config_path.empty()) map = parse_config_file(flags.config_path);
    for (const std::string& assignment : flags.overrides) apply_override(map, assignment);
    RunConfig config = RunConfig::from_map(map);
    if (flags.seed >= 0) config.seed = static_cast<std::uint64_t>(flags.seed);
    if (flags.workers >= 0) config.workers = flags.workers;
    if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
    return config;
}

fs::path ensure_out_dir(const RunConfig& config) {
    fs::path dir(config.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw_data("write-failed", "cannot create output directory " + dir.string());
    return dir;
}

// reject bad method/regime/mode combinations before any training starts
void validate_run(const RunConfig& config, const Dataset& data) {
    if (config.method != "exact" && config.method != "mc" && config.method != "stratified" &&
        config.method != "delta") {
        throw_config("method", "method must be exact | mc | stratified | delta");
    }
    const Regime regime = regime_from_string(config.regime);
    const MarginalMode mode = marginal_mode_from_string(config.mode);
    if (mode == MarginalMode::ExpectedUtility && regime == Regime::StronglyConvex) {
        throw_config("mode", "expected-utility mode requires an SGD regime");
    }
    if (config.method == "exact" && data.train_count() > 20) {
        throw_config("enumeration-guard", "method exact is limited to n <= 20 training points");
    }
    if (config.method == "delta") {
        build_band(config, data.train_count());
        if (mode == MarginalMode::ExpectedUtility && config.h < 1) {
            throw_config("mode", "delta with expected-utility mode needs an explicit h >= 1");
        }
    }
    AccuracyTarget{config.additive_error, config.failure_prob}.validate();
}

int cmd_value(const CommonFlags& flags) {
    const RunConfig config = resolve_config(flags);
    const fs::path out = ensure_out_dir(config);
    const SeedTree seeds(config.seed);

    const Dataset data = build_dataset(config, seeds);
    validate_run(config, data);
    const TrainConfig train = build_train_config(config, data);
    const MarginalMode mode = marginal_mode_from_string(config.mode);
    ModelGame game(data, train, mode, std::max(1, config.h));

    const std::vector<int> points = parse_point_list(config.points, data.train_count());
    IterationBudget budget;
    budget.max_iterations = config.iteration_cap;
    budget.check_convergence = config.convergence;

    ValuationResult result;
    if (config.method == "exact") {
        result = exact_shapley_game(game, seeds.child("exact"), config.workers);
        if (points.size() != static_cast<std::size_t>(data.train_count())) {
            ValuationResult subset;
            subset = result;
            subset.points = points;
            subset.values.clear();
            for (int p : points) subset.values.push_back(result.values[static_cast<std::size_t>(p)]);
            result = std::move(subset);
        }
    } else if (config.method == "mc") {
        result = monte_carlo_shapley(game, points, budget, seeds.child("mc"), config.workers);
    } else if (config.method == "stratified") {
        StratifiedOptions opts;
        opts.per_layer_cap = config.layer_cap;
        opts.h_override = config.h;
        opts.h_cap = config.h_cap;
        opts.workers = config.workers;
        result = stratified_shapley(game, points, {config.additive_error, config.failure_prob},
                                    train.regime, train.constants, opts, seeds.child("stratified"));
    } else {
        const SemiValueSpec band = build_band(config, data.train_count());
        result = delta_shapley(game, points, band, budget, seeds.child("delta"), config.workers);
    }
    result.seed = config.seed;

    ConfigMap resolved;
    resolved["method"] = result.method;
    resolved["n_train"] = std::to_string(data.train_count());
    resolved["points_evaluated"] = std::to_string(points.size());
    if (config.method == "delta") {
        const SemiValueSpec band = build_band(config, data.train_count());
        resolved["band_lo"] = std::to_string(band.band_lo);
        resolved["band_hi"] = std::to_string(band.band_hi);
    }

    write_text_file((out / "values.csv").string(), values_csv(result));
    write_text_file((out / "result.json").string(), result_to_json(result));
    write_text_file((out / "manifest.json").string(),
                    manifest_json("value", config, data.content_hash(), resolved));
    std::cout << "wrote " << (out / "values.csv").string() << " (" << result.method << ", "
              << result.trainings_performed << " trainings)\n";
    return 0;
}

int cmd_evaluate(const CommonFlags& flags, const std::vector<std::string>& result_paths,
                 const std::string& reference_path) {
    RunConfig config = resolve_config(flags);
    const fs::path out = ensure_out_dir(config);
    if (reference_path.empty()) throw_config("config", "--reference is required");
    if (result_paths.empty()) throw_config("config", "need at least one result file");

    const ValuationResult reference = load_result(reference_path);
    std::vector<ValuationResult> results;
    for (const std::string& path : result_paths) results.push_back(load_result(path));

    const std::vector<MethodComparison> rows = compare_methods(results, reference);
    write_text_file((out / "comparison.csv").string(), comparison_csv(rows));
    write_text_file((out / "comparison.json").string(), comparison_json(rows, reference));
    std::cout << "wrote " << (out / "comparison.csv").string() << " (" << rows.size()
              << " rows)\n";
    return 0;
}

int cmd_profile(const CommonFlags& flags, const std::string& layers_arg, int samples,
                bool additive_double) {
    const RunConfig config = resolve_config(flags);
    const fs::path out = ensure_out_dir(config);
    const SeedTree seeds(config.seed);

    const Dataset data = build_dataset(config, seeds);
    const std::vector<int> layers = parse_int_list(layers_arg);
    if (layers.empty()) throw_config("config", "--layers must list at least one layer size");

    StabilityProfile profile;
    std::uint64_t data_hash = data.content_hash();
    if (additive_double) {
        // additive game with equal worths: every marginal is exactly 0.5, so a
        // healthy profiler reports zero spread at every layer
        ClosedFormGame game(data.train_count(),
                            [](const Coalition& s) { return 0.5 * s.layer(); });
        profile = stability_profile(game, layers, samples, seeds.child("profile"), config.workers);
    } else {
        const TrainConfig train = build_train_config(config, data);
        ModelGame game(data, train, marginal_mode_from_string(config.mode), std::max(1, config.h));
        profile = stability_profile(game, layers, samples, seeds.child("profile"), config.workers);
        if (train.regime == Regime::StronglyConvex) {
            for (std::size_t i = 1; i < profile.layers.size(); ++i) {
                if (profile.layers[i].median_abs > profile.layers[i - 1].median_abs &&
                    profile.layers[i].layer > profile.layers[i - 1].layer) {
                    std::cerr << "warning: median |v_i(S)| rose from layer "
                              << profile.layers[i - 1].layer << " to " << profile.layers[i].layer
                              << "\n";
                }
            }
        }
    }

    write_text_file((out / "profile.csv").string(), profile_csv(profile));
    write_text_file((out / "profile.json").string(), profile_json(profile));
    write_text_file((out / "manifest.json").string(), manifest_json("profile", config, data_hash));
    std::cout << "wrote " << (out / "profile.csv").string() << " (" << profile.layers.size()
              << " layers)\n";
    return 0;
}

int cmd_removal(const CommonFlags& flags, const std::string& values_path,
                const std::string& directions_arg, double step) {
    const RunConfig config = resolve_config(flags);
    const fs::path out = ensure_out_dir(config);
    const SeedTree seeds(config.seed);

    const Dataset data = build_dataset(config, seeds);
    const TrainConfig train = build_train_config(config, data);

    const ValuesFile file = parse_values_csv(read_text_file(values_path));
    if (!file.dataset_hash.empty() && file.dataset_hash != hash_hex(data.content_hash())) {
        throw_data("alignment", "values file was computed on a different dataset");
    }
    std::vector<double> values(data.train_count(), 0.0);
    std::vector<bool> seen(data.train_count(), false);
    for (std::size_t i = 0; i < file.points.size(); ++i) {
        const int p = file.points[i];
        if (p < 0 || p >= data.train_count() || seen[p]) {
            throw_data("alignment", "values file must cover every training point exactly once");
        }
        seen[p] = true;
        values[p] = file.values[i];
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw_data("alignment", "values file must cover every training point");
    }

    std::vector<std::string> directions;
    std::stringstream ss(directions_arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) directions.push_back(item);
    }
    if (directions.empty()) throw_config("config", "--directions must list at least one direction");

    std::string summary = "{\n  \"curves\": [\n";
    for (std::size_t d = 0; d < directions.size(); ++d) {
        const RemovalDirection dir = removal_direction_from_string(directions[d]);
        const RemovalCurve curve = removal_curve(values, data, train, dir, step,
                                                 seeds.child("removal", d));
        const std::string file_name = "removal_" + to_string(dir) + ".csv";
        write_text_file((out / file_name).string(), removal_csv(curve));
        summary += std::string("    {\"direction\": \"") + to_string(dir) + "\", \"file\": \"" +
                   file_name + "\", \"points\": " + std::to_string(curve.accuracies.size()) +
                   ", \"truncated\": " + (curve.truncated ? "true" : "false") + "}";
        summary += d + 1 < directions.size() ? ",\n" : "\n";
    }
    summary += "  ]\n}\n";
    write_text_file((out / "removal_summary.json").string(), summary);
    write_text_file((out / "manifest.json").string(),
                    manifest_json("removal", config, data.content_hash()));
    std::cout << "wrote " << directions.size() << " removal curves to " << out.string() << "\n";
    return 0;
}

int cmd_synth(const CommonFlags& flags) {
    const RunConfig config = resolve_config(flags);
    const fs::path out = ensure_out_dir(config);
    const SeedTree seeds(config.seed);
    const Dataset data = build_dataset(config, seeds);
    write_dataset_csv(data, (out / "dataset.csv").string());
    write_text_file((out / "dataset_summary.json").string(), data.summary_json() + "\n");
    write_text_file((out / "manifest.json").string(),
                    manifest_json("synth", config, data.content_hash()));
    std::cout << "wrote " << (out / "dataset.csv").string() << " (" << data.train_count()
              << " train / " << data.eval_count() << " eval rows)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shapval: Shapley and delta-Shapley data valuation"};
    app.require_subcommand(1);

    CommonFlags value_flags, eval_flags, profile_flags, removal_flags, synth_flags;
    std::string method_flag, points_flag;
    std::vector<std::string> eval_results;
    std::string eval_reference;
    std::string profile_layers = "5,10,20";
    int profile_samples = 200;
    bool profile_additive = false;
    std::string removal_values;
    std::string removal_directions = "highest,lowest,random";
    double removal_step = 0.1;

    CLI::App* value = app.add_subcommand("value", "compute data values");
    add_common(value, value_flags);
    value->add_option("--method", method_flag, "exact | mc | stratified | delta");
    value->add_option("--points", points_flag, "'all' or a comma-separated point list");

    CLI::App* evaluate = app.add_subcommand("evaluate", "compare result files to a reference");
    add_common(evaluate, eval_flags);
    evaluate->add_option("results", eval_results, "result.json files")->required();
    evaluate->add_option("--reference", eval_reference, "reference result.json")->required();

    CLI::App* profile = app.add_subcommand("profile", "per-layer |v_i(S)| stability profile");
    add_common(profile, profile_flags);
    profile->add_option("--layers", profile_layers, "comma-separated layer sizes");
    profile->add_option("--samples", profile_samples, "samples per layer");
    profile->add_flag("--additive-double", profile_additive,
                      "profile an additive test game instead of the model");

    CLI::App* removal = app.add_subcommand("removal", "point-removal accuracy curves");
    add_common(removal, removal_flags);
    removal->add_option("--values", removal_values, "values.csv from a value run")->required();
    removal->add_option("--directions", removal_directions, "highest,lowest,random subset");
    removal->add_option("--step", removal_step, "removal fraction step");

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset CSV");
    add_common(synth, synth_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error config/cli: " << e.what() << "\n";
        return 2;
    }

    try {
        if (value->parsed()) {
            if (!method_flag.empty()) value_flags.overrides.push_back("run.method=" + method_flag);
            if (!points_flag.empty()) value_flags.overrides.push_back("run.points=" + points_flag);
            return cmd_value(value_flags);
        }
        if (evaluate->parsed()) return cmd_evaluate(eval_flags, eval_results, eval_reference);
        if (profile->parsed()) {
            return cmd_profile(profile_flags, profile_layers, profile_samples, profile_additive);
        }
        if (removal->parsed()) {
            return cmd_removal(removal_flags, removal_values, removal_directions, removal_step);
        }
        if (synth->parsed()) return cmd_synth(synth_flags);
    } catch (const Error& e) {
        const char* kind = e.kind() == ErrorKind::Config ? "config"
                           : e.kind() == ErrorKind::Data ? "data"
                                                         : "runtime";
        std::cerr << "error " << kind << "/" << e.code() << ": " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error runtime/internal: " << e.what() << "\n";
        return 4;
    }
    return 0;
}

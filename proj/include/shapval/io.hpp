#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "shapval/dataset.hpp"
#include "shapval/estimators.hpp"
#include "shapval/evaluation.hpp"
#include "shapval/game.hpp"
#include "shapval/model.hpp"

namespace shapval {

inline constexpr const char* kVersion = "0.1.0";

// Flat "section.key" -> value map parsed from an INI-style config file
// (sections in brackets, key = value lines, # comments). Unknown keys are
// rejected so typos fail fast.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_file(const std::string& path);
// "section.key=value" command-line override
void apply_override(ConfigMap& map, const std::string& assignment);

// Everything a run needs, resolved from config + flag overrides.
struct RunConfig {
    // dataset
    std::string dataset_kind = "blobs";  // blobs | images | csv
    std::string csv_path;
    std::string label_column = "label";
    double eval_fraction = 0.2;
    int n_train = 50;
    int n_eval = 100;
    int dim = 5;
    double separation = 2.0;
    double label_noise = 0.0;
    bool standardize = false;

    // model
    std::string regime = "strongly-convex";
    double lambda = 0.1;
    double loss_bound = 6.931471805599453;
    double step_scale = 0.1;
    long long sgd_steps = 0;
    long long epochs = 0;
    std::string schedule = "constant";
    double learning_rate = 0.0;
    int hidden_units = 0;
    std::string activation = "softplus";
    std::string warm_start_path;
    // 0 = estimate from the data
    double lipschitz = 0.0;
    double smoothness = 0.0;
    double kernel_bound = 1.0;

    // run
    std::string method = "stratified";  // exact | mc | stratified | delta
    std::string mode = "fixed-subsequence";
    int h = 0;  // expected-utility permutation samples; 0 = derive per layer
    double additive_error = 0.1;
    double failure_prob = 0.1;
    std::string band = "mid";  // mid | low | "lo:hi"
    std::int64_t layer_cap = 2000;
    std::int64_t h_cap = 16;
    std::int64_t iteration_cap = 0;  // 0 = 25 * n
    bool convergence = true;
    std::string points = "all";
    std::uint64_t seed = 42;
    int workers = 0;  // 0 = hardware parallelism
    std::string out_dir = "out";

    static RunConfig from_map(const ConfigMap& map);
    ConfigMap to_map() const;
};

Dataset build_dataset(const RunConfig& config, const SeedTree& seeds);
TrainConfig build_train_config(const RunConfig& config, const Dataset& data);
SemiValueSpec build_band(const RunConfig& config, int n);
std::vector<int> parse_point_list(const std::string& text, int n);
std::vector<int> parse_int_list(const std::string& text);

// serialization
std::string result_to_json(const ValuationResult& result);
ValuationResult result_from_json(const std::string& text);
ValuationResult load_result(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// values.csv: header point_id,value,method,seed,dataset_hash; floats printed
// with 17 significant digits so they round-trip exactly
std::string values_csv(const ValuationResult& result);
struct ValuesFile {
    std::vector<int> points;
    std::vector<double> values;
    std::string dataset_hash;
};
ValuesFile parse_values_csv(const std::string& content);

std::string comparison_csv(const std::vector<MethodComparison>& rows);
std::string comparison_json(const std::vector<MethodComparison>& rows,
                            const ValuationResult& reference);
std::string profile_csv(const StabilityProfile& profile);
std::string profile_json(const StabilityProfile& profile);
std::string removal_csv(const RemovalCurve& curve);

// `resolved` records values derived from the config at run time (band bounds,
// evaluated point counts) next to the verbatim config echo
std::string manifest_json(const std::string& command, const RunConfig& config,
                          std::uint64_t dataset_hash, const ConfigMap& resolved = {});

std::string hash_hex(std::uint64_t hash);
std::string format_double(double v);  // %.17g

}  // namespace shapval

#pragma once

#include <span>
#include <string>
#include <vector>

#include "shapval/estimators.hpp"
#include "shapval/game.hpp"

namespace shapval {

// Spearman rank correlation with average-rank tie handling; throws
// undefined-correlation when either input is constant.
double spearman(std::span<const double> x, std::span<const double> y);

enum class RemovalDirection { HighestFirst, LowestFirst, Random };
RemovalDirection removal_direction_from_string(const std::string& s);
std::string to_string(RemovalDirection d);

struct RemovalCurve {
    std::vector<double> fractions_removed;
    std::vector<double> accuracies;
    std::string direction;
    // set when the sweep stopped early because a class fell under 2 points
    bool truncated = false;
};

// Removes points in rank order (value ties and the random direction both fall
// back to one seeded shuffle), retrains deterministically on the remainder and
// records test accuracy at each fraction up to 50%.
RemovalCurve removal_curve(std::span<const double> values, const Dataset& data,
                           const TrainConfig& config, RemovalDirection direction,
                           double step_fraction, const SeedTree& seeds);

struct LayerStats {
    int layer = 0;
    double mean_abs = 0.0;
    double median_abs = 0.0;
    double max_abs = 0.0;
    double std_abs = 0.0;
    std::int64_t samples = 0;
};

struct StabilityProfile {
    std::vector<LayerStats> layers;
};

// |v_i(S)| statistics over random (point, coalition) draws at each requested
// layer size.
StabilityProfile stability_profile(Game& game, std::span<const int> layer_sizes,
                                   int samples_per_layer, const SeedTree& seeds, int workers);

struct MethodComparison {
    std::string method;
    double spearman_rho = 0.0;
    std::int64_t trainings = 0;
    double wall_time_seconds = 0.0;
    // reference cost divided by method cost
    double training_speedup = 0.0;
    double time_speedup = 0.0;
};

// Per-method agreement and cost against a reference result covering the same
// point set.
std::vector<MethodComparison> compare_methods(const std::vector<ValuationResult>& results,
                                              const ValuationResult& reference);

}  // namespace shapval

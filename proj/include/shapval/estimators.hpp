#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shapval/game.hpp"
#include "shapval/sample_sizes.hpp"
#include "shapval/semivalue.hpp"

namespace shapval {

// Sampled mean marginal contribution of one point at one layer.
struct LayerEstimate {
    int point = -1;
    int layer = 0;
    double mean_contribution = 0.0;
    double contribution_variance = 0.0;  // unbiased sample variance
    std::int64_t samples_used = 0;
    // uncapped theorem bound (real-valued); exhaustive runs store the
    // enumerated coalition count instead
    double theoretical_mk = 0.0;
};

struct ConvergencePoint {
    std::int64_t iteration = 0;
    double deviation = 0.0;
};

struct ValuationResult {
    std::string method;
    std::uint64_t seed = 0;
    std::uint64_t dataset_hash = 0;
    std::vector<int> points;
    std::vector<double> values;
    std::vector<LayerEstimate> diagnostics;
    std::int64_t trainings_performed = 0;  // executed utility evaluations
    std::int64_t cache_hits = 0;
    std::int64_t iterations = 0;
    bool converged = false;
    double wall_time_seconds = 0.0;
    std::vector<ConvergencePoint> convergence_trace;
};

// Relative-deviation stopping rule: at iteration t > lag the deviation is the
// mean over points of |phi_t - phi_{t-lag}| / |phi_t|, with points whose
// current estimate is below 1e-9 in magnitude contributing 0. Converged once
// the deviation drops under the threshold.
class ConvergenceMonitor {
public:
    ConvergenceMonitor(int lag, double threshold);

    // feed the per-point estimates after each iteration; returns the deviation
    // when a comparison is possible
    std::optional<double> feed(const std::vector<double>& estimates);
    bool converged() const { return converged_; }

private:
    int lag_;
    double threshold_;
    bool converged_ = false;
    std::int64_t count_ = 0;
    std::vector<std::vector<double>> ring_;
};

// Algorithm: draw m_k coalitions of size k (with replacement) avoiding the
// point, average the marginal contributions. h > 0 forces that many
// permutation samples per draw on expected-utility games.
LayerEstimate layer_estimate(Game& game, int point, int k, std::int64_t m_k,
                             const SeedTree& layer_path, std::int64_t h = 0);
// Exact layer average by full enumeration of the C(n-1, k) coalitions.
LayerEstimate layer_exact(Game& game, int point, int k, const SeedTree& layer_path);

struct StratifiedOptions {
    // enumerate every coalition in every layer instead of sampling
    bool exhaustive = false;
    // cap on the per-layer sample count; the theorem bounds stay visible in
    // the diagnostics as theoretical_mk
    std::int64_t per_layer_cap = 2000;
    // expected-utility games: fixed permutation-sample count (>0) or 0 to take
    // the per-layer suggestion, capped at h_cap
    std::int64_t h_override = 0;
    std::int64_t h_cap = 16;
    int workers = 1;
};

// Layer-stratified estimator: phi_i = (1/n) sum_k phi_i^k with per-layer
// sample sizes from the regime's bound at per-layer risk b/n; layers the
// theory skips contribute 0 while the divisor stays n.
ValuationResult stratified_shapley(Game& game, std::span<const int> points,
                                   const AccuracyTarget& target, Regime regime,
                                   const LossConstants& consts, const StratifiedOptions& options,
                                   const SeedTree& seeds);

struct IterationBudget {
    std::int64_t max_iterations = 0;  // 0 -> 25 * n
    bool check_convergence = true;
    double threshold = 0.05;
    int lag = 100;
};

// Banded semi-value estimator: each iteration draws a layer size uniformly
// from the band and one coalition per point; the estimate is the running mean
// of the collected marginals.
ValuationResult delta_shapley(Game& game, std::span<const int> points, const SemiValueSpec& spec,
                              const IterationBudget& budget, const SeedTree& seeds, int workers);

// Permutation-sampling baseline: each iteration samples one permutation of
// all players and accumulates the predecessor-set marginal of every evaluated
// point.
ValuationResult monte_carlo_shapley(Game& game, std::span<const int> points,
                                    const IterationBudget& budget, const SeedTree& seeds,
                                    int workers);

// Exact Shapley values by full enumeration of all 2^n coalitions (n <= 20).
std::vector<double> exact_shapley(const std::function<double(const Coalition&)>& utility, int n);
ValuationResult exact_shapley_game(Game& game, const SeedTree& seeds, int workers);

// Exact semi-value via per-layer enumeration: sum_k p_k * (exact layer mean).
std::vector<double> semivalue_exact(Game& game, std::span<const int> points,
                                    const SemiValueSpec& spec, const SeedTree& seeds);

}  // namespace shapval

#include "shapval/estimators.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>

#include "shapval/errors.hpp"
#include "shapval/parallel.hpp"

namespace shapval {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_points(std::span<const int> points, int n) {
    if (points.empty()) throw_config("points", "need at least one evaluated point");
    for (int p : points) {
        if (p < 0 || p >= n) throw_config("points", "evaluated point outside [0, n)");
    }
}

// every size-k subset of pool, in lexicographic order
void for_each_combination(const std::vector<int>& pool, int k,
                          const std::function<void(std::uint64_t, const std::vector<int>&)>& visit) {
    const int m = static_cast<int>(pool.size());
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    std::vector<int> members(k);
    std::uint64_t counter = 0;
    while (true) {
        for (int i = 0; i < k; ++i) members[i] = pool[idx[i]];
        visit(counter++, members);
        int i = k - 1;
        while (i >= 0 && idx[i] == m - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

LayerEstimate summarize(int point, int k, const std::vector<double>& marginals) {
    LayerEstimate est;
    est.point = point;
    est.layer = k;
    est.samples_used = static_cast<std::int64_t>(marginals.size());
    est.mean_contribution = stable_mean(marginals);
    est.contribution_variance = sample_variance(marginals, est.mean_contribution);
    if (!std::isfinite(est.mean_contribution)) {
        throw_runtime("non-finite", "layer estimate is not finite");
    }
    return est;
}

}  // namespace

ConvergenceMonitor::ConvergenceMonitor(int lag, double threshold)
    : lag_(lag), threshold_(threshold), ring_(static_cast<std::size_t>(lag) + 1) {
    if (lag < 1) throw_config("config", "convergence lag must be >= 1");
}

std::optional<double> ConvergenceMonitor::feed(const std::vector<double>& estimates) {
    ++count_;
    ring_[static_cast<std::size_t>(count_ % (lag_ + 1))] = estimates;
    if (count_ <= lag_) return std::nullopt;
    const auto& old = ring_[static_cast<std::size_t>((count_ - lag_) % (lag_ + 1))];
    StableSum dev;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const double cur = estimates[i];
        if (std::abs(cur) < 1e-9) continue;  // contributes 0
        dev.add(std::abs(cur - old[i]) / std::abs(cur));
    }
    const double deviation = dev.total() / static_cast<double>(estimates.size());
    if (deviation < threshold_) converged_ = true;
    return deviation;
}

LayerEstimate layer_estimate(Game& game, int point, int k, std::int64_t m_k,
                             const SeedTree& layer_path, std::int64_t h) {
    const int n = game.player_count();
    if (m_k < 1) throw_config("config", "m_k must be >= 1");
    if (k < 0 || k > n - 1) throw_config("invalid-layer", "layer outside [0, n-1]");
    if (point < 0 || point >= n) throw_config("points", "point outside [0, n)");

    std::vector<double> marginals;
    marginals.reserve(static_cast<std::size_t>(m_k));
    for (std::int64_t j = 0; j < m_k; ++j) {
        const SeedTree draw = layer_path.child("draw", static_cast<std::uint64_t>(j));
        const Coalition s = sample_coalition(draw.child("coalition"), n, k, point);
        marginals.push_back(h > 0 ? game.marginal_sampled(point, s, draw, h)
                                  : game.marginal(point, s, draw));
    }
    LayerEstimate est = summarize(point, k, marginals);
    est.theoretical_mk = static_cast<double>(m_k);
    return est;
}

LayerEstimate layer_exact(Game& game, int point, int k, const SeedTree& layer_path) {
    const int n = game.player_count();
    if (k < 0 || k > n - 1) throw_config("invalid-layer", "layer outside [0, n-1]");
    std::vector<int> pool;
    pool.reserve(n - 1);
    for (int i = 0; i < n; ++i) {
        if (i != point) pool.push_back(i);
    }
    std::vector<double> marginals;
    for_each_combination(pool, k, [&](std::uint64_t counter, const std::vector<int>& members) {
        const SeedTree draw = layer_path.child("draw", counter);
        marginals.push_back(game.marginal(point, Coalition(members), draw));
    });
    LayerEstimate est = summarize(point, k, marginals);
    est.theoretical_mk = binomial(n - 1, k);
    return est;
}

ValuationResult stratified_shapley(Game& game, std::span<const int> points,
                                   const AccuracyTarget& target, Regime regime,
                                   const LossConstants& consts, const StratifiedOptions& options,
                                   const SeedTree& seeds) {
    const auto start = Clock::now();
    const int n = game.player_count();
    check_points(points, n);
    target.validate();
    consts.validate();
    if (options.per_layer_cap < 1) throw_config("config", "per_layer_cap must be >= 1");

    struct Task {
        int point_slot;
        int point;
        int layer;
        std::int64_t samples;
        std::int64_t h;
        double theoretical;
    };
    const bool expected_mode = game.expected_utility_mode();
    std::vector<Task> tasks;
    for (std::size_t slot = 0; slot < points.size(); ++slot) {
        for (int k = 0; k < n; ++k) {
            if (options.exhaustive) {
                tasks.push_back({static_cast<int>(slot), points[slot], k, -1, 0, binomial(n - 1, k)});
                continue;
            }
            const std::int64_t m = mk_for_regime(regime, k, n, target, consts);
            if (m == 0) continue;  // skipped layer, contributes 0
            const std::int64_t capped = std::min(m, options.per_layer_cap);
            std::int64_t h = 0;
            if (expected_mode) {
                h = options.h_override > 0
                        ? options.h_override
                        : std::min(game.suggested_h(k, target, capped), options.h_cap);
            }
            tasks.push_back({static_cast<int>(slot), points[slot], k, capped, h,
                             mk_for_regime_raw(regime, k, n, target, consts)});
        }
    }

    const std::int64_t evals_before = game.evaluations();
    const std::int64_t hits_before = game.cache_hits();

    std::vector<LayerEstimate> estimates(tasks.size());
    parallel_for(static_cast<std::int64_t>(tasks.size()), options.workers, [&](std::int64_t idx) {
        const Task& task = tasks[static_cast<std::size_t>(idx)];
        const SeedTree path = seeds.child("point", static_cast<std::uint64_t>(task.point))
                                  .child("layer", static_cast<std::uint64_t>(task.layer));
        LayerEstimate est =
            task.samples < 0
                ? layer_exact(game, task.point, task.layer, path)
                : layer_estimate(game, task.point, task.layer, task.samples, path, task.h);
        est.theoretical_mk = task.theoretical;
        estimates[static_cast<std::size_t>(idx)] = est;
    });

    ValuationResult result;
    result.method = options.exhaustive ? "stratified-exhaustive" : "stratified";
    result.seed = seeds.master_seed();
    result.dataset_hash = game.dataset_hash();
    result.points.assign(points.begin(), points.end());
    result.values.assign(points.size(), 0.0);
    std::vector<StableSum> sums(points.size());
    for (const LayerEstimate& est : estimates) result.diagnostics.push_back(est);
    for (std::size_t idx = 0; idx < tasks.size(); ++idx) {
        sums[static_cast<std::size_t>(tasks[idx].point_slot)].add(estimates[idx].mean_contribution);
    }
    for (std::size_t slot = 0; slot < points.size(); ++slot) {
        result.values[slot] = sums[slot].total() / n;  // skipped layers count as 0, divisor stays n
    }
    result.trainings_performed = game.evaluations() - evals_before;
    result.cache_hits = game.cache_hits() - hits_before;
    result.iterations = static_cast<std::int64_t>(tasks.size());
    result.converged = true;
    result.wall_time_seconds = seconds_since(start);
    return result;
}

namespace {

ValuationResult run_iterative(Game& game, std::span<const int> points,
                              const IterationBudget& budget, const SeedTree& seeds,
                              const std::string& method,
                              const std::function<void(const SeedTree&, std::vector<double>&)>& iteration) {
    const auto start = Clock::now();
    const int n = game.player_count();
    check_points(points, n);
    const std::int64_t max_iters =
        budget.max_iterations > 0 ? budget.max_iterations : 25LL * n;

    const std::int64_t evals_before = game.evaluations();
    const std::int64_t hits_before = game.cache_hits();

    ValuationResult result;
    result.method = method;
    result.seed = seeds.master_seed();
    result.dataset_hash = game.dataset_hash();
    result.points.assign(points.begin(), points.end());

    std::vector<StableSum> sums(points.size());
    std::vector<double> means(points.size(), 0.0);
    std::vector<double> draw(points.size(), 0.0);
    ConvergenceMonitor monitor(budget.lag, budget.threshold);

    std::int64_t t = 0;
    while (t < max_iters) {
        ++t;
        const SeedTree iter_path = seeds.child("iter", static_cast<std::uint64_t>(t));
        iteration(iter_path, draw);
        for (std::size_t j = 0; j < points.size(); ++j) {
            sums[j].add(draw[j]);
            means[j] = sums[j].total() / static_cast<double>(t);
        }
        if (budget.check_convergence) {
            if (auto dev = monitor.feed(means)) {
                result.convergence_trace.push_back({t, *dev});
                if (monitor.converged()) break;
            }
        }
    }

    result.values = means;
    result.iterations = t;
    result.converged = monitor.converged();
    result.trainings_performed = game.evaluations() - evals_before;
    result.cache_hits = game.cache_hits() - hits_before;
    result.wall_time_seconds = seconds_since(start);
    return result;
}

}  // namespace

ValuationResult delta_shapley(Game& game, std::span<const int> points, const SemiValueSpec& spec,
                              const IterationBudget& budget, const SeedTree& seeds, int workers) {
    const int n = game.player_count();
    if (spec.n_players() != n) {
        throw_config("invalid-band", "semi-value spec sized for a different player count");
    }
    if (!spec.banded()) {
        throw_config("invalid-band", "delta-Shapley needs a banded layer spec");
    }
    spec.validate();
    const int lo = spec.band_lo;
    const int width = spec.band_hi - spec.band_lo + 1;

    auto iteration = [&](const SeedTree& iter_path, std::vector<double>& draw) {
        Rng size_rng = iter_path.child("layersize").rng();
        const int k = lo + static_cast<int>(size_rng.next_below(static_cast<std::uint64_t>(width)));
        parallel_for(static_cast<std::int64_t>(points.size()), workers, [&](std::int64_t j) {
            const int point = points[static_cast<std::size_t>(j)];
            const SeedTree path = iter_path.child("point", static_cast<std::uint64_t>(point));
            const Coalition s = sample_coalition(path.child("coalition"), n, k, point);
            draw[static_cast<std::size_t>(j)] = game.marginal(point, s, path);
        });
    };
    return run_iterative(game, points, budget, seeds, "delta-shapley", iteration);
}

ValuationResult monte_carlo_shapley(Game& game, std::span<const int> points,
                                    const IterationBudget& budget, const SeedTree& seeds,
                                    int workers) {
    const int n = game.player_count();
    std::vector<int> base_order(n);
    auto iteration = [&](const SeedTree& iter_path, std::vector<double>& draw) {
        for (int i = 0; i < n; ++i) base_order[i] = i;
        Rng perm_rng = iter_path.child("permutation").rng();
        shuffle(base_order, perm_rng);
        const std::vector<double> marginals =
            game.permutation_marginals(base_order, points, iter_path, workers);
        std::copy(marginals.begin(), marginals.end(), draw.begin());
    };
    return run_iterative(game, points, budget, seeds, "mc-shapley", iteration);
}

std::vector<double> exact_shapley(const std::function<double(const Coalition&)>& utility, int n) {
    ClosedFormGame game(n, utility);
    return exact_shapley_game(game, SeedTree(0), 1).values;
}

ValuationResult exact_shapley_game(Game& game, const SeedTree& seeds, int workers) {
    const auto start = Clock::now();
    const int n = game.player_count();
    if (n < 1 || n > 20) {
        throw_config("enumeration-guard",
                     "exact enumeration is limited to n <= 20 players (got n=" +
                         std::to_string(n) + ")");
    }
    const std::int64_t evals_before = game.evaluations();
    const std::int64_t hits_before = game.cache_hits();

    const std::uint32_t count = 1u << n;
    std::vector<double> value(count);
    parallel_for(static_cast<std::int64_t>(count), workers, [&](std::int64_t m) {
        const auto mask = static_cast<std::uint32_t>(m);
        std::vector<int> members;
        for (int i = 0; i < n; ++i) {
            if (mask & (1u << i)) members.push_back(i);
        }
        value[mask] = game.value(Coalition(std::move(members)),
                                 seeds.child("subset", static_cast<std::uint64_t>(mask)));
    });

    std::vector<double> inv_choose(n);
    for (int k = 0; k < n; ++k) inv_choose[k] = 1.0 / binomial(n - 1, k);

    ValuationResult result;
    result.method = "exact";
    result.seed = seeds.master_seed();
    result.dataset_hash = game.dataset_hash();
    result.values.resize(n);
    for (int i = 0; i < n; ++i) {
        result.points.push_back(i);
        const std::uint32_t bit = 1u << i;
        StableSum acc;
        for (std::uint32_t mask = 0; mask < count; ++mask) {
            if (mask & bit) continue;
            const int size = std::popcount(mask);
            acc.add(inv_choose[size] * (value[mask | bit] - value[mask]));
        }
        result.values[i] = acc.total() / n;
    }
    result.trainings_performed = game.evaluations() - evals_before;
    result.cache_hits = game.cache_hits() - hits_before;
    result.iterations = count;
    result.converged = true;
    result.wall_time_seconds = seconds_since(start);
    return result;
}

std::vector<double> semivalue_exact(Game& game, std::span<const int> points,
                                    const SemiValueSpec& spec, const SeedTree& seeds) {
    const int n = game.player_count();
    check_points(points, n);
    if (spec.n_players() != n) {
        throw_config("invalid-band", "semi-value spec sized for a different player count");
    }
    spec.validate();
    std::vector<double> out(points.size(), 0.0);
    for (std::size_t j = 0; j < points.size(); ++j) {
        StableSum acc;
        for (int k = 0; k < n; ++k) {
            if (spec.layer_weights[k] == 0.0) continue;
            const SeedTree path = seeds.child("point", static_cast<std::uint64_t>(points[j]))
                                      .child("layer", static_cast<std::uint64_t>(k));
            const LayerEstimate est = layer_exact(game, points[j], k, path);
            acc.add(spec.layer_weights[k] * est.mean_contribution);
        }
        out[j] = acc.total();
    }
    return out;
}

}  // namespace shapval

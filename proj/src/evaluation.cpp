#include "shapval/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shapval/errors.hpp"
#include "shapval/parallel.hpp"

namespace shapval {

namespace {

// average ranks, ties sharing the mean rank of their run
std::vector<double> average_ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double shared = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = shared;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    StableSum sa, sb;
    for (double v : a) sa.add(v);
    for (double v : b) sb.add(v);
    const double ma = sa.total() / n, mb = sb.total() / n;
    StableSum cov, va, vb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov.add((a[i] - ma) * (b[i] - mb));
        va.add((a[i] - ma) * (a[i] - ma));
        vb.add((b[i] - mb) * (b[i] - mb));
    }
    if (va.total() <= 0 || vb.total() <= 0) {
        throw_data("undefined-correlation", "correlation of a constant vector is undefined");
    }
    return cov.total() / std::sqrt(va.total() * vb.total());
}

int count_removed(double fraction, int n) {
    return static_cast<int>(std::lround(fraction * n));
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw_config("alignment", "spearman inputs differ in length");
    if (x.size() < 2) throw_config("alignment", "spearman needs at least 2 values");
    const double rho = pearson(average_ranks(x), average_ranks(y));
    return std::clamp(rho, -1.0, 1.0);
}

RemovalDirection removal_direction_from_string(const std::string& s) {
    if (s == "highest-first" || s == "highest") return RemovalDirection::HighestFirst;
    if (s == "lowest-first" || s == "lowest") return RemovalDirection::LowestFirst;
    if (s == "random") return RemovalDirection::Random;
    throw_config("direction", "unknown removal direction '" + s + "'");
}

std::string to_string(RemovalDirection d) {
    switch (d) {
        case RemovalDirection::HighestFirst: return "highest-first";
        case RemovalDirection::LowestFirst: return "lowest-first";
        case RemovalDirection::Random: return "random";
    }
    return "?";
}

RemovalCurve removal_curve(std::span<const double> values, const Dataset& data,
                           const TrainConfig& config, RemovalDirection direction,
                           double step_fraction, const SeedTree& seeds) {
    const int n = data.train_count();
    if (static_cast<int>(values.size()) != n) {
        throw_config("alignment", "values must cover every training point");
    }
    if (!(step_fraction > 0.0 && step_fraction <= 0.5)) {
        throw_config("config", "step_fraction must lie in (0, 0.5]");
    }

    // one seeded shuffle gives the random order and breaks value ties, so a
    // constant value vector reduces exactly to the random direction
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = seeds.child("removal-order").rng();
    shuffle(order, rng);
    if (direction != RemovalDirection::Random) {
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return direction == RemovalDirection::HighestFirst ? values[a] > values[b]
                                                               : values[a] < values[b];
        });
    }

    TrainConfig det = config;
    det.regime = Regime::StronglyConvex;
    det.hidden_units = 0;
    det.warm_start.reset();
    if (det.constants.strong_convexity <= 0) det.constants.strong_convexity = 0.1;

    RemovalCurve curve;
    curve.direction = to_string(direction);
    for (double f = 0.0; f <= 0.5 + 1e-12; f += step_fraction) {
        const int removed = count_removed(f, n);
        std::vector<int> kept(order.begin() + removed, order.end());
        std::vector<int> per_class(data.n_classes, 0);
        for (int idx : kept) ++per_class[data.train_y[idx]];
        if (*std::min_element(per_class.begin(), per_class.end()) < 2) {
            curve.truncated = true;
            break;
        }
        const ModelParams model = train_deterministic(Coalition(kept, n), data, det);
        curve.fractions_removed.push_back(f);
        curve.accuracies.push_back(test_accuracy(model, data));
    }
    return curve;
}

StabilityProfile stability_profile(Game& game, std::span<const int> layer_sizes,
                                   int samples_per_layer, const SeedTree& seeds, int workers) {
    const int n = game.player_count();
    if (samples_per_layer < 10) throw_config("config", "samples_per_layer must be >= 10");
    for (int k : layer_sizes) {
        if (k < 0 || k > n - 1) throw_config("invalid-layer", "layer outside [0, n-1]");
    }

    StabilityProfile profile;
    for (int k : layer_sizes) {
        const SeedTree layer_path = seeds.child("profile-layer", static_cast<std::uint64_t>(k));
        std::vector<double> abs_contrib(samples_per_layer);
        parallel_for(samples_per_layer, workers, [&](std::int64_t j) {
            const SeedTree draw = layer_path.child("draw", static_cast<std::uint64_t>(j));
            Rng point_rng = draw.child("point").rng();
            const int point = static_cast<int>(point_rng.next_below(static_cast<std::uint64_t>(n)));
            const Coalition s = sample_coalition(draw.child("coalition"), n, k, point);
            abs_contrib[static_cast<std::size_t>(j)] = std::abs(game.marginal(point, s, draw));
        });

        LayerStats stats;
        stats.layer = k;
        stats.samples = samples_per_layer;
        stats.mean_abs = stable_mean(abs_contrib);
        stats.std_abs = std::sqrt(sample_variance(abs_contrib, stats.mean_abs));
        stats.max_abs = *std::max_element(abs_contrib.begin(), abs_contrib.end());
        std::vector<double> sorted = abs_contrib;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t m = sorted.size();
        stats.median_abs = m % 2 == 1 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
        profile.layers.push_back(stats);
    }
    return profile;
}

std::vector<MethodComparison> compare_methods(const std::vector<ValuationResult>& results,
                                              const ValuationResult& reference) {
    std::vector<MethodComparison> rows;
    for (const ValuationResult& r : results) {
        if (r.points != reference.points) {
            throw_data("alignment", "result '" + r.method + "' covers a different point set");
        }
        if (reference.dataset_hash != 0 && r.dataset_hash != 0 &&
            r.dataset_hash != reference.dataset_hash) {
            throw_data("alignment", "result '" + r.method + "' built on a different dataset");
        }
        MethodComparison row;
        row.method = r.method;
        row.spearman_rho = spearman(r.values, reference.values);
        row.trainings = r.trainings_performed;
        row.wall_time_seconds = r.wall_time_seconds;
        row.training_speedup = r.trainings_performed > 0
                                   ? static_cast<double>(reference.trainings_performed) /
                                         static_cast<double>(r.trainings_performed)
                                   : 0.0;
        row.time_speedup =
            r.wall_time_seconds > 0 ? reference.wall_time_seconds / r.wall_time_seconds : 0.0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace shapval

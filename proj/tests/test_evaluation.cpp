#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "shapval/errors.hpp"
#include "shapval/evaluation.hpp"
#include "shapval/parallel.hpp"

using namespace shapval;

namespace {

Dataset blobs(int n_train, int n_eval, int dim, double separation, std::uint64_t seed,
              double label_noise = 0.0) {
    SynthSpec spec;
    spec.n_train = n_train;
    spec.n_eval = n_eval;
    spec.dim = dim;
    spec.separation = separation;
    spec.label_noise = label_noise;
    return synth_dataset(spec, SeedTree(seed));
}

TrainConfig deterministic_config(const Dataset& data) {
    TrainConfig c;
    c.regime = Regime::StronglyConvex;
    c.constants.strong_convexity = 0.1;
    c.constants = estimate_constants(data, c);
    return c;
}

}  // namespace

TEST_CASE("spearman on hand-checked inputs") {
    const std::vector<double> x{1, 2, 3, 4};
    CHECK(spearman(x, std::vector<double>{1, 2, 3, 4}) == doctest::Approx(1.0));
    CHECK(spearman(x, std::vector<double>{4, 3, 2, 1}) == doctest::Approx(-1.0));
    // 1 - 6 * 2 / (4 * 15) = 0.8
    CHECK(spearman(x, std::vector<double>{1, 3, 2, 4}) == doctest::Approx(0.8));
    CHECK_THROWS_AS(spearman(x, std::vector<double>{2, 2, 2, 2}), Error);
    CHECK_THROWS_AS(spearman(x, std::vector<double>{1, 2}), Error);
}

TEST_CASE("spearman handles ties with average ranks") {
    const std::vector<double> x{1, 1, 2, 3};
    const std::vector<double> y{10, 10, 20, 30};
    CHECK(spearman(x, y) == doctest::Approx(1.0));
}

TEST_CASE("spearman is invariant under strictly monotone transforms") {
    SeedTree root(9);
    Rng rng = root.child("mono").rng();
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<double> x(12), y(12);
        for (double& v : x) v = rng.next_gaussian();
        for (double& v : y) v = rng.next_gaussian();
        const double rho = spearman(x, y);
        std::vector<double> ex(12), ay(12);
        for (int i = 0; i < 12; ++i) {
            ex[i] = std::exp(x[i]);          // strictly increasing
            ay[i] = 3.0 * y[i] + 7.0;        // affine increasing
        }
        CHECK(spearman(ex, ay) == doctest::Approx(rho).epsilon(1e-12));
    }
}

TEST_CASE("removal curve basics on a separable task") {
    const Dataset d = blobs(40, 120, 4, 3.0, 31);
    const TrainConfig config = deterministic_config(d);
    std::vector<double> values(40);
    for (int i = 0; i < 40; ++i) values[i] = 40.0 - i;  // distinct, point 0 most valuable

    const RemovalCurve curve = removal_curve(values, d, config, RemovalDirection::HighestFirst,
                                             0.1, SeedTree(32));
    REQUIRE(curve.fractions_removed.size() == 6);  // 0% .. 50% in steps of 10%
    CHECK(curve.fractions_removed.front() == 0.0);
    CHECK(curve.fractions_removed.back() == doctest::Approx(0.5));
    for (double acc : curve.accuracies) {
        CHECK(acc >= 0.0);
        CHECK(acc <= 1.0);
    }

    // the 0% entry equals the full-data accuracy regardless of direction
    const RemovalCurve other = removal_curve(values, d, config, RemovalDirection::LowestFirst,
                                             0.1, SeedTree(32));
    CHECK(curve.accuracies.front() == doctest::Approx(other.accuracies.front()));
}

TEST_CASE("random removal curves are seed-reproducible and seed-sensitive") {
    const Dataset d = blobs(30, 60, 3, 2.0, 33);
    const TrainConfig config = deterministic_config(d);
    const std::vector<double> values(30, 1.0);
    const RemovalCurve a = removal_curve(values, d, config, RemovalDirection::Random, 0.1,
                                         SeedTree(1));
    const RemovalCurve b = removal_curve(values, d, config, RemovalDirection::Random, 0.1,
                                         SeedTree(1));
    const RemovalCurve c = removal_curve(values, d, config, RemovalDirection::Random, 0.1,
                                         SeedTree(2));
    CHECK(a.accuracies == b.accuracies);
    CHECK(a.accuracies != c.accuracies);
}

TEST_CASE("constant values reduce ranked directions to the random order") {
    const Dataset d = blobs(30, 60, 3, 2.0, 34);
    const TrainConfig config = deterministic_config(d);
    const std::vector<double> values(30, 0.25);
    const RemovalCurve random_dir = removal_curve(values, d, config, RemovalDirection::Random,
                                                  0.1, SeedTree(7));
    const RemovalCurve highest = removal_curve(values, d, config, RemovalDirection::HighestFirst,
                                               0.1, SeedTree(7));
    const RemovalCurve lowest = removal_curve(values, d, config, RemovalDirection::LowestFirst,
                                              0.1, SeedTree(7));
    CHECK(random_dir.accuracies == highest.accuracies);
    CHECK(random_dir.accuracies == lowest.accuracies);
}

TEST_CASE("removal curve truncates when a class runs dry") {
    // 6 points, heavily imbalanced after removals
    const Dataset d = blobs(6, 10, 2, 2.0, 35);
    const TrainConfig config = deterministic_config(d);
    std::vector<double> values{6, 5, 4, 3, 2, 1};
    const RemovalCurve curve = removal_curve(values, d, config, RemovalDirection::HighestFirst,
                                             0.5, SeedTree(36));
    CHECK(curve.truncated);
}

TEST_CASE("stability profile: additive game has zero spread") {
    // equal worths: the profile mixes random points, so only a constant
    // per-point marginal collapses the spread to zero
    ClosedFormGame game(10, [](const Coalition& s) { return 0.5 * s.layer(); });
    const std::vector<int> layers{2, 5, 8};
    const StabilityProfile profile = stability_profile(game, layers, 50, SeedTree(37), 2);
    REQUIRE(profile.layers.size() == 3);
    for (const LayerStats& s : profile.layers) {
        CHECK(s.std_abs == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(s.samples == 50);
        CHECK(s.mean_abs > 0.0);
    }
}

TEST_CASE("stability profile statistics ignore sample order") {
    const Dataset d = blobs(20, 40, 3, 2.0, 38);
    ModelGame game(d, deterministic_config(d));
    const std::vector<int> layers{4};
    const StabilityProfile p1 = stability_profile(game, layers, 30, SeedTree(39), 1);
    const StabilityProfile p8 = stability_profile(game, layers, 30, SeedTree(39), 8);
    CHECK(p1.layers[0].mean_abs == p8.layers[0].mean_abs);
    CHECK(p1.layers[0].median_abs == p8.layers[0].median_abs);
    CHECK(p1.layers[0].std_abs == p8.layers[0].std_abs);
}

TEST_CASE("strongly convex marginals shrink with the layer size") {
    const Dataset d = blobs(60, 100, 4, 2.0, 40);
    ModelGame game(d, deterministic_config(d));
    const std::vector<int> layers{5, 50};
    const StabilityProfile profile = stability_profile(game, layers, 200, SeedTree(41), 8);
    CHECK(profile.layers[1].median_abs <= profile.layers[0].median_abs);
}

TEST_CASE("compare_methods reports rho, counts and speedups") {
    ValuationResult reference;
    reference.method = "mc-shapley";
    reference.points = {0, 1, 2, 3};
    reference.values = {0.4, 0.3, 0.2, 0.1};
    reference.trainings_performed = 9000;
    reference.wall_time_seconds = 10.0;

    ValuationResult cheap = reference;
    cheap.method = "delta-shapley";
    cheap.values = {0.35, 0.33, 0.18, 0.05};
    cheap.trainings_performed = 3000;
    cheap.wall_time_seconds = 2.0;

    const auto rows = compare_methods({reference, cheap}, reference);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].spearman_rho == doctest::Approx(1.0));
    CHECK(rows[0].training_speedup == doctest::Approx(1.0));
    CHECK(rows[1].spearman_rho == doctest::Approx(1.0));
    CHECK(rows[1].training_speedup == doctest::Approx(3.0));
    CHECK(rows[1].time_speedup == doctest::Approx(5.0));

    ValuationResult misaligned = cheap;
    misaligned.points = {0, 1, 2};
    misaligned.values = {0.1, 0.2, 0.3};
    CHECK_THROWS_AS(compare_methods({misaligned}, reference), Error);
}

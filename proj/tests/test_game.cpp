#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "shapval/errors.hpp"
#include "shapval/game.hpp"
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

TrainConfig deterministic_config(const Dataset& data, double lambda = 0.1) {
    TrainConfig c;
    c.regime = Regime::StronglyConvex;
    c.constants.strong_convexity = lambda;
    c.constants = estimate_constants(data, c);
    return c;
}

TrainConfig convex_sgd_config(const Dataset& data, long long steps, double lr = 0.0) {
    TrainConfig c;
    c.regime = Regime::ConvexSgd;
    c.constants.strong_convexity = 0.0;
    c.constants = estimate_constants(data, c);
    c.constants.sgd_steps = steps;
    c.learning_rate = lr;
    return c;
}

}  // namespace

TEST_CASE("empty-coalition utility is the zero model's utility") {
    const Dataset d = blobs(10, 20, 3, 2.0, 1);
    TrainConfig config = deterministic_config(d);
    ModelGame game(d, config);
    const double base = -test_loss(zero_model(d, config), d, config.constants.loss_bound);
    CHECK(game.value(Coalition(), SeedTree(0)) == doctest::Approx(base).epsilon(1e-15));
}

TEST_CASE("utility stays within [-G, 0]") {
    const Dataset d = blobs(12, 20, 3, 2.0, 2);
    TrainConfig config = deterministic_config(d);
    ModelGame game(d, config);
    SeedTree seeds(3);
    for (int j = 0; j < 20; ++j) {
        const Coalition s = sample_coalition(seeds.child("c", j), 12, 1 + j % 10, 0);
        const double v = game.value(s, seeds.child("v", j));
        CHECK(v <= 0.0);
        CHECK(v >= -config.constants.loss_bound);
    }
}

TEST_CASE("deterministic utilities are cached invisibly and counted") {
    const Dataset d = blobs(10, 20, 3, 2.0, 4);
    ModelGame game(d, deterministic_config(d));
    const Coalition s(std::vector<int>{1, 3, 5});
    const double v1 = game.value(s, SeedTree(0));
    CHECK(game.evaluations() == 1);
    CHECK(game.cache_hits() == 0);
    const double v2 = game.value(s, SeedTree(99));  // deterministic: path is irrelevant
    CHECK(v1 == v2);
    CHECK(game.evaluations() == 1);
    CHECK(game.cache_hits() == 1);
}

TEST_CASE("marginal rejects points already in the coalition") {
    const Dataset d = blobs(8, 10, 2, 2.0, 5);
    ModelGame game(d, deterministic_config(d));
    CHECK_THROWS_AS(game.marginal(3, Coalition(std::vector<int>{1, 3}), SeedTree(0)), Error);
}

TEST_CASE("SGD marginals are deterministic per path and share the base ordering") {
    const Dataset d = blobs(12, 30, 3, 1.5, 6);
    ModelGame game(d, convex_sgd_config(d, 36));
    const Coalition s(std::vector<int>{0, 2, 4, 6, 8});
    const SeedTree path = SeedTree(7).child("m", 1);
    const double a = game.fixed_subsequence_marginal(1, s, path);
    const double b = game.fixed_subsequence_marginal(1, s, path);
    CHECK(a == b);

    // the two trainings share pi(S): recompute both sides by hand
    const std::vector<int> base = sample_permutation(path.child("order"), s);
    const std::vector<int> with1 = insert_into_sequence(base, 1, path.child("insert", 1));
    TrainConfig config = convex_sgd_config(d, 36);
    const double v_base = -test_loss(sgd_train(base, d, config), d, config.constants.loss_bound);
    const double v_with = -test_loss(sgd_train(with1, d, config), d, config.constants.loss_bound);
    CHECK(a == doctest::Approx(v_with - v_base).epsilon(1e-15));
}

TEST_CASE("expected marginal: h=1 equals one fixed-subsequence draw, deterministic regime ignores h") {
    const Dataset d = blobs(12, 30, 3, 1.5, 8);
    ModelGame sgd_game(d, convex_sgd_config(d, 24));
    const Coalition s(std::vector<int>{1, 3, 5, 7});
    const SeedTree path = SeedTree(9).child("e");
    CHECK(sgd_game.expected_marginal(0, s, path, 1) ==
          sgd_game.fixed_subsequence_marginal(0, s, path.child("rep", 0)));

    ModelGame det_game(d, deterministic_config(d));
    const double h1 = det_game.expected_marginal(0, s, path, 1);
    const double h9 = det_game.expected_marginal(0, s, path, 9);
    CHECK(h1 == h9);
}

TEST_CASE("variance of the h-averaged marginal shrinks about 1/h") {
    const Dataset d = blobs(12, 40, 3, 1.5, 10);
    ModelGame game(d, convex_sgd_config(d, 30, 0.5));
    const Coalition s(std::vector<int>{2, 3, 5, 7, 11});
    const SeedTree root = SeedTree(11).child("var");

    const int trials = 200;
    std::vector<double> at_h1(trials), at_h16(trials);
    for (int t = 0; t < trials; ++t) {
        at_h1[t] = game.expected_marginal(0, s, root.child("h1", t), 1);
        at_h16[t] = game.expected_marginal(0, s, root.child("h16", t), 16);
    }
    const double m1 = stable_mean(at_h1);
    const double m16 = stable_mean(at_h16);
    const double var1 = sample_variance(at_h1, m1);
    const double var16 = sample_variance(at_h16, m16);
    CHECK(var1 > 0.0);
    CHECK(var16 <= var1 / 8.0 + 1e-12);
}

TEST_CASE("higher utility for larger coalitions on a separable task") {
    const Dataset d = blobs(40, 100, 4, 3.0, 12);
    ModelGame game(d, deterministic_config(d));
    SeedTree seeds(13);
    StableSum small, large;
    for (int j = 0; j < 50; ++j) {
        small.add(game.value(sample_coalition(seeds.child("s", j), 40, 2, 0), seeds.child("sv", j)));
        large.add(game.value(sample_coalition(seeds.child("l", j), 40, 20, 0), seeds.child("lv", j)));
    }
    CHECK(large.total() / 50.0 >= small.total() / 50.0);
}

TEST_CASE("a feature-free point moves the model less than typical points") {
    Dataset d = blobs(20, 60, 3, 2.0, 14);
    // plant a zero-information point: features at the global mean of both classes
    for (int j = 0; j < d.dim; ++j) d.train_x[j] = 0.0;
    ModelGame game(d, deterministic_config(d));
    SeedTree seeds(15);

    const int draws = 100;
    std::vector<double> mean_abs(d.train_count(), 0.0);
    for (int i = 0; i < d.train_count(); ++i) {
        StableSum acc;
        for (int t = 0; t < draws; ++t) {
            const SeedTree path = seeds.child("pt", i).child("draw", t);
            const Coalition s = sample_coalition(path.child("c"), d.train_count(), 6, i);
            acc.add(std::abs(game.marginal(i, s, path)));
        }
        mean_abs[i] = acc.total() / draws;
    }
    std::vector<double> sorted = mean_abs;
    std::sort(sorted.begin(), sorted.end());
    const double median = 0.5 * (sorted[9] + sorted[10]);
    CHECK(mean_abs[0] < median);
}

TEST_CASE("permutation chain marginals: additive game recovers per-point worth") {
    const int n = 9;
    std::vector<double> worth(n);
    for (int i = 0; i < n; ++i) worth[i] = 0.1 * (i + 1);
    ClosedFormGame game(n, [&](const Coalition& s) {
        double total = 0.0;
        for (int i : s.members()) total += worth[i];
        return total;
    });
    std::vector<int> order{4, 2, 7, 0, 8, 1, 5, 3, 6};
    std::vector<int> points{0, 3, 8};
    const std::vector<double> m = game.permutation_marginals(order, points, SeedTree(1), 1);
    CHECK(m[0] == doctest::Approx(worth[0]));
    CHECK(m[1] == doctest::Approx(worth[3]));
    CHECK(m[2] == doctest::Approx(worth[8]));
}

TEST_CASE("permutation chain is worker-count invariant with deterministic counts") {
    const Dataset d = blobs(14, 30, 3, 2.0, 16);
    std::vector<int> order(14), points(14);
    std::iota(order.begin(), order.end(), 0);
    std::iota(points.begin(), points.end(), 0);
    std::reverse(order.begin(), order.end());

    ModelGame g1(d, deterministic_config(d));
    ModelGame g8(d, deterministic_config(d));
    const auto m1 = g1.permutation_marginals(order, points, SeedTree(2), 1);
    const auto m8 = g8.permutation_marginals(order, points, SeedTree(2), 8);
    CHECK(m1 == m8);
    CHECK(g1.evaluations() == g8.evaluations());
    CHECK(g1.evaluations() == 15);  // one training per chain cut
}

TEST_CASE("stability envelope holds on a small sweep") {
    const Dataset d = blobs(30, 60, 3, 1.5, 17);
    TrainConfig config = deterministic_config(d, 0.1);
    ModelGame game(d, config);
    const double l2 = config.constants.lipschitz * config.constants.lipschitz;
    const double c2 = config.constants.kernel_bound * config.constants.kernel_bound;
    SeedTree seeds(18);
    for (int t = 0; t < 200; ++t) {
        const SeedTree path = seeds.child("env", t);
        Rng rng = path.child("pick").rng();
        const int i = static_cast<int>(rng.next_below(30));
        const int k = 1 + static_cast<int>(rng.next_below(28));
        const Coalition s = sample_coalition(path.child("c"), 30, k, i);
        const double v = game.marginal(i, s, path);
        CHECK(std::abs(v) <= l2 * c2 / (2.0 * config.constants.strong_convexity * k));
    }
}

#include <doctest.h>

#include <cmath>

#include "shapval/errors.hpp"
#include "shapval/sample_sizes.hpp"
#include "shapval/seed_tree.hpp"

using namespace shapval;

namespace {

LossConstants unit_constants() {
    LossConstants c;
    c.lipschitz = 1.0;
    c.smoothness = 1.0;
    c.strong_convexity = 1.0;
    c.loss_bound = 1.0;
    c.step_scale = 1.0;
    c.kernel_bound = 1.0;
    c.sgd_steps = 10;
    return c;
}

LossConstants random_constants(Rng& rng) {
    LossConstants c;
    c.lipschitz = 0.1 + 3.0 * rng.next_double();
    c.smoothness = 0.1 + 3.0 * rng.next_double();
    c.strong_convexity = 0.01 + rng.next_double();
    c.loss_bound = 0.5 + 5.0 * rng.next_double();
    c.step_scale = 0.05 + rng.next_double();
    c.kernel_bound = 0.5 + rng.next_double();
    c.sgd_steps = 1 + static_cast<long long>(rng.next_below(200));
    return c;
}

}  // namespace

TEST_CASE("strongly convex sample size reproduces the hand-derived spot values") {
    LossConstants c = unit_constants();
    AccuracyTarget t{0.1, 0.1};
    // (1 / (8 * 0.01 * 100)) * ln(2000) = 0.95011... -> 1
    CHECK(mk_strongly_convex(10, 100, t, c) == 1);
    // 12.5 * ln(2000) = 95.011... -> 96
    CHECK(mk_strongly_convex(1, 100, t, c) == 96);
    CHECK(mk_strongly_convex_raw(1, 100, t, c) == doctest::Approx(95.0112807).epsilon(1e-8));
    // k = 0 is the skipped layer
    CHECK(mk_strongly_convex(0, 100, t, c) == 0);
}

TEST_CASE("convex SGD sample size reproduces the hand-derived spot value") {
    LossConstants c = unit_constants();
    c.sgd_steps = 10;
    AccuracyTarget t{0.5, 0.1};
    // ((3200/100 + 80/10 + 2/3) / 0.25) * ln(1000) = 1123.66... -> 1124
    CHECK(mk_convex_sgd(10, 50, t, c) == 1124);
    CHECK(mk_convex_sgd(0, 50, t, c) == 0);
    // enormous error budget: the additive term dominates and the floor kicks in
    AccuracyTarget huge{1e9, 0.1};
    CHECK(mk_convex_sgd(10, 50, huge, c) == 1);
}

TEST_CASE("non-convex stability coefficient and sample size") {
    LossConstants c = unit_constants();
    c.sgd_steps = 16;
    // q = 1: H_5 = sqrt(2) * sqrt(16) * 2 / 4 = 2 sqrt(2)
    CHECK(stability_h_hat(5, c) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
    AccuracyTarget t{1.0, 0.1};
    // 2 ln(400) * (16 + 4 sqrt(2) + 4/3) = 275.49 -> 276
    CHECK(mk_nonconvex_sgd(5, 20, t, c) == 276);
    CHECK(mk_nonconvex_sgd(0, 20, t, c) == 0);
    CHECK(mk_nonconvex_sgd(1, 20, t, c) == 0);
    CHECK_THROWS_AS(stability_h_hat(1, c), Error);
}

TEST_CASE("permutation sample count reproduces the hand-derived spot value") {
    LossConstants c = unit_constants();
    AccuracyTarget t{0.5, 0.1};
    // (8 * (0.01 + 0.1 + 1/6) / 0.25) * ln(4000) = 73.43 -> 74
    CHECK(h_permutations(0.1, c, t, 10, 10) == 74);
    // epsilon -> 0 leaves the additive G a / 3 term
    const double limit = 8.0 * (c.loss_bound * t.additive_error / 3.0) /
                         (t.additive_error * t.additive_error) * std::log(4.0 * 10 * 10 / 0.1);
    CHECK(h_permutations_raw(1e-12, c, t, 10, 10) == doctest::Approx(limit).epsilon(1e-6));
    // log factor grows with m_k
    CHECK(h_permutations(0.1, c, t, 10, 1000) > h_permutations(0.1, c, t, 10, 10));
}

TEST_CASE("epsilon for convex SGD follows the step-size sum") {
    LossConstants c = unit_constants();
    c.sgd_steps = 10;
    // constant schedule at the cap: 2 L^2 / k * T * (2 / beta)
    CHECK(epsilon_convex(5, c, Schedule::Constant, 0.0) == doctest::Approx(2.0 * 10 * 2.0 / 5.0));
    // explicit smaller learning rate
    CHECK(epsilon_convex(5, c, Schedule::Constant, 0.5) == doctest::Approx(2.0 * 10 * 0.5 / 5.0));
    // decaying schedule sums min(c/t, 2/beta)
    double harmonic = 0.0;
    for (int t = 1; t <= 10; ++t) harmonic += std::min(1.0 / t, 2.0);
    CHECK(epsilon_convex(2, c, Schedule::Decaying, 0.0) == doctest::Approx(harmonic));
}

TEST_CASE("bounds are non-increasing in k over random constants") {
    Rng rng = SeedTree(404).child("mono").rng();
    AccuracyTarget t{0.05 + 0.5 * rng.next_double(), 0.05 + 0.5 * rng.next_double()};
    const int n = 40;
    for (int trial = 0; trial < 1000; ++trial) {
        const LossConstants c = random_constants(rng);
        const int k = 2 + static_cast<int>(rng.next_below(n - 3));
        CHECK(mk_strongly_convex(k, n, t, c) >= mk_strongly_convex(k + 1, n, t, c));
        CHECK(mk_convex_sgd(k, n, t, c) >= mk_convex_sgd(k + 1, n, t, c));
        CHECK(mk_nonconvex_sgd(k, n, t, c) >= mk_nonconvex_sgd(k + 1, n, t, c));
        CHECK(stability_h_hat(k, c) > stability_h_hat(k + 1, c));
    }
}

TEST_CASE("invalid targets and layers are rejected") {
    LossConstants c = unit_constants();
    CHECK_THROWS_AS(mk_strongly_convex(2, 10, AccuracyTarget{0.0, 0.1}, c), Error);
    CHECK_THROWS_AS(mk_strongly_convex(2, 10, AccuracyTarget{0.1, 1.5}, c), Error);
    CHECK_THROWS_AS(mk_strongly_convex(12, 10, AccuracyTarget{0.1, 0.1}, c), Error);
    CHECK_THROWS_AS(h_permutations(0.0, c, AccuracyTarget{0.1, 0.1}, 10, 10), Error);
}

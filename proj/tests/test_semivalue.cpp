#include <doctest.h>

#include <cmath>

#include "shapval/errors.hpp"
#include "shapval/semivalue.hpp"

using namespace shapval;

TEST_CASE("binomial coefficients") {
    CHECK(binomial(7, 3) == doctest::Approx(35.0));
    CHECK(binomial(9, 0) == doctest::Approx(1.0));
    CHECK(binomial(9, 9) == doctest::Approx(1.0));
    CHECK(binomial(5, 6) == 0.0);
    CHECK(binomial(99, 49) == doctest::Approx(5.044567227278209e28).epsilon(1e-10));
}

TEST_CASE("band presets match the published fractions") {
    const SemiValueSpec mid100 = band_presets(100, BandPreset::Mid);
    CHECK(mid100.band_lo == 33);
    CHECK(mid100.band_hi == 67);
    const SemiValueSpec low100 = band_presets(100, BandPreset::Low);
    CHECK(low100.band_lo == 20);
    CHECK(low100.band_hi == 30);

    const SemiValueSpec mid50 = band_presets(50, BandPreset::Mid);
    CHECK(mid50.band_lo == 17);
    CHECK(mid50.band_hi == 33);
    const SemiValueSpec low50 = band_presets(50, BandPreset::Low);
    CHECK(low50.band_lo == 10);
    CHECK(low50.band_hi == 15);

    // tiny n clamps into [1, n-1]
    const SemiValueSpec low4 = band_presets(4, BandPreset::Low);
    CHECK(low4.band_lo == 1);
    CHECK(low4.band_hi == 1);
    CHECK_THROWS_AS(band_presets(3, BandPreset::Mid), Error);
}

TEST_CASE("band weights are uniform on the band and sum to one") {
    const SemiValueSpec spec = band_presets(50, BandPreset::Mid);
    spec.validate();
    double sum = 0.0;
    for (int k = 0; k < 50; ++k) {
        if (k >= 17 && k <= 33) {
            CHECK(spec.layer_weights[k] == doctest::Approx(1.0 / 17.0));
        } else {
            CHECK(spec.layer_weights[k] == 0.0);
        }
        sum += spec.layer_weights[k];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("weight check accepts Shapley and band presets, rejects zeros") {
    for (int n : {10, 50, 100}) {
        CHECK(semivalue_weight_check(SemiValueSpec::shapley(n), n).pass);
        CHECK(semivalue_weight_check(band_presets(n, BandPreset::Mid), n).pass);
        CHECK(semivalue_weight_check(band_presets(n, BandPreset::Low), n).pass);
        CHECK(semivalue_weight_check(SemiValueSpec::shapley(n), n).residual < 1e-9);
    }

    SemiValueSpec zeros;
    zeros.layer_weights.assign(10, 0.0);
    const WeightCheckResult r = semivalue_weight_check(zeros, 10);
    CHECK_FALSE(r.pass);
    CHECK(r.residual == doctest::Approx(10.0));
}

TEST_CASE("invalid bands are rejected") {
    CHECK_THROWS_AS(SemiValueSpec::banded_uniform(10, 0, 5), Error);
    CHECK_THROWS_AS(SemiValueSpec::banded_uniform(10, 4, 10), Error);
    CHECK_THROWS_AS(SemiValueSpec::banded_uniform(10, 6, 5), Error);
    SemiValueSpec bad = band_presets(10, BandPreset::Mid);
    bad.layer_weights[0] = 0.5;
    CHECK_THROWS_AS(bad.validate(), Error);
}

#include "shapval/semivalue.hpp"

#include <algorithm>
#include <cmath>

#include "shapval/errors.hpp"
#include "shapval/parallel.hpp"

namespace shapval {

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double result = 1.0;
    for (int i = 1; i <= k; ++i) {
        result *= static_cast<double>(n - k + i);
        result /= static_cast<double>(i);
    }
    return result;
}

SemiValueSpec SemiValueSpec::shapley(int n) {
    if (n < 1) throw_config("invalid-size", "n must be >= 1");
    SemiValueSpec spec;
    spec.layer_weights.assign(n, 1.0 / n);
    return spec;
}

SemiValueSpec SemiValueSpec::banded_uniform(int n, int lo, int hi) {
    if (n < 2) throw_config("invalid-size", "n must be >= 2");
    if (lo < 1 || hi > n - 1 || lo > hi) {
        throw_config("invalid-band", "band must satisfy 1 <= lo <= hi <= n-1");
    }
    SemiValueSpec spec;
    spec.layer_weights.assign(n, 0.0);
    const double w = 1.0 / (hi - lo + 1);
    for (int k = lo; k <= hi; ++k) spec.layer_weights[k] = w;
    spec.band_lo = lo;
    spec.band_hi = hi;
    return spec;
}

void SemiValueSpec::validate() const {
    if (layer_weights.empty()) throw_config("invalid-band", "empty layer-weight vector");
    StableSum sum;
    for (double p : layer_weights) {
        if (p < 0) throw_config("invalid-band", "layer weights must be non-negative");
        sum.add(p);
    }
    if (std::abs(sum.total() - 1.0) > 1e-12) {
        throw_config("invalid-band", "layer weights must sum to 1");
    }
    if (banded()) {
        const int n = n_players();
        if (band_lo < 1 || band_hi > n - 1 || band_lo > band_hi) {
            throw_config("invalid-band", "band must satisfy 1 <= lo <= hi <= n-1");
        }
        const double inside = 1.0 / (band_hi - band_lo + 1);
        for (int k = 0; k < n; ++k) {
            const double expected = (k >= band_lo && k <= band_hi) ? inside : 0.0;
            if (std::abs(layer_weights[k] - expected) > 1e-12) {
                throw_config("invalid-band", "banded weights must be uniform on the band");
            }
        }
    }
}

BandPreset band_preset_from_string(const std::string& s) {
    if (s == "mid") return BandPreset::Mid;
    if (s == "low") return BandPreset::Low;
    throw_config("invalid-band", "unknown band preset '" + s + "'");
}

SemiValueSpec band_presets(int n, BandPreset preset) {
    if (n < 4) throw_config("invalid-size", "band presets need n >= 4");
    long lo, hi;
    if (preset == BandPreset::Mid) {
        lo = std::lround(n / 3.0);
        hi = std::lround(2.0 * n / 3.0);
    } else {
        lo = std::lround(2.0 * n / 10.0);
        hi = std::lround(3.0 * n / 10.0);
    }
    lo = std::clamp(lo, 1L, static_cast<long>(n - 1));
    hi = std::clamp(hi, lo, static_cast<long>(n - 1));
    return SemiValueSpec::banded_uniform(n, static_cast<int>(lo), static_cast<int>(hi));
}

WeightCheckResult semivalue_weight_check(const SemiValueSpec& spec, int n) {
    WeightCheckResult result;
    if (spec.n_players() != n) {
        result.pass = false;
        result.residual = static_cast<double>(n);
        return result;
    }
    // Def-8 indexing: w(k) applies to coalitions with |S| = k-1
    StableSum sum;
    for (int k = 1; k <= n; ++k) {
        const double choose = binomial(n - 1, k - 1);
        const double w = n * spec.layer_weights[k - 1] / choose;
        sum.add(choose * w);
    }
    result.residual = std::abs(sum.total() - n);
    result.pass = result.residual < 1e-9;
    return result;
}

}  // namespace shapval

#pragma once

#include <string>
#include <vector>

namespace shapval {

// Layer-weight vector of a semi-value, indexed by coalition size 0..n-1.
// Banded specs put uniform weight on coalition sizes [band_lo, band_hi] and
// zero elsewhere; the Shapley value weights every layer 1/n.
struct SemiValueSpec {
    std::vector<double> layer_weights;
    int band_lo = -1;  // coalition sizes, inclusive; -1 when not banded
    int band_hi = -1;

    int n_players() const { return static_cast<int>(layer_weights.size()); }
    bool banded() const { return band_lo >= 0; }

    static SemiValueSpec shapley(int n);
    static SemiValueSpec banded_uniform(int n, int lo, int hi);

    // weights sum to 1 (1e-12), all non-negative, band shape consistent
    void validate() const;
};

enum class BandPreset { Mid, Low };
BandPreset band_preset_from_string(const std::string& s);

// mid -> (round(n/3), round(2n/3)); low -> (round(2n/10), round(3n/10));
// both clamped into [1, n-1]
SemiValueSpec band_presets(int n, BandPreset preset);

struct WeightCheckResult {
    bool pass = false;
    double residual = 0.0;
};

// Checks the semi-value normalization sum_{k=1}^{n} C(n-1,k-1) w(k) = n with
// w(k) = n p_{k-1} / C(n-1,k-1); passes iff the residual is below 1e-9.
WeightCheckResult semivalue_weight_check(const SemiValueSpec& spec, int n);

// binomial coefficient as a double (exact until ~2^53, then best-effort)
double binomial(int n, int k);

}  // namespace shapval

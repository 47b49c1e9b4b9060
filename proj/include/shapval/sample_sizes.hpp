#pragma once

#include <cstdint>

#include "shapval/model.hpp"

namespace shapval {

// Additive error bound `a` with total failure probability `b`; each layer is
// budgeted b/n so the union bound over layers meets the global target.
struct AccuracyTarget {
    double additive_error = 0.1;  // a
    double failure_prob = 0.1;    // b

    void validate() const;
};

// Real-valued lower bounds on the per-layer sample count, before rounding.
// Strongly convex:  L^4 C^4 / (8 lambda^2 a^2 k^2) * ln(2n/b)
double mk_strongly_convex_raw(int k, int n, const AccuracyTarget& target,
                              const LossConstants& consts);
// Convex SGD:  [ (32 T^2 L^4 / (beta^2 k^2) + 8 G T L^2 / (k beta) + 4 G a / 3) / a^2 ] * ln(2n/b)
double mk_convex_sgd_raw(int k, int n, const AccuracyTarget& target, const LossConstants& consts);
// Non-convex SGD:  2 ln(2n/b) * (2 H_k^2 + 2 G H_k + 4 G a / 3) / a^2
double mk_nonconvex_sgd_raw(int k, int n, const AccuracyTarget& target,
                            const LossConstants& consts);

// Expected-stability coefficient for the non-convex bound, with q = beta*c:
//   H_k = G^{q/(q+1)} (2 c L^2)^{1/(q+1)} T^{q/(q+1)} (1 + 1/(beta c)) / (k - 1)
double stability_h_hat(int k, const LossConstants& consts);

// Expected-stability constant for convex SGD, 2 L^2 / k * sum_t alpha_t with
// the configured step schedule.
double epsilon_convex(int k, const LossConstants& consts, Schedule schedule, double learning_rate);

// Integer sample counts: ceil of the bound, floored at 1. Layers the theory
// skips (k = 0 everywhere; k = 1 additionally in the non-convex regime)
// return 0 and contribute nothing to the stratified average.
std::int64_t mk_strongly_convex(int k, int n, const AccuracyTarget& target,
                                const LossConstants& consts);
std::int64_t mk_convex_sgd(int k, int n, const AccuracyTarget& target, const LossConstants& consts);
std::int64_t mk_nonconvex_sgd(int k, int n, const AccuracyTarget& target,
                              const LossConstants& consts);

std::int64_t mk_for_regime(Regime regime, int k, int n, const AccuracyTarget& target,
                           const LossConstants& consts);
double mk_for_regime_raw(Regime regime, int k, int n, const AccuracyTarget& target,
                         const LossConstants& consts);

// Permutation samples per coalition under the expected-utility interpretation:
//   h >= 8 (eps^2 + eps G + G a / 3) / a^2 * ln(4 n m_k / b)
std::int64_t h_permutations(double epsilon, const LossConstants& consts,
                            const AccuracyTarget& target, int n, std::int64_t m_k);
double h_permutations_raw(double epsilon, const LossConstants& consts,
                          const AccuracyTarget& target, int n, std::int64_t m_k);

// regime-appropriate epsilon for h_permutations (convex or non-convex)
double epsilon_for_regime(Regime regime, int k, const LossConstants& consts, Schedule schedule,
                          double learning_rate);

}  // namespace shapval

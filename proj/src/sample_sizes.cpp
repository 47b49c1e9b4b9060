#include "shapval/sample_sizes.hpp"

#include <cmath>
#include <limits>

#include "shapval/errors.hpp"

namespace shapval {

namespace {

std::int64_t ceil_with_floor(double raw) {
    if (!std::isfinite(raw)) return std::numeric_limits<std::int64_t>::max();
    if (raw <= 1.0) return 1;
    const double c = std::ceil(raw);
    if (c >= 9.0e18) return std::numeric_limits<std::int64_t>::max();
    return static_cast<std::int64_t>(c);
}

void check_layer(int k, int n) {
    if (k < 0 || k > n - 1) {
        throw_config("invalid-layer", "layer must lie in [0, n-1]");
    }
}

}  // namespace

void AccuracyTarget::validate() const {
    if (!(additive_error > 0) || !std::isfinite(additive_error)) {
        throw_config("target", "additive error bound a must be > 0");
    }
    if (!(failure_prob > 0) || !(failure_prob < 1)) {
        throw_config("target", "failure probability b must lie in (0, 1)");
    }
}

double mk_strongly_convex_raw(int k, int n, const AccuracyTarget& target,
                              const LossConstants& consts) {
    check_layer(k, n);
    target.validate();
    consts.validate();
    if (consts.strong_convexity <= 0) {
        throw_config("constants", "strongly-convex bound needs lambda > 0");
    }
    if (k == 0) return 0.0;
    const double l2c2 = consts.lipschitz * consts.lipschitz * consts.kernel_bound * consts.kernel_bound;
    const double a = target.additive_error;
    const double gamma_num = l2c2 * l2c2;  // L^4 C^4
    const double denom = 8.0 * consts.strong_convexity * consts.strong_convexity * a * a *
                         static_cast<double>(k) * static_cast<double>(k);
    return gamma_num / denom * std::log(2.0 * n / target.failure_prob);
}

double mk_convex_sgd_raw(int k, int n, const AccuracyTarget& target, const LossConstants& consts) {
    check_layer(k, n);
    target.validate();
    consts.validate();
    if (consts.sgd_steps <= 0) throw_config("constants", "convex-sgd bound needs T > 0");
    if (k == 0) return 0.0;
    const double T = static_cast<double>(consts.sgd_steps);
    const double L2 = consts.lipschitz * consts.lipschitz;
    const double beta = consts.smoothness;
    const double G = consts.loss_bound;
    const double a = target.additive_error;
    const double kk = static_cast<double>(k);
    const double variance_term = 32.0 * T * T * L2 * L2 / (beta * beta * kk * kk) +
                                 8.0 * G * T * L2 / (kk * beta) + 4.0 * G * a / 3.0;
    return variance_term / (a * a) * std::log(2.0 * n / target.failure_prob);
}

double stability_h_hat(int k, const LossConstants& consts) {
    consts.validate();
    if (k < 2) throw_config("invalid-layer", "H_k is defined for k >= 2 only");
    if (consts.sgd_steps <= 0) throw_config("constants", "H_k needs T > 0");
    const double q = consts.smoothness * consts.step_scale;
    const double G = consts.loss_bound;
    const double L2 = consts.lipschitz * consts.lipschitz;
    const double T = static_cast<double>(consts.sgd_steps);
    return std::pow(G, q / (q + 1.0)) * std::pow(2.0 * consts.step_scale * L2, 1.0 / (q + 1.0)) *
           std::pow(T, q / (q + 1.0)) * (1.0 + 1.0 / q) / static_cast<double>(k - 1);
}

double mk_nonconvex_sgd_raw(int k, int n, const AccuracyTarget& target,
                            const LossConstants& consts) {
    check_layer(k, n);
    target.validate();
    consts.validate();
    if (k <= 1) return 0.0;
    const double h = stability_h_hat(k, consts);
    const double G = consts.loss_bound;
    const double a = target.additive_error;
    return 2.0 * std::log(2.0 * n / target.failure_prob) *
           (2.0 * h * h + 2.0 * G * h + 4.0 * G * a / 3.0) / (a * a);
}

double epsilon_convex(int k, const LossConstants& consts, Schedule schedule,
                      double learning_rate) {
    consts.validate();
    if (k < 1) throw_config("invalid-layer", "epsilon is defined for k >= 1");
    if (consts.sgd_steps <= 0) throw_config("constants", "epsilon needs T > 0");
    const double cap = 2.0 / consts.smoothness;
    double step_sum = 0.0;
    if (schedule == Schedule::Constant) {
        const double alpha = learning_rate > 0 ? std::min(learning_rate, cap) : cap;
        step_sum = alpha * static_cast<double>(consts.sgd_steps);
    } else {
        for (long long t = 1; t <= consts.sgd_steps; ++t) {
            step_sum += std::min(consts.step_scale / static_cast<double>(t), cap);
        }
    }
    return 2.0 * consts.lipschitz * consts.lipschitz / static_cast<double>(k) * step_sum;
}

std::int64_t mk_strongly_convex(int k, int n, const AccuracyTarget& target,
                                const LossConstants& consts) {
    const double raw = mk_strongly_convex_raw(k, n, target, consts);
    return k == 0 ? 0 : ceil_with_floor(raw);
}

std::int64_t mk_convex_sgd(int k, int n, const AccuracyTarget& target,
                           const LossConstants& consts) {
    const double raw = mk_convex_sgd_raw(k, n, target, consts);
    return k == 0 ? 0 : ceil_with_floor(raw);
}

std::int64_t mk_nonconvex_sgd(int k, int n, const AccuracyTarget& target,
                              const LossConstants& consts) {
    const double raw = mk_nonconvex_sgd_raw(k, n, target, consts);
    return k <= 1 ? 0 : ceil_with_floor(raw);
}

std::int64_t mk_for_regime(Regime regime, int k, int n, const AccuracyTarget& target,
                           const LossConstants& consts) {
    switch (regime) {
        case Regime::StronglyConvex: return mk_strongly_convex(k, n, target, consts);
        case Regime::ConvexSgd: return mk_convex_sgd(k, n, target, consts);
        case Regime::NonconvexSgd: return mk_nonconvex_sgd(k, n, target, consts);
    }
    throw_config("regime", "unknown regime");
}

double mk_for_regime_raw(Regime regime, int k, int n, const AccuracyTarget& target,
                         const LossConstants& consts) {
    switch (regime) {
        case Regime::StronglyConvex: return mk_strongly_convex_raw(k, n, target, consts);
        case Regime::ConvexSgd: return mk_convex_sgd_raw(k, n, target, consts);
        case Regime::NonconvexSgd: return mk_nonconvex_sgd_raw(k, n, target, consts);
    }
    throw_config("regime", "unknown regime");
}

double h_permutations_raw(double epsilon, const LossConstants& consts,
                          const AccuracyTarget& target, int n, std::int64_t m_k) {
    target.validate();
    consts.validate();
    if (!(epsilon > 0)) throw_config("target", "epsilon must be > 0");
    if (m_k < 1) throw_config("config", "m_k must be >= 1");
    const double G = consts.loss_bound;
    const double a = target.additive_error;
    return 8.0 * (epsilon * epsilon + epsilon * G + G * a / 3.0) / (a * a) *
           std::log(4.0 * static_cast<double>(n) * static_cast<double>(m_k) /
                    target.failure_prob);
}

std::int64_t h_permutations(double epsilon, const LossConstants& consts,
                            const AccuracyTarget& target, int n, std::int64_t m_k) {
    return ceil_with_floor(h_permutations_raw(epsilon, consts, target, n, m_k));
}

double epsilon_for_regime(Regime regime, int k, const LossConstants& consts, Schedule schedule,
                          double learning_rate) {
    switch (regime) {
        case Regime::ConvexSgd: return epsilon_convex(k, consts, schedule, learning_rate);
        case Regime::NonconvexSgd: return stability_h_hat(k, consts);
        case Regime::StronglyConvex:
            throw_config("mode", "permutation sampling applies to SGD regimes only");
    }
    throw_config("regime", "unknown regime");
}

}  // namespace shapval

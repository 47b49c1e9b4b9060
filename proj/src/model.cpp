#include "shapval/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "shapval/errors.hpp"

namespace shapval {

namespace {

double softplus(double x) {
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double activate(Activation a, double x) {
    return a == Activation::Softplus ? softplus(x) : std::max(0.0, x);
}

double activate_grad(Activation a, double x) {
    return a == Activation::Softplus ? sigmoid(x) : (x > 0 ? 1.0 : 0.0);
}

struct MlpLayout {
    int d, h, out;
    std::size_t w1() const { return 0; }
    std::size_t b1() const { return static_cast<std::size_t>(h) * d; }
    std::size_t w2() const { return b1() + h; }
    std::size_t b2() const { return w2() + static_cast<std::size_t>(out) * h; }
    std::size_t total() const { return b2() + out; }
};

MlpLayout mlp_layout(const ModelParams& m) {
    return MlpLayout{m.input_dim, m.hidden, m.n_classes == 2 ? 1 : m.n_classes};
}

// logits for the example; binary models emit a single class-1 logit
void forward_logits(const ModelParams& m, std::span<const double> x, std::vector<double>& logits,
                    std::vector<double>& hidden_pre) {
    if (m.arch == "logistic") {
        if (m.n_classes == 2) {
            double z = m.theta[m.input_dim];
            for (int j = 0; j < m.input_dim; ++j) z += m.theta[j] * x[j];
            logits.assign(1, z);
        } else {
            const int k = m.n_classes, d = m.input_dim;
            logits.assign(k, 0.0);
            for (int c = 0; c < k; ++c) {
                double z = m.theta[static_cast<std::size_t>(k) * d + c];
                const double* w = m.theta.data() + static_cast<std::size_t>(c) * d;
                for (int j = 0; j < d; ++j) z += w[j] * x[j];
                logits[c] = z;
            }
        }
        return;
    }
    const MlpLayout lay = mlp_layout(m);
    hidden_pre.assign(lay.h, 0.0);
    for (int j = 0; j < lay.h; ++j) {
        double z = m.theta[lay.b1() + j];
        const double* w = m.theta.data() + lay.w1() + static_cast<std::size_t>(j) * lay.d;
        for (int l = 0; l < lay.d; ++l) z += w[l] * x[l];
        hidden_pre[j] = z;
    }
    logits.assign(lay.out, 0.0);
    for (int c = 0; c < lay.out; ++c) {
        double z = m.theta[lay.b2() + c];
        const double* w = m.theta.data() + lay.w2() + static_cast<std::size_t>(c) * lay.h;
        for (int j = 0; j < lay.h; ++j) z += w[j] * activate(m.activation, hidden_pre[j]);
        logits[c] = z;
    }
}

// cross-entropy from logits; binary input is the single class-1 logit
double ce_from_logits(const std::vector<double>& logits, int y) {
    if (logits.size() == 1) {
        const double z = logits[0];
        return y == 1 ? softplus(-z) : softplus(z);
    }
    const double zmax = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - zmax);
    return zmax + std::log(sum) - logits[y];
}

// d loss / d logit
void logit_grad(const std::vector<double>& logits, int y, std::vector<double>& dz) {
    if (logits.size() == 1) {
        dz.assign(1, sigmoid(logits[0]) - (y == 1 ? 1.0 : 0.0));
        return;
    }
    const double zmax = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    dz.resize(logits.size());
    for (std::size_t c = 0; c < logits.size(); ++c) {
        dz[c] = std::exp(logits[c] - zmax);
        sum += dz[c];
    }
    for (std::size_t c = 0; c < logits.size(); ++c) dz[c] /= sum;
    dz[y] -= 1.0;
}

double l2_half_norm(const std::vector<double>& theta) {
    double s = 0.0;
    for (double t : theta) s += t * t;
    return 0.5 * s;
}

}  // namespace

void LossConstants::validate() const {
    if (!(lipschitz > 0) || !(smoothness > 0) || !(loss_bound > 0) || !(step_scale > 0) ||
        !(kernel_bound > 0) || !std::isfinite(loss_bound)) {
        throw_config("constants", "loss constants must be strictly positive and finite");
    }
    if (strong_convexity < 0) {
        throw_config("constants", "strong-convexity constant must be non-negative");
    }
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::StronglyConvex: return "strongly-convex";
        case Regime::ConvexSgd: return "convex-sgd";
        case Regime::NonconvexSgd: return "nonconvex-sgd";
    }
    return "?";
}

std::string to_string(Schedule s) { return s == Schedule::Constant ? "constant" : "decaying"; }
std::string to_string(Activation a) { return a == Activation::Softplus ? "softplus" : "relu"; }

Regime regime_from_string(const std::string& s) {
    if (s == "strongly-convex") return Regime::StronglyConvex;
    if (s == "convex-sgd") return Regime::ConvexSgd;
    if (s == "nonconvex-sgd") return Regime::NonconvexSgd;
    throw_config("regime", "unknown regime '" + s + "'");
}

Schedule schedule_from_string(const std::string& s) {
    if (s == "constant") return Schedule::Constant;
    if (s == "decaying") return Schedule::Decaying;
    throw_config("schedule", "unknown schedule '" + s + "'");
}

Activation activation_from_string(const std::string& s) {
    if (s == "softplus") return Activation::Softplus;
    if (s == "relu") return Activation::Relu;
    throw_config("activation", "unknown activation '" + s + "'");
}

std::size_t ModelParams::expected_size() const {
    if (arch == "logistic") {
        return n_classes == 2 ? static_cast<std::size_t>(input_dim) + 1
                              : static_cast<std::size_t>(n_classes) * (input_dim + 1);
    }
    return mlp_layout(*this).total();
}

std::string ModelParams::to_json() const {
    nlohmann::json j;
    j["arch"] = arch;
    j["input_dim"] = input_dim;
    j["n_classes"] = n_classes;
    j["hidden"] = hidden;
    j["activation"] = to_string(activation);
    j["theta"] = theta;
    return j.dump(2);
}

ModelParams ModelParams::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw_data("parse", "model JSON does not parse");
    ModelParams m;
    try {
        m.arch = j.at("arch").get<std::string>();
        m.input_dim = j.at("input_dim").get<int>();
        m.n_classes = j.at("n_classes").get<int>();
        m.hidden = j.at("hidden").get<int>();
        m.activation = activation_from_string(j.at("activation").get<std::string>());
        m.theta = j.at("theta").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw_data("parse", std::string("model JSON missing field: ") + e.what());
    }
    if (m.arch != "logistic" && m.arch != "mlp") throw_data("parse", "unknown arch '" + m.arch + "'");
    if (m.theta.size() != m.expected_size()) {
        throw_data("bad-shape", "model parameter count does not match architecture");
    }
    return m;
}

void TrainConfig::validate() const {
    constants.validate();
    if (regime == Regime::StronglyConvex) {
        if (constants.strong_convexity <= 0) {
            throw_config("constants", "strongly-convex regime needs lambda > 0");
        }
        if (hidden_units > 0) {
            throw_config("regime", "strongly-convex regime supports logistic models only");
        }
    } else {
        if (constants.sgd_steps < 0 || epochs < 0) {
            throw_config("constants", "sgd_steps and epochs must be non-negative");
        }
        if (regime == Regime::NonconvexSgd && schedule != Schedule::Decaying) {
            throw_config("schedule", "nonconvex-sgd requires the decaying schedule alpha_t <= c/t");
        }
        if (regime == Regime::NonconvexSgd && hidden_units <= 0) {
            throw_config("regime", "nonconvex-sgd expects a hidden layer (hidden_units > 0)");
        }
        if (regime == Regime::ConvexSgd && hidden_units > 0) {
            throw_config("regime", "convex-sgd supports logistic models only");
        }
    }
    if (hidden_units < 0 || hidden_units > 32) {
        throw_config("config", "hidden_units must lie in [0, 32]");
    }
    if (learning_rate < 0) throw_config("config", "learning_rate must be >= 0");
}

ModelParams zero_model(const Dataset& data, const TrainConfig& config) {
    ModelParams m;
    m.arch = config.hidden_units > 0 ? "mlp" : "logistic";
    m.input_dim = data.dim;
    m.n_classes = data.n_classes;
    m.hidden = config.hidden_units;
    m.activation = config.activation;
    m.theta.assign(m.expected_size(), 0.0);
    return m;
}

double example_loss(const ModelParams& model, std::span<const double> x, int y, double l2) {
    std::vector<double> logits, hidden_pre;
    forward_logits(model, x, logits, hidden_pre);
    return ce_from_logits(logits, y) + l2 * l2_half_norm(model.theta);
}

double example_loss_grad(const ModelParams& model, std::span<const double> x, int y, double l2,
                         std::span<double> grad, double scale) {
    std::vector<double> logits, hidden_pre, dz;
    forward_logits(model, x, logits, hidden_pre);
    logit_grad(logits, y, dz);

    if (model.arch == "logistic") {
        const int d = model.input_dim;
        if (model.n_classes == 2) {
            for (int j = 0; j < d; ++j) grad[j] += scale * dz[0] * x[j];
            grad[d] += scale * dz[0];
        } else {
            const int k = model.n_classes;
            for (int c = 0; c < k; ++c) {
                double* gw = grad.data() + static_cast<std::size_t>(c) * d;
                for (int j = 0; j < d; ++j) gw[j] += scale * dz[c] * x[j];
                grad[static_cast<std::size_t>(k) * d + c] += scale * dz[c];
            }
        }
    } else {
        const MlpLayout lay = mlp_layout(model);
        for (int c = 0; c < lay.out; ++c) {
            double* gw2 = grad.data() + lay.w2() + static_cast<std::size_t>(c) * lay.h;
            for (int j = 0; j < lay.h; ++j) gw2[j] += scale * dz[c] * activate(model.activation, hidden_pre[j]);
            grad[lay.b2() + c] += scale * dz[c];
        }
        for (int j = 0; j < lay.h; ++j) {
            double dh = 0.0;
            for (int c = 0; c < lay.out; ++c) {
                dh += dz[c] * model.theta[lay.w2() + static_cast<std::size_t>(c) * lay.h + j];
            }
            const double da = dh * activate_grad(model.activation, hidden_pre[j]);
            double* gw1 = grad.data() + lay.w1() + static_cast<std::size_t>(j) * lay.d;
            for (int l = 0; l < lay.d; ++l) gw1[l] += scale * da * x[l];
            grad[lay.b1() + j] += scale * da;
        }
    }

    if (l2 > 0) {
        for (std::size_t t = 0; t < model.theta.size(); ++t) grad[t] += scale * l2 * model.theta[t];
    }
    return ce_from_logits(logits, y) + l2 * l2_half_norm(model.theta);
}

namespace {

double max_row_norm_sq(const Dataset& data) {
    double best = 0.0;
    for (int i = 0; i < data.train_count(); ++i) {
        double s = 0.0;
        for (double v : data.train_row(i)) s += v * v;
        best = std::max(best, s);
    }
    return best;
}

}  // namespace

ModelParams train_deterministic(const Coalition& coalition, const Dataset& data,
                                const TrainConfig& config) {
    config.validate();
    if (config.regime != Regime::StronglyConvex) {
        throw_config("regime", "deterministic training requires the strongly-convex regime");
    }
    ModelParams model = zero_model(data, config);
    if (config.warm_start) {
        if (config.warm_start->theta.size() != model.theta.size() ||
            config.warm_start->arch != model.arch) {
            throw_config("warm-start", "warm-start parameters do not match the architecture");
        }
        model.theta = config.warm_start->theta;
    }
    // the empty coalition maps to the initialization (zero model or warm start)
    if (coalition.layer() == 0) return model;

    const double lambda = config.constants.strong_convexity;
    // objective smoothness: logistic curvature x x^T / 4 (binary) or / 2 (softmax)
    const double curvature = model.n_classes == 2 ? 0.25 : 0.5;
    const double beta_obj = max_row_norm_sq(data) * curvature + lambda;
    const double step = 1.0 / beta_obj;
    const double m = static_cast<double>(coalition.layer());

    std::vector<double> grad(model.theta.size());
    for (int iter = 0; iter < config.max_gd_iterations; ++iter) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double loss = 0.0;
        for (int idx : coalition.members()) {
            loss += example_loss_grad(model, data.train_row(idx), data.train_y[idx], lambda, grad,
                                      1.0 / m);
        }
        if (!std::isfinite(loss)) {
            throw_runtime("divergence", "non-finite loss during full-batch descent");
        }
        double gnorm_sq = 0.0;
        for (double g : grad) gnorm_sq += g * g;
        if (std::sqrt(gnorm_sq) <= config.gd_tolerance) break;
        for (std::size_t t = 0; t < model.theta.size(); ++t) model.theta[t] -= step * grad[t];
    }
    return model;
}

ModelParams sgd_train(std::span<const int> sequence, const Dataset& data,
                      const TrainConfig& config) {
    config.validate();
    ModelParams model = zero_model(data, config);
    if (config.warm_start) {
        if (config.warm_start->theta.size() != model.theta.size() ||
            config.warm_start->arch != model.arch) {
            throw_config("warm-start", "warm-start parameters do not match the architecture");
        }
        model.theta = config.warm_start->theta;
    }
    if (sequence.empty()) return model;

    long long steps = config.constants.sgd_steps;
    if (config.epochs > 0) steps = config.epochs * static_cast<long long>(sequence.size());
    const double beta = config.constants.smoothness;
    const double cap = 2.0 / beta;
    const double lambda = config.constants.strong_convexity;

    std::vector<double> grad(model.theta.size());
    for (long long t = 0; t < steps; ++t) {
        double alpha;
        if (config.schedule == Schedule::Constant) {
            alpha = config.learning_rate > 0 ? std::min(config.learning_rate, cap) : cap;
        } else {
            alpha = std::min(config.constants.step_scale / static_cast<double>(t + 1), cap);
        }
        const int idx = sequence[static_cast<std::size_t>(t % static_cast<long long>(sequence.size()))];
        std::fill(grad.begin(), grad.end(), 0.0);
        example_loss_grad(model, data.train_row(idx), data.train_y[idx], lambda, grad, 1.0);
        for (std::size_t p = 0; p < model.theta.size(); ++p) model.theta[p] -= alpha * grad[p];
    }
    for (double t : model.theta) {
        if (!std::isfinite(t)) throw_runtime("divergence", "non-finite parameters after SGD");
    }
    return model;
}

double test_loss(const ModelParams& model, const Dataset& data, double loss_bound) {
    if (model.input_dim != data.dim) throw_config("bad-shape", "model dimension mismatch");
    std::vector<double> logits, hidden_pre;
    double total = 0.0;
    for (int i = 0; i < data.eval_count(); ++i) {
        forward_logits(model, data.eval_row(i), logits, hidden_pre);
        total += std::min(ce_from_logits(logits, data.eval_y[i]), loss_bound);
    }
    return total / data.eval_count();
}

double test_accuracy(const ModelParams& model, const Dataset& data) {
    if (model.input_dim != data.dim) throw_config("bad-shape", "model dimension mismatch");
    std::vector<double> logits, hidden_pre;
    int hits = 0;
    for (int i = 0; i < data.eval_count(); ++i) {
        forward_logits(model, data.eval_row(i), logits, hidden_pre);
        int pred;
        if (logits.size() == 1) {
            pred = logits[0] > 0 ? 1 : 0;
        } else {
            pred = static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
        }
        if (pred == data.eval_y[i]) ++hits;
    }
    return static_cast<double>(hits) / data.eval_count();
}

LossConstants estimate_constants(const Dataset& data, const TrainConfig& config) {
    LossConstants c = config.constants;
    c.lipschitz = std::max(std::sqrt(max_row_norm_sq(data)), 1e-6);
    c.smoothness = c.lipschitz * c.lipschitz / 4.0 + c.strong_convexity;
    return c;
}

}  // namespace shapval

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shapval/coalition.hpp"
#include "shapval/dataset.hpp"

namespace shapval {

// Constants feeding the sample-size formulas. Estimated values are heuristics
// for logistic loss on standardized features; every field is overridable.
struct LossConstants {
    double lipschitz = 1.0;        // L, bound on the per-example gradient norm
    double smoothness = 1.0;       // beta
    double strong_convexity = 0.1; // lambda, also the L2 weight in training
    double loss_bound = 6.931471805599453; // G = 10*ln 2, clamp on per-example loss
    double step_scale = 0.1;       // c in the decaying schedule alpha_t <= c/t
    long long sgd_steps = 0;       // T
    double kernel_bound = 1.0;     // C, taken as 1 under standardization

    void validate() const;
};

enum class Regime { StronglyConvex, ConvexSgd, NonconvexSgd };
enum class Schedule { Constant, Decaying };
enum class Activation { Softplus, Relu };

std::string to_string(Regime r);
std::string to_string(Schedule s);
std::string to_string(Activation a);
Regime regime_from_string(const std::string& s);
Schedule schedule_from_string(const std::string& s);
Activation activation_from_string(const std::string& s);

// Flat parameter vector plus the shape needed to interpret it.
// logistic, 2 classes:   [w(d), b]
// logistic, K classes:   [W(K*d), b(K)]
// mlp (1 hidden layer):  [W1(H*d), b1(H), W2(out*H), b2(out)], out = 1 if binary
struct ModelParams {
    std::string arch = "logistic";  // "logistic" | "mlp"
    int input_dim = 0;
    int n_classes = 2;
    int hidden = 0;
    Activation activation = Activation::Softplus;
    std::vector<double> theta;

    std::size_t expected_size() const;
    std::string to_json() const;
    static ModelParams from_json(const std::string& text);
};

struct TrainConfig {
    Regime regime = Regime::StronglyConvex;
    LossConstants constants;
    Schedule schedule = Schedule::Constant;
    double learning_rate = 0.0;  // constant schedule; 0 -> use 2/beta
    long long epochs = 0;        // if > 0, per-training steps = epochs * |sequence|
    int hidden_units = 0;        // 0 = logistic, > 0 = mlp
    Activation activation = Activation::Softplus;
    std::optional<ModelParams> warm_start;
    int max_gd_iterations = 10000;
    double gd_tolerance = 1e-8;

    void validate() const;
    bool is_sgd() const { return regime != Regime::StronglyConvex; }
};

ModelParams zero_model(const Dataset& data, const TrainConfig& config);

// Per-example loss (cross-entropy plus the L2 term) and its analytic gradient,
// accumulated into grad with the given scale. Returns the loss value.
double example_loss(const ModelParams& model, std::span<const double> x, int y, double l2);
double example_loss_grad(const ModelParams& model, std::span<const double> x, int y, double l2,
                         std::span<double> grad, double scale);

// Full-batch gradient descent on the regularized empirical risk, run to
// gradient-norm tolerance or the iteration cap. Pure function of its inputs;
// the empty coalition maps to the zero model.
ModelParams train_deterministic(const Coalition& coalition, const Dataset& data,
                                const TrainConfig& config);

// Exactly T single-example gradient steps visiting `sequence` cyclically in
// order, zero-initialized (or warm-started). Deterministic given inputs.
ModelParams sgd_train(std::span<const int> sequence, const Dataset& data,
                      const TrainConfig& config);

// Mean clamped cross-entropy over the evaluation split; the per-example
// probability floor exp(-loss_bound) keeps every value inside [0, loss_bound].
double test_loss(const ModelParams& model, const Dataset& data, double loss_bound);
double test_accuracy(const ModelParams& model, const Dataset& data);

// Heuristic defaults: L = max train-row norm (floor 1e-6), beta = L^2/4 + lambda,
// everything else passed through from the config.
LossConstants estimate_constants(const Dataset& data, const TrainConfig& config);

}  // namespace shapval

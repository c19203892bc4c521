#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dia/matrix.hpp"

namespace dia {

enum class Activation { Linear, Relu, Sigmoid };
enum class LossKind { Mse, Bce };

// One dense layer: out = act(in * weights + bias), weights are in_dim x out_dim.
// Frozen layers (trainable = false) take part in forward/backward but are
// skipped by parameter updates; used for fixed output rescaling.
struct Layer {
    Matrix weights;
    std::vector<double> bias;
    Activation activation = Activation::Linear;
    bool trainable = true;

    std::size_t in_dim() const { return weights.rows; }
    std::size_t out_dim() const { return weights.cols; }
};

struct DenseNet {
    std::vector<Layer> layers;

    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
    std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }
    bool empty() const { return layers.empty(); }

    // Checks dimension chaining, bias lengths and entry finiteness.
    void validate() const;
};

// Uniform init in [-sqrt(6/(fan_in+fan_out)), +], biases zero.
DenseNet make_net(const std::vector<std::size_t>& dims, const std::vector<Activation>& activations,
                  std::uint64_t seed);

Matrix forward(const DenseNet& net, const Matrix& batch);

// Per-layer caches from one forward pass; post[0] is the input batch.
struct ForwardTrace {
    std::vector<Matrix> pre;
    std::vector<Matrix> post;
};
ForwardTrace forward_trace(const DenseNet& net, const Matrix& batch);

struct LossStats {
    double value = 0.0;
    std::size_t clamped = 0;  // bce predictions pushed into [eps, 1-eps]
};
inline constexpr double kBceEpsilon = 1e-7;

LossStats loss_stats(LossKind kind, const Matrix& predicted, const Matrix& target);
double loss_value(LossKind kind, const Matrix& predicted, const Matrix& target);

// dLoss/dpredicted, same shape as predicted.
Matrix loss_grad(LossKind kind, const Matrix& predicted, const Matrix& target);

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> bias;
    Matrix input;  // dLoss/dbatch

    Gradients& add_scaled(const Gradients& other, double scale);
};

// Backpropagates an arbitrary upstream dL/doutput through the net.
Gradients backprop(const DenseNet& net, const ForwardTrace& trace, const Matrix& upstream);

// Gradients of upstream_scale * loss_value(kind, forward(net, batch), target).
Gradients backward(const DenseNet& net, const Matrix& batch, const Matrix& target, LossKind kind,
                   double upstream_scale = 1.0);

// param -= lr * grad on trainable layers.
void apply_sgd(DenseNet& net, const Gradients& grads, double learning_rate);

struct TrainConfig {
    double learning_rate = 0.01;
    std::size_t batch_size = 16;
    std::size_t train_steps = 10000;
    std::uint64_t seed = 0;
    LossKind loss = LossKind::Mse;

    void validate() const;
};

class TrainingDivergence : public std::runtime_error {
public:
    TrainingDivergence(std::size_t step, std::vector<double> trace)
        : std::runtime_error("training diverged at step " + std::to_string(step)),
          step(step), loss_trace(std::move(trace)) {}

    std::size_t step;
    std::vector<double> loss_trace;
};

struct TrainResult {
    DenseNet net;
    std::vector<double> loss_trace;  // minibatch loss, one entry per step
};

// Plain SGD with minibatches sampled with replacement from the given rows.
// Deterministic for a fixed cfg.seed and initial net.
TrainResult sgd_train(DenseNet net, const Matrix& inputs, const Matrix& targets, const TrainConfig& cfg);

// Max relative error between backward() and central finite differences
// (h = 1e-5) over every weight, bias and input entry.
double gradient_check(const DenseNet& net, const Matrix& batch, const Matrix& target, LossKind kind);

}  // namespace dia

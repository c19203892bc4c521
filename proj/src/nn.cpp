#include "dia/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dia/rng.hpp"

namespace dia {
namespace {

double activate(Activation act, double z) {
    switch (act) {
        case Activation::Linear: return z;
        case Activation::Relu: return z > 0.0 ? z : 0.0;
        case Activation::Sigmoid:
            if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
            {
                const double e = std::exp(z);
                return e / (1.0 + e);
            }
    }
    return z;
}

// Derivative expressed through the activation output; relu subgradient at 0 is 0.
double activate_deriv(Activation act, double z, double out) {
    switch (act) {
        case Activation::Linear: return 1.0;
        case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::Sigmoid: return out * (1.0 - out);
    }
    return 1.0;
}

}  // namespace

void DenseNet::validate() const {
    if (layers.empty()) throw std::invalid_argument("net has no layers");
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const Layer& l = layers[k];
        if (l.weights.data.size() != l.weights.rows * l.weights.cols)
            throw std::invalid_argument("layer " + std::to_string(k) + ": weight storage mismatch");
        if (l.bias.size() != l.out_dim())
            throw std::invalid_argument("layer " + std::to_string(k) + ": bias length mismatch");
        if (k + 1 < layers.size() && l.out_dim() != layers[k + 1].in_dim())
            throw std::invalid_argument("layer " + std::to_string(k) + ": output width " +
                                        std::to_string(l.out_dim()) + " does not chain into layer " +
                                        std::to_string(k + 1));
        for (double w : l.weights.data)
            if (!std::isfinite(w)) throw std::invalid_argument("layer " + std::to_string(k) + ": non-finite weight");
        for (double b : l.bias)
            if (!std::isfinite(b)) throw std::invalid_argument("layer " + std::to_string(k) + ": non-finite bias");
    }
}

DenseNet make_net(const std::vector<std::size_t>& dims, const std::vector<Activation>& activations,
                  std::uint64_t seed) {
    if (dims.size() < 2) throw std::invalid_argument("make_net: need at least input and output dims");
    if (activations.size() != dims.size() - 1)
        throw std::invalid_argument("make_net: one activation per layer required");
    Rng rng(seed);
    DenseNet net;
    net.layers.resize(dims.size() - 1);
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
        Layer& l = net.layers[k];
        l.weights = Matrix(dims[k], dims[k + 1]);
        const double limit = std::sqrt(6.0 / static_cast<double>(dims[k] + dims[k + 1]));
        for (double& w : l.weights.data) w = rng.uniform(-limit, limit);
        l.bias.assign(dims[k + 1], 0.0);
        l.activation = activations[k];
    }
    return net;
}

Matrix forward(const DenseNet& net, const Matrix& batch) {
    if (net.empty()) throw std::invalid_argument("forward: empty net");
    if (batch.cols != net.input_dim())
        throw std::invalid_argument("forward: batch width " + std::to_string(batch.cols) +
                                    " != net input " + std::to_string(net.input_dim()));
    Matrix cur = batch;
    for (const Layer& l : net.layers) {
        Matrix z = matmul(cur, l.weights);
        for (std::size_t i = 0; i < z.rows; ++i)
            for (std::size_t j = 0; j < z.cols; ++j) z(i, j) = activate(l.activation, z(i, j) + l.bias[j]);
        cur = std::move(z);
    }
    return cur;
}

ForwardTrace forward_trace(const DenseNet& net, const Matrix& batch) {
    if (net.empty()) throw std::invalid_argument("forward_trace: empty net");
    if (batch.cols != net.input_dim())
        throw std::invalid_argument("forward_trace: batch width mismatch");
    ForwardTrace t;
    t.post.push_back(batch);
    for (const Layer& l : net.layers) {
        Matrix z = matmul(t.post.back(), l.weights);
        for (std::size_t i = 0; i < z.rows; ++i)
            for (std::size_t j = 0; j < z.cols; ++j) z(i, j) += l.bias[j];
        Matrix a(z.rows, z.cols);
        for (std::size_t i = 0; i < z.rows; ++i)
            for (std::size_t j = 0; j < z.cols; ++j) a(i, j) = activate(l.activation, z(i, j));
        t.pre.push_back(std::move(z));
        t.post.push_back(std::move(a));
    }
    return t;
}

LossStats loss_stats(LossKind kind, const Matrix& predicted, const Matrix& target) {
    if (predicted.rows != target.rows || predicted.cols != target.cols)
        throw std::invalid_argument("loss: shape mismatch");
    if (predicted.empty()) throw std::invalid_argument("loss: empty input");
    const double n = static_cast<double>(predicted.data.size());
    LossStats stats;
    double acc = 0.0;
    if (kind == LossKind::Mse) {
        for (std::size_t i = 0; i < predicted.data.size(); ++i) {
            const double d = predicted.data[i] - target.data[i];
            acc += d * d;
        }
    } else {
        for (std::size_t i = 0; i < predicted.data.size(); ++i) {
            double p = predicted.data[i];
            if (p < kBceEpsilon || p > 1.0 - kBceEpsilon) {
                p = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
                ++stats.clamped;
            }
            const double t = target.data[i];
            acc += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
        }
    }
    stats.value = acc / n;
    return stats;
}

double loss_value(LossKind kind, const Matrix& predicted, const Matrix& target) {
    return loss_stats(kind, predicted, target).value;
}

Matrix loss_grad(LossKind kind, const Matrix& predicted, const Matrix& target) {
    if (predicted.rows != target.rows || predicted.cols != target.cols)
        throw std::invalid_argument("loss_grad: shape mismatch");
    const double n = static_cast<double>(predicted.data.size());
    Matrix g(predicted.rows, predicted.cols);
    if (kind == LossKind::Mse) {
        for (std::size_t i = 0; i < g.data.size(); ++i)
            g.data[i] = 2.0 * (predicted.data[i] - target.data[i]) / n;
    } else {
        for (std::size_t i = 0; i < g.data.size(); ++i) {
            const double p = predicted.data[i];
            if (p < kBceEpsilon || p > 1.0 - kBceEpsilon) {
                g.data[i] = 0.0;  // inside the clamp plateau the loss is flat
                continue;
            }
            const double t = target.data[i];
            g.data[i] = (p - t) / (p * (1.0 - p)) / n;
        }
    }
    return g;
}

Gradients& Gradients::add_scaled(const Gradients& other, double scale) {
    for (std::size_t k = 0; k < weights.size(); ++k) {
        for (std::size_t i = 0; i < weights[k].data.size(); ++i)
            weights[k].data[i] += scale * other.weights[k].data[i];
        for (std::size_t j = 0; j < bias[k].size(); ++j) bias[k][j] += scale * other.bias[k][j];
    }
    for (std::size_t i = 0; i < input.data.size(); ++i) input.data[i] += scale * other.input.data[i];
    return *this;
}

Gradients backprop(const DenseNet& net, const ForwardTrace& trace, const Matrix& upstream) {
    const std::size_t L = net.layers.size();
    if (trace.pre.size() != L || trace.post.size() != L + 1)
        throw std::invalid_argument("backprop: trace does not match net");
    Gradients g;
    g.weights.resize(L);
    g.bias.resize(L);

    Matrix delta = upstream;  // dL/d(layer output)
    for (std::size_t k = L; k-- > 0;) {
        const Layer& l = net.layers[k];
        const Matrix& z = trace.pre[k];
        const Matrix& out = trace.post[k + 1];
        require_shape(delta, z.rows, z.cols, "backprop: upstream shape");
        // dL/dz
        for (std::size_t i = 0; i < delta.rows; ++i)
            for (std::size_t j = 0; j < delta.cols; ++j)
                delta(i, j) *= activate_deriv(l.activation, z(i, j), out(i, j));
        g.weights[k] = matmul(transpose(trace.post[k]), delta);
        g.bias[k].assign(l.out_dim(), 0.0);
        for (std::size_t i = 0; i < delta.rows; ++i)
            for (std::size_t j = 0; j < delta.cols; ++j) g.bias[k][j] += delta(i, j);
        delta = matmul(delta, transpose(l.weights));
    }
    g.input = std::move(delta);
    return g;
}

Gradients backward(const DenseNet& net, const Matrix& batch, const Matrix& target, LossKind kind,
                   double upstream_scale) {
    ForwardTrace trace = forward_trace(net, batch);
    Matrix upstream = loss_grad(kind, trace.post.back(), target);
    if (upstream_scale != 1.0)
        for (double& v : upstream.data) v *= upstream_scale;
    return backprop(net, trace, upstream);
}

void apply_sgd(DenseNet& net, const Gradients& grads, double learning_rate) {
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        Layer& l = net.layers[k];
        if (!l.trainable) continue;
        for (std::size_t i = 0; i < l.weights.data.size(); ++i)
            l.weights.data[i] -= learning_rate * grads.weights[k].data[i];
        for (std::size_t j = 0; j < l.bias.size(); ++j) l.bias[j] -= learning_rate * grads.bias[k][j];
    }
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
}

TrainResult sgd_train(DenseNet net, const Matrix& inputs, const Matrix& targets, const TrainConfig& cfg) {
    cfg.validate();
    if (inputs.rows != targets.rows)
        throw std::invalid_argument("sgd_train: inputs/targets must be row-aligned");
    if (inputs.rows == 0) throw std::invalid_argument("sgd_train: no training rows");
    net.validate();

    Rng rng(derive_seed(cfg.seed, "sgd_batches"));
    TrainResult result;
    result.loss_trace.reserve(cfg.train_steps);

    std::vector<std::size_t> idx(cfg.batch_size);
    for (std::size_t step = 0; step < cfg.train_steps; ++step) {
        for (std::size_t b = 0; b < cfg.batch_size; ++b) idx[b] = rng.index(inputs.rows);
        Matrix bx = inputs.gather_rows(idx);
        Matrix bt = targets.gather_rows(idx);

        ForwardTrace trace = forward_trace(net, bx);
        const double loss = loss_value(cfg.loss, trace.post.back(), bt);
        result.loss_trace.push_back(loss);
        if (!std::isfinite(loss)) throw TrainingDivergence(step, std::move(result.loss_trace));

        Gradients grads = backprop(net, trace, loss_grad(cfg.loss, trace.post.back(), bt));
        apply_sgd(net, grads, cfg.learning_rate);
    }
    result.net = std::move(net);
    return result;
}

double gradient_check(const DenseNet& net, const Matrix& batch, const Matrix& target, LossKind kind) {
    constexpr double h = 1e-5;
    const Gradients analytic = backward(net, batch, target, kind);

    double max_rel = 0.0;
    auto update = [&max_rel](double a, double n) {
        const double denom = std::max({std::fabs(a), std::fabs(n), 1e-8});
        max_rel = std::max(max_rel, std::fabs(a - n) / denom);
    };

    DenseNet probe_net = net;
    Matrix probe_batch = batch;
    auto central_diff = [&](double& slot) {
        const double saved = slot;
        slot = saved + h;
        const double up = loss_value(kind, forward(probe_net, probe_batch), target);
        slot = saved - h;
        const double down = loss_value(kind, forward(probe_net, probe_batch), target);
        slot = saved;
        return (up - down) / (2.0 * h);
    };

    for (std::size_t k = 0; k < probe_net.layers.size(); ++k) {
        Layer& l = probe_net.layers[k];
        for (std::size_t i = 0; i < l.weights.data.size(); ++i)
            update(analytic.weights[k].data[i], central_diff(l.weights.data[i]));
        for (std::size_t j = 0; j < l.bias.size(); ++j)
            update(analytic.bias[k][j], central_diff(l.bias[j]));
    }
    for (std::size_t i = 0; i < probe_batch.data.size(); ++i)
        update(analytic.input.data[i], central_diff(probe_batch.data[i]));
    return max_rel;
}

}  // namespace dia

#pragma once

// Fully connected symmetric autoencoder with hand-written backpropagation.
// Everything is double precision.

#include "error.hpp"
#include "random.hpp"
#include "vecmath.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace nsae {

enum class Activation : std::uint8_t { Linear = 0, ReLU = 1 };

// Dense layer, weights stored row-major as fan_out x fan_in.
struct Layer {
    std::size_t fan_in = 0;
    std::size_t fan_out = 0;
    std::vector<double> weights;
    std::vector<double> bias;
    Activation activation = Activation::ReLU;

    double weight(std::size_t out, std::size_t in) const noexcept
    {
        return weights[out * fan_in + in];
    }
    double& weight(std::size_t out, std::size_t in) noexcept { return weights[out * fan_in + in]; }

    friend bool operator==(const Layer&, const Layer&) = default;
};

struct AutoencoderParams {
    std::vector<std::size_t> layer_sizes;
    std::vector<Layer> layers;
    // Index into layer_sizes of the encoder output (the smallest layer).
    std::size_t bottleneck_index = 0;

    std::size_t input_dim() const noexcept { return layer_sizes.front(); }
    std::size_t output_dim() const noexcept { return layer_sizes.back(); }
    std::size_t bottleneck_dim() const noexcept { return layer_sizes[bottleneck_index]; }

    friend bool operator==(const AutoencoderParams&, const AutoencoderParams&) = default;
};

// Same shapes as the parameters they update.
struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> bias;

    static Gradients zeros_like(const AutoencoderParams& p)
    {
        Gradients g;
        for (const auto& layer : p.layers) {
            g.weights.emplace_back(layer.weights.size(), 0.0);
            g.bias.emplace_back(layer.bias.size(), 0.0);
        }
        return g;
    }

    void set_zero() noexcept
    {
        for (auto& w : weights)
            std::fill(w.begin(), w.end(), 0.0);
        for (auto& b : bias)
            std::fill(b.begin(), b.end(), 0.0);
    }

    Gradients& operator+=(const Gradients& other)
    {
        check_congruent(other);
        for (std::size_t l = 0; l < weights.size(); ++l) {
            for (std::size_t i = 0; i < weights[l].size(); ++i)
                weights[l][i] += other.weights[l][i];
            for (std::size_t i = 0; i < bias[l].size(); ++i)
                bias[l][i] += other.bias[l][i];
        }
        return *this;
    }

    Gradients& operator*=(double s) noexcept
    {
        for (auto& w : weights)
            for (double& x : w)
                x *= s;
        for (auto& b : bias)
            for (double& x : b)
                x *= s;
        return *this;
    }

    void check_congruent(const Gradients& other) const
    {
        bool ok = other.weights.size() == weights.size() && other.bias.size() == bias.size();
        for (std::size_t l = 0; ok && l < weights.size(); ++l)
            ok = other.weights[l].size() == weights[l].size() &&
                 other.bias[l].size() == bias[l].size();
        if (!ok)
            fail(ErrorCode::ShapeMismatch, "gradient shapes differ");
    }
};

inline bool is_symmetric(std::span<const std::size_t> sizes) noexcept
{
    return std::equal(sizes.begin(), sizes.begin() + static_cast<std::ptrdiff_t>(sizes.size() / 2),
                      sizes.rbegin());
}

inline void validate_architecture(std::span<const std::size_t> sizes)
{
    if (sizes.size() < 3)
        fail(ErrorCode::BadLayerSize, "need at least input, hidden and output sizes");
    for (std::size_t s : sizes)
        if (s < 1)
            fail(ErrorCode::BadLayerSize, "layer size must be >= 1");
    if (!is_symmetric(sizes))
        fail(ErrorCode::AsymmetricArchitecture, "layer sizes must read the same reversed");
}

inline std::size_t find_bottleneck(std::span<const std::size_t> sizes) noexcept
{
    return static_cast<std::size_t>(std::min_element(sizes.begin(), sizes.end()) - sizes.begin());
}

// Hidden layers may be ReLU or Linear (tests build linear identity nets);
// the output layer is always Linear.
inline void validate(const AutoencoderParams& p)
{
    validate_architecture(p.layer_sizes);
    if (p.layers.size() + 1 != p.layer_sizes.size())
        fail(ErrorCode::ShapeMismatch, "layer count does not match layer_sizes");
    if (p.bottleneck_index != find_bottleneck(p.layer_sizes))
        fail(ErrorCode::ShapeMismatch, "bottleneck_index does not point at the smallest layer");
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const auto& layer = p.layers[l];
        if (layer.fan_in != p.layer_sizes[l] || layer.fan_out != p.layer_sizes[l + 1] ||
            layer.weights.size() != layer.fan_in * layer.fan_out ||
            layer.bias.size() != layer.fan_out)
            fail(ErrorCode::ShapeMismatch, "layer " + std::to_string(l) + " has wrong shape");
        require_finite(layer.weights, "layer " + std::to_string(l) + " weights");
        require_finite(layer.bias, "layer " + std::to_string(l) + " bias");
    }
    if (p.layers.back().activation != Activation::Linear)
        fail(ErrorCode::InvalidConfig, "output layer must be Linear");
}

// Glorot-uniform weights, zero biases, ReLU everywhere but the output.
inline AutoencoderParams init_autoencoder(std::span<const std::size_t> layer_sizes,
                                          std::uint64_t seed)
{
    validate_architecture(layer_sizes);
    AutoencoderParams p;
    p.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
    p.bottleneck_index = find_bottleneck(layer_sizes);
    const std::size_t n_layers = layer_sizes.size() - 1;
    for (std::size_t l = 0; l < n_layers; ++l) {
        Layer layer;
        layer.fan_in = layer_sizes[l];
        layer.fan_out = layer_sizes[l + 1];
        layer.activation = l + 1 == n_layers ? Activation::Linear : Activation::ReLU;
        const double s = std::sqrt(6.0 / static_cast<double>(layer.fan_in + layer.fan_out));
        CounterRng rng(seed, streams::init + l);
        layer.weights.resize(layer.fan_in * layer.fan_out);
        for (double& w : layer.weights)
            w = rng.uniform(-s, s);
        layer.bias.assign(layer.fan_out, 0.0);
        p.layers.push_back(std::move(layer));
    }
    return p;
}

// Post-activation outputs of every layer; outputs[0] is the input.
struct ForwardTrace {
    std::vector<Vector> outputs;
};

namespace detail {

inline void dense_forward(const Layer& layer, std::span<const double> in, Vector& out)
{
    out.resize(layer.fan_out);
    for (std::size_t o = 0; o < layer.fan_out; ++o) {
        const double* w = layer.weights.data() + o * layer.fan_in;
        double z = layer.bias[o];
        for (std::size_t i = 0; i < layer.fan_in; ++i)
            z += w[i] * in[i];
        out[o] = layer.activation == Activation::ReLU ? (z > 0.0 ? z : 0.0) : z;
    }
}

inline void check_input(const AutoencoderParams& p, std::span<const double> x)
{
    if (x.size() != p.input_dim())
        fail(ErrorCode::DimensionMismatch, "input dim " + std::to_string(x.size()) +
                                               ", network expects " +
                                               std::to_string(p.input_dim()));
}

} // namespace detail

inline ForwardTrace forward_trace(const AutoencoderParams& p, std::span<const double> x)
{
    detail::check_input(p, x);
    ForwardTrace trace;
    trace.outputs.resize(p.layers.size() + 1);
    trace.outputs[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < p.layers.size(); ++l)
        detail::dense_forward(p.layers[l], trace.outputs[l], trace.outputs[l + 1]);
    return trace;
}

struct ForwardResult {
    Vector bottleneck;
    Vector reconstruction;
};

inline ForwardResult forward(const AutoencoderParams& p, std::span<const double> x)
{
    auto trace = forward_trace(p, x);
    return {trace.outputs[p.bottleneck_index], std::move(trace.outputs.back())};
}

inline double mse_loss(std::span<const double> x_hat, std::span<const double> target)
{
    if (x_hat.size() != target.size())
        fail(ErrorCode::DimensionMismatch, "mse of dims " + std::to_string(x_hat.size()) +
                                               " and " + std::to_string(target.size()));
    if (x_hat.empty())
        return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < x_hat.size(); ++i) {
        const double d = x_hat[i] - target[i];
        sum += d * d;
    }
    return sum / static_cast<double>(x_hat.size());
}

// Adds d MSE(forward(p, x), target) / d theta into `grad` and returns the loss.
inline double accumulate_gradients(const AutoencoderParams& p, std::span<const double> x,
                                   std::span<const double> target, Gradients& grad)
{
    if (target.size() != p.output_dim())
        fail(ErrorCode::DimensionMismatch, "target dim " + std::to_string(target.size()) +
                                               ", network outputs " +
                                               std::to_string(p.output_dim()));
    const auto trace = forward_trace(p, x);
    for (std::size_t l = 1; l < trace.outputs.size(); ++l)
        if (!all_finite(trace.outputs[l]))
            fail(ErrorCode::NonFiniteActivation,
                 "layer " + std::to_string(l - 1) + " produced a non-finite activation");

    const Vector& x_hat = trace.outputs.back();
    const double loss = mse_loss(x_hat, target);
    const double scale = 2.0 / static_cast<double>(x_hat.size());

    Vector delta(x_hat.size());
    for (std::size_t i = 0; i < x_hat.size(); ++i)
        delta[i] = scale * (x_hat[i] - target[i]);

    Vector next;
    for (std::size_t l = p.layers.size(); l-- > 0;) {
        const Layer& layer = p.layers[l];
        const Vector& in = trace.outputs[l];
        const Vector& out = trace.outputs[l + 1];
        if (layer.activation == Activation::ReLU)
            for (std::size_t o = 0; o < layer.fan_out; ++o)
                if (!(out[o] > 0.0))
                    delta[o] = 0.0;

        auto& gw = grad.weights[l];
        auto& gb = grad.bias[l];
        for (std::size_t o = 0; o < layer.fan_out; ++o) {
            const double d = delta[o];
            gb[o] += d;
            if (d == 0.0)
                continue;
            double* row = gw.data() + o * layer.fan_in;
            for (std::size_t i = 0; i < layer.fan_in; ++i)
                row[i] += d * in[i];
        }
        if (l == 0)
            break;
        next.assign(layer.fan_in, 0.0);
        for (std::size_t o = 0; o < layer.fan_out; ++o) {
            const double d = delta[o];
            if (d == 0.0)
                continue;
            const double* w = layer.weights.data() + o * layer.fan_in;
            for (std::size_t i = 0; i < layer.fan_in; ++i)
                next[i] += d * w[i];
        }
        delta.swap(next);
    }
    return loss;
}

struct BackwardResult {
    double loss = 0.0;
    Gradients grad;
};

inline BackwardResult backward(const AutoencoderParams& p, std::span<const double> x,
                               std::span<const double> target)
{
    BackwardResult r{0.0, Gradients::zeros_like(p)};
    r.loss = accumulate_gradients(p, x, target, r.grad);
    return r;
}

inline void apply_sgd(AutoencoderParams& p, const Gradients& g, double lr)
{
    if (!(lr > 0.0))
        fail(ErrorCode::InvalidConfig, "learning rate must be > 0");
    bool ok = g.weights.size() == p.layers.size() && g.bias.size() == p.layers.size();
    for (std::size_t l = 0; ok && l < p.layers.size(); ++l)
        ok = g.weights[l].size() == p.layers[l].weights.size() &&
             g.bias[l].size() == p.layers[l].bias.size();
    if (!ok)
        fail(ErrorCode::ShapeMismatch, "gradients are not congruent with parameters");
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        auto& layer = p.layers[l];
        for (std::size_t i = 0; i < layer.weights.size(); ++i)
            layer.weights[i] -= lr * g.weights[l][i];
        for (std::size_t i = 0; i < layer.bias.size(); ++i)
            layer.bias[i] -= lr * g.bias[l][i];
    }
}

inline AutoencoderParams sgd_step(AutoencoderParams p, const Gradients& g, double lr)
{
    apply_sgd(p, g, lr);
    return p;
}

// Learning rate interpolated linearly in log10 space from start to end.
struct LogDecay {
    double start = 1e-2;
    double end = 1e-8;
};

// lr0 / (1 + decay * epoch).
struct ConstantWithDecay {
    double lr0 = 0.03;
    double decay = 0.0002;
};

using LrSchedule = std::variant<LogDecay, ConstantWithDecay>;

inline void validate(const LrSchedule& schedule)
{
    if (const auto* log = std::get_if<LogDecay>(&schedule)) {
        if (!(log->start > log->end && log->end > 0.0))
            fail(ErrorCode::InvalidConfig, "LogDecay needs start > end > 0");
    } else {
        const auto& c = std::get<ConstantWithDecay>(schedule);
        if (!(c.lr0 > 0.0 && c.decay >= 0.0))
            fail(ErrorCode::InvalidConfig, "ConstantWithDecay needs lr0 > 0 and decay >= 0");
    }
}

inline double lr_at(const LrSchedule& schedule, std::size_t epoch, std::size_t total_epochs)
{
    if (epoch >= total_epochs)
        fail(ErrorCode::EpochOutOfRange, "epoch " + std::to_string(epoch) + " not below total " +
                                             std::to_string(total_epochs));
    validate(schedule);
    if (const auto* log = std::get_if<LogDecay>(&schedule)) {
        if (total_epochs == 1)
            return log->start;
        const double frac = static_cast<double>(epoch) / static_cast<double>(total_epochs - 1);
        const double a = std::log10(log->start);
        const double b = std::log10(log->end);
        return std::pow(10.0, a + frac * (b - a));
    }
    const auto& c = std::get<ConstantWithDecay>(schedule);
    return c.lr0 / (1.0 + c.decay * static_cast<double>(epoch));
}

} // namespace nsae

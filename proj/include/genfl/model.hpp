#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "genfl/dataset.hpp"
#include "genfl/rng.hpp"

namespace genfl {

struct LayerShape {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;

    friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

inline std::size_t param_count(std::span<const LayerShape> shapes) {
    std::size_t n = 0;
    for (const auto& s : shapes) n += s.in_dim * s.out_dim + s.out_dim;
    return n;
}

// Flat parameter vector for a dense multinomial classifier. Layout per layer:
// weights (in_dim x out_dim, row-major over inputs) followed by biases.
// Hidden layers use tanh; the output layer feeds a softmax.
struct ModelParams {
    std::vector<LayerShape> layer_shapes;
    std::vector<double> values;

    std::size_t layer_offset(std::size_t layer) const {
        std::size_t off = 0;
        for (std::size_t l = 0; l < layer; ++l)
            off += layer_shapes[l].in_dim * layer_shapes[l].out_dim + layer_shapes[l].out_dim;
        return off;
    }

    std::span<const double> weights(std::size_t layer) const {
        const auto& s = layer_shapes[layer];
        return {values.data() + layer_offset(layer), s.in_dim * s.out_dim};
    }

    std::span<const double> biases(std::size_t layer) const {
        const auto& s = layer_shapes[layer];
        return {values.data() + layer_offset(layer) + s.in_dim * s.out_dim, s.out_dim};
    }

    std::size_t input_dim() const { return layer_shapes.front().in_dim; }
    std::size_t output_dim() const { return layer_shapes.back().out_dim; }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Partial derivatives of a mean batch loss; same shape contract as the
// ModelParams it differentiates.
struct Gradient {
    std::vector<LayerShape> layer_shapes;
    std::vector<double> values;
};

struct TrainSpec {
    std::size_t epochs = 1;
    std::size_t batch_size = 32;
    double learning_rate = 0.01;
};

inline void check_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x))
            throw std::runtime_error(std::string(what) + ": non-finite parameter value");
    }
}

inline void validate_layer_shapes(std::span<const LayerShape> shapes) {
    if (shapes.empty())
        throw std::invalid_argument("model: at least one layer required");
    for (const auto& s : shapes) {
        if (s.in_dim == 0 || s.out_dim == 0)
            throw std::invalid_argument("model: zero layer dimension");
    }
    for (std::size_t l = 1; l < shapes.size(); ++l) {
        if (shapes[l].in_dim != shapes[l - 1].out_dim)
            throw std::invalid_argument("model: layer " + std::to_string(l) +
                                        " input does not match previous output");
    }
}

// Weights uniform in [-1/sqrt(in_dim), +1/sqrt(in_dim)], biases zero.
inline ModelParams init_model(std::vector<LayerShape> layer_shapes, std::uint64_t seed) {
    validate_layer_shapes(layer_shapes);
    ModelParams m;
    m.layer_shapes = std::move(layer_shapes);
    m.values.resize(param_count(m.layer_shapes));

    RngStream rng(derive_seed(seed));
    std::size_t off = 0;
    for (const auto& s : m.layer_shapes) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(s.in_dim));
        for (std::size_t i = 0; i < s.in_dim * s.out_dim; ++i)
            m.values[off + i] = rng.uniform(-scale, scale);
        off += s.in_dim * s.out_dim + s.out_dim;  // biases stay zero
    }
    return m;
}

namespace detail {

// Pre-softmax output of the final layer plus, when requested, the hidden
// activations needed for backpropagation.
inline std::vector<double> forward_logits(const ModelParams& m,
                                          std::span<const double> x,
                                          std::vector<std::vector<double>>* hidden_out = nullptr) {
    if (x.size() != m.input_dim())
        throw std::invalid_argument("forward: feature dimension mismatch");

    std::vector<double> act(x.begin(), x.end());
    const std::size_t layers = m.layer_shapes.size();
    if (hidden_out) hidden_out->clear();

    std::size_t off = 0;
    for (std::size_t l = 0; l < layers; ++l) {
        const auto& s = m.layer_shapes[l];
        const double* w = m.values.data() + off;
        const double* b = w + s.in_dim * s.out_dim;
        std::vector<double> z(b, b + s.out_dim);
        for (std::size_t i = 0; i < s.in_dim; ++i) {
            const double a = act[i];
            const double* wrow = w + i * s.out_dim;
            for (std::size_t j = 0; j < s.out_dim; ++j) z[j] += a * wrow[j];
        }
        if (l + 1 < layers) {
            for (double& v : z) v = std::tanh(v);
            if (hidden_out) hidden_out->push_back(z);
        }
        act = std::move(z);
        off += s.in_dim * s.out_dim + s.out_dim;
    }
    return act;
}

inline double log_sum_exp(std::span<const double> z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    return m + std::log(s);
}

inline std::size_t argmax_lowest(std::span<const double> z) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < z.size(); ++i)
        if (z[i] > z[best]) best = i;
    return best;
}

}  // namespace detail

// Class-probability vector; entries are non-negative and sum to 1.
inline std::vector<double> forward(const ModelParams& m, std::span<const double> x) {
    std::vector<double> z = detail::forward_logits(m, x);
    const double lse = detail::log_sum_exp(z);
    for (double& v : z) v = std::exp(v - lse);
    return z;
}

// Mean cross-entropy over the batch and its exact analytic gradient.
inline std::pair<double, Gradient> loss_and_grad(const ModelParams& m,
                                                 const LabeledDataset& ds,
                                                 std::span<const std::size_t> batch) {
    if (batch.empty())
        throw std::invalid_argument("loss_and_grad: empty batch");
    if (ds.feature_dim != m.input_dim())
        throw std::invalid_argument("loss_and_grad: feature dimension mismatch");
    if (ds.num_classes > m.output_dim())
        throw std::invalid_argument("loss_and_grad: more classes than model outputs");

    Gradient g;
    g.layer_shapes = m.layer_shapes;
    g.values.assign(m.values.size(), 0.0);

    const std::size_t layers = m.layer_shapes.size();
    double loss = 0.0;
    std::vector<std::vector<double>> hidden;
    std::vector<double> delta, prev_delta;

    for (std::size_t idx : batch) {
        const auto x = ds.feature(idx);
        const std::uint32_t y = ds.labels[idx];
        std::vector<double> z = detail::forward_logits(m, x, &hidden);

        const double lse = detail::log_sum_exp(z);
        loss += lse - z[y];

        // delta for the softmax layer: p - onehot(y)
        delta.resize(z.size());
        for (std::size_t j = 0; j < z.size(); ++j)
            delta[j] = std::exp(z[j] - lse) - (j == y ? 1.0 : 0.0);

        for (std::size_t l = layers; l-- > 0;) {
            const auto& s = m.layer_shapes[l];
            const std::size_t off = m.layer_offset(l);
            const std::span<const double> input =
                l == 0 ? x : std::span<const double>(hidden[l - 1]);

            double* gw = g.values.data() + off;
            double* gb = gw + s.in_dim * s.out_dim;
            for (std::size_t i = 0; i < s.in_dim; ++i) {
                const double a = input[i];
                double* grow = gw + i * s.out_dim;
                for (std::size_t j = 0; j < s.out_dim; ++j) grow[j] += a * delta[j];
            }
            for (std::size_t j = 0; j < s.out_dim; ++j) gb[j] += delta[j];

            if (l == 0) break;
            // delta through the weights, then through tanh: (1 - a^2)
            const double* w = m.values.data() + off;
            prev_delta.assign(s.in_dim, 0.0);
            for (std::size_t i = 0; i < s.in_dim; ++i) {
                const double* wrow = w + i * s.out_dim;
                double acc = 0.0;
                for (std::size_t j = 0; j < s.out_dim; ++j) acc += wrow[j] * delta[j];
                const double a = input[i];
                prev_delta[i] = acc * (1.0 - a * a);
            }
            delta = prev_delta;
        }
    }

    const double inv = 1.0 / static_cast<double>(batch.size());
    loss *= inv;
    for (double& v : g.values) v *= inv;
    return {loss, std::move(g)};
}

inline std::pair<double, Gradient> loss_and_grad(const ModelParams& m,
                                                 const LabeledDataset& ds) {
    std::vector<std::size_t> all(ds.size());
    std::iota(all.begin(), all.end(), 0);
    return loss_and_grad(m, ds, all);
}

// Mini-batch SGD. Each epoch shuffles with the given stream; the final
// partial batch is used. Returns an updated copy, the input is untouched.
inline ModelParams train(const ModelParams& model,
                         const LabeledDataset& ds,
                         const TrainSpec& spec,
                         RngStream& rng) {
    if (ds.empty())
        throw std::invalid_argument("train: empty dataset");
    if (spec.epochs == 0 || spec.batch_size == 0)
        throw std::invalid_argument("train: epochs and batch_size must be positive");

    ModelParams out = model;
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t e = 0; e < spec.epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng.engine());
        for (std::size_t start = 0; start < order.size(); start += spec.batch_size) {
            const std::size_t len = std::min(spec.batch_size, order.size() - start);
            const std::span<const std::size_t> batch(order.data() + start, len);
            auto [loss, g] = loss_and_grad(out, ds, batch);
            (void)loss;
            for (std::size_t i = 0; i < out.values.size(); ++i)
                out.values[i] -= spec.learning_rate * g.values[i];
        }
    }
    check_finite(out.values, "train");
    return out;
}

struct EvalResult {
    double accuracy = 0.0;
    double mean_loss = 0.0;
};

// Accuracy by argmax (ties resolved to the lowest class index) plus mean
// cross-entropy loss.
inline EvalResult evaluate(const ModelParams& m, const LabeledDataset& ds) {
    if (ds.empty())
        throw std::invalid_argument("evaluate: empty dataset");
    std::size_t correct = 0;
    double loss = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const std::vector<double> z = detail::forward_logits(m, ds.feature(i));
        if (detail::argmax_lowest(z) == ds.labels[i]) ++correct;
        loss += detail::log_sum_exp(z) - z[ds.labels[i]];
    }
    return {static_cast<double>(correct) / static_cast<double>(ds.size()),
            loss / static_cast<double>(ds.size())};
}

}  // namespace genfl

#include "vsa/model/layers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vsa/core/error.hpp"
#include "vsa/model/kernels.hpp"

namespace vsa::model {

std::string to_string(const Shape& shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "x" : "") << shape[i];
    out << ']';
    return out.str();
}

Tensor::Tensor(Shape s, std::vector<double> values) : shape(std::move(s)), data(std::move(values)) {
    if (data.size() != element_count(shape)) {
        throw Error(ErrorKind::shape_mismatch, "tensor data does not match shape " + to_string(shape));
    }
}

Tensor Tensor::gather(std::span<const std::size_t> rows) const {
    Shape out_shape = shape;
    out_shape[0] = rows.size();
    Tensor out(out_shape);
    const auto stride = per_sample();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= batch()) throw Error(ErrorKind::out_of_range, "gather index out of range");
        std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(rows[i] * stride), stride,
                    out.data.begin() + static_cast<std::ptrdiff_t>(i * stride));
    }
    return out;
}

std::string_view to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::conv2d: return "conv2d";
        case LayerKind::relu: return "relu";
        case LayerKind::maxpool2d: return "maxpool2d";
        case LayerKind::global_avgpool: return "global_avgpool";
        case LayerKind::flatten: return "flatten";
        case LayerKind::dense: return "dense";
    }
    return "";
}

LayerKind parse_layer_kind(std::string_view text) {
    for (auto kind : {LayerKind::conv2d, LayerKind::relu, LayerKind::maxpool2d, LayerKind::global_avgpool,
                      LayerKind::flatten, LayerKind::dense}) {
        if (to_string(kind) == text) return kind;
    }
    throw Error(ErrorKind::unsupported, "unknown layer type '" + std::string(text) + "'");
}

LayerConfig LayerConfig::conv(std::size_t in_c, std::size_t out_c, std::size_t k, std::size_t stride,
                              std::size_t pad) {
    LayerConfig c;
    c.kind = LayerKind::conv2d;
    c.in_channels = in_c;
    c.out_channels = out_c;
    c.kernel = k;
    c.stride = stride;
    c.pad = pad;
    return c;
}

LayerConfig LayerConfig::dense(std::size_t in, std::size_t out) {
    LayerConfig c;
    c.kind = LayerKind::dense;
    c.in_features = in;
    c.out_features = out;
    return c;
}

LayerConfig LayerConfig::maxpool(std::size_t k, std::size_t stride) {
    LayerConfig c;
    c.kind = LayerKind::maxpool2d;
    c.kernel = k;
    c.stride = stride;
    return c;
}

LayerConfig LayerConfig::relu() { return LayerConfig{}; }

LayerConfig LayerConfig::global_avgpool() {
    LayerConfig c;
    c.kind = LayerKind::global_avgpool;
    return c;
}

LayerConfig LayerConfig::flatten() {
    LayerConfig c;
    c.kind = LayerKind::flatten;
    return c;
}

std::size_t LayerConfig::parameter_count() const {
    switch (kind) {
        case LayerKind::conv2d: return out_channels * in_channels * kernel * kernel + out_channels;
        case LayerKind::dense: return out_features * in_features + out_features;
        default: return 0;
    }
}

Layer::Layer(LayerConfig config) : config_(config), params_(config.parameter_count(), 0.0) {
    const bool bad_conv = config_.kind == LayerKind::conv2d &&
                          (config_.in_channels == 0 || config_.out_channels == 0 || config_.kernel == 0 ||
                           config_.stride == 0);
    const bool bad_pool = config_.kind == LayerKind::maxpool2d && (config_.kernel == 0 || config_.stride == 0);
    const bool bad_dense =
        config_.kind == LayerKind::dense && (config_.in_features == 0 || config_.out_features == 0);
    if (bad_conv || bad_pool || bad_dense) {
        throw Error(ErrorKind::invalid_argument, "invalid " + std::string(to_string(config_.kind)) + " layer");
    }
}

std::span<const double> Layer::weights() const {
    const auto bias_count = config_.kind == LayerKind::conv2d ? config_.out_channels : config_.out_features;
    return std::span<const double>(params_).first(params_.size() - bias_count);
}

std::span<const double> Layer::biases() const {
    const auto bias_count = config_.kind == LayerKind::conv2d ? config_.out_channels : config_.out_features;
    return std::span<const double>(params_).last(bias_count);
}

namespace {

[[noreturn]] void bad_input(const LayerConfig& c, const Shape& input) {
    throw Error(ErrorKind::shape_mismatch,
                std::string(to_string(c.kind)) + " layer cannot take input " + to_string(input));
}

ConvGeometry conv_geometry(const LayerConfig& c, const Shape& s) {
    return {s[0], s[1], s[2], s[3], c.out_channels, c.kernel, c.stride, c.pad};
}

PoolGeometry pool_geometry(const LayerConfig& c, const Shape& s) {
    return {s[0], s[1], s[2], s[3], c.kernel, c.stride};
}

}  // namespace

Shape Layer::output_shape(const Shape& in) const {
    const auto& c = config_;
    switch (c.kind) {
        case LayerKind::conv2d: {
            if (in.size() != 4 || in[1] != c.in_channels || in[2] + 2 * c.pad < c.kernel ||
                in[3] + 2 * c.pad < c.kernel) {
                bad_input(c, in);
            }
            const auto g = conv_geometry(c, in);
            return {in[0], c.out_channels, g.out_height(), g.out_width()};
        }
        case LayerKind::maxpool2d: {
            if (in.size() != 4 || in[2] < c.kernel || in[3] < c.kernel) bad_input(c, in);
            const auto g = pool_geometry(c, in);
            return {in[0], in[1], g.out_height(), g.out_width()};
        }
        case LayerKind::global_avgpool:
            if (in.size() != 4 || in[2] * in[3] == 0) bad_input(c, in);
            return {in[0], in[1]};
        case LayerKind::flatten:
            if (in.empty()) bad_input(c, in);
            return {in[0], element_count(Shape(in.begin() + 1, in.end()))};
        case LayerKind::dense:
            if (in.size() != 2 || in[1] != c.in_features) bad_input(c, in);
            return {in[0], c.out_features};
        case LayerKind::relu:
            return in;
    }
    return in;
}

void Layer::forward(const Tensor& in, Tensor& out) const {
    const auto out_shape = output_shape(in.shape);
    if (out.shape != out_shape) out = Tensor(out_shape);
    const auto& c = config_;
    switch (c.kind) {
        case LayerKind::conv2d:
            kernels::conv2d_forward(conv_geometry(c, in.shape), in.data, weights(), biases(), out.data);
            break;
        case LayerKind::maxpool2d:
            kernels::maxpool_forward(pool_geometry(c, in.shape), in.data, out.data);
            break;
        case LayerKind::global_avgpool:
            kernels::global_avgpool_forward(in.shape[0], in.shape[1], in.shape[2] * in.shape[3], in.data,
                                            out.data);
            break;
        case LayerKind::flatten:
            out.data = in.data;
            break;
        case LayerKind::dense:
            kernels::dense_forward({in.shape[0], c.in_features, c.out_features}, in.data, weights(), biases(),
                                   out.data);
            break;
        case LayerKind::relu:
            kernels::relu_forward(in.data, out.data);
            break;
    }
}

void Layer::backward(const Tensor& in, const Tensor& grad_out, Tensor* grad_in,
                     std::span<double> grad_params) const {
    const auto& c = config_;
    if (grad_out.shape != output_shape(in.shape)) {
        throw Error(ErrorKind::shape_mismatch, "gradient shape " + to_string(grad_out.shape) +
                                                   " does not match layer output");
    }
    if (grad_params.size() != params_.size()) {
        throw Error(ErrorKind::shape_mismatch, "parameter gradient buffer has the wrong size");
    }
    if (grad_in && grad_in->shape != in.shape) *grad_in = Tensor(in.shape);
    std::span<double> gin = grad_in ? std::span<double>(grad_in->data) : std::span<double>{};

    const auto bias_count = c.kind == LayerKind::conv2d ? c.out_channels : c.out_features;
    switch (c.kind) {
        case LayerKind::conv2d:
            kernels::conv2d_backward(conv_geometry(c, in.shape), in.data, weights(), grad_out.data, gin,
                                     grad_params.first(grad_params.size() - bias_count),
                                     grad_params.last(bias_count));
            break;
        case LayerKind::dense:
            kernels::dense_backward({in.shape[0], c.in_features, c.out_features}, in.data, weights(),
                                    grad_out.data, gin, grad_params.first(grad_params.size() - bias_count),
                                    grad_params.last(bias_count));
            break;
        case LayerKind::maxpool2d:
            if (grad_in) kernels::maxpool_backward(pool_geometry(c, in.shape), in.data, grad_out.data, gin);
            break;
        case LayerKind::global_avgpool:
            if (grad_in) {
                kernels::global_avgpool_backward(in.shape[0], in.shape[1], in.shape[2] * in.shape[3],
                                                 grad_out.data, gin);
            }
            break;
        case LayerKind::flatten:
            if (grad_in) grad_in->data = grad_out.data;
            break;
        case LayerKind::relu:
            if (grad_in) kernels::relu_backward(in.data, grad_out.data, gin);
            break;
    }
}

void Layer::initialize(Rng& rng) {
    if (params_.empty()) return;
    const auto fan_in = config_.kind == LayerKind::conv2d
                            ? config_.in_channels * config_.kernel * config_.kernel
                            : config_.in_features;
    const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    const auto bias_count = config_.kind == LayerKind::conv2d ? config_.out_channels : config_.out_features;
    for (std::size_t i = 0; i < params_.size() - bias_count; ++i) params_[i] = scale * rng.normal();
    std::fill(params_.end() - static_cast<std::ptrdiff_t>(bias_count), params_.end(), 0.0);
}

Shape propagate_shape(std::span<const Layer> layers, Shape input) {
    for (const auto& layer : layers) input = layer.output_shape(input);
    return input;
}

}  // namespace vsa::model

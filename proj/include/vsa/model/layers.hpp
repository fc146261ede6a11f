#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vsa/core/rng.hpp"
#include "vsa/model/tensor.hpp"

namespace vsa::model {

enum class LayerKind { conv2d, relu, maxpool2d, global_avgpool, flatten, dense };

std::string_view to_string(LayerKind kind);
LayerKind parse_layer_kind(std::string_view text);

/// Topology of one layer; the serialized form of a network.
struct LayerConfig {
    LayerKind kind = LayerKind::relu;
    std::size_t in_channels = 0;   // conv2d
    std::size_t out_channels = 0;  // conv2d
    std::size_t kernel = 0;        // conv2d, maxpool2d
    std::size_t stride = 1;        // conv2d, maxpool2d
    std::size_t pad = 0;           // conv2d
    std::size_t in_features = 0;   // dense
    std::size_t out_features = 0;  // dense

    static LayerConfig conv(std::size_t in_c, std::size_t out_c, std::size_t k, std::size_t stride = 1,
                            std::size_t pad = 0);
    static LayerConfig dense(std::size_t in, std::size_t out);
    static LayerConfig maxpool(std::size_t k, std::size_t stride);
    static LayerConfig relu();
    static LayerConfig global_avgpool();
    static LayerConfig flatten();

    /// Number of trainable values (weights then biases).
    std::size_t parameter_count() const;

    friend bool operator==(const LayerConfig&, const LayerConfig&) = default;
};

/// A stateless transform plus its parameters. Forward and backward are const,
/// so a trained network can serve several threads at once; activations are
/// kept by the caller.
class Layer {
public:
    explicit Layer(LayerConfig config);

    const LayerConfig& config() const noexcept { return config_; }

    /// Output shape for an input shape (batch first). Throws
    /// Error(shape_mismatch) when the input does not fit the layer.
    Shape output_shape(const Shape& input) const;

    void forward(const Tensor& in, Tensor& out) const;

    /// Writes parameter gradients into `grad_params` (same size as params())
    /// and, if `grad_in` is non-null, the input gradient.
    void backward(const Tensor& in, const Tensor& grad_out, Tensor* grad_in,
                  std::span<double> grad_params) const;

    std::span<double> params() noexcept { return params_; }
    std::span<const double> params() const noexcept { return params_; }

    /// He-normal weights, zero biases.
    void initialize(Rng& rng);

private:
    std::span<const double> weights() const;
    std::span<const double> biases() const;

    LayerConfig config_;
    std::vector<double> params_;
};

/// Shape after running `input` through every layer in turn.
Shape propagate_shape(std::span<const Layer> layers, Shape input);

}  // namespace vsa::model

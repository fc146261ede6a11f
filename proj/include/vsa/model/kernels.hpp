#pragma once

// Numeric kernels behind the model layers.
//
// `vsa::model::kernels` holds the OpenMP implementations used in training and
// inference; `vsa::model::reference` holds straightforward serial versions
// with identical signatures, kept for equivalence tests and the benchmark.
//
// Every parallel kernel assigns each output element to exactly one thread and
// sums in a fixed order, so results do not depend on the thread count.
// Gradient outputs are overwritten, not accumulated.

#include <cstddef>
#include <span>
#include <vector>

namespace vsa::model {

struct DenseGeometry {
    std::size_t batch = 0;
    std::size_t in_features = 0;
    std::size_t out_features = 0;
};

struct ConvGeometry {
    std::size_t batch = 0;
    std::size_t in_channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t out_channels = 0;
    std::size_t kernel = 1;
    std::size_t stride = 1;
    std::size_t pad = 0;

    std::size_t out_height() const { return (height + 2 * pad - kernel) / stride + 1; }
    std::size_t out_width() const { return (width + 2 * pad - kernel) / stride + 1; }
};

struct PoolGeometry {
    std::size_t batch = 0;
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t kernel = 2;
    std::size_t stride = 2;

    std::size_t out_height() const { return (height - kernel) / stride + 1; }
    std::size_t out_width() const { return (width - kernel) / stride + 1; }
};

#define VSA_KERNEL_DECLARATIONS                                                                        \
    /* out[n,o] = bias[o] + sum_i in[n,i] * weight[o,i] */                                           \
    void dense_forward(const DenseGeometry& g, std::span<const double> in, std::span<const double> weight, \
                       std::span<const double> bias, std::span<double> out);                          \
    /* grad_in may be empty to skip the input gradient */                                            \
    void dense_backward(const DenseGeometry& g, std::span<const double> in,                           \
                        std::span<const double> weight, std::span<const double> grad_out,            \
                        std::span<double> grad_in, std::span<double> grad_weight,                    \
                        std::span<double> grad_bias);                                                \
    /* weight is [out_c, in_c, k, k]; zero padding */                                                 \
    void conv2d_forward(const ConvGeometry& g, std::span<const double> in, std::span<const double> weight, \
                        std::span<const double> bias, std::span<double> out);                        \
    void conv2d_backward(const ConvGeometry& g, std::span<const double> in,                           \
                         std::span<const double> weight, std::span<const double> grad_out,           \
                         std::span<double> grad_in, std::span<double> grad_weight,                   \
                         std::span<double> grad_bias);                                               \
    void maxpool_forward(const PoolGeometry& g, std::span<const double> in, std::span<double> out);    \
    /* the gradient goes to the first maximum of each window */                                      \
    void maxpool_backward(const PoolGeometry& g, std::span<const double> in,                          \
                          std::span<const double> grad_out, std::span<double> grad_in);              \
    void relu_forward(std::span<const double> in, std::span<double> out);                            \
    void relu_backward(std::span<const double> in, std::span<const double> grad_out,                  \
                       std::span<double> grad_in);                                                   \
    /* [n, c, h, w] -> [n, c] */                                                                      \
    void global_avgpool_forward(std::size_t batch, std::size_t channels, std::size_t plane,           \
                                std::span<const double> in, std::span<double> out);                  \
    void global_avgpool_backward(std::size_t batch, std::size_t channels, std::size_t plane,          \
                                 std::span<const double> grad_out, std::span<double> grad_in);       \
    /* row-wise numerically stable softmax over [rows, cols] */                                      \
    void softmax_rows(std::size_t rows, std::size_t cols, std::span<const double> in,                 \
                      std::span<double> out);                                                        \
    void sigmoid(std::span<const double> in, std::span<double> out);

namespace kernels {
VSA_KERNEL_DECLARATIONS
}  // namespace kernels

namespace reference {
VSA_KERNEL_DECLARATIONS
}  // namespace reference

#undef VSA_KERNEL_DECLARATIONS

}  // namespace vsa::model

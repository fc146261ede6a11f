// Serial textbook kernels. Slow on purpose: every formula is written out
// directly so the parallel versions have something simple to be checked
// against.

#include <algorithm>
#include <cmath>

#include "vsa/model/kernels.hpp"

namespace vsa::model::reference {

void dense_forward(const DenseGeometry& g, std::span<const double> in, std::span<const double> weight,
                   std::span<const double> bias, std::span<double> out) {
    for (std::size_t n = 0; n < g.batch; ++n) {
        for (std::size_t o = 0; o < g.out_features; ++o) {
            double acc = bias[o];
            for (std::size_t i = 0; i < g.in_features; ++i) {
                acc += in[n * g.in_features + i] * weight[o * g.in_features + i];
            }
            out[n * g.out_features + o] = acc;
        }
    }
}

void dense_backward(const DenseGeometry& g, std::span<const double> in, std::span<const double> weight,
                    std::span<const double> grad_out, std::span<double> grad_in,
                    std::span<double> grad_weight, std::span<double> grad_bias) {
    std::fill(grad_weight.begin(), grad_weight.end(), 0.0);
    std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
    if (!grad_in.empty()) std::fill(grad_in.begin(), grad_in.end(), 0.0);
    for (std::size_t n = 0; n < g.batch; ++n) {
        for (std::size_t o = 0; o < g.out_features; ++o) {
            const double go = grad_out[n * g.out_features + o];
            grad_bias[o] += go;
            for (std::size_t i = 0; i < g.in_features; ++i) {
                grad_weight[o * g.in_features + i] += go * in[n * g.in_features + i];
                if (!grad_in.empty()) grad_in[n * g.in_features + i] += go * weight[o * g.in_features + i];
            }
        }
    }
}

namespace {

// Input value at (n, c, y, x) with zero padding; y/x may be out of range.
double padded(const ConvGeometry& g, std::span<const double> in, std::size_t n, std::size_t c, long y, long x) {
    if (y < 0 || x < 0 || y >= static_cast<long>(g.height) || x >= static_cast<long>(g.width)) return 0.0;
    return in[((n * g.in_channels + c) * g.height + static_cast<std::size_t>(y)) * g.width +
              static_cast<std::size_t>(x)];
}

}  // namespace

void conv2d_forward(const ConvGeometry& g, std::span<const double> in, std::span<const double> weight,
                    std::span<const double> bias, std::span<double> out) {
    const auto oh = g.out_height(), ow = g.out_width(), k = g.kernel;
    for (std::size_t n = 0; n < g.batch; ++n) {
        for (std::size_t oc = 0; oc < g.out_channels; ++oc) {
            for (std::size_t oy = 0; oy < oh; ++oy) {
                for (std::size_t ox = 0; ox < ow; ++ox) {
                    double acc = bias[oc];
                    for (std::size_t ic = 0; ic < g.in_channels; ++ic) {
                        for (std::size_t ky = 0; ky < k; ++ky) {
                            for (std::size_t kx = 0; kx < k; ++kx) {
                                const long y = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.pad);
                                const long x = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.pad);
                                acc += weight[((oc * g.in_channels + ic) * k + ky) * k + kx] *
                                       padded(g, in, n, ic, y, x);
                            }
                        }
                    }
                    out[((n * g.out_channels + oc) * oh + oy) * ow + ox] = acc;
                }
            }
        }
    }
}

void conv2d_backward(const ConvGeometry& g, std::span<const double> in, std::span<const double> weight,
                     std::span<const double> grad_out, std::span<double> grad_in,
                     std::span<double> grad_weight, std::span<double> grad_bias) {
    const auto oh = g.out_height(), ow = g.out_width(), k = g.kernel;
    std::fill(grad_weight.begin(), grad_weight.end(), 0.0);
    std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
    if (!grad_in.empty()) std::fill(grad_in.begin(), grad_in.end(), 0.0);
    for (std::size_t n = 0; n < g.batch; ++n) {
        for (std::size_t oc = 0; oc < g.out_channels; ++oc) {
            for (std::size_t oy = 0; oy < oh; ++oy) {
                for (std::size_t ox = 0; ox < ow; ++ox) {
                    const double go = grad_out[((n * g.out_channels + oc) * oh + oy) * ow + ox];
                    grad_bias[oc] += go;
                    for (std::size_t ic = 0; ic < g.in_channels; ++ic) {
                        for (std::size_t ky = 0; ky < k; ++ky) {
                            for (std::size_t kx = 0; kx < k; ++kx) {
                                const long y = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.pad);
                                const long x = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.pad);
                                const auto w = ((oc * g.in_channels + ic) * k + ky) * k + kx;
                                grad_weight[w] += go * padded(g, in, n, ic, y, x);
                                if (grad_in.empty() || y < 0 || x < 0 || y >= static_cast<long>(g.height) ||
                                    x >= static_cast<long>(g.width)) {
                                    continue;
                                }
                                grad_in[((n * g.in_channels + ic) * g.height + static_cast<std::size_t>(y)) *
                                            g.width +
                                        static_cast<std::size_t>(x)] += go * weight[w];
                            }
                        }
                    }
                }
            }
        }
    }
}

void maxpool_forward(const PoolGeometry& g, std::span<const double> in, std::span<double> out) {
    const auto oh = g.out_height(), ow = g.out_width();
    for (std::size_t p = 0; p < g.batch * g.channels; ++p) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double best = -INFINITY;
                for (std::size_t ky = 0; ky < g.kernel; ++ky) {
                    for (std::size_t kx = 0; kx < g.kernel; ++kx) {
                        best = std::max(best, in[(p * g.height + oy * g.stride + ky) * g.width + ox * g.stride + kx]);
                    }
                }
                out[(p * oh + oy) * ow + ox] = best;
            }
        }
    }
}

void maxpool_backward(const PoolGeometry& g, std::span<const double> in, std::span<const double> grad_out,
                      std::span<double> grad_in) {
    const auto oh = g.out_height(), ow = g.out_width();
    std::fill(grad_in.begin(), grad_in.end(), 0.0);
    for (std::size_t p = 0; p < g.batch * g.channels; ++p) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                std::size_t arg = 0;
                double best = -INFINITY;
                for (std::size_t ky = 0; ky < g.kernel; ++ky) {
                    for (std::size_t kx = 0; kx < g.kernel; ++kx) {
                        const auto idx = (p * g.height + oy * g.stride + ky) * g.width + ox * g.stride + kx;
                        if (in[idx] > best) {
                            best = in[idx];
                            arg = idx;
                        }
                    }
                }
                grad_in[arg] += grad_out[(p * oh + oy) * ow + ox];
            }
        }
    }
}

void relu_forward(std::span<const double> in, std::span<double> out) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] < 0.0 ? 0.0 : in[i];  // NaN passes through
}

void relu_backward(std::span<const double> in, std::span<const double> grad_out, std::span<double> grad_in) {
    for (std::size_t i = 0; i < in.size(); ++i) grad_in[i] = in[i] > 0.0 ? grad_out[i] : 0.0;
}

void global_avgpool_forward(std::size_t batch, std::size_t channels, std::size_t plane,
                            std::span<const double> in, std::span<double> out) {
    for (std::size_t p = 0; p < batch * channels; ++p) {
        double acc = 0.0;
        for (std::size_t i = 0; i < plane; ++i) acc += in[p * plane + i];
        out[p] = acc / static_cast<double>(plane);
    }
}

void global_avgpool_backward(std::size_t batch, std::size_t channels, std::size_t plane,
                             std::span<const double> grad_out, std::span<double> grad_in) {
    for (std::size_t p = 0; p < batch * channels; ++p) {
        for (std::size_t i = 0; i < plane; ++i) grad_in[p * plane + i] = grad_out[p] / static_cast<double>(plane);
    }
}

void softmax_rows(std::size_t rows, std::size_t cols, std::span<const double> in, std::span<double> out) {
    for (std::size_t r = 0; r < rows; ++r) {
        double max = -INFINITY;
        for (std::size_t c = 0; c < cols; ++c) max = std::max(max, in[r * cols + c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) sum += std::exp(in[r * cols + c] - max);
        for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = std::exp(in[r * cols + c] - max) / sum;
    }
}

void sigmoid(std::span<const double> in, std::span<double> out) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-in[i]));
}

}  // namespace vsa::model::reference

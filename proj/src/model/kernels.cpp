#include <algorithm>
#include <cmath>
#include <vector>

#include "vsa/model/kernels.hpp"

namespace vsa::model::kernels {

void dense_forward(const DenseGeometry& g, std::span<const double> in, std::span<const double> weight,
                   std::span<const double> bias, std::span<double> out) {
    const auto N = g.batch, I = g.in_features, O = g.out_features;
#pragma omp parallel for collapse(2) schedule(static)
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t o = 0; o < O; ++o) {
            const double* x = in.data() + n * I;
            const double* w = weight.data() + o * I;
            double acc = 0.0;
#pragma omp simd reduction(+ : acc)
            for (std::size_t i = 0; i < I; ++i) acc += x[i] * w[i];
            out[n * O + o] = bias[o] + acc;
        }
    }
}

void dense_backward(const DenseGeometry& g, std::span<const double> in, std::span<const double> weight,
                    std::span<const double> grad_out, std::span<double> grad_in,
                    std::span<double> grad_weight, std::span<double> grad_bias) {
    const auto N = g.batch, I = g.in_features, O = g.out_features;
#pragma omp parallel
    {
#pragma omp for schedule(static) nowait
        for (std::size_t o = 0; o < O; ++o) {
            double* gw = grad_weight.data() + o * I;
            std::fill(gw, gw + I, 0.0);
            double gb = 0.0;
            for (std::size_t n = 0; n < N; ++n) {
                const double go = grad_out[n * O + o];
                gb += go;
                const double* x = in.data() + n * I;
#pragma omp simd
                for (std::size_t i = 0; i < I; ++i) gw[i] += go * x[i];
            }
            grad_bias[o] = gb;
        }
        if (!grad_in.empty()) {
#pragma omp for schedule(static)
            for (std::size_t n = 0; n < N; ++n) {
                double* gi = grad_in.data() + n * I;
                std::fill(gi, gi + I, 0.0);
                for (std::size_t o = 0; o < O; ++o) {
                    const double go = grad_out[n * O + o];
                    const double* w = weight.data() + o * I;
#pragma omp simd
                    for (std::size_t i = 0; i < I; ++i) gi[i] += go * w[i];
                }
            }
        }
    }
}

namespace {

// Unfolds one image into columns: row r = (ic, ky, kx), column p = (oy, ox).
void im2col(const ConvGeometry& g, const double* image, std::vector<double>& col) {
    const auto oh = g.out_height(), ow = g.out_width(), k = g.kernel;
    const auto rows = g.in_channels * k * k;
    const auto cols = oh * ow;
    col.resize(rows * cols);
#pragma omp parallel for schedule(static)
    for (std::size_t r = 0; r < rows; ++r) {
        const auto ic = r / (k * k);
        const auto ky = (r / k) % k;
        const auto kx = r % k;
        double* dst = col.data() + r * cols;
        const double* plane = image + ic * g.height * g.width;
        for (std::size_t oy = 0; oy < oh; ++oy) {
            const long y = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.pad);
            for (std::size_t ox = 0; ox < ow; ++ox) {
                const long x = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.pad);
                const bool inside = y >= 0 && x >= 0 && y < static_cast<long>(g.height) &&
                                    x < static_cast<long>(g.width);
                dst[oy * ow + ox] = inside ? plane[static_cast<std::size_t>(y) * g.width +
                                                   static_cast<std::size_t>(x)]
                                           : 0.0;
            }
        }
    }
}

// Folds column gradients back onto one image gradient (overwrites it).
void col2im(const ConvGeometry& g, const std::vector<double>& col, double* image_grad) {
    const auto oh = g.out_height(), ow = g.out_width(), k = g.kernel;
    const auto cols = oh * ow;
#pragma omp parallel for schedule(static)
    for (std::size_t ic = 0; ic < g.in_channels; ++ic) {
        double* plane = image_grad + ic * g.height * g.width;
        std::fill(plane, plane + g.height * g.width, 0.0);
        for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
                const double* src = col.data() + ((ic * k + ky) * k + kx) * cols;
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    const long y = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.pad);
                    if (y < 0 || y >= static_cast<long>(g.height)) continue;
                    for (std::size_t ox = 0; ox < ow; ++ox) {
                        const long x = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.pad);
                        if (x < 0 || x >= static_cast<long>(g.width)) continue;
                        plane[static_cast<std::size_t>(y) * g.width + static_cast<std::size_t>(x)] +=
                            src[oy * ow + ox];
                    }
                }
            }
        }
    }
}

}  // namespace

void conv2d_forward(const ConvGeometry& g, std::span<const double> in, std::span<const double> weight,
                    std::span<const double> bias, std::span<double> out) {
    const auto rows = g.in_channels * g.kernel * g.kernel;
    const auto cols = g.out_height() * g.out_width();
    const auto in_stride = g.in_channels * g.height * g.width;
    std::vector<double> col;
    for (std::size_t n = 0; n < g.batch; ++n) {
        im2col(g, in.data() + n * in_stride, col);
        double* dst = out.data() + n * g.out_channels * cols;
#pragma omp parallel for schedule(static)
        for (std::size_t oc = 0; oc < g.out_channels; ++oc) {
            double* o = dst + oc * cols;
            std::fill(o, o + cols, bias[oc]);
            const double* w = weight.data() + oc * rows;
            for (std::size_t r = 0; r < rows; ++r) {
                const double wr = w[r];
                const double* c = col.data() + r * cols;
#pragma omp simd
                for (std::size_t p = 0; p < cols; ++p) o[p] += wr * c[p];
            }
        }
    }
}

void conv2d_backward(const ConvGeometry& g, std::span<const double> in, std::span<const double> weight,
                     std::span<const double> grad_out, std::span<double> grad_in,
                     std::span<double> grad_weight, std::span<double> grad_bias) {
    const auto rows = g.in_channels * g.kernel * g.kernel;
    const auto cols = g.out_height() * g.out_width();
    const auto in_stride = g.in_channels * g.height * g.width;
    std::fill(grad_weight.begin(), grad_weight.end(), 0.0);
    std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
    std::vector<double> col;
    std::vector<double> grad_col;
    for (std::size_t n = 0; n < g.batch; ++n) {
        im2col(g, in.data() + n * in_stride, col);
        const double* go = grad_out.data() + n * g.out_channels * cols;
#pragma omp parallel for schedule(static)
        for (std::size_t oc = 0; oc < g.out_channels; ++oc) {
            const double* go_row = go + oc * cols;
            double* gw = grad_weight.data() + oc * rows;
            double gb = 0.0;
            for (std::size_t p = 0; p < cols; ++p) gb += go_row[p];
            grad_bias[oc] += gb;
            for (std::size_t r = 0; r < rows; ++r) {
                const double* c = col.data() + r * cols;
                double acc = 0.0;
#pragma omp simd reduction(+ : acc)
                for (std::size_t p = 0; p < cols; ++p) acc += go_row[p] * c[p];
                gw[r] += acc;
            }
        }
        if (grad_in.empty()) continue;
        grad_col.assign(rows * cols, 0.0);
#pragma omp parallel for schedule(static)
        for (std::size_t r = 0; r < rows; ++r) {
            double* gc = grad_col.data() + r * cols;
            for (std::size_t oc = 0; oc < g.out_channels; ++oc) {
                const double w = weight[oc * rows + r];
                const double* go_row = go + oc * cols;
#pragma omp simd
                for (std::size_t p = 0; p < cols; ++p) gc[p] += w * go_row[p];
            }
        }
        col2im(g, grad_col, grad_in.data() + n * in_stride);
    }
}

void maxpool_forward(const PoolGeometry& g, std::span<const double> in, std::span<double> out) {
    const auto oh = g.out_height(), ow = g.out_width();
    const auto planes = g.batch * g.channels;
#pragma omp parallel for schedule(static)
    for (std::size_t p = 0; p < planes; ++p) {
        const double* src = in.data() + p * g.height * g.width;
        double* dst = out.data() + p * oh * ow;
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double best = -INFINITY;
                for (std::size_t ky = 0; ky < g.kernel; ++ky) {
                    const double* line = src + (oy * g.stride + ky) * g.width + ox * g.stride;
                    for (std::size_t kx = 0; kx < g.kernel; ++kx) best = std::max(best, line[kx]);
                }
                dst[oy * ow + ox] = best;
            }
        }
    }
}

void maxpool_backward(const PoolGeometry& g, std::span<const double> in, std::span<const double> grad_out,
                      std::span<double> grad_in) {
    const auto oh = g.out_height(), ow = g.out_width();
    const auto planes = g.batch * g.channels;
    const auto plane = g.height * g.width;
#pragma omp parallel for schedule(static)
    for (std::size_t p = 0; p < planes; ++p) {
        const double* src = in.data() + p * plane;
        double* dst = grad_in.data() + p * plane;
        std::fill(dst, dst + plane, 0.0);
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                std::size_t arg = 0;
                double best = -INFINITY;
                for (std::size_t ky = 0; ky < g.kernel; ++ky) {
                    for (std::size_t kx = 0; kx < g.kernel; ++kx) {
                        const auto idx = (oy * g.stride + ky) * g.width + ox * g.stride + kx;
                        if (src[idx] > best) {
                            best = src[idx];
                            arg = idx;
                        }
                    }
                }
                dst[arg] += grad_out[(p * oh + oy) * ow + ox];
            }
        }
    }
}

void relu_forward(std::span<const double> in, std::span<double> out) {
    const auto n = in.size();
#pragma omp parallel for simd schedule(static)
    for (std::size_t i = 0; i < n; ++i) out[i] = in[i] < 0.0 ? 0.0 : in[i];  // NaN passes through
}

void relu_backward(std::span<const double> in, std::span<const double> grad_out, std::span<double> grad_in) {
    const auto n = in.size();
#pragma omp parallel for simd schedule(static)
    for (std::size_t i = 0; i < n; ++i) grad_in[i] = in[i] > 0.0 ? grad_out[i] : 0.0;
}

void global_avgpool_forward(std::size_t batch, std::size_t channels, std::size_t plane,
                            std::span<const double> in, std::span<double> out) {
    const auto planes = batch * channels;
    const double scale = 1.0 / static_cast<double>(plane);
#pragma omp parallel for schedule(static)
    for (std::size_t p = 0; p < planes; ++p) {
        const double* src = in.data() + p * plane;
        double acc = 0.0;
        for (std::size_t i = 0; i < plane; ++i) acc += src[i];
        out[p] = acc * scale;
    }
}

void global_avgpool_backward(std::size_t batch, std::size_t channels, std::size_t plane,
                             std::span<const double> grad_out, std::span<double> grad_in) {
    const auto planes = batch * channels;
    const double scale = 1.0 / static_cast<double>(plane);
#pragma omp parallel for schedule(static)
    for (std::size_t p = 0; p < planes; ++p) {
        double* dst = grad_in.data() + p * plane;
        const double v = grad_out[p] * scale;
        std::fill(dst, dst + plane, v);
    }
}

void softmax_rows(std::size_t rows, std::size_t cols, std::span<const double> in, std::span<double> out) {
#pragma omp parallel for schedule(static)
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = in.data() + r * cols;
        double* y = out.data() + r * cols;
        const double max = *std::max_element(x, x + cols);
        double sum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            y[c] = std::exp(x[c] - max);
            sum += y[c];
        }
        for (std::size_t c = 0; c < cols; ++c) y[c] /= sum;
    }
}

void sigmoid(std::span<const double> in, std::span<double> out) {
    const auto n = in.size();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
        // Branch keeps exp() from overflowing for large |x|.
        const double x = in[i];
        if (x >= 0.0) {
            out[i] = 1.0 / (1.0 + std::exp(-x));
        } else {
            const double e = std::exp(x);
            out[i] = e / (1.0 + e);
        }
    }
}

}  // namespace vsa::model::kernels

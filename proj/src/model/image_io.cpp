#include "vsa/model/image_io.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "vsa/core/error.hpp"

namespace vsa::model {
namespace {

void preprocess_mat(const cv::Mat& rgb, const Preprocessing& p, std::span<double> out) {
    if (p.channels != 3) throw Error(ErrorKind::unsupported, "only 3-channel preprocessing is supported");
    if (out.size() != p.channels * p.height * p.width) {
        throw Error(ErrorKind::shape_mismatch, "output buffer does not match the preprocessing shape");
    }
    // Resize the shorter side, then center-crop.
    const double resize_to = std::round(static_cast<double>(std::max(p.height, p.width)) * 256.0 / 224.0);
    const double scale = resize_to / static_cast<double>(std::min(rgb.rows, rgb.cols));
    const int rows = std::max(static_cast<int>(p.height), static_cast<int>(std::lround(rgb.rows * scale)));
    const int cols = std::max(static_cast<int>(p.width), static_cast<int>(std::lround(rgb.cols * scale)));
    cv::Mat resized;
    cv::resize(rgb, resized, cv::Size(cols, rows), 0, 0, cv::INTER_LINEAR);
    const int top = (rows - static_cast<int>(p.height)) / 2;
    const int left = (cols - static_cast<int>(p.width)) / 2;
    const cv::Mat crop = resized(cv::Rect(left, top, static_cast<int>(p.width), static_cast<int>(p.height)));

    const auto plane = p.height * p.width;
    for (std::size_t y = 0; y < p.height; ++y) {
        const auto* px = crop.ptr<cv::Vec3b>(static_cast<int>(y));
        for (std::size_t x = 0; x < p.width; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                out[c * plane + y * p.width + x] = (px[x][static_cast<int>(c)] / 255.0 - p.mean[c]) / p.stddev[c];
            }
        }
    }
}

}  // namespace

void load_image_into(const std::filesystem::path& path, const Preprocessing& p, std::span<double> out) {
    if (!std::filesystem::exists(path)) throw Error(ErrorKind::not_found, "image not found: '" + path.string() + "'");
    const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw Error(ErrorKind::parse, "cannot decode image '" + path.string() + "'");
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    preprocess_mat(rgb, p, out);
}

Tensor load_image(const std::filesystem::path& path, const Preprocessing& p) {
    Tensor t({1, p.channels, p.height, p.width});
    load_image_into(path, p, t.data);
    return t;
}

void preprocess_rgb(std::span<const std::uint8_t> rgb, std::size_t height, std::size_t width, const Preprocessing& p,
                    std::span<double> out) {
    if (rgb.size() != height * width * 3 || height == 0 || width == 0) {
        throw Error(ErrorKind::shape_mismatch, "RGB buffer does not match its dimensions");
    }
    const cv::Mat mat(static_cast<int>(height), static_cast<int>(width), CV_8UC3,
                      const_cast<std::uint8_t*>(rgb.data()));
    preprocess_mat(mat, p, out);
}

void write_rgb_image(const std::filesystem::path& path, std::span<const std::uint8_t> rgb, std::size_t height,
                     std::size_t width) {
    if (rgb.size() != height * width * 3) {
        throw Error(ErrorKind::shape_mismatch, "RGB buffer does not match its dimensions");
    }
    const cv::Mat mat(static_cast<int>(height), static_cast<int>(width), CV_8UC3,
                      const_cast<std::uint8_t*>(rgb.data()));
    cv::Mat bgr;
    cv::cvtColor(mat, bgr, cv::COLOR_RGB2BGR);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    if (!cv::imwrite(path.string(), bgr)) throw Error(ErrorKind::parse, "cannot write image '" + path.string() + "'");
}

}  // namespace vsa::model

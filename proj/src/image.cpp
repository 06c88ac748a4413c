#include "mtfest/image.hpp"

#include "mtfest/error.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace mtfest {

namespace {

void check_dims(int width, int height) {
    if (width < 0 || height < 0) {
        throw Error(ErrorCode::InvalidArgument, "negative image dimensions");
    }
}

void check_pixel_size(std::optional<double> size) {
    if (size && !(*size > 0.0 && std::isfinite(*size))) {
        throw Error(ErrorCode::InvalidArgument, "pixel size must be positive");
    }
}

} // namespace

GrayImage::GrayImage(int width, int height, double fill, std::optional<double> pixel_size)
    : width_(width), height_(height), pixel_size_(pixel_size) {
    check_dims(width, height);
    check_pixel_size(pixel_size);
    if (!std::isfinite(fill)) {
        throw Error(ErrorCode::InvalidArgument, "non-finite fill value");
    }
    pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<double> pixels,
                     std::optional<double> pixel_size)
    : width_(width), height_(height), pixels_(std::move(pixels)), pixel_size_(pixel_size) {
    check_dims(width, height);
    check_pixel_size(pixel_size);
    if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw Error(ErrorCode::InvalidArgument, "pixel count does not match dimensions");
    }
    for (double v : pixels_) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::InvalidArgument, "non-finite intensity");
        }
    }
}

void GrayImage::set_pixel_size(std::optional<double> size) {
    check_pixel_size(size);
    pixel_size_ = size;
}

bool GrayImage::contains(const Rect& r) const noexcept {
    return r.w >= 1 && r.h >= 1 && r.x0 >= 0 && r.y0 >= 0 &&
           static_cast<long>(r.x0) + r.w <= width_ && static_cast<long>(r.y0) + r.h <= height_;
}

double GrayImage::mean() const noexcept {
    if (pixels_.empty()) {
        return 0.0;
    }
    return std::accumulate(pixels_.begin(), pixels_.end(), 0.0) /
           static_cast<double>(pixels_.size());
}

GrayImage bin_image(const GrayImage& img, int n) {
    if (n < 1) {
        throw Error(ErrorCode::InvalidArgument, "bin factor must be >= 1");
    }
    const int ow = img.width() / n;
    const int oh = img.height() / n;
    if (ow == 0 || oh == 0) {
        throw Error(ErrorCode::EmptyResult,
                    "bin factor " + std::to_string(n) + " exceeds image dimensions");
    }
    std::optional<double> size = img.pixel_size();
    if (size) {
        *size *= n;
    }
    GrayImage out(ow, oh, 0.0, size);
    const double norm = 1.0 / (static_cast<double>(n) * n);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double sum = 0.0;
            for (int dy = 0; dy < n; ++dy) {
                for (int dx = 0; dx < n; ++dx) {
                    sum += img(x * n + dx, y * n + dy);
                }
            }
            out(x, y) = sum * norm;
        }
    }
    return out;
}

GrayImage clip_roi(const GrayImage& img, const Rect& r) {
    if (!img.contains(r)) {
        throw Error(ErrorCode::OutOfBounds,
                    "rect " + std::to_string(r.x0) + "," + std::to_string(r.y0) + "," +
                        std::to_string(r.w) + "," + std::to_string(r.h) + " outside " +
                        std::to_string(img.width()) + "x" + std::to_string(img.height()));
    }
    GrayImage out(r.w, r.h, 0.0, img.pixel_size());
    for (int y = 0; y < r.h; ++y) {
        for (int x = 0; x < r.w; ++x) {
            out(x, y) = img(r.x0 + x, r.y0 + y);
        }
    }
    return out;
}

} // namespace mtfest

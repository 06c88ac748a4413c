#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace mtfest {

/// Axis-aligned pixel rectangle; (x0, y0) is the top-left corner.
struct Rect {
    int x0 = 0;
    int y0 = 0;
    int w = 0;
    int h = 0;

    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Row-major scalar raster in double precision. Intensities are kept in the
/// units they were loaded with; nothing in the pipeline depends on absolute
/// calibration. pixel_size, when known, is the physical length per pixel.
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, double fill = 0.0,
              std::optional<double> pixel_size = std::nullopt);
    GrayImage(int width, int height, std::vector<double> pixels,
              std::optional<double> pixel_size = std::nullopt);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return pixels_.empty(); }

    double operator()(int x, int y) const { return pixels_[index(x, y)]; }
    double& operator()(int x, int y) { return pixels_[index(x, y)]; }

    std::span<const double> pixels() const noexcept { return pixels_; }
    std::span<double> pixels() noexcept { return pixels_; }

    std::optional<double> pixel_size() const noexcept { return pixel_size_; }
    void set_pixel_size(std::optional<double> size);

    bool contains(const Rect& r) const noexcept;
    double mean() const noexcept;

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> pixels_;
    std::optional<double> pixel_size_;
};

/// Weights applied to (R, G, B) when a color raster is loaded.
struct LumaWeights {
    double r = 0.299;
    double g = 0.587;
    double b = 0.114;
};

/// Reads binary PGM (P5), binary PPM (P6) or PNG. Integer samples are
/// promoted to double without rescaling; color is reduced to luma first.
GrayImage load_image(const std::filesystem::path& path, const LumaWeights& luma = {});

/// Writes PGM or PNG depending on the extension. Values are rounded and
/// clamped to the 16-bit range; 8-bit output is used when everything fits.
void save_image(const GrayImage& img, const std::filesystem::path& path);

/// n×n block mean. Trailing rows/columns that do not fill a block are dropped.
GrayImage bin_image(const GrayImage& img, int n);

GrayImage clip_roi(const GrayImage& img, const Rect& r);

} // namespace mtfest

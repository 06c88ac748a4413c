#include "mtfest/error.hpp"
#include "mtfest/image.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>

namespace mtfest {

namespace {

using Bytes = std::vector<unsigned char>;

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    }
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, const Bytes& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) {
        throw Error(ErrorCode::Io, "write failed for " + path.string());
    }
}

double luma(const LumaWeights& w, double r, double g, double b) {
    return w.r * r + w.g * g + w.b * b;
}

// --- PNM --------------------------------------------------------------------

class PnmHeaderReader {
public:
    explicit PnmHeaderReader(const Bytes& data) : data_(data) {}

    long next_int() {
        skip_space_and_comments();
        if (pos_ >= data_.size() || !std::isdigit(data_[pos_])) {
            throw Error(ErrorCode::CorruptFile, "malformed PNM header");
        }
        long v = 0;
        while (pos_ < data_.size() && std::isdigit(data_[pos_])) {
            v = v * 10 + (data_[pos_++] - '0');
            if (v > 1'000'000'000L) {
                throw Error(ErrorCode::CorruptFile, "PNM header value out of range");
            }
        }
        return v;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_offset() {
        if (pos_ >= data_.size() || !std::isspace(data_[pos_])) {
            throw Error(ErrorCode::CorruptFile, "missing separator before PNM raster");
        }
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < data_.size()) {
            if (std::isspace(data_[pos_])) {
                ++pos_;
            } else if (data_[pos_] == '#') {
                while (pos_ < data_.size() && data_[pos_] != '\n') {
                    ++pos_;
                }
            } else {
                break;
            }
        }
    }

    const Bytes& data_;
    std::size_t pos_ = 2;
};

GrayImage decode_pnm(const Bytes& data, const LumaWeights& weights) {
    const int channels = data[1] == '5' ? 1 : 3;
    PnmHeaderReader header(data);
    const long width = header.next_int();
    const long height = header.next_int();
    const long maxval = header.next_int();
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
        throw Error(ErrorCode::CorruptFile, "invalid PNM dimensions or maxval");
    }
    const std::size_t offset = header.raster_offset();
    const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
    const std::size_t samples = static_cast<std::size_t>(width) * height * channels;
    if (data.size() < offset + samples * bytes_per_sample) {
        throw Error(ErrorCode::CorruptFile, "truncated PNM raster");
    }

    auto sample = [&](std::size_t i) -> double {
        const unsigned char* p = data.data() + offset + i * bytes_per_sample;
        return bytes_per_sample == 2 ? static_cast<double>((p[0] << 8) | p[1])
                                     : static_cast<double>(p[0]);
    };

    std::vector<double> pixels(static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        pixels[i] = channels == 1
                        ? sample(i)
                        : luma(weights, sample(3 * i), sample(3 * i + 1), sample(3 * i + 2));
    }
    return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

Bytes encode_pgm(const GrayImage& img, bool wide) {
    const std::string header = "P5\n" + std::to_string(img.width()) + " " +
                               std::to_string(img.height()) + "\n" + (wide ? "65535" : "255") +
                               "\n";
    Bytes out(header.begin(), header.end());
    out.reserve(out.size() + img.pixels().size() * (wide ? 2 : 1));
    for (double v : img.pixels()) {
        const auto q = static_cast<unsigned>(std::clamp(std::lround(v), 0L, wide ? 65535L : 255L));
        if (wide) {
            out.push_back(static_cast<unsigned char>(q >> 8));
        }
        out.push_back(static_cast<unsigned char>(q & 0xff));
    }
    return out;
}

// --- PNG --------------------------------------------------------------------

struct PngReadSource {
    const Bytes* data;
    std::size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t len) {
    auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
    if (src->pos + len > src->data->size()) {
        png_error(png, "truncated PNG stream");
    }
    std::copy_n(src->data->data() + src->pos, len, out);
    src->pos += len;
}

void png_error_to_longjmp(png_structp png, png_const_charp) {
    std::longjmp(png_jmpbuf(png), 1);
}

void png_warning_ignored(png_structp, png_const_charp) {}

// No C++ objects with non-trivial destructors may be live across setjmp, so
// decoding fills caller-owned buffers and reports failure through the return.
bool decode_png_raw(const Bytes& data, png_uint_32& width, png_uint_32& height, int& channels,
                    int& depth, Bytes& raster) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             png_error_to_longjmp, png_warning_ignored);
    if (!png) {
        return false;
    }
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        return false;
    }
    PngReadSource src{&data, 0};
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    png_set_read_fn(png, &src, png_read_from_memory);
    png_read_info(png, info);

    const int color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
    }
    if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) {
        png_set_tRNS_to_alpha(png);
    }
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    channels = png_get_channels(png, info);
    depth = png_get_bit_depth(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    raster.resize(rowbytes * height);
    for (png_uint_32 y = 0; y < height; ++y) {
        png_read_row(png, raster.data() + y * rowbytes, nullptr);
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
}

GrayImage decode_png(const Bytes& data, const LumaWeights& weights) {
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int channels = 0;
    int depth = 0;
    Bytes raster;
    if (!decode_png_raw(data, width, height, channels, depth, raster)) {
        throw Error(ErrorCode::CorruptFile, "PNG decode failed");
    }
    if (width == 0 || height == 0 || (channels != 1 && channels != 3)) {
        throw Error(ErrorCode::CorruptFile, "unexpected PNG layout");
    }
    const std::size_t bps = depth == 16 ? 2 : 1;
    auto sample = [&](std::size_t i) -> double {
        const unsigned char* p = raster.data() + i * bps;
        return bps == 2 ? static_cast<double>((p[0] << 8) | p[1]) : static_cast<double>(p[0]);
    };
    std::vector<double> pixels(static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        pixels[i] = channels == 1
                        ? sample(i)
                        : luma(weights, sample(3 * i), sample(3 * i + 1), sample(3 * i + 2));
    }
    return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

void png_write_to_memory(png_structp png, png_bytep in, png_size_t len) {
    auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
    out->insert(out->end(), in, in + len);
}

void png_flush_noop(png_structp) {}

bool encode_png_raw(const Bytes& raster, int width, int height, bool wide, Bytes& out) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              png_error_to_longjmp, png_warning_ignored);
    if (!png) {
        return false;
    }
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_set_write_fn(png, &out, png_write_to_memory, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 wide ? 16 : 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t rowbytes = static_cast<std::size_t>(width) * (wide ? 2 : 1);
    for (int y = 0; y < height; ++y) {
        png_write_row(png, const_cast<png_bytep>(raster.data() + y * rowbytes));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

Bytes encode_png(const GrayImage& img, bool wide) {
    Bytes raster;
    raster.reserve(img.pixels().size() * (wide ? 2 : 1));
    for (double v : img.pixels()) {
        const auto q = static_cast<unsigned>(std::clamp(std::lround(v), 0L, wide ? 65535L : 255L));
        if (wide) {
            raster.push_back(static_cast<unsigned char>(q >> 8));
        }
        raster.push_back(static_cast<unsigned char>(q & 0xff));
    }
    Bytes out;
    if (!encode_png_raw(raster, img.width(), img.height(), wide, out)) {
        throw Error(ErrorCode::Io, "PNG encode failed");
    }
    return out;
}

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

} // namespace

GrayImage load_image(const std::filesystem::path& path, const LumaWeights& luma) {
    const Bytes data = read_file(path);
    constexpr std::array<unsigned char, 8> png_magic{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (data.size() >= png_magic.size() && std::equal(png_magic.begin(), png_magic.end(), data.begin())) {
        return decode_png(data, luma);
    }
    if (data.size() >= 2 && data[0] == 'P' && (data[1] == '5' || data[1] == '6')) {
        return decode_pnm(data, luma);
    }
    throw Error(ErrorCode::UnsupportedFormat, path.string() + " is not binary PGM/PPM or PNG");
}

void save_image(const GrayImage& img, const std::filesystem::path& path) {
    if (img.empty()) {
        throw Error(ErrorCode::InvalidArgument, "cannot save an empty image");
    }
    const bool wide = std::any_of(img.pixels().begin(), img.pixels().end(),
                                  [](double v) { return std::lround(v) > 255; });
    const std::string ext = lower_extension(path);
    if (ext == ".pgm") {
        write_file(path, encode_pgm(img, wide));
    } else if (ext == ".png") {
        write_file(path, encode_png(img, wide));
    } else {
        throw Error(ErrorCode::UnsupportedFormat, "unknown output extension '" + ext + "'");
    }
}

} // namespace mtfest

#include "wagon/image.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "wagon/errors.hpp"

namespace wagon {

RasterImage make_image(std::uint32_t width, std::uint32_t height, std::uint8_t fill) {
    RasterImage img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<std::size_t>(width) * height * 3, fill);
    return img;
}

Bytes encode_ppm(const RasterImage& img) {
    std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                         "\n255\n";
    Bytes out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

RasterImage decode_ppm(std::span<const std::uint8_t> data) {
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < data.size()) {
            if (data[pos] == '#') {
                while (pos < data.size() && data[pos] != '\n') ++pos;
            } else if (std::isspace(data[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto token = [&]() -> std::string {
        skip_ws();
        std::string t;
        while (pos < data.size() && !std::isspace(data[pos])) t.push_back(static_cast<char>(data[pos++]));
        return t;
    };
    if (token() != "P6") throw WagonError(ErrorCode::MalformedGraph, "not a P6 PPM");
    RasterImage img;
    try {
        img.width = static_cast<std::uint32_t>(std::stoul(token()));
        img.height = static_cast<std::uint32_t>(std::stoul(token()));
        if (std::stoul(token()) != 255) throw WagonError(ErrorCode::IoError, "maxval must be 255");
    } catch (const std::logic_error&) {
        throw WagonError(ErrorCode::IoError, "bad PPM header");
    }
    ++pos;  // single whitespace after maxval
    std::size_t need = static_cast<std::size_t>(img.width) * img.height * 3;
    if (data.size() - pos < need) throw WagonError(ErrorCode::IoError, "truncated PPM payload");
    img.pixels.assign(data.begin() + pos, data.begin() + pos + need);
    return img;
}

namespace {

struct PngReadState {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos;
};

void png_read_fn(png_structp png, png_bytep out, png_size_t len) {
    auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
    if (st->pos + len > st->size) png_error(png, "read past end");
    std::memcpy(out, st->data + st->pos, len);
    st->pos += len;
}

void png_write_fn(png_structp png, png_bytep data, png_size_t len) {
    auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + len);
}

void png_flush_fn(png_structp) {}

}  // namespace

Bytes encode_png(const RasterImage& img) {
    Bytes out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw WagonError(ErrorCode::IoError, "png encode failed");
    }
    png_set_write_fn(png, &out, png_write_fn, png_flush_fn);
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::uint32_t y = 0; y < img.height; ++y)
        png_write_row(png, const_cast<png_bytep>(img.pixels.data() +
                                                 static_cast<std::size_t>(y) * img.width * 3));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

RasterImage decode_png(std::span<const std::uint8_t> data) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    PngReadState st{data.data(), data.size(), 0};
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw WagonError(ErrorCode::IoError, "png decode failed");
    }
    png_set_read_fn(png, &st, png_read_fn);
    png_read_info(png, info);
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    RasterImage img;
    img.width = png_get_image_width(png, info);
    img.height = png_get_image_height(png, info);
    if (png_get_rowbytes(png, info) != static_cast<std::size_t>(img.width) * 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw WagonError(ErrorCode::IoError, "unexpected png row layout");
    }
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height * 3);
    for (std::uint32_t y = 0; y < img.height; ++y)
        png_read_row(png, img.pixels.data() + static_cast<std::size_t>(y) * img.width * 3, nullptr);
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

namespace {

bool has_suffix(const std::string& s, const std::string& suffix) {
    if (s.size() < suffix.size()) return false;
    std::string tail = s.substr(s.size() - suffix.size());
    for (auto& c : tail) c = static_cast<char>(std::tolower(c));
    return tail == suffix;
}

Bytes read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw WagonError(ErrorCode::IoError, "cannot open " + path);
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void check_not_lossy(const std::string& path) {
    for (const char* ext : {".jpg", ".jpeg", ".webp", ".gif", ".bmp", ".avif"})
        if (has_suffix(path, ext))
            throw WagonError(ErrorCode::LossyFormatRefused,
                             path + ": lossy or palette formats destroy LSB payloads");
}

}  // namespace

RasterImage load_image(const std::string& path) {
    check_not_lossy(path);
    Bytes data = read_file(path);
    if (data.size() >= 8 && data[0] == 0x89 && data[1] == 'P') return decode_png(data);
    if (data.size() >= 2 && data[0] == 'P' && data[1] == '6') return decode_ppm(data);
    throw WagonError(ErrorCode::IoError, path + ": not a PNG or P6 PPM");
}

void save_image(const std::string& path, const RasterImage& img) {
    check_not_lossy(path);
    Bytes data;
    if (has_suffix(path, ".ppm"))
        data = encode_ppm(img);
    else if (has_suffix(path, ".png"))
        data = encode_png(img);
    else
        throw WagonError(ErrorCode::IoError, path + ": use .png or .ppm");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw WagonError(ErrorCode::IoError, "cannot write " + path);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

double psnr(const RasterImage& a, const RasterImage& b) {
    if (a.width != b.width || a.height != b.height)
        throw WagonError(ErrorCode::DimensionMismatch, "psnr on differently sized images");
    std::uint64_t se = 0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        std::int64_t d = static_cast<int>(a.pixels[i]) - static_cast<int>(b.pixels[i]);
        se += static_cast<std::uint64_t>(d * d);
    }
    if (se == 0) return std::numeric_limits<double>::infinity();
    double mse = static_cast<double>(se) / static_cast<double>(a.pixels.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace wagon

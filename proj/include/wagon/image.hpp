#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wagon/util.hpp"

namespace wagon {

// 8-bit RGB raster, row-major, 3 bytes per pixel.
struct RasterImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<std::uint8_t> pixels;  // size == width * height * 3

    std::size_t channel_count() const { return static_cast<std::size_t>(width) * height * 3; }
    bool operator==(const RasterImage&) const = default;
};

RasterImage make_image(std::uint32_t width, std::uint32_t height, std::uint8_t fill = 0);

// P6 PPM, bit-exact.
Bytes encode_ppm(const RasterImage& img);
RasterImage decode_ppm(std::span<const std::uint8_t> data);

// PNG, 8-bit RGB; decoded pixels are bit-exact.
Bytes encode_png(const RasterImage& img);
RasterImage decode_png(std::span<const std::uint8_t> data);

// Dispatches on extension (.png / .ppm); refuses lossy formats by name.
RasterImage load_image(const std::string& path);
void save_image(const std::string& path, const RasterImage& img);

// 10*log10(255^2 / MSE) over all channels; +inf for identical images.
double psnr(const RasterImage& a, const RasterImage& b);

}  // namespace wagon

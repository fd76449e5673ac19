#include "wagon/stego.hpp"

#include <zlib.h>

#include "wagon/errors.hpp"

namespace wagon::stego {

Bytes compress(std::span<const std::uint8_t> raw) {
    // Fixed 10-byte header: magic, deflate, no flags, mtime/XFL/OS zeroed for
    // byte-deterministic artifacts.
    Bytes out = {0x1f, 0x8b, 0x08, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00};

    z_stream zs{};
    if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, -15, 9, Z_DEFAULT_STRATEGY) != Z_OK)
        throw WagonError(ErrorCode::IoError, "deflateInit2 failed");
    zs.next_in = const_cast<Bytef*>(raw.data());
    zs.avail_in = static_cast<uInt>(raw.size());
    std::uint8_t buf[1 << 16];
    int ret;
    do {
        zs.next_out = buf;
        zs.avail_out = sizeof(buf);
        ret = deflate(&zs, Z_FINISH);
        out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
    } while (ret == Z_OK);
    deflateEnd(&zs);
    if (ret != Z_STREAM_END) throw WagonError(ErrorCode::IoError, "deflate failed");

    std::uint32_t crc = static_cast<std::uint32_t>(crc32(0, raw.data(), static_cast<uInt>(raw.size())));
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(crc >> (8 * i)));
    auto isize = static_cast<std::uint32_t>(raw.size());
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(isize >> (8 * i)));
    return out;
}

Bytes decompress(std::span<const std::uint8_t> member) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 16) != Z_OK)  // gzip wrapper
        throw WagonError(ErrorCode::IoError, "inflateInit2 failed");
    zs.next_in = const_cast<Bytef*>(member.data());
    zs.avail_in = static_cast<uInt>(member.size());
    Bytes out;
    std::uint8_t buf[1 << 16];
    int ret;
    do {
        zs.next_out = buf;
        zs.avail_out = sizeof(buf);
        ret = inflate(&zs, Z_NO_FLUSH);
        if (ret != Z_OK && ret != Z_STREAM_END) {
            inflateEnd(&zs);
            throw WagonError(ErrorCode::ImplausibleHeader, "not a valid gzip member");
        }
        out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
    } while (ret != Z_STREAM_END);
    bool trailing = zs.avail_in != 0;
    inflateEnd(&zs);
    if (trailing) throw WagonError(ErrorCode::ImplausibleHeader, "trailing bytes after gzip member");
    return out;
}

std::uint64_t EmbeddingLayout::capacity_bits(std::uint32_t width, std::uint32_t height) {
    return 2ULL * width * height * 3;
}

std::uint64_t EmbeddingLayout::capacity_bytes(std::uint32_t width, std::uint32_t height) {
    std::uint64_t bits = capacity_bits(width, height);
    return bits < 64 ? 0 : (bits - 64) / 8;
}

std::uint64_t EmbeddingLayout::bits_required(std::uint64_t payload_len) {
    return 64 + 8 * payload_len;
}

std::uint64_t EmbeddingLayout::plane0_bits_used(std::uint64_t payload_len, std::uint32_t width,
                                                std::uint32_t height) {
    std::uint64_t slots = static_cast<std::uint64_t>(width) * height * 3;
    return std::min(bits_required(payload_len), slots);
}

std::uint64_t EmbeddingLayout::plane1_bits_used(std::uint64_t payload_len, std::uint32_t width,
                                                std::uint32_t height) {
    std::uint64_t slots = static_cast<std::uint64_t>(width) * height * 3;
    std::uint64_t need = bits_required(payload_len);
    return need > slots ? need - slots : 0;
}

RasterImage lsb_embed(const RasterImage& image, std::span<const std::uint8_t> payload) {
    std::uint64_t need = EmbeddingLayout::bits_required(payload.size());
    std::uint64_t have = EmbeddingLayout::capacity_bits(image.width, image.height);
    // The header must fit entirely in plane 0.
    if (static_cast<std::uint64_t>(image.width) * image.height * 3 < 64)
        throw WagonError(ErrorCode::CapacityExceeded, "image has fewer than 64 plane-0 slots");
    if (need > have)
        throw WagonError(ErrorCode::CapacityExceeded,
                         "payload needs " + std::to_string(need) + " bits, image offers " +
                             std::to_string(have));

    RasterImage out = image;
    const std::uint64_t slots = static_cast<std::uint64_t>(image.width) * image.height * 3;
    Bytes header;
    put_be64(header, payload.size());

    auto bit_at = [&](std::uint64_t i) -> int {
        if (i < 64) return (header[i / 8] >> (7 - i % 8)) & 1;
        std::uint64_t p = i - 64;
        return (payload[p / 8] >> (7 - p % 8)) & 1;
    };
    for (std::uint64_t i = 0; i < need; ++i) {
        std::uint64_t slot = i < slots ? i : i - slots;
        unsigned plane = i < slots ? 0 : 1;
        std::uint8_t mask = static_cast<std::uint8_t>(1u << plane);
        if (bit_at(i))
            out.pixels[slot] |= mask;
        else
            out.pixels[slot] &= static_cast<std::uint8_t>(~mask);
    }
    return out;
}

Bytes lsb_extract(const RasterImage& image) {
    const std::uint64_t slots = static_cast<std::uint64_t>(image.width) * image.height * 3;
    std::uint64_t have = EmbeddingLayout::capacity_bits(image.width, image.height);
    if (slots < 64) throw WagonError(ErrorCode::ImplausibleHeader, "image too small for a header");

    std::uint64_t len = 0;
    for (std::uint64_t i = 0; i < 64; ++i) len = (len << 1) | (image.pixels[i] & 1);
    // Compare in bytes: 64 + 8*len would wrap for adversarial headers.
    if (len > EmbeddingLayout::capacity_bytes(image.width, image.height))
        throw WagonError(ErrorCode::ImplausibleHeader,
                         "declared payload length " + std::to_string(len) + " exceeds capacity");

    Bytes payload(len, 0);
    for (std::uint64_t i = 0; i < 8 * len; ++i) {
        std::uint64_t pos = 64 + i;
        std::uint64_t slot = pos < slots ? pos : pos - slots;
        unsigned plane = pos < slots ? 0 : 1;
        int bit = (image.pixels[slot] >> plane) & 1;
        payload[i / 8] = static_cast<std::uint8_t>((payload[i / 8] << 1) | bit);
    }
    return payload;
}

}  // namespace wagon::stego

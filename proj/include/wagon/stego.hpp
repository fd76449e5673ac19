#pragma once

#include <cstdint>

#include "wagon/image.hpp"
#include "wagon/util.hpp"

namespace wagon::stego {

// Deterministic gzip member (RFC 1952): max compression, mtime/XFL/OS zeroed.
Bytes compress(std::span<const std::uint8_t> raw);

// Accepts any conforming gzip member; throws WagonError(ImplausibleHeader) on
// structural damage (bad magic, CRC, length).
Bytes decompress(std::span<const std::uint8_t> member);

// Embedding layout: slots are channel bytes row-major, R then G then B; all
// plane-0 bits first, then plane-1. Header = big-endian 64-bit payload byte
// length in the first 64 plane-0 slots; payload bits MSB-first per byte.
struct EmbeddingLayout {
    static std::uint64_t capacity_bits(std::uint32_t width, std::uint32_t height);
    static std::uint64_t capacity_bytes(std::uint32_t width, std::uint32_t height);
    static std::uint64_t bits_required(std::uint64_t payload_len);
    // Split of used bits between the two planes for a given image.
    static std::uint64_t plane0_bits_used(std::uint64_t payload_len, std::uint32_t width,
                                          std::uint32_t height);
    static std::uint64_t plane1_bits_used(std::uint64_t payload_len, std::uint32_t width,
                                          std::uint32_t height);
};

RasterImage lsb_embed(const RasterImage& image, std::span<const std::uint8_t> payload);

// Exact inverse of lsb_embed; ImplausibleHeader when the declared length
// cannot fit (the "no watermark" signal).
Bytes lsb_extract(const RasterImage& image);

}  // namespace wagon::stego

#pragma once

#include <array>
#include <bitset>
#include <string>

#include "wagon/image.hpp"
#include "wagon/proof.hpp"

namespace wagon::binding {

// 512-bit average hash over a 32-wide x 16-tall cell grid. Bit 0 is the MSB
// of byte 0 in the packed/hex form.
struct PerceptualHash {
    std::bitset<512> bits;  // bits[i] = cell i, row-major over the grid

    std::string hex() const;  // 128 lowercase hex chars
    static PerceptualHash from_hex(const std::string& hex);
    bool operator==(const PerceptualHash&) const = default;
};

inline constexpr unsigned kGridCols = 32;
inline constexpr unsigned kGridRows = 16;

struct SecretKey {
    Bytes bytes;  // length >= 16; never serialized into artifacts

    static SecretKey from_bytes(Bytes b);
    static SecretKey from_file(const std::string& path);
    static SecretKey from_env(const std::string& var);
};

// Steps: mask the two low bit planes, integer luma (77r+150g+29b)>>8,
// floor-split 32x16 cell grid, exact-rational cell means vs global mean,
// bit = 1 iff cell mean > global mean (ties -> 0).
PerceptualHash average_hash(const RasterImage& image);

// lowercase-hex SHA-256(hash.hex bytes || key bytes)
std::string sign(const PerceptualHash& hash, const SecretKey& key);

proof::ProofBundle attach_signature(const proof::ProofBundle& bundle, const std::string& signature);

namespace reference {
// Serial luma/cell accumulation kept as the oracle for the parallel kernel.
PerceptualHash average_hash(const RasterImage& image);
}

}  // namespace wagon::binding

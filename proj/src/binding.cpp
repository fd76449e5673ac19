#include "wagon/binding.hpp"

#include <cstdlib>
#include <fstream>

#include "wagon/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wagon::binding {

std::string PerceptualHash::hex() const {
    Bytes packed(64, 0);
    for (std::size_t i = 0; i < 512; ++i)
        if (bits[i]) packed[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    return to_hex(packed);
}

PerceptualHash PerceptualHash::from_hex(const std::string& hex) {
    Bytes packed = wagon::from_hex(hex);
    if (packed.size() != 64)
        throw WagonError(ErrorCode::InvalidArgument, "perceptual hash must be 128 hex chars");
    PerceptualHash h;
    for (std::size_t i = 0; i < 512; ++i)
        h.bits[i] = (packed[i / 8] >> (7 - i % 8)) & 1;
    return h;
}

SecretKey SecretKey::from_bytes(Bytes b) {
    if (b.size() < 16)
        throw WagonError(ErrorCode::InvalidArgument, "secret key must be at least 16 bytes");
    return SecretKey{std::move(b)};
}

SecretKey SecretKey::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw WagonError(ErrorCode::IoError, "cannot open secret key file " + path);
    Bytes b{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    // A trailing newline from echo/editors is not part of the key.
    while (!b.empty() && (b.back() == '\n' || b.back() == '\r')) b.pop_back();
    return from_bytes(std::move(b));
}

SecretKey SecretKey::from_env(const std::string& var) {
    const char* v = std::getenv(var.c_str());
    if (!v) throw WagonError(ErrorCode::InvalidArgument, "environment variable " + var + " not set");
    return from_bytes(str_bytes(v));
}

namespace {

PerceptualHash average_hash_impl(const RasterImage& image, bool parallel) {
    if (image.width < kGridCols || image.height < kGridRows)
        throw WagonError(ErrorCode::ImageTooSmall, "average hash needs at least 32x16 pixels");

    const std::size_t W = image.width, H = image.height;
    // Per-cell luma sums; the two low bit planes are masked so LSB embedding
    // cannot move the hash.
    std::array<std::int64_t, 512> cell_sum{};
    std::array<std::int64_t, 512> cell_count{};

    for (unsigned gy = 0; gy < kGridRows; ++gy) {
        std::size_t y0 = gy * H / kGridRows, y1 = (gy + 1) * H / kGridRows;
        for (unsigned gx = 0; gx < kGridCols; ++gx) {
            std::size_t x0 = gx * W / kGridCols, x1 = (gx + 1) * W / kGridCols;
            cell_count[gy * kGridCols + gx] =
                static_cast<std::int64_t>((y1 - y0) * (x1 - x0));
        }
    }

#pragma omp parallel for if (parallel) schedule(static)
    for (std::int64_t yy = 0; yy < static_cast<std::int64_t>(H); ++yy) {
        auto y = static_cast<std::size_t>(yy);
        std::size_t gy = 0;
        while ((gy + 1) * H / kGridRows <= y) ++gy;
        std::array<std::int64_t, kGridCols> row_sums{};
        const std::uint8_t* row = image.pixels.data() + y * W * 3;
        std::size_t gx = 0;
        for (std::size_t x = 0; x < W; ++x) {
            while ((gx + 1) * W / kGridCols <= x) ++gx;
            std::uint8_t r = row[3 * x] & 0xFC;
            std::uint8_t g = row[3 * x + 1] & 0xFC;
            std::uint8_t b = row[3 * x + 2] & 0xFC;
            row_sums[gx] += (77 * r + 150 * g + 29 * b) >> 8;
        }
#pragma omp critical(wagon_ahash)
        for (unsigned c = 0; c < kGridCols; ++c) cell_sum[gy * kGridCols + c] += row_sums[c];
    }

    // Exact rational comparison: bit i set iff s_i/n_i > (1/512) * sum_j s_j/n_j,
    // cleared by the lcm of the cell counts (at most four distinct values under
    // the floor split, so the lcm stays small). __int128 keeps it exact.
    std::int64_t lcm = 1;
    for (auto n : cell_count) {
        std::int64_t a = lcm, b = n;
        while (b) { auto t = a % b; a = b; b = t; }
        lcm = lcm / a * n;
    }
    __int128 global = 0;
    for (std::size_t i = 0; i < 512; ++i)
        global += static_cast<__int128>(cell_sum[i]) * (lcm / cell_count[i]);

    PerceptualHash h;
    for (std::size_t i = 0; i < 512; ++i) {
        __int128 lhs = static_cast<__int128>(cell_sum[i]) * (lcm / cell_count[i]) * 512;
        h.bits[i] = lhs > global;
    }
    return h;
}

}  // namespace

PerceptualHash average_hash(const RasterImage& image) { return average_hash_impl(image, true); }

namespace reference {
PerceptualHash average_hash(const RasterImage& image) { return average_hash_impl(image, false); }
}  // namespace reference

std::string sign(const PerceptualHash& hash, const SecretKey& key) {
    Bytes msg = str_bytes(hash.hex());
    msg.insert(msg.end(), key.bytes.begin(), key.bytes.end());
    Digest d = sha256(msg);
    return to_hex(d);
}

proof::ProofBundle attach_signature(const proof::ProofBundle& bundle, const std::string& signature) {
    if (bundle.signature)
        throw WagonError(ErrorCode::SignatureAlreadyPresent, "bundle already carries a signature");
    proof::ProofBundle out = bundle;
    out.signature = signature;
    return out;
}

}  // namespace wagon::binding

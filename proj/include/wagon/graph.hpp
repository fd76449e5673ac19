#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wagon/image.hpp"
#include "wagon/util.hpp"

namespace wagon::graph {

// Quantized tensor: represented value is data[i] / 2^scale_bits.
struct FixedPointTensor {
    std::vector<std::size_t> shape;
    std::vector<std::int64_t> data;
    unsigned scale_bits = 0;

    std::size_t size() const;
    bool operator==(const FixedPointTensor&) const = default;
};

// Largest |q| allowed anywhere so dot products stay clear of field wraparound.
inline constexpr unsigned kMagnitudeBoundBits = 52;

FixedPointTensor quantize(const std::vector<double>& values, unsigned scale_bits);
std::vector<double> dequantize(const FixedPointTensor& t);

// Round-half-up quantization of a single value.
std::int64_t quantize_value(double v, unsigned scale_bits);

enum class LayerKind { Dense, Activation };
enum class ActivationKind { Identity, ReLU };

struct Layer {
    LayerKind kind = LayerKind::Dense;
    FixedPointTensor weights;  // Dense: [out, in]
    FixedPointTensor bias;     // Dense: [out]
    ActivationKind activation = ActivationKind::Identity;  // Activation only
    std::set<std::string> tags;

    std::size_t out_dim(std::size_t in_dim) const;
};

enum class Architecture { GAN, Autoencoder };

struct ComputationGraph {
    std::string model_id;
    Architecture architecture = Architecture::GAN;
    std::size_t input_dim = 0;
    std::vector<Layer> layers;
    std::vector<std::size_t> output_shape;  // [H, W, C], C == 3

    std::size_t output_dim() const;
    // SHA-256 of the canonical WGF serialization, hex.
    std::string model_digest() const;
};

// Wagon Graph Format: canonical UTF-8 JSON, sorted keys, no whitespace.
ComputationGraph load_graph(std::span<const std::uint8_t> bytes);
ComputationGraph load_graph(const std::string& json_text);
std::string save_graph(const ComputationGraph& g);

std::vector<double> forward_float(const ComputationGraph& g, const std::vector<double>& input);

// Quantized evaluation at the given scale; Dense layers rescale by truncated
// (floor) division by 2^s, weights are requantized at the same scale.
FixedPointTensor forward_fixed(const ComputationGraph& g, const FixedPointTensor& input,
                               unsigned scale_bits,
                               unsigned magnitude_bound_bits = kMagnitudeBoundBits);

// Float evaluation restricted to a contiguous layer range [first, last).
std::vector<double> forward_float_range(const ComputationGraph& g, const std::vector<double>& input,
                                        std::size_t first, std::size_t last);

// Per-layer intermediates of the quantized evaluation; shared by witness
// generation and calibration probing.
struct LayerTrace {
    std::size_t layer_index = 0;
    std::vector<std::int64_t> raw;  // Dense: pre-rescale accumulator; ReLU: input values
    std::vector<std::int64_t> out;  // values after the layer
};
struct ForwardTrace {
    std::vector<LayerTrace> layers;
    FixedPointTensor output;
};
ForwardTrace forward_fixed_trace(const ComputationGraph& g, const FixedPointTensor& input,
                                 unsigned scale_bits,
                                 unsigned magnitude_bound_bits = kMagnitudeBoundBits);

// Weights/bias requantized at the evaluation scale (round-half-up).
std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>> quantize_layer_weights(
    const Layer& layer, unsigned scale_bits);

RasterImage render_image(const FixedPointTensor& output, const std::vector<std::size_t>& output_shape);

// Counter-based latent expansion: element i of the result is derived from
// SHA-256(BE64(seed) || BE64(i)), first 8 bytes big-endian, mapped to [-1, 1].
std::vector<double> expand_latent(std::uint64_t seed, std::size_t dim);

namespace reference {
// Serial fixed-point dense kernel kept as the oracle for the parallel one.
std::vector<std::int64_t> dense_accumulate(const std::vector<std::int64_t>& weights,
                                           const std::vector<std::int64_t>& bias,
                                           const std::vector<std::int64_t>& input,
                                           std::size_t out_dim, std::size_t in_dim,
                                           unsigned scale_bits);
}  // namespace reference

// OpenMP-parallel variant; bit-identical to the reference.
std::vector<std::int64_t> dense_accumulate(const std::vector<std::int64_t>& weights,
                                           const std::vector<std::int64_t>& bias,
                                           const std::vector<std::int64_t>& input,
                                           std::size_t out_dim, std::size_t in_dim,
                                           unsigned scale_bits);

// Floor division by 2^s (truncation toward negative infinity).
inline std::int64_t floor_div_pow2(std::int64_t v, unsigned s) {
    return v >> s;
}

}  // namespace wagon::graph

#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "wagon/graph.hpp"

namespace wagon::slzkcc {

struct GanPrefix {
    std::size_t k = 1;
};
struct AeBottleneck {};
using Policy = std::variant<GanPrefix, AeBottleneck>;

Policy parse_policy(const std::string& text);  // "gan-prefix:k" | "ae-bottleneck"
std::string policy_name(const Policy& policy);

enum class Visibility { Public, Private };

struct LayerSelection {
    Policy policy;
    std::vector<std::size_t> selected_indices;
    graph::ComputationGraph sub_graph;
    Visibility input_visibility = Visibility::Private;
    // Output commitment mode is always HashPublic: the output-vector hash is
    // carried as a public input, recomputed by the verifier at pipeline level.
};

struct CalibrationConfig {
    unsigned scale_bits = 8;    // s in [4, 16]
    unsigned value_bits = 16;   // B in [8, 48]
    double tolerance = 0.015625;  // 2^-6 default
    Visibility input_visibility = Visibility::Private;
    std::size_t batches_used = 10;

    std::string to_json() const;
    static CalibrationConfig from_json(const std::string& text);
    bool operator==(const CalibrationConfig&) const = default;
};

inline constexpr unsigned kScaleMin = 4, kScaleMax = 16;
inline constexpr unsigned kValueBitsMin = 8, kValueBitsMax = 48;
inline constexpr double kDefaultTolerance = 0.015625;

LayerSelection select_layers(const graph::ComputationGraph& g, const Policy& policy);

using Batch = std::vector<std::vector<double>>;

// Exhaustive search for the lexicographically smallest (s, B) such that the
// quantized sub-graph stays within tolerance of the float evaluation of its
// quantized inputs across every batch, and B range-checks every value seen.
CalibrationConfig calibrate(const LayerSelection& selection, const std::vector<Batch>& batches,
                            double tolerance = kDefaultTolerance);

// Deterministic calibration batches (10 batches of 8 by default).
std::vector<Batch> default_batches(std::size_t input_dim, std::size_t num_batches = 10,
                                   std::size_t batch_size = 8, std::uint64_t seed = 1);

// Max |fixed - float| of the selection over the batches at scale s, where the
// float reference runs on the dequantized quantized inputs. Also reports the
// largest signed magnitude among outputs and activation inputs (for B).
struct CalibrationProbe {
    double max_error = 0.0;
    std::int64_t max_magnitude = 0;
    bool overflowed = false;
};
CalibrationProbe probe_scale(const LayerSelection& selection, const std::vector<Batch>& batches,
                             unsigned scale_bits);

}  // namespace wagon::slzkcc

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wagon/field.hpp"
#include "wagon/slzkcc.hpp"

namespace wagon::r1cs {

using SparseRow = std::map<std::uint32_t, std::uint64_t>;  // wire index -> field value

struct Constraint {
    SparseRow a, b, c;  // <a,w> * <b,w> = <c,w>
};

// Wire layout, fixed: [1 | public inputs | private inputs | layer outputs in
// order | hint/bit wires in order].
struct R1CSInstance {
    std::uint32_t num_wires = 0;
    std::uint32_t num_public = 0;  // includes the constant-1 wire 0
    std::uint64_t modulus = kDefaultModulus;
    std::string circuit_version;
    std::vector<Constraint> constraints;

    std::string to_json() const;  // canonical
    static R1CSInstance from_json(const std::string& text);
    Digest circuit_digest() const;  // SHA-256 of canonical serialization
};

struct Witness {
    std::vector<std::uint64_t> assignment;  // assignment[0] == 1

    std::string to_json() const;
    static Witness from_json(const std::string& text);
};

struct SatisfactionResult {
    bool ok = false;
    std::optional<std::size_t> first_violated;
};

R1CSInstance compile_r1cs(const slzkcc::LayerSelection& selection,
                          const slzkcc::CalibrationConfig& calib,
                          std::uint64_t modulus = kDefaultModulus);

// Public inputs are the num_public-1 wires after the constant: by convention
// [model digest element, output hash element].
Witness gen_witness(const R1CSInstance& instance, const slzkcc::LayerSelection& selection,
                    const slzkcc::CalibrationConfig& calib,
                    const graph::FixedPointTensor& private_inputs,
                    const std::vector<std::uint64_t>& public_inputs);

SatisfactionResult check_satisfaction(const R1CSInstance& instance, const Witness& witness);

namespace reference {
// Serial satisfaction check kept as the oracle for the parallel one.
SatisfactionResult check_satisfaction(const R1CSInstance& instance, const Witness& witness);
}

// Reduce a 32-byte digest to a field element (first 8 bytes, big-endian, mod p).
std::uint64_t digest_to_field(const Digest& d, const Field& field);

// Public-input element committing to a quantized output vector.
std::uint64_t output_hash_element(const std::vector<std::int64_t>& output, const Field& field);

}  // namespace wagon::r1cs

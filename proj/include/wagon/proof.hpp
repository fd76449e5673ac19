#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wagon/r1cs.hpp"

namespace wagon::proof {

inline constexpr const char* kScheme = "fs-merkle-v1";
inline constexpr unsigned kDefaultChallenges = 64;

// Transparent setup: both keys carry the full circuit description. The
// verification key needs the constraint rows to re-check challenged equations.
struct ProvingKey {
    r1cs::R1CSInstance instance;
    unsigned merkle_arity = 2;
    std::string hash_id = "sha256";
    unsigned num_challenges = kDefaultChallenges;

    std::string to_json() const;
    static ProvingKey from_json(const std::string& text);
};

struct VerificationKey {
    Digest circuit_digest{};
    std::uint32_t num_wires = 0;
    std::uint32_t num_public = 0;
    unsigned num_challenges = kDefaultChallenges;
    std::string hash_id = "sha256";
    r1cs::R1CSInstance instance;

    std::string to_json() const;
    static VerificationKey from_json(const std::string& text);
};

struct ProofBundle {
    std::string scheme = kScheme;
    std::string circuit_version;
    Bytes proof;                             // opaque, hex in JSON
    std::vector<std::string> public_inputs;  // decimal field strings
    std::optional<std::string> signature;    // 64 hex chars once bound

    std::string to_json() const;  // canonical; "signature" key present only when bound
    static ProofBundle from_json(const std::string& text);
    bool operator==(const ProofBundle&) const = default;
};

std::pair<ProvingKey, VerificationKey> setup(const r1cs::R1CSInstance& instance,
                                             unsigned num_challenges = kDefaultChallenges);

// Deterministic: Merkle root over witness leaves, Fiat-Shamir challenges,
// openings with authentication paths. Refuses unsatisfied witnesses.
ProofBundle prove(const ProvingKey& pk, const r1cs::Witness& witness);

struct VerifyResult {
    bool accepted = false;
    std::string reason;  // empty on accept; first failing check otherwise
};

VerifyResult verify(const VerificationKey& vk, const ProofBundle& bundle);

// Fiat-Shamir challenge indices for a given transcript; exposed for tests.
std::vector<std::size_t> derive_challenges(const Digest& circuit_digest, const Digest& root,
                                           const std::vector<std::uint64_t>& public_inputs,
                                           std::size_t num_constraints, unsigned count);

namespace detail {
// Skips the satisfaction precondition; used by soundness experiments only.
ProofBundle prove_unchecked(const ProvingKey& pk, const r1cs::Witness& witness);
}

}  // namespace wagon::proof

#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wagon/binding.hpp"
#include "wagon/proof.hpp"
#include "wagon/stego.hpp"

namespace wagon::pipeline {

enum class RejectReason {
    NoWatermark,
    DecompressFailed,
    MalformedProof,
    SignatureMismatch,
    SignatureAbsent,
    ProofInvalid,
    CircuitMismatch,
};

const char* reject_reason_name(RejectReason r);

struct StageResult {
    std::string stage;   // extract, decompress, parse, signature, circuit, proof
    std::string status;  // pass, fail, skipped
    std::string detail;
};

struct Verdict {
    bool accepted = false;
    std::optional<RejectReason> reason;
    std::vector<StageResult> report;

    std::string to_json() const;  // canonical report JSON
};

struct ProverBackend {
    // Local when endpoint is empty; remote §IV.1-style otherwise.
    std::string remote_endpoint;
};

struct CreateResult {
    RasterImage original;
    RasterImage watermarked;
    proof::ProofBundle bundle;
};

CreateResult create_watermarked_image(const graph::ComputationGraph& g,
                                      const slzkcc::Policy& policy,
                                      const slzkcc::CalibrationConfig& calib,
                                      std::uint64_t seed, const binding::SecretKey& secret,
                                      const proof::ProvingKey& pk,
                                      const ProverBackend& prover = {});

// Total on arbitrary images; every failure is a Reject verdict, never a throw.
Verdict verify_watermarked_image(const RasterImage& image, const proof::VerificationKey& vk,
                                 const std::optional<binding::SecretKey>& secret);

struct InspectResult {
    std::optional<proof::ProofBundle> bundle;
    std::vector<StageResult> report;

    std::string to_json() const;
};

InspectResult inspect(const RasterImage& image);

// Public inputs for a run: [model digest element, output hash element].
std::vector<std::uint64_t> public_inputs_for(const graph::ComputationGraph& g,
                                             const slzkcc::LayerSelection& selection,
                                             const slzkcc::CalibrationConfig& calib,
                                             const graph::FixedPointTensor& latent,
                                             const Field& field);

}  // namespace wagon::pipeline

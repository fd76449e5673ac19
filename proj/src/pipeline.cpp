#include "wagon/pipeline.hpp"

#include <nlohmann/json.hpp>

#include "wagon/remote.hpp"

namespace wagon::pipeline {

using nlohmann::json;

const char* reject_reason_name(RejectReason r) {
    switch (r) {
        case RejectReason::NoWatermark: return "NoWatermark";
        case RejectReason::DecompressFailed: return "DecompressFailed";
        case RejectReason::MalformedProof: return "MalformedProof";
        case RejectReason::SignatureMismatch: return "SignatureMismatch";
        case RejectReason::SignatureAbsent: return "SignatureAbsent";
        case RejectReason::ProofInvalid: return "ProofInvalid";
        case RejectReason::CircuitMismatch: return "CircuitMismatch";
    }
    return "Unknown";
}

namespace {

template <typename F>
auto run_stage(const char* stage, F&& fn) {
    try {
        return fn();
    } catch (const WagonError& e) {
        throw WagonError(e.code(), std::string("stage=") + stage + ": " + e.what());
    }
}

json report_to_json(const std::vector<StageResult>& report) {
    json stages = json::array();
    for (const StageResult& s : report) {
        json sj;
        sj["stage"] = s.stage;
        sj["status"] = s.status;
        if (!s.detail.empty()) sj["detail"] = s.detail;
        stages.push_back(std::move(sj));
    }
    return stages;
}

}  // namespace

std::vector<std::uint64_t> public_inputs_for(const graph::ComputationGraph& g,
                                             const slzkcc::LayerSelection& selection,
                                             const slzkcc::CalibrationConfig& calib,
                                             const graph::FixedPointTensor& latent,
                                             const Field& field) {
    Digest model_digest = sha256(graph::save_graph(g));
    graph::FixedPointTensor out =
        graph::forward_fixed(selection.sub_graph, latent, calib.scale_bits);
    return {r1cs::digest_to_field(model_digest, field),
            r1cs::output_hash_element(out.data, field)};
}

CreateResult create_watermarked_image(const graph::ComputationGraph& g,
                                      const slzkcc::Policy& policy,
                                      const slzkcc::CalibrationConfig& calib, std::uint64_t seed,
                                      const binding::SecretKey& secret,
                                      const proof::ProvingKey& pk, const ProverBackend& prover) {
    auto selection = run_stage("slzkcc", [&] { return slzkcc::select_layers(g, policy); });

    CreateResult result;
    // The circuit's private input is whatever vector feeds the first selected
    // layer: the latent itself for a prefix selection, an intermediate
    // activation for a bottleneck one.
    graph::FixedPointTensor sub_input;
    run_stage("graph", [&] {
        std::vector<double> z = graph::expand_latent(seed, g.input_dim);
        graph::FixedPointTensor latent = graph::quantize(z, calib.scale_bits);
        graph::ForwardTrace trace = graph::forward_fixed_trace(g, latent, calib.scale_bits);
        result.original = graph::render_image(trace.output, g.output_shape);
        std::size_t first = selection.selected_indices.front();
        sub_input.data = first == 0 ? latent.data : trace.layers[first - 1].out;
        sub_input.shape = {sub_input.data.size()};
        sub_input.scale_bits = calib.scale_bits;
        return 0;
    });

    Field field(pk.instance.modulus);
    std::vector<std::uint64_t> pubs =
        run_stage("r1cs", [&] { return public_inputs_for(g, selection, calib, sub_input, field); });

    run_stage("proof", [&] {
        if (prover.remote_endpoint.empty()) {
            auto witness = r1cs::gen_witness(pk.instance, selection, calib, sub_input, pubs);
            result.bundle = proof::prove(pk, witness);
        } else {
            result.bundle = remote::remote_prove(prover.remote_endpoint, g.model_id,
                                                 remote::make_prove_input(sub_input, pubs),
                                                 std::chrono::milliseconds(20),
                                                 std::chrono::milliseconds(30000));
        }
        return 0;
    });

    run_stage("binding", [&] {
        binding::PerceptualHash hash = binding::average_hash(result.original);
        result.bundle = binding::attach_signature(result.bundle, binding::sign(hash, secret));
        return 0;
    });

    run_stage("stego", [&] {
        Bytes raw = str_bytes(result.bundle.to_json());
        Bytes compressed = stego::compress(raw);
        result.watermarked = stego::lsb_embed(result.original, compressed);
        return 0;
    });
    return result;
}

Verdict verify_watermarked_image(const RasterImage& image, const proof::VerificationKey& vk,
                                 const std::optional<binding::SecretKey>& secret) {
    Verdict v;
    auto fail = [&](RejectReason reason, const char* stage, const std::string& detail) {
        v.accepted = false;
        v.reason = reason;
        v.report.push_back({stage, "fail", detail});
        return v;
    };
    try {
        Bytes payload;
        try {
            payload = stego::lsb_extract(image);
        } catch (const WagonError& e) {
            return fail(RejectReason::NoWatermark, "extract", e.what());
        }
        v.report.push_back({"extract", "pass", std::to_string(payload.size()) + " bytes"});

        Bytes raw;
        try {
            raw = stego::decompress(payload);
        } catch (const WagonError& e) {
            return fail(RejectReason::DecompressFailed, "decompress", e.what());
        }
        v.report.push_back({"decompress", "pass", std::to_string(raw.size()) + " bytes"});

        proof::ProofBundle bundle;
        try {
            bundle = proof::ProofBundle::from_json(std::string(raw.begin(), raw.end()));
        } catch (const std::exception& e) {
            return fail(RejectReason::MalformedProof, "parse", e.what());
        }
        v.report.push_back({"parse", "pass", "scheme " + bundle.scheme});

        if (secret) {
            if (!bundle.signature)
                return fail(RejectReason::SignatureAbsent, "signature", "bundle has no signature");
            binding::PerceptualHash hash = binding::average_hash(image);
            std::string expected = binding::sign(hash, *secret);
            if (*bundle.signature != expected)
                return fail(RejectReason::SignatureMismatch, "signature",
                            "image hash does not match the embedded signature");
            v.report.push_back({"signature", "pass", ""});
        } else {
            v.report.push_back({"signature", "skipped", "no secret key supplied (public mode)"});
        }

        if (bundle.circuit_version != vk.instance.circuit_version)
            return fail(RejectReason::CircuitMismatch, "circuit",
                        "bundle is for circuit " + bundle.circuit_version);
        v.report.push_back({"circuit", "pass", bundle.circuit_version});

        proof::VerifyResult pr = proof::verify(vk, bundle);
        if (!pr.accepted) return fail(RejectReason::ProofInvalid, "proof", pr.reason);
        v.report.push_back({"proof", "pass", ""});
        v.accepted = true;
        return v;
    } catch (const std::exception& e) {
        return fail(RejectReason::MalformedProof, "internal", e.what());
    }
}

InspectResult inspect(const RasterImage& image) {
    InspectResult r;
    try {
        Bytes payload = stego::lsb_extract(image);
        r.report.push_back({"extract", "pass", std::to_string(payload.size()) + " bytes"});
        Bytes raw = stego::decompress(payload);
        r.report.push_back({"decompress", "pass", std::to_string(raw.size()) + " bytes"});
        r.bundle = proof::ProofBundle::from_json(std::string(raw.begin(), raw.end()));
        r.report.push_back({"parse", "pass", "scheme " + r.bundle->scheme});
    } catch (const WagonError& e) {
        std::string stage = r.report.empty()             ? "extract"
                            : r.report.size() == 1       ? "decompress"
                                                         : "parse";
        std::string status = e.code() == ErrorCode::ImplausibleHeader && r.report.empty()
                                 ? "NoWatermark"
                             : r.report.size() <= 1 ? "DecompressFailed"
                                                    : "MalformedProof";
        r.report.push_back({stage, "fail", std::string(status) + ": " + e.what()});
    } catch (const std::exception& e) {
        r.report.push_back({"parse", "fail", e.what()});
    }
    return r;
}

std::string Verdict::to_json() const {
    json j;
    j["outcome"] = accepted ? "accept" : "reject";
    if (reason) j["reason"] = reject_reason_name(*reason);
    j["stages"] = report_to_json(report);
    return j.dump();
}

std::string InspectResult::to_json() const {
    json j;
    j["stages"] = report_to_json(report);
    if (bundle) j["bundle"] = json::parse(bundle->to_json());
    return j.dump();
}

}  // namespace wagon::pipeline

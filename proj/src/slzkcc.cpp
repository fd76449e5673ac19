#include "wagon/slzkcc.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "wagon/errors.hpp"

namespace wagon::slzkcc {

using nlohmann::json;

Policy parse_policy(const std::string& text) {
    if (text == "ae-bottleneck") return AeBottleneck{};
    if (text.rfind("gan-prefix", 0) == 0) {
        std::size_t k = 1;
        auto colon = text.find(':');
        if (colon != std::string::npos) k = std::stoul(text.substr(colon + 1));
        return GanPrefix{k};
    }
    throw WagonError(ErrorCode::InvalidArgument, "unknown policy " + text);
}

std::string policy_name(const Policy& policy) {
    if (std::holds_alternative<AeBottleneck>(policy)) return "ae-bottleneck";
    return "gan-prefix:" + std::to_string(std::get<GanPrefix>(policy).k);
}

namespace {

graph::ComputationGraph extract_sub_graph(const graph::ComputationGraph& g,
                                          const std::vector<std::size_t>& indices) {
    graph::ComputationGraph sub;
    sub.model_id = g.model_id + "#sel";
    sub.architecture = g.architecture;
    // Input dim of the segment: walk the chain up to the first selected layer.
    std::size_t dim = g.input_dim;
    for (std::size_t i = 0; i < indices.front(); ++i) dim = g.layers[i].out_dim(dim);
    sub.input_dim = dim;
    for (std::size_t idx : indices) {
        sub.layers.push_back(g.layers[idx]);
        dim = g.layers[idx].out_dim(dim);
    }
    sub.output_shape = {1, dim, 1};
    return sub;
}

}  // namespace

LayerSelection select_layers(const graph::ComputationGraph& g, const Policy& policy) {
    LayerSelection sel;
    sel.policy = policy;
    if (const auto* gp = std::get_if<GanPrefix>(&policy)) {
        if (g.architecture != graph::Architecture::GAN)
            throw WagonError(ErrorCode::PolicyMismatch, "gan-prefix requires a GAN graph");
        if (gp->k == 0 || gp->k > g.layers.size())
            throw WagonError(ErrorCode::SelectionOutOfRange,
                             "k=" + std::to_string(gp->k) + " with depth " +
                                 std::to_string(g.layers.size()));
        for (std::size_t i = 0; i < gp->k; ++i) sel.selected_indices.push_back(i);
    } else {
        if (g.architecture != graph::Architecture::Autoencoder)
            throw WagonError(ErrorCode::PolicyMismatch, "ae-bottleneck requires an Autoencoder graph");
        for (std::size_t i = 0; i < g.layers.size(); ++i) {
            if (g.layers[i].tags.count("bottleneck")) {
                sel.selected_indices.push_back(i);
                if (i + 1 < g.layers.size() &&
                    g.layers[i + 1].kind == graph::LayerKind::Activation)
                    sel.selected_indices.push_back(i + 1);
            }
        }
        if (sel.selected_indices.empty())
            throw WagonError(ErrorCode::NoBottleneckTag, "no layer tagged bottleneck");
    }
    sel.sub_graph = extract_sub_graph(g, sel.selected_indices);
    return sel;
}

std::vector<Batch> default_batches(std::size_t input_dim, std::size_t num_batches,
                                   std::size_t batch_size, std::uint64_t seed) {
    std::vector<Batch> batches;
    std::uint64_t counter = seed << 32;
    for (std::size_t b = 0; b < num_batches; ++b) {
        Batch batch;
        for (std::size_t i = 0; i < batch_size; ++i)
            batch.push_back(graph::expand_latent(counter++, input_dim));
        batches.push_back(std::move(batch));
    }
    return batches;
}

CalibrationProbe probe_scale(const LayerSelection& selection, const std::vector<Batch>& batches,
                             unsigned scale_bits) {
    CalibrationProbe probe;
    const graph::ComputationGraph& sub = selection.sub_graph;
    for (const Batch& batch : batches) {
        for (const std::vector<double>& input : batch) {
            graph::FixedPointTensor q = graph::quantize(input, scale_bits);
            // The float reference runs on the dequantized quantized input: the
            // circuit proves the computation on the quantized input, so input
            // quantization error is not charged against the tolerance.
            std::vector<double> qf = graph::dequantize(q);
            graph::ForwardTrace trace;
            try {
                trace = graph::forward_fixed_trace(sub, q, scale_bits);
            } catch (const WagonError& e) {
                if (e.code() == ErrorCode::MagnitudeOverflow) {
                    probe.overflowed = true;
                    return probe;
                }
                throw;
            }
            std::vector<double> ref = graph::forward_float(sub, qf);
            std::vector<double> got = graph::dequantize(trace.output);
            for (std::size_t i = 0; i < ref.size(); ++i)
                probe.max_error = std::max(probe.max_error, std::abs(got[i] - ref[i]));
            for (const graph::LayerTrace& lt : trace.layers)
                for (auto v : lt.out)
                    probe.max_magnitude = std::max(probe.max_magnitude, std::abs(v));
        }
    }
    return probe;
}

CalibrationConfig calibrate(const LayerSelection& selection, const std::vector<Batch>& batches,
                            double tolerance) {
    if (batches.empty()) throw WagonError(ErrorCode::EmptyBatch, "no calibration batches");
    for (const Batch& b : batches)
        if (b.empty()) throw WagonError(ErrorCode::EmptyBatch, "empty calibration batch");
    for (unsigned s = kScaleMin; s <= kScaleMax; ++s) {
        CalibrationProbe probe = probe_scale(selection, batches, s);
        if (probe.overflowed || probe.max_error > tolerance) continue;
        for (unsigned b = kValueBitsMin; b <= kValueBitsMax; ++b) {
            if (probe.max_magnitude < (std::int64_t{1} << (b - 1))) {
                CalibrationConfig cfg;
                cfg.scale_bits = s;
                cfg.value_bits = b;
                cfg.tolerance = tolerance;
                cfg.input_visibility = selection.input_visibility;
                std::size_t total = 0;
                for (const Batch& bt : batches) total += bt.empty() ? 0 : 1;
                cfg.batches_used = total;
                return cfg;
            }
        }
    }
    throw WagonError(ErrorCode::CalibrationInfeasible,
                     "no (scale_bits, value_bits) in range meets the tolerance");
}

std::string CalibrationConfig::to_json() const {
    json j;
    j["scale_bits"] = scale_bits;
    j["value_bits"] = value_bits;
    j["tolerance"] = tolerance;
    j["input_visibility"] = input_visibility == Visibility::Private ? "private" : "public";
    j["batches_used"] = batches_used;
    return j.dump();
}

CalibrationConfig CalibrationConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
        CalibrationConfig cfg;
        cfg.scale_bits = j.at("scale_bits").get<unsigned>();
        cfg.value_bits = j.at("value_bits").get<unsigned>();
        cfg.tolerance = j.at("tolerance").get<double>();
        cfg.input_visibility = j.at("input_visibility").get<std::string>() == "public"
                                   ? Visibility::Public
                                   : Visibility::Private;
        cfg.batches_used = j.at("batches_used").get<std::size_t>();
        return cfg;
    } catch (const json::exception& e) {
        throw WagonError(ErrorCode::MalformedGraph, std::string("calibration config: ") + e.what());
    }
}

}  // namespace wagon::slzkcc

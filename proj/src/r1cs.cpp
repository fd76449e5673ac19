#include "wagon/r1cs.hpp"

#include <nlohmann/json.hpp>

#include "wagon/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wagon::r1cs {

using nlohmann::json;

namespace {

constexpr std::size_t kPublicInputs = 2;  // model digest element, output hash element

// Wire plan for one circuit layer. Identity activations alias their input
// wires and get no plan entry.
struct LayerPlan {
    std::size_t layer_index = 0;
    bool dense = false;  // false -> ReLU
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::size_t in_base = 0;
    std::size_t out_base = 0;
    std::size_t t_base = 0;     // Dense, scale_bits > 0: raw accumulator hints
    std::size_t bits_base = 0;  // decomposition bit hints
    std::size_t bits_per = 0;   // bits per element
};

struct Layout {
    std::size_t priv_base = 0;
    std::size_t in_dim = 0;
    std::vector<LayerPlan> plans;
    std::size_t num_wires = 0;
};

Layout build_layout(const slzkcc::LayerSelection& selection,
                    const slzkcc::CalibrationConfig& calib) {
    const graph::ComputationGraph& sub = selection.sub_graph;
    const unsigned s = calib.scale_bits, B = calib.value_bits;
    Layout layout;
    layout.priv_base = 1 + kPublicInputs;
    layout.in_dim = sub.input_dim;

    // Pass 1: output wires in layer order.
    std::size_t next = layout.priv_base + sub.input_dim;
    std::size_t cur_base = layout.priv_base;
    std::size_t cur_dim = sub.input_dim;
    for (std::size_t li = 0; li < sub.layers.size(); ++li) {
        const graph::Layer& layer = sub.layers[li];
        if (layer.kind == graph::LayerKind::Dense) {
            LayerPlan plan;
            plan.layer_index = li;
            plan.dense = true;
            plan.in_dim = cur_dim;
            plan.out_dim = layer.weights.shape[0];
            plan.in_base = cur_base;
            plan.out_base = next;
            next += plan.out_dim;
            cur_base = plan.out_base;
            cur_dim = plan.out_dim;
            layout.plans.push_back(plan);
        } else if (layer.activation == graph::ActivationKind::ReLU) {
            LayerPlan plan;
            plan.layer_index = li;
            plan.dense = false;
            plan.in_dim = cur_dim;
            plan.out_dim = cur_dim;
            plan.in_base = cur_base;
            plan.out_base = next;
            next += plan.out_dim;
            cur_base = plan.out_base;
            layout.plans.push_back(plan);
        }
        // Identity activation: aliases, nothing to do.
    }

    // Pass 2: hint wires in the same order.
    for (LayerPlan& plan : layout.plans) {
        if (plan.dense && s > 0) {
            plan.t_base = next;
            next += plan.out_dim;
            plan.bits_base = next;
            plan.bits_per = B + s;
            next += plan.out_dim * plan.bits_per;
        } else if (!plan.dense) {
            plan.bits_base = next;
            plan.bits_per = B;
            next += plan.out_dim * plan.bits_per;
        }
    }
    layout.num_wires = next;
    return layout;
}

void check_width(const slzkcc::CalibrationConfig& calib, const Field& field) {
    // The shifted decomposition value must stay injective mod p.
    unsigned total = calib.value_bits + calib.scale_bits;
    __uint128_t need = static_cast<__uint128_t>(1) << (total + 1);
    if (need >= field.modulus())
        throw WagonError(ErrorCode::WidthOverflow,
                         "value_bits + scale_bits decomposition does not fit the field");
}

}  // namespace

R1CSInstance compile_r1cs(const slzkcc::LayerSelection& selection,
                          const slzkcc::CalibrationConfig& calib, std::uint64_t modulus) {
    Field field(modulus);
    check_width(calib, field);
    const graph::ComputationGraph& sub = selection.sub_graph;
    const unsigned s = calib.scale_bits, B = calib.value_bits;
    Layout layout = build_layout(selection, calib);

    R1CSInstance inst;
    inst.modulus = modulus;
    inst.num_public = static_cast<std::uint32_t>(1 + kPublicInputs);
    inst.num_wires = static_cast<std::uint32_t>(layout.num_wires);
    inst.circuit_version = sub.model_id + "@r1cs-v1";

    auto wire = [](std::size_t i) { return static_cast<std::uint32_t>(i); };

    for (const LayerPlan& plan : layout.plans) {
        const graph::Layer& layer = sub.layers[plan.layer_index];
        if (plan.dense) {
            auto [wq, bq] = graph::quantize_layer_weights(layer, s);
            for (std::size_t j = 0; j < plan.out_dim; ++j) {
                std::size_t t_wire = s > 0 ? plan.t_base + j : plan.out_base + j;
                // Raw accumulator: t_j = sum_k W_jk x_k + b_j * 2^s.
                Constraint lin;
                for (std::size_t k = 0; k < plan.in_dim; ++k) {
                    std::uint64_t c = field.from_signed(wq[j * plan.in_dim + k]);
                    if (c != 0) lin.a[wire(plan.in_base + k)] = c;
                }
                std::uint64_t bias = field.mul(field.from_signed(bq[j]), field.pow2(s));
                if (bias != 0) lin.a[0] = bias;
                lin.b[0] = 1;
                lin.c[wire(t_wire)] = 1;
                inst.constraints.push_back(std::move(lin));
                if (s == 0) continue;

                // Shifted decomposition: sum_i bit_i 2^i = t + 2^(B+s-1).
                std::size_t bits = plan.bits_base + j * plan.bits_per;
                Constraint dec;
                for (std::size_t i = 0; i < plan.bits_per; ++i)
                    dec.a[wire(bits + i)] = field.pow2(static_cast<unsigned>(i));
                dec.b[0] = 1;
                dec.c[wire(t_wire)] = 1;
                dec.c[0] = field.pow2(B + s - 1);
                inst.constraints.push_back(std::move(dec));

                // Output recomposition: q'_j = sum_{i>=s} bit_i 2^(i-s) - 2^(B-1).
                Constraint rec;
                for (std::size_t i = s; i < plan.bits_per; ++i)
                    rec.a[wire(bits + i)] = field.pow2(static_cast<unsigned>(i - s));
                rec.a[0] = field.neg(field.pow2(B - 1));
                rec.b[0] = 1;
                rec.c[wire(plan.out_base + j)] = 1;
                inst.constraints.push_back(std::move(rec));

                for (std::size_t i = 0; i < plan.bits_per; ++i) {
                    Constraint boolc;
                    boolc.a[wire(bits + i)] = 1;
                    boolc.b[wire(bits + i)] = 1;
                    boolc.b[0] = field.neg(1);
                    inst.constraints.push_back(std::move(boolc));
                }
            }
        } else {
            // ReLU: shifted B-bit decomposition of the input, then gating by
            // the top (non-negativity) bit.
            for (std::size_t j = 0; j < plan.out_dim; ++j) {
                std::size_t bits = plan.bits_base + j * plan.bits_per;
                Constraint dec;
                for (std::size_t i = 0; i < plan.bits_per; ++i)
                    dec.a[wire(bits + i)] = field.pow2(static_cast<unsigned>(i));
                dec.b[0] = 1;
                dec.c[wire(plan.in_base + j)] = 1;
                dec.c[0] = field.pow2(B - 1);
                inst.constraints.push_back(std::move(dec));

                Constraint sel;
                sel.a[wire(bits + plan.bits_per - 1)] = 1;
                sel.b[wire(plan.in_base + j)] = 1;
                sel.c[wire(plan.out_base + j)] = 1;
                inst.constraints.push_back(std::move(sel));

                for (std::size_t i = 0; i < plan.bits_per; ++i) {
                    Constraint boolc;
                    boolc.a[wire(bits + i)] = 1;
                    boolc.b[wire(bits + i)] = 1;
                    boolc.b[0] = field.neg(1);
                    inst.constraints.push_back(std::move(boolc));
                }
            }
        }
    }
    return inst;
}

Witness gen_witness(const R1CSInstance& instance, const slzkcc::LayerSelection& selection,
                    const slzkcc::CalibrationConfig& calib,
                    const graph::FixedPointTensor& private_inputs,
                    const std::vector<std::uint64_t>& public_inputs) {
    if (private_inputs.scale_bits != calib.scale_bits)
        throw WagonError(ErrorCode::InputScaleMismatch, "private inputs not at calibration scale");
    if (public_inputs.size() != instance.num_public - 1)
        throw WagonError(ErrorCode::LengthMismatch, "wrong number of public inputs");
    if (private_inputs.data.size() != selection.sub_graph.input_dim)
        throw WagonError(ErrorCode::DimensionMismatch, "private input length mismatch");

    Field field(instance.modulus);
    const unsigned s = calib.scale_bits, B = calib.value_bits;
    Layout layout = build_layout(selection, calib);
    if (layout.num_wires != instance.num_wires)
        throw WagonError(ErrorCode::LengthMismatch, "instance does not match selection/calibration");

    graph::ForwardTrace trace =
        graph::forward_fixed_trace(selection.sub_graph, private_inputs, s);

    Witness w;
    w.assignment.assign(instance.num_wires, 0);
    w.assignment[0] = 1;
    for (std::size_t i = 0; i < public_inputs.size(); ++i)
        w.assignment[1 + i] = field.reduce_u64(public_inputs[i]);
    for (std::size_t i = 0; i < private_inputs.data.size(); ++i)
        w.assignment[layout.priv_base + i] = field.from_signed(private_inputs.data[i]);

    auto trace_for = [&](std::size_t layer_index) -> const graph::LayerTrace& {
        return trace.layers.at(layer_index);
    };

    for (const LayerPlan& plan : layout.plans) {
        const graph::LayerTrace& lt = trace_for(plan.layer_index);
        for (std::size_t j = 0; j < plan.out_dim; ++j)
            w.assignment[plan.out_base + j] = field.from_signed(lt.out[j]);
        if (plan.dense && s > 0) {
            for (std::size_t j = 0; j < plan.out_dim; ++j) {
                std::int64_t t = lt.raw[j];
                w.assignment[plan.t_base + j] = field.from_signed(t);
                __int128 v = static_cast<__int128>(t) + (static_cast<__int128>(1) << (B + s - 1));
                if (v < 0 || v >= (static_cast<__int128>(1) << (B + s)))
                    throw WagonError(ErrorCode::HintOverflow,
                                     "accumulator exceeds the calibrated bit width");
                for (std::size_t i = 0; i < plan.bits_per; ++i)
                    w.assignment[plan.bits_base + j * plan.bits_per + i] =
                        static_cast<std::uint64_t>((v >> i) & 1);
            }
        } else if (!plan.dense) {
            for (std::size_t j = 0; j < plan.out_dim; ++j) {
                std::int64_t x = lt.raw[j];
                __int128 v = static_cast<__int128>(x) + (static_cast<__int128>(1) << (B - 1));
                if (v < 0 || v >= (static_cast<__int128>(1) << B))
                    throw WagonError(ErrorCode::HintOverflow,
                                     "activation input exceeds the calibrated bit width");
                for (std::size_t i = 0; i < plan.bits_per; ++i)
                    w.assignment[plan.bits_base + j * plan.bits_per + i] =
                        static_cast<std::uint64_t>((v >> i) & 1);
            }
        }
    }
    return w;
}

namespace {

std::uint64_t eval_row(const SparseRow& row, const std::vector<std::uint64_t>& w,
                       const Field& field) {
    std::uint64_t acc = 0;
    for (const auto& [idx, coeff] : row) acc = field.add(acc, field.mul(coeff, w[idx]));
    return acc;
}

SatisfactionResult check_impl(const R1CSInstance& instance, const Witness& witness, bool parallel) {
    if (witness.assignment.size() != instance.num_wires)
        throw WagonError(ErrorCode::LengthMismatch, "witness length mismatch");
    Field field(instance.modulus);
    const auto n = static_cast<std::int64_t>(instance.constraints.size());
    std::int64_t first_bad = n;
#pragma omp parallel for if (parallel) schedule(static) reduction(min : first_bad)
    for (std::int64_t i = 0; i < n; ++i) {
        const Constraint& c = instance.constraints[static_cast<std::size_t>(i)];
        std::uint64_t a = eval_row(c.a, witness.assignment, field);
        std::uint64_t b = eval_row(c.b, witness.assignment, field);
        std::uint64_t cc = eval_row(c.c, witness.assignment, field);
        if (field.mul(a, b) != cc) first_bad = std::min(first_bad, i);
    }
    SatisfactionResult res;
    res.ok = first_bad == n;
    if (!res.ok) res.first_violated = static_cast<std::size_t>(first_bad);
    return res;
}

}  // namespace

SatisfactionResult check_satisfaction(const R1CSInstance& instance, const Witness& witness) {
    return check_impl(instance, witness, true);
}

namespace reference {
SatisfactionResult check_satisfaction(const R1CSInstance& instance, const Witness& witness) {
    return check_impl(instance, witness, false);
}
}  // namespace reference

namespace {

json row_to_json(const SparseRow& row) {
    json j = json::object();
    for (const auto& [idx, coeff] : row) j[std::to_string(idx)] = std::to_string(coeff);
    return j;
}

SparseRow row_from_json(const json& j) {
    SparseRow row;
    for (auto it = j.begin(); it != j.end(); ++it)
        row[static_cast<std::uint32_t>(std::stoul(it.key()))] = std::stoull(it.value().get<std::string>());
    return row;
}

}  // namespace

std::string R1CSInstance::to_json() const {
    json j;
    j["num_wires"] = num_wires;
    j["num_public"] = num_public;
    j["modulus"] = std::to_string(modulus);
    j["circuit_version"] = circuit_version;
    json cs = json::array();
    for (const Constraint& c : constraints) {
        json cj;
        cj["a"] = row_to_json(c.a);
        cj["b"] = row_to_json(c.b);
        cj["c"] = row_to_json(c.c);
        cs.push_back(std::move(cj));
    }
    j["constraints"] = std::move(cs);
    return j.dump();
}

R1CSInstance R1CSInstance::from_json(const std::string& text) {
    try {
        json j = json::parse(text);
        R1CSInstance inst;
        inst.num_wires = j.at("num_wires").get<std::uint32_t>();
        inst.num_public = j.at("num_public").get<std::uint32_t>();
        inst.modulus = std::stoull(j.at("modulus").get<std::string>());
        inst.circuit_version = j.at("circuit_version").get<std::string>();
        for (const json& cj : j.at("constraints")) {
            Constraint c;
            c.a = row_from_json(cj.at("a"));
            c.b = row_from_json(cj.at("b"));
            c.c = row_from_json(cj.at("c"));
            inst.constraints.push_back(std::move(c));
        }
        return inst;
    } catch (const json::exception& e) {
        throw WagonError(ErrorCode::MalformedGraph, std::string("r1cs instance: ") + e.what());
    }
}

Digest R1CSInstance::circuit_digest() const {
    return sha256(to_json());
}

std::string Witness::to_json() const {
    json j;
    json vals = json::array();
    for (auto v : assignment) vals.push_back(std::to_string(v));
    j["assignment"] = std::move(vals);
    return j.dump();
}

Witness Witness::from_json(const std::string& text) {
    try {
        json j = json::parse(text);
        Witness w;
        for (const json& v : j.at("assignment")) w.assignment.push_back(std::stoull(v.get<std::string>()));
        return w;
    } catch (const json::exception& e) {
        throw WagonError(ErrorCode::MalformedGraph, std::string("witness: ") + e.what());
    }
}

std::uint64_t digest_to_field(const Digest& d, const Field& field) {
    return field.reduce_u64(get_be64(d.data()));
}

std::uint64_t output_hash_element(const std::vector<std::int64_t>& output, const Field& field) {
    Bytes msg;
    for (auto v : output) put_le64(msg, field.from_signed(v));
    return digest_to_field(sha256(msg), field);
}

}  // namespace wagon::r1cs

#include "wagon/graph.hpp"

#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "wagon/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wagon::graph {

using nlohmann::json;

std::size_t FixedPointTensor::size() const {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::int64_t quantize_value(double v, unsigned scale_bits) {
    return static_cast<std::int64_t>(std::floor(v * std::ldexp(1.0, static_cast<int>(scale_bits)) + 0.5));
}

FixedPointTensor quantize(const std::vector<double>& values, unsigned scale_bits) {
    FixedPointTensor t;
    t.shape = {values.size()};
    t.scale_bits = scale_bits;
    t.data.reserve(values.size());
    for (double v : values) t.data.push_back(quantize_value(v, scale_bits));
    return t;
}

std::vector<double> dequantize(const FixedPointTensor& t) {
    double inv = std::ldexp(1.0, -static_cast<int>(t.scale_bits));
    std::vector<double> out;
    out.reserve(t.data.size());
    for (auto q : t.data) out.push_back(static_cast<double>(q) * inv);
    return out;
}

std::size_t Layer::out_dim(std::size_t in_dim) const {
    return kind == LayerKind::Dense ? weights.shape.at(0) : in_dim;
}

std::size_t ComputationGraph::output_dim() const {
    return std::accumulate(output_shape.begin(), output_shape.end(), std::size_t{1},
                           std::multiplies<>());
}

std::string ComputationGraph::model_digest() const {
    return to_hex(sha256(save_graph(*this)));
}

namespace {

void check_magnitude(const FixedPointTensor& t) {
    const std::int64_t bound = std::int64_t{1} << kMagnitudeBoundBits;
    for (auto q : t.data)
        if (q >= bound || q <= -bound)
            throw WagonError(ErrorCode::MagnitudeOverflow, "tensor value exceeds magnitude bound");
}

json tensor_to_json(const FixedPointTensor& t) {
    json j;
    j["shape"] = t.shape;
    j["data"] = t.data;
    j["scale_bits"] = t.scale_bits;
    return j;
}

FixedPointTensor tensor_from_json(const json& j) {
    FixedPointTensor t;
    t.shape = j.at("shape").get<std::vector<std::size_t>>();
    t.data = j.at("data").get<std::vector<std::int64_t>>();
    t.scale_bits = j.at("scale_bits").get<unsigned>();
    if (t.size() != t.data.size())
        throw WagonError(ErrorCode::ShapeMismatch, "tensor shape does not match data length");
    check_magnitude(t);
    return t;
}

void validate(const ComputationGraph& g) {
    if (g.input_dim == 0) throw WagonError(ErrorCode::MalformedGraph, "input_dim must be positive");
    // C == 1 is tolerated for internal sub-graphs whose outputs never render.
    if (g.output_shape.size() != 3 || (g.output_shape[2] != 3 && g.output_shape[2] != 1))
        throw WagonError(ErrorCode::ShapeMismatch, "output_shape must be [H, W, 3]");
    std::size_t dim = g.input_dim;
    for (std::size_t i = 0; i < g.layers.size(); ++i) {
        const Layer& layer = g.layers[i];
        if (layer.kind == LayerKind::Dense) {
            if (layer.weights.shape.size() != 2)
                throw WagonError(ErrorCode::ShapeMismatch, "dense weights must be rank 2");
            std::size_t out = layer.weights.shape[0], in = layer.weights.shape[1];
            if (in != dim)
                throw WagonError(ErrorCode::ShapeMismatch,
                                 "layer " + std::to_string(i) + " expects in=" + std::to_string(in) +
                                     " but chain provides " + std::to_string(dim));
            if (layer.bias.shape != std::vector<std::size_t>{out})
                throw WagonError(ErrorCode::ShapeMismatch, "dense bias shape must be [out]");
            dim = out;
        }
    }
    if (dim != g.output_dim())
        throw WagonError(ErrorCode::ShapeMismatch, "layer chain does not reach output_shape");
}

}  // namespace

std::string save_graph(const ComputationGraph& g) {
    json j;
    j["model_id"] = g.model_id;
    j["architecture"] = g.architecture == Architecture::GAN ? "GAN" : "Autoencoder";
    j["input_dim"] = g.input_dim;
    j["output_shape"] = g.output_shape;
    json layers = json::array();
    for (const Layer& layer : g.layers) {
        json lj;
        if (layer.kind == LayerKind::Dense) {
            lj["kind"] = "Dense";
            lj["weights"] = tensor_to_json(layer.weights);
            lj["bias"] = tensor_to_json(layer.bias);
        } else {
            lj["kind"] = "Activation";
            lj["activation"] = layer.activation == ActivationKind::ReLU ? "ReLU" : "Identity";
        }
        if (!layer.tags.empty()) lj["tags"] = layer.tags;
        layers.push_back(std::move(lj));
    }
    j["layers"] = std::move(layers);
    return j.dump();
}

ComputationGraph load_graph(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw WagonError(ErrorCode::MalformedGraph, e.what());
    }
    ComputationGraph g;
    try {
        g.model_id = j.at("model_id").get<std::string>();
        std::string arch = j.at("architecture").get<std::string>();
        if (arch == "GAN")
            g.architecture = Architecture::GAN;
        else if (arch == "Autoencoder")
            g.architecture = Architecture::Autoencoder;
        else
            throw WagonError(ErrorCode::MalformedGraph, "unknown architecture " + arch);
        g.input_dim = j.at("input_dim").get<std::size_t>();
        g.output_shape = j.at("output_shape").get<std::vector<std::size_t>>();
        for (const json& lj : j.at("layers")) {
            Layer layer;
            std::string kind = lj.at("kind").get<std::string>();
            if (kind == "Dense") {
                layer.kind = LayerKind::Dense;
                layer.weights = tensor_from_json(lj.at("weights"));
                layer.bias = tensor_from_json(lj.at("bias"));
            } else if (kind == "Activation") {
                layer.kind = LayerKind::Activation;
                std::string act = lj.at("activation").get<std::string>();
                if (act == "ReLU")
                    layer.activation = ActivationKind::ReLU;
                else if (act == "Identity")
                    layer.activation = ActivationKind::Identity;
                else
                    throw WagonError(ErrorCode::UnsupportedLayerKind, "unknown activation " + act);
            } else {
                throw WagonError(ErrorCode::UnsupportedLayerKind, "unknown layer kind " + kind);
            }
            if (lj.contains("tags")) layer.tags = lj.at("tags").get<std::set<std::string>>();
            g.layers.push_back(std::move(layer));
        }
    } catch (const json::exception& e) {
        throw WagonError(ErrorCode::MalformedGraph, e.what());
    }
    validate(g);
    return g;
}

ComputationGraph load_graph(std::span<const std::uint8_t> bytes) {
    return load_graph(std::string(bytes.begin(), bytes.end()));
}

std::vector<double> forward_float(const ComputationGraph& g, const std::vector<double>& input) {
    return forward_float_range(g, input, 0, g.layers.size());
}

std::vector<double> forward_float_range(const ComputationGraph& g, const std::vector<double>& input,
                                        std::size_t first, std::size_t last) {
    std::vector<double> x = input;
    for (std::size_t i = first; i < last; ++i) {
        const Layer& layer = g.layers[i];
        if (layer.kind == LayerKind::Dense) {
            std::size_t out = layer.weights.shape[0], in = layer.weights.shape[1];
            if (x.size() != in)
                throw WagonError(ErrorCode::DimensionMismatch, "input length mismatch");
            double wscale = std::ldexp(1.0, -static_cast<int>(layer.weights.scale_bits));
            double bscale = std::ldexp(1.0, -static_cast<int>(layer.bias.scale_bits));
            std::vector<double> y(out);
            for (std::size_t r = 0; r < out; ++r) {
                double acc = static_cast<double>(layer.bias.data[r]) * bscale;
                const std::int64_t* row = layer.weights.data.data() + r * in;
                for (std::size_t c = 0; c < in; ++c)
                    acc += static_cast<double>(row[c]) * wscale * x[c];
                y[r] = acc;
            }
            x = std::move(y);
        } else if (layer.activation == ActivationKind::ReLU) {
            for (double& v : x) v = std::max(0.0, v);
        }
    }
    return x;
}

namespace {

std::vector<std::int64_t> dense_accumulate_impl(const std::vector<std::int64_t>& weights,
                                                const std::vector<std::int64_t>& bias,
                                                const std::vector<std::int64_t>& input,
                                                std::size_t out_dim, std::size_t in_dim,
                                                unsigned scale_bits, bool parallel) {
    std::vector<std::int64_t> t(out_dim);
    const std::int64_t bound = std::int64_t{1} << kMagnitudeBoundBits;
    bool overflow = false;
#pragma omp parallel for if (parallel) schedule(static) reduction(|| : overflow)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(out_dim); ++r) {
        __int128 acc = static_cast<__int128>(bias[static_cast<std::size_t>(r)])
                       << scale_bits;
        const std::int64_t* row = weights.data() + static_cast<std::size_t>(r) * in_dim;
        for (std::size_t c = 0; c < in_dim; ++c)
            acc += static_cast<__int128>(row[c]) * input[c];
        if (acc >= bound || acc <= -static_cast<__int128>(bound)) overflow = true;
        t[static_cast<std::size_t>(r)] = static_cast<std::int64_t>(acc);
    }
    if (overflow)
        throw WagonError(ErrorCode::MagnitudeOverflow, "dense accumulation exceeds magnitude bound");
    return t;
}

}  // namespace

namespace reference {
std::vector<std::int64_t> dense_accumulate(const std::vector<std::int64_t>& weights,
                                           const std::vector<std::int64_t>& bias,
                                           const std::vector<std::int64_t>& input,
                                           std::size_t out_dim, std::size_t in_dim,
                                           unsigned scale_bits) {
    return dense_accumulate_impl(weights, bias, input, out_dim, in_dim, scale_bits, false);
}
}  // namespace reference

std::vector<std::int64_t> dense_accumulate(const std::vector<std::int64_t>& weights,
                                           const std::vector<std::int64_t>& bias,
                                           const std::vector<std::int64_t>& input,
                                           std::size_t out_dim, std::size_t in_dim,
                                           unsigned scale_bits) {
    return dense_accumulate_impl(weights, bias, input, out_dim, in_dim, scale_bits, true);
}

std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>> quantize_layer_weights(
    const Layer& layer, unsigned scale_bits) {
    std::size_t out = layer.weights.shape[0], in = layer.weights.shape[1];
    std::vector<std::int64_t> wq(out * in), bq(out);
    double wmul = std::ldexp(1.0, -static_cast<int>(layer.weights.scale_bits));
    double bmul = std::ldexp(1.0, -static_cast<int>(layer.bias.scale_bits));
    for (std::size_t i = 0; i < wq.size(); ++i)
        wq[i] = quantize_value(static_cast<double>(layer.weights.data[i]) * wmul, scale_bits);
    for (std::size_t i = 0; i < out; ++i)
        bq[i] = quantize_value(static_cast<double>(layer.bias.data[i]) * bmul, scale_bits);
    return {std::move(wq), std::move(bq)};
}

ForwardTrace forward_fixed_trace(const ComputationGraph& g, const FixedPointTensor& input,
                                 unsigned scale_bits, unsigned magnitude_bound_bits) {
    if (input.scale_bits != scale_bits)
        throw WagonError(ErrorCode::InputScaleMismatch, "input scale differs from requested scale");
    const std::int64_t bound = std::int64_t{1} << magnitude_bound_bits;
    ForwardTrace trace;
    std::vector<std::int64_t> x = input.data;
    for (std::size_t li = 0; li < g.layers.size(); ++li) {
        const Layer& layer = g.layers[li];
        LayerTrace lt;
        lt.layer_index = li;
        if (layer.kind == LayerKind::Dense) {
            std::size_t out = layer.weights.shape[0], in = layer.weights.shape[1];
            if (x.size() != in)
                throw WagonError(ErrorCode::DimensionMismatch, "input length mismatch");
            auto [wq, bq] = quantize_layer_weights(layer, scale_bits);
            lt.raw = dense_accumulate(wq, bq, x, out, in, scale_bits);
            x.resize(out);
            for (std::size_t i = 0; i < out; ++i) x[i] = floor_div_pow2(lt.raw[i], scale_bits);
        } else {
            lt.raw = x;
            if (layer.activation == ActivationKind::ReLU)
                for (auto& v : x) v = std::max<std::int64_t>(0, v);
        }
        for (auto v : x)
            if (v >= bound || v <= -bound)
                throw WagonError(ErrorCode::MagnitudeOverflow, "intermediate exceeds magnitude bound");
        lt.out = x;
        trace.layers.push_back(std::move(lt));
    }
    trace.output.shape = {x.size()};
    trace.output.data = std::move(x);
    trace.output.scale_bits = scale_bits;
    return trace;
}

FixedPointTensor forward_fixed(const ComputationGraph& g, const FixedPointTensor& input,
                               unsigned scale_bits, unsigned magnitude_bound_bits) {
    return forward_fixed_trace(g, input, scale_bits, magnitude_bound_bits).output;
}

RasterImage render_image(const FixedPointTensor& output, const std::vector<std::size_t>& output_shape) {
    std::size_t total = std::accumulate(output_shape.begin(), output_shape.end(), std::size_t{1},
                                        std::multiplies<>());
    if (output_shape.size() != 3 || output_shape[2] != 3 || total != output.data.size())
        throw WagonError(ErrorCode::ShapeMismatch, "output shape does not match tensor length");
    RasterImage img;
    img.height = static_cast<std::uint32_t>(output_shape[0]);
    img.width = static_cast<std::uint32_t>(output_shape[1]);
    img.pixels.resize(total);
    double inv = std::ldexp(1.0, -static_cast<int>(output.scale_bits));
    for (std::size_t i = 0; i < total; ++i) {
        double v = std::clamp(static_cast<double>(output.data[i]) * inv, 0.0, 1.0);
        img.pixels[i] = static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
    }
    return img;
}

std::vector<double> expand_latent(std::uint64_t seed, std::size_t dim) {
    std::vector<double> z(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        Bytes msg;
        put_be64(msg, seed);
        put_be64(msg, static_cast<std::uint64_t>(i));
        Digest d = sha256(msg);
        std::uint64_t u = get_be64(d.data());
        z[i] = 2.0 * (static_cast<double>(u) * std::ldexp(1.0, -64)) - 1.0;
    }
    return z;
}

}  // namespace wagon::graph

#pragma once

#include <random>

#include "wagon/graph.hpp"
#include "wagon/proof.hpp"
#include "wagon/slzkcc.hpp"

namespace fixtures {

using namespace wagon;

inline graph::FixedPointTensor tensor(std::vector<std::size_t> shape,
                                      std::vector<std::int64_t> data, unsigned scale_bits) {
    graph::FixedPointTensor t;
    t.shape = std::move(shape);
    t.data = std::move(data);
    t.scale_bits = scale_bits;
    return t;
}

// Dense layer passing its input through unchanged (identity weights, scale 0).
inline graph::Layer identity_dense(std::size_t dim) {
    graph::Layer l;
    l.kind = graph::LayerKind::Dense;
    std::vector<std::int64_t> w(dim * dim, 0);
    for (std::size_t i = 0; i < dim; ++i) w[i * dim + i] = 1;
    l.weights = tensor({dim, dim}, std::move(w), 0);
    l.bias = tensor({dim}, std::vector<std::int64_t>(dim, 0), 0);
    return l;
}

inline graph::Layer dense(std::size_t out, std::size_t in, std::mt19937_64& rng,
                          unsigned scale_bits = 6, std::int64_t max_mag = 48) {
    graph::Layer l;
    l.kind = graph::LayerKind::Dense;
    std::uniform_int_distribution<std::int64_t> dist(-max_mag, max_mag);
    std::vector<std::int64_t> w(out * in);
    for (auto& v : w) v = dist(rng);
    std::vector<std::int64_t> b(out);
    for (auto& v : b) v = dist(rng);
    l.weights = tensor({out, in}, std::move(w), scale_bits);
    l.bias = tensor({out}, std::move(b), scale_bits);
    return l;
}

inline graph::Layer activation(graph::ActivationKind kind) {
    graph::Layer l;
    l.kind = graph::LayerKind::Activation;
    l.activation = kind;
    return l;
}

inline graph::ComputationGraph identity_graph(std::size_t dim = 2) {
    graph::ComputationGraph g;
    g.model_id = "identity-" + std::to_string(dim);
    g.architecture = graph::Architecture::GAN;
    g.input_dim = dim;
    g.layers.push_back(identity_dense(dim));
    g.output_shape = {1, dim, 1};
    return g;
}

// 4-layer toy GAN stand-in: Dense(d->h) + ReLU + Dense(h -> H*W*3) + Identity.
inline graph::ComputationGraph toy_gan(std::size_t height = 256, std::size_t width = 256,
                                       std::size_t latent = 4, std::size_t hidden = 8,
                                       std::uint64_t seed = 42,
                                       const std::string& model_id = "toy-gan") {
    std::mt19937_64 rng(seed);
    graph::ComputationGraph g;
    g.model_id = model_id;
    g.architecture = graph::Architecture::GAN;
    g.input_dim = latent;
    g.layers.push_back(dense(hidden, latent, rng));
    g.layers.push_back(activation(graph::ActivationKind::ReLU));
    g.layers.push_back(dense(height * width * 3, hidden, rng, 6, 16));
    g.layers.push_back(activation(graph::ActivationKind::Identity));
    g.output_shape = {height, width, 3};
    return g;
}

// Toy autoencoder stand-in: encoder Dense, bottleneck-tagged Dense + ReLU,
// decoder Dense.
inline graph::ComputationGraph toy_ae(std::size_t height = 256, std::size_t width = 256,
                                      std::size_t input = 16, std::size_t bottleneck = 6,
                                      std::uint64_t seed = 7,
                                      const std::string& model_id = "toy-ae") {
    std::mt19937_64 rng(seed);
    graph::ComputationGraph g;
    g.model_id = model_id;
    g.architecture = graph::Architecture::Autoencoder;
    g.input_dim = input;
    g.layers.push_back(dense(bottleneck, input, rng));
    g.layers.push_back(dense(bottleneck, bottleneck, rng));
    g.layers.back().tags.insert("bottleneck");
    g.layers.push_back(activation(graph::ActivationKind::ReLU));
    g.layers.push_back(dense(height * width * 3, bottleneck, rng, 6, 16));
    g.output_shape = {height, width, 3};
    return g;
}

inline RasterImage random_image(std::uint32_t width, std::uint32_t height, std::mt19937_64& rng) {
    RasterImage img = make_image(width, height);
    std::uniform_int_distribution<int> dist(0, 255);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(dist(rng));
    return img;
}

inline Bytes random_bytes(std::size_t n, std::mt19937_64& rng) {
    Bytes b(n);
    std::uniform_int_distribution<int> dist(0, 255);
    for (auto& v : b) v = static_cast<std::uint8_t>(dist(rng));
    return b;
}

// Calibration batches drawn from the distribution the sub-circuit actually
// sees: model latents mapped through the layers preceding the selection.
inline std::vector<wagon::slzkcc::Batch> sub_input_batches(
    const wagon::graph::ComputationGraph& model, const wagon::slzkcc::LayerSelection& selection,
    std::size_t num_batches = 10, std::size_t batch_size = 8, std::uint64_t seed = 1) {
    std::size_t first = selection.selected_indices.front();
    std::vector<wagon::slzkcc::Batch> batches(num_batches);
    std::uint64_t counter = 0;
    for (auto& batch : batches)
        for (std::size_t i = 0; i < batch_size; ++i) {
            std::vector<double> z = wagon::graph::expand_latent((seed << 32) + counter++,
                                                                model.input_dim);
            batch.push_back(first == 0 ? z : wagon::graph::forward_float_range(model, z, 0, first));
        }
    return batches;
}

// Synthetic m-constraint system (y_i = x_i) with one salt public input; used
// by soundness experiments where a controlled fraction of constraints must be
// violated.
struct CopySystem {
    r1cs::R1CSInstance instance;
    r1cs::Witness witness;
};

inline CopySystem copy_system(std::size_t m, std::uint64_t salt, std::mt19937_64& rng) {
    CopySystem cs;
    cs.instance.num_public = 2;  // constant + salt
    cs.instance.num_wires = static_cast<std::uint32_t>(2 + 2 * m);
    cs.instance.circuit_version = "copy-" + std::to_string(m);
    cs.witness.assignment.assign(cs.instance.num_wires, 0);
    cs.witness.assignment[0] = 1;
    cs.witness.assignment[1] = salt;
    std::uniform_int_distribution<std::uint64_t> dist(0, kDefaultModulus - 1);
    for (std::size_t i = 0; i < m; ++i) {
        auto x = static_cast<std::uint32_t>(2 + i);
        auto y = static_cast<std::uint32_t>(2 + m + i);
        std::uint64_t v = dist(rng);
        cs.witness.assignment[x] = v;
        cs.witness.assignment[y] = v;
        r1cs::Constraint c;
        c.a[x] = 1;
        c.b[0] = 1;
        c.c[y] = 1;
        cs.instance.constraints.push_back(std::move(c));
    }
    return cs;
}

}  // namespace fixtures

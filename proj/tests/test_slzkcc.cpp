#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wagon/errors.hpp"
#include "wagon/slzkcc.hpp"

#include "fixtures.hpp"

using namespace wagon;

TEST_CASE("policy parsing round-trips") {
    auto p = slzkcc::parse_policy("gan-prefix:3");
    CHECK(std::get<slzkcc::GanPrefix>(p).k == 3);
    CHECK(slzkcc::policy_name(p) == "gan-prefix:3");
    CHECK(std::get<slzkcc::GanPrefix>(slzkcc::parse_policy("gan-prefix")).k == 1);
    CHECK(std::holds_alternative<slzkcc::AeBottleneck>(slzkcc::parse_policy("ae-bottleneck")));
    CHECK_THROWS_AS(slzkcc::parse_policy("unknown"), WagonError);
}

TEST_CASE("gan-prefix selects the contiguous prefix") {
    graph::ComputationGraph g = fixtures::toy_gan(16, 16);
    slzkcc::LayerSelection sel = slzkcc::select_layers(g, slzkcc::GanPrefix{1});
    CHECK(sel.selected_indices == std::vector<std::size_t>{0});
    CHECK(sel.sub_graph.model_id == "toy-gan#sel");
    CHECK(sel.sub_graph.input_dim == g.input_dim);
    CHECK(sel.sub_graph.layers.size() == 1);
    // Layer 0 is the latent projection.
    CHECK(sel.sub_graph.layers[0].weights == g.layers[0].weights);
    // The sub-graph type-checks on its own.
    CHECK_NOTHROW(graph::load_graph(graph::save_graph(sel.sub_graph)));
}

TEST_CASE("gan-prefix of the full depth selects the whole graph") {
    graph::ComputationGraph g = fixtures::toy_gan(16, 16);
    slzkcc::LayerSelection sel = slzkcc::select_layers(g, slzkcc::GanPrefix{g.layers.size()});
    CHECK(sel.selected_indices.size() == g.layers.size());
    CHECK(sel.sub_graph.layers.size() == g.layers.size());
    for (std::size_t i = 0; i < g.layers.size(); ++i)
        CHECK(sel.sub_graph.layers[i].kind == g.layers[i].kind);
}

TEST_CASE("gan-prefix error cases") {
    graph::ComputationGraph gan = fixtures::toy_gan(16, 16);
    graph::ComputationGraph ae = fixtures::toy_ae(16, 16);
    try {
        slzkcc::select_layers(gan, slzkcc::GanPrefix{gan.layers.size() + 1});
        FAIL("expected SelectionOutOfRange");
    } catch (const WagonError& e) {
        CHECK(e.code() == ErrorCode::SelectionOutOfRange);
    }
    try {
        slzkcc::select_layers(ae, slzkcc::GanPrefix{1});
        FAIL("expected PolicyMismatch");
    } catch (const WagonError& e) {
        CHECK(e.code() == ErrorCode::PolicyMismatch);
    }
}

TEST_CASE("ae-bottleneck selects tagged layer plus following activation") {
    graph::ComputationGraph g = fixtures::toy_ae(16, 16);
    // Fixture: encoder Dense (0), bottleneck Dense (1), ReLU (2), decoder (3).
    slzkcc::LayerSelection sel = slzkcc::select_layers(g, slzkcc::AeBottleneck{});
    CHECK(sel.selected_indices == std::vector<std::size_t>{1, 2});
    CHECK(sel.sub_graph.layers.size() == 2);
    CHECK(sel.sub_graph.layers[1].kind == graph::LayerKind::Activation);
    // Segment input dim is the encoder output width.
    CHECK(sel.sub_graph.input_dim == g.layers[0].weights.shape[0]);
}

TEST_CASE("ae-bottleneck errors") {
    graph::ComputationGraph gan = fixtures::toy_gan(16, 16);
    try {
        slzkcc::select_layers(gan, slzkcc::AeBottleneck{});
        FAIL("expected PolicyMismatch");
    } catch (const WagonError& e) {
        CHECK(e.code() == ErrorCode::PolicyMismatch);
    }
    graph::ComputationGraph ae = fixtures::toy_ae(16, 16);
    for (auto& l : ae.layers) l.tags.clear();
    try {
        slzkcc::select_layers(ae, slzkcc::AeBottleneck{});
        FAIL("expected NoBottleneckTag");
    } catch (const WagonError& e) {
        CHECK(e.code() == ErrorCode::NoBottleneckTag);
    }
}

TEST_CASE("prefix selection evaluates like the same layers in the full graph") {
    graph::ComputationGraph g = fixtures::toy_gan(16, 16);
    slzkcc::LayerSelection sel = slzkcc::select_layers(g, slzkcc::GanPrefix{2});
    for (std::uint64_t seed : {1ULL, 9ULL}) {
        std::vector<double> z = graph::expand_latent(seed, g.input_dim);
        CHECK(graph::forward_float(sel.sub_graph, z) ==
              graph::forward_float_range(g, z, 0, 2));
    }
}

TEST_CASE("calibrate returns s=4 for the identity sub-graph") {
    graph::ComputationGraph g = fixtures::identity_graph(4);
    slzkcc::LayerSelection sel = slzkcc::select_layers(g, slzkcc::GanPrefix{1});
    auto batches = slzkcc::default_batches(4);
    slzkcc::CalibrationConfig cfg = slzkcc::calibrate(sel, batches, std::ldexp(1.0, -4));
    CHECK(cfg.scale_bits == 4);  // identity is exact at any scale; minimum wins
    CHECK(cfg.tolerance == std::ldexp(1.0, -4));
    CHECK(cfg.batches_used == 10);
}

TEST_CASE("calibrate agrees with a brute-force search over the grid") {
    std::mt19937_64 rng(31);
    graph::ComputationGraph g;
    g.model_id = "cal";
    g.architecture = graph::Architecture::GAN;
    g.input_dim = 6;
    g.layers.push_back(fixtures::dense(5, 6, rng));
    g.layers.push_back(fixtures::activation(graph::ActivationKind::ReLU));
    g.output_shape = {1, 5, 1};
    slzkcc::LayerSelection sel = slzkcc::select_layers(g, slzkcc::GanPrefix{2});
    auto batches = slzkcc::default_batches(6);
    const double tol = slzkcc::kDefaultTolerance;
    slzkcc::CalibrationConfig cfg = slzkcc::calibrate(sel, batches, tol);

    // Brute force from scratch: smallest s whose probe meets tolerance, then
    // smallest B that range-checks the largest magnitude seen.
    unsigned want_s = 0, want_b = 0;
    for (unsigned s = slzkcc::kScaleMin; s <= slzkcc::kScaleMax && want_s == 0; ++s) {
        double worst = 0.0;
        std::int64_t max_mag = 0;
        for (const auto& batch : batches) {
            for (const auto& input : batch) {
                graph::FixedPointTensor q = graph::quantize(input, s);
                graph::ForwardTrace tr = graph::forward_fixed_trace(sel.sub_graph, q, s);
                std::vector<double> ref =
                    graph::forward_float(sel.sub_graph, graph::dequantize(q));
                std::vector<double> got = graph::dequantize(tr.output);
                for (std::size_t i = 0; i < ref.size(); ++i)
                    worst = std::max(worst, std::abs(got[i] - ref[i]));
                for (const auto& lt : tr.layers)
                    for (auto v : lt.out) max_mag = std::max(max_mag, std::abs(v));
            }
        }
        if (worst > tol) continue;
        for (unsigned b = slzkcc::kValueBitsMin; b <= slzkcc::kValueBitsMax; ++b) {
            if (max_mag < (std::int64_t{1} << (b - 1))) {
                want_s = s;
                want_b = b;
                break;
            }
        }
    }
    REQUIRE(want_s != 0);
    CHECK(cfg.scale_bits == want_s);
    CHECK(cfg.value_bits == want_b);
}

TEST_CASE("calibration monotonicity: a passing (s,B) implies (s,B+1) passes") {
    std::mt19937_64 rng(37);
    graph::ComputationGraph g;
    g.model_id = "mono";
    g.architecture = graph::Architecture::GAN;
    g.input_dim = 4;
    g.layers.push_back(fixtures::dense(4, 4, rng));
    g.output_shape = {1, 4, 1};
    slzkcc::LayerSelection sel = slzkcc::select_layers(g, slzkcc::GanPrefix{1});
    auto batches = slzkcc::default_batches(4);
    slzkcc::CalibrationConfig cfg = slzkcc::calibrate(sel, batches);
    slzkcc::CalibrationProbe probe = slzkcc::probe_scale(sel, batches, cfg.scale_bits);
    CHECK_FALSE(probe.overflowed);
    CHECK(probe.max_error <= cfg.tolerance);
    // B covers the largest magnitude, so every larger B does too; and the
    // returned B is minimal.
    CHECK(probe.max_magnitude < (std::int64_t{1} << (cfg.value_bits - 1)));
    if (cfg.value_bits > slzkcc::kValueBitsMin)
        CHECK(probe.max_magnitude >= (std::int64_t{1} << (cfg.value_bits - 2)));
}

TEST_CASE("calibrate is infeasible when every scale overflows") {
    graph::ComputationGraph g;
    g.model_id = "huge";
    g.architecture = graph::Architecture::GAN;
    g.input_dim = 2;
    graph::Layer l;
    l.kind = graph::LayerKind::Dense;
    l.weights = fixtures::tensor({2, 2}, std::vector<std::int64_t>(4, std::int64_t{1} << 40), 0);
    l.bias = fixtures::tensor({2}, {0, 0}, 0);
    g.layers.push_back(l);
    g.layers.push_back(l);  // 2^80-scale products overflow the magnitude bound
    g.output_shape = {1, 2, 1};
    slzkcc::LayerSelection sel = slzkcc::select_layers(g, slzkcc::GanPrefix{2});
    try {
        slzkcc::calibrate(sel, slzkcc::default_batches(2));
        FAIL("expected CalibrationInfeasible");
    } catch (const WagonError& e) {
        CHECK(e.code() == ErrorCode::CalibrationInfeasible);
    }
}

TEST_CASE("calibrate rejects empty batch sets") {
    graph::ComputationGraph g = fixtures::identity_graph(2);
    slzkcc::LayerSelection sel = slzkcc::select_layers(g, slzkcc::GanPrefix{1});
    try {
        slzkcc::calibrate(sel, {});
        FAIL("expected EmptyBatch");
    } catch (const WagonError& e) {
        CHECK(e.code() == ErrorCode::EmptyBatch);
    }
    try {
        slzkcc::calibrate(sel, {slzkcc::Batch{}});
        FAIL("expected EmptyBatch");
    } catch (const WagonError& e) {
        CHECK(e.code() == ErrorCode::EmptyBatch);
    }
}

TEST_CASE("calibration is deterministic down to the serialized bytes") {
    graph::ComputationGraph g = fixtures::toy_gan(16, 16);
    slzkcc::LayerSelection sel = slzkcc::select_layers(g, slzkcc::GanPrefix{1});
    auto batches = slzkcc::default_batches(g.input_dim);
    std::string a = slzkcc::calibrate(sel, batches).to_json();
    std::string b = slzkcc::calibrate(sel, batches).to_json();
    CHECK(a == b);
    CHECK(slzkcc::CalibrationConfig::from_json(a) == slzkcc::calibrate(sel, batches));
}

TEST_CASE("default batches are deterministic and correctly shaped") {
    auto a = slzkcc::default_batches(4);
    auto b = slzkcc::default_batches(4);
    CHECK(a.size() == 10);
    CHECK(a[0].size() == 8);
    CHECK(a[0][0].size() == 4);
    CHECK(a == b);
    CHECK(a != slzkcc::default_batches(4, 10, 8, 2));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <thread>

#include "wagon/errors.hpp"
#include "wagon/remote.hpp"

#include "fixtures.hpp"

using namespace wagon;
using namespace std::chrono;

namespace {

struct Fixture {
    slzkcc::LayerSelection selection;
    slzkcc::CalibrationConfig calib;
    proof::ProvingKey pk;
    proof::VerificationKey vk;
};

Fixture make_fixture() {
    graph::ComputationGraph g = fixtures::identity_graph(2);
    Fixture f;
    f.selection = slzkcc::select_layers(g, slzkcc::GanPrefix{1});
    f.calib.scale_bits = 4;
    f.calib.value_bits = 12;
    auto [pk, vk] = proof::setup(r1cs::compile_r1cs(f.selection, f.calib), 16);
    f.pk = pk;
    f.vk = vk;
    return f;
}

remote::MockProverServer::Deployment deployment_of(const Fixture& f, bool stall = false) {
    remote::MockProverServer::Deployment d;
    d.selection = f.selection;
    d.calib = f.calib;
    d.pk = f.pk;
    d.stall = stall;
    return d;
}

}  // namespace

TEST_CASE("loopback: remote proof verifies locally") {
    Fixture f = make_fixture();
    remote::MockProverServer server;
    server.deploy("identity-2", deployment_of(f));
    server.start();

    graph::FixedPointTensor latent = fixtures::tensor({2}, {48, -32}, 4);
    std::string input = remote::make_prove_input(latent, {5, 6});
    proof::ProofBundle bundle =
        remote::remote_prove(server.endpoint(), "identity-2", input, milliseconds(5),
                             milliseconds(5000));
    CHECK(bundle.scheme == proof::kScheme);
    CHECK(bundle.circuit_version == "identity-2#sel@r1cs-v1");
    CHECK(bundle.public_inputs == std::vector<std::string>{"5", "6"});
    CHECK(proof::verify(f.vk, bundle).accepted);

    // Matches the local prover byte for byte.
    auto w = r1cs::gen_witness(f.pk.instance, f.selection, f.calib, latent, {5, 6});
    CHECK(bundle.to_json() == proof::prove(f.pk, w).to_json());
    server.stop();
}

TEST_CASE("concurrent jobs keep independent state") {
    Fixture f = make_fixture();
    remote::MockProverServer server;
    server.deploy("identity-2", deployment_of(f));
    server.start();

    std::vector<std::thread> threads;
    std::vector<std::string> results(8);
    for (int i = 0; i < 8; ++i) {
        threads.emplace_back([&, i] {
            graph::FixedPointTensor latent = fixtures::tensor({2}, {16 * i, -i}, 4);
            std::string input = remote::make_prove_input(latent,
                                                         {static_cast<std::uint64_t>(i), 1});
            proof::ProofBundle b = remote::remote_prove(server.endpoint(), "identity-2", input,
                                                        milliseconds(2), milliseconds(5000));
            results[static_cast<std::size_t>(i)] = b.to_json();
        });
    }
    for (auto& t : threads) t.join();
    for (int i = 0; i < 8; ++i) {
        proof::ProofBundle b = proof::ProofBundle::from_json(results[static_cast<std::size_t>(i)]);
        CHECK(proof::verify(f.vk, b).accepted);
        CHECK(b.public_inputs[0] == std::to_string(i));
    }
    server.stop();
}

TEST_CASE("server-side failure surfaces as JobFailed with the message") {
    Fixture f = make_fixture();
    remote::MockProverServer server;
    server.deploy("identity-2", deployment_of(f));
    server.start();

    graph::FixedPointTensor wrong_scale = fixtures::tensor({2}, {48, -32}, 7);
    std::string input = remote::make_prove_input(wrong_scale, {5, 6});
    try {
        remote::remote_prove(server.endpoint(), "identity-2", input, milliseconds(5),
                             milliseconds(5000));
        FAIL("expected JobFailed");
    } catch (const WagonError& e) {
        CHECK(e.code() == ErrorCode::JobFailed);
        CHECK(std::string(e.what()).find("InputScaleMismatch") != std::string::npos);
    }
    server.stop();
}

TEST_CASE("undeployed model is a protocol error") {
    Fixture f = make_fixture();
    remote::MockProverServer server;
    server.start();
    graph::FixedPointTensor latent = fixtures::tensor({2}, {0, 0}, 4);
    try {
        remote::remote_prove(server.endpoint(), "missing", remote::make_prove_input(latent, {0, 0}),
                             milliseconds(5), milliseconds(1000));
        FAIL("expected ProtocolError");
    } catch (const WagonError& e) {
        CHECK(e.code() == ErrorCode::ProtocolError);
    }
    server.stop();
}

TEST_CASE("stalled job times out only after the deadline") {
    Fixture f = make_fixture();
    remote::MockProverServer server;
    server.deploy("identity-2", deployment_of(f, /*stall=*/true));
    server.start();

    graph::FixedPointTensor latent = fixtures::tensor({2}, {1, 2}, 4);
    const auto timeout = milliseconds(200);
    auto t0 = steady_clock::now();
    try {
        remote::remote_prove(server.endpoint(), "identity-2",
                             remote::make_prove_input(latent, {0, 0}), milliseconds(10), timeout);
        FAIL("expected JobTimeout");
    } catch (const WagonError& e) {
        CHECK(e.code() == ErrorCode::JobTimeout);
    }
    CHECK(steady_clock::now() - t0 >= timeout);
    server.stop();
}

TEST_CASE("unreachable endpoint is a protocol error") {
    graph::FixedPointTensor latent = fixtures::tensor({2}, {0, 0}, 4);
    try {
        remote::remote_prove("http://127.0.0.1:1", "x", remote::make_prove_input(latent, {}),
                             milliseconds(5), milliseconds(100));
        FAIL("expected ProtocolError");
    } catch (const WagonError& e) {
        CHECK(e.code() == ErrorCode::ProtocolError);
    }
}

TEST_CASE("make_prove_input is canonical") {
    graph::FixedPointTensor latent = fixtures::tensor({2}, {3, -4}, 5);
    std::string j = remote::make_prove_input(latent, {10, 20});
    CHECK(j ==
          R"({"private_input":{"data":[3,-4],"scale_bits":5},"public_inputs":["10","20"]})");
}

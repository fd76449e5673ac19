#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>

#include "wagon/proof.hpp"

namespace wagon::remote {

// Wire protocol:
//   POST {endpoint}/jobs  {"model_id": ..., "input": {...}}  -> 201 {"job_id": ...}
//   GET  {endpoint}/jobs/{id}          -> {"status": "pending"|"done"|"failed", "message"?}
//   GET  {endpoint}/jobs/{id}/proof    -> ProofBundle JSON
proof::ProofBundle remote_prove(const std::string& endpoint, const std::string& model_id,
                                const std::string& input_json,
                                std::chrono::milliseconds poll_interval,
                                std::chrono::milliseconds timeout);

// Canonical job-input JSON for a proving request.
std::string make_prove_input(const graph::FixedPointTensor& private_inputs,
                             const std::vector<std::uint64_t>& public_inputs);

// Mock proving service, wire-compatible with the protocol above. Each
// pre-deployed model carries everything needed to build witnesses and prove.
class MockProverServer {
public:
    struct Deployment {
        slzkcc::LayerSelection selection;
        slzkcc::CalibrationConfig calib;
        proof::ProvingKey pk;
        bool stall = false;  // never completes; exercises client timeouts
    };

    MockProverServer();
    ~MockProverServer();
    MockProverServer(const MockProverServer&) = delete;
    MockProverServer& operator=(const MockProverServer&) = delete;

    void deploy(const std::string& model_id, Deployment deployment);

    // Binds to 127.0.0.1 on a free port (or the given one); returns the port.
    int start(int port = 0);
    void stop();
    std::string endpoint() const;

    // Serve on the calling thread until stop() (used by the CLI).
    void run(int port);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace wagon::remote

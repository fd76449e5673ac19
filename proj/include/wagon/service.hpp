#pragma once

#include <memory>
#include <optional>
#include <string>

#include "wagon/pipeline.hpp"

namespace wagon::service {

// Embedded HTTP service:
//   POST /generate {"model_id","seed"} -> {"bundle":{...},"image_png_base64":"..."}
//   POST /verify   (multipart field "image", PNG or PPM) -> Verdict JSON (200/422)
//   GET  /healthz  -> "ok"
// All shared state is immutable after construction.
class Service {
public:
    struct Config {
        graph::ComputationGraph model;
        slzkcc::Policy policy;
        slzkcc::CalibrationConfig calib;
        proof::ProvingKey pk;
        proof::VerificationKey vk;
        std::optional<binding::SecretKey> secret;
        pipeline::ProverBackend prover;
    };

    explicit Service(Config config);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    int start(int port = 0);  // background thread; returns bound port
    void stop();
    void run(int port);  // serve on the calling thread

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::string base64_encode(std::span<const std::uint8_t> data);

}  // namespace wagon::service

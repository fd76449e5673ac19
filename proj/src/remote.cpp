#include "wagon/remote.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "wagon/errors.hpp"

namespace wagon::remote {

using nlohmann::json;

std::string make_prove_input(const graph::FixedPointTensor& private_inputs,
                             const std::vector<std::uint64_t>& public_inputs) {
    json j;
    json pi;
    pi["data"] = private_inputs.data;
    pi["scale_bits"] = private_inputs.scale_bits;
    j["private_input"] = std::move(pi);
    json pubs = json::array();
    for (auto v : public_inputs) pubs.push_back(std::to_string(v));
    j["public_inputs"] = std::move(pubs);
    return j.dump();
}

proof::ProofBundle remote_prove(const std::string& endpoint, const std::string& model_id,
                                const std::string& input_json,
                                std::chrono::milliseconds poll_interval,
                                std::chrono::milliseconds timeout) {
    httplib::Client cli(endpoint);
    cli.set_connection_timeout(5, 0);

    json body;
    body["model_id"] = model_id;
    try {
        body["input"] = json::parse(input_json);
    } catch (const json::parse_error&) {
        throw WagonError(ErrorCode::ProtocolError, "job input is not valid JSON");
    }
    auto res = cli.Post("/jobs", body.dump(), "application/json");
    if (!res) throw WagonError(ErrorCode::ProtocolError, "prover endpoint unreachable");
    if (res->status != 201)
        throw WagonError(ErrorCode::ProtocolError,
                         "job submission returned " + std::to_string(res->status));
    std::string job_id;
    try {
        job_id = json::parse(res->body).at("job_id").get<std::string>();
    } catch (const json::exception&) {
        throw WagonError(ErrorCode::ProtocolError, "malformed job submission response");
    }

    auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
        auto st = cli.Get("/jobs/" + job_id);
        if (!st || st->status != 200)
            throw WagonError(ErrorCode::ProtocolError, "job status request failed");
        std::string status;
        std::string message;
        try {
            json sj = json::parse(st->body);
            status = sj.at("status").get<std::string>();
            if (sj.contains("message")) message = sj.at("message").get<std::string>();
        } catch (const json::exception&) {
            throw WagonError(ErrorCode::ProtocolError, "malformed job status response");
        }
        if (status == "done") break;
        if (status == "failed") throw WagonError(ErrorCode::JobFailed, message);
        if (status != "pending")
            throw WagonError(ErrorCode::ProtocolError, "unknown job status " + status);
        if (std::chrono::steady_clock::now() >= deadline)
            throw WagonError(ErrorCode::JobTimeout, "job still pending after timeout");
        std::this_thread::sleep_for(poll_interval);
    }

    auto pr = cli.Get("/jobs/" + job_id + "/proof");
    if (!pr || pr->status != 200)
        throw WagonError(ErrorCode::ProtocolError, "proof retrieval failed");
    return proof::ProofBundle::from_json(pr->body);
}

struct MockProverServer::Impl {
    struct Job {
        std::string status;  // pending | done | failed
        std::string message;
        std::string bundle_json;
    };

    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::mutex mu;
    std::map<std::string, Deployment> deployments;
    std::map<std::string, Job> jobs;
    std::atomic<std::uint64_t> next_job{1};

    void route() {
        server.Post("/jobs", [this](const httplib::Request& req, httplib::Response& res) {
            std::string model_id;
            json input;
            try {
                json body = json::parse(req.body);
                model_id = body.at("model_id").get<std::string>();
                input = body.at("input");
            } catch (const json::exception&) {
                res.status = 400;
                res.set_content("{\"error\":\"malformed job request\"}", "application/json");
                return;
            }
            Deployment dep;
            {
                std::lock_guard lock(mu);
                auto it = deployments.find(model_id);
                if (it == deployments.end()) {
                    res.status = 404;
                    res.set_content("{\"error\":\"model not deployed\"}", "application/json");
                    return;
                }
                dep = it->second;
            }
            std::string id = "job-" + std::to_string(next_job.fetch_add(1));
            Job job;
            if (dep.stall) {
                job.status = "pending";
            } else {
                try {
                    graph::FixedPointTensor priv;
                    priv.data = input.at("private_input").at("data").get<std::vector<std::int64_t>>();
                    priv.shape = {priv.data.size()};
                    priv.scale_bits = input.at("private_input").at("scale_bits").get<unsigned>();
                    std::vector<std::uint64_t> pubs;
                    for (const json& s : input.at("public_inputs"))
                        pubs.push_back(std::stoull(s.get<std::string>()));
                    auto witness =
                        r1cs::gen_witness(dep.pk.instance, dep.selection, dep.calib, priv, pubs);
                    job.bundle_json = proof::prove(dep.pk, witness).to_json();
                    job.status = "done";
                } catch (const std::exception& e) {
                    job.status = "failed";
                    job.message = e.what();
                }
            }
            {
                std::lock_guard lock(mu);
                jobs[id] = std::move(job);
            }
            res.status = 201;
            json out;
            out["job_id"] = id;
            res.set_content(out.dump(), "application/json");
        });

        server.Get(R"(/jobs/([^/]+)/proof)", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
            std::lock_guard lock(mu);
            auto it = jobs.find(req.matches[1]);
            if (it == jobs.end() || it->second.status != "done") {
                res.status = 404;
                res.set_content("{\"error\":\"no proof available\"}", "application/json");
                return;
            }
            res.set_content(it->second.bundle_json, "application/json");
        });

        server.Get(R"(/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            std::lock_guard lock(mu);
            auto it = jobs.find(req.matches[1]);
            if (it == jobs.end()) {
                res.status = 404;
                res.set_content("{\"error\":\"unknown job\"}", "application/json");
                return;
            }
            json out;
            out["status"] = it->second.status;
            if (!it->second.message.empty()) out["message"] = it->second.message;
            res.set_content(out.dump(), "application/json");
        });
    }
};

MockProverServer::MockProverServer() : impl_(std::make_unique<Impl>()) { impl_->route(); }

MockProverServer::~MockProverServer() { stop(); }

void MockProverServer::deploy(const std::string& model_id, Deployment deployment) {
    std::lock_guard lock(impl_->mu);
    impl_->deployments[model_id] = std::move(deployment);
}

int MockProverServer::start(int port) {
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
    } else {
        impl_->server.bind_to_port("127.0.0.1", port);
        impl_->port = port;
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->port;
}

void MockProverServer::stop() {
    if (impl_ && impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

std::string MockProverServer::endpoint() const {
    return "http://127.0.0.1:" + std::to_string(impl_->port);
}

void MockProverServer::run(int port) {
    impl_->port = port;
    impl_->server.listen("127.0.0.1", port);
}

}  // namespace wagon::remote

#include "wagon/service.hpp"

#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "wagon/errors.hpp"

namespace wagon::service {

using nlohmann::json;

std::string base64_encode(std::span<const std::uint8_t> data) {
    static const char* table = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    for (std::size_t i = 0; i < data.size(); i += 3) {
        std::uint32_t v = static_cast<std::uint32_t>(data[i]) << 16;
        if (i + 1 < data.size()) v |= static_cast<std::uint32_t>(data[i + 1]) << 8;
        if (i + 2 < data.size()) v |= data[i + 2];
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out.push_back(i + 1 < data.size() ? table[(v >> 6) & 63] : '=');
        out.push_back(i + 2 < data.size() ? table[v & 63] : '=');
    }
    return out;
}

struct Service::Impl {
    Config config;
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit Impl(Config cfg) : config(std::move(cfg)) { route(); }

    void route() {
        server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("ok", "text/plain");
        });

        server.Post("/generate", [this](const httplib::Request& req, httplib::Response& res) {
            std::string model_id;
            std::uint64_t seed = 0;
            try {
                json body = json::parse(req.body);
                model_id = body.at("model_id").get<std::string>();
                seed = body.at("seed").get<std::uint64_t>();
            } catch (const json::exception& e) {
                res.status = 400;
                json err;
                err["error"] = std::string("malformed request: ") + e.what();
                res.set_content(err.dump(), "application/json");
                return;
            }
            if (model_id != config.model.model_id) {
                res.status = 400;
                res.set_content("{\"error\":\"unknown model_id\"}", "application/json");
                return;
            }
            if (!config.secret) {
                res.status = 400;
                res.set_content("{\"error\":\"service has no secret key loaded\"}",
                                "application/json");
                return;
            }
            try {
                pipeline::CreateResult created = pipeline::create_watermarked_image(
                    config.model, config.policy, config.calib, seed, *config.secret, config.pk,
                    config.prover);
                json out;
                out["bundle"] = json::parse(created.bundle.to_json());
                out["image_png_base64"] = base64_encode(encode_png(created.watermarked));
                res.set_content(out.dump(), "application/json");
            } catch (const std::exception& e) {
                res.status = 500;
                json err;
                err["error"] = e.what();
                res.set_content(err.dump(), "application/json");
            }
        });

        server.Post("/verify", [this](const httplib::Request& req, httplib::Response& res) {
            std::string body;
            if (req.is_multipart_form_data()) {
                if (!req.has_file("image")) {
                    res.status = 400;
                    res.set_content("{\"error\":\"missing multipart field 'image'\"}",
                                    "application/json");
                    return;
                }
                body = req.get_file_value("image").content;
            } else {
                body = req.body;
            }
            RasterImage img;
            try {
                auto data = std::span<const std::uint8_t>(
                    reinterpret_cast<const std::uint8_t*>(body.data()), body.size());
                if (body.size() >= 2 && body[0] == 'P' && body[1] == '6')
                    img = decode_ppm(data);
                else
                    img = decode_png(data);
            } catch (const std::exception& e) {
                res.status = 400;
                json err;
                err["error"] = std::string("cannot decode image: ") + e.what();
                res.set_content(err.dump(), "application/json");
                return;
            }
            pipeline::Verdict verdict =
                pipeline::verify_watermarked_image(img, config.vk, config.secret);
            res.status = verdict.accepted ? 200 : 422;
            res.set_content(verdict.to_json(), "application/json");
        });
    }
};

Service::Service(Config config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Service::~Service() { stop(); }

int Service::start(int port) {
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
    } else {
        impl_->server.bind_to_port("0.0.0.0", port);
        impl_->port = port;
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->port;
}

void Service::stop() {
    if (impl_ && impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

void Service::run(int port) {
    impl_->port = port;
    impl_->server.listen("0.0.0.0", port);
}

}  // namespace wagon::service

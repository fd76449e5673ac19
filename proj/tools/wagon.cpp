#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "wagon/pipeline.hpp"
#include "wagon/remote.hpp"
#include "wagon/service.hpp"

namespace {

constexpr const char* kSecretEnv = "WAGON_SECRET_KEY";

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw wagon::WagonError(wagon::ErrorCode::IoError, "cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw wagon::WagonError(wagon::ErrorCode::IoError, "cannot write " + path);
    out << data;
}

std::optional<wagon::binding::SecretKey> resolve_secret(const std::string& secret_file,
                                                        bool required) {
    if (!secret_file.empty()) return wagon::binding::SecretKey::from_file(secret_file);
    if (std::getenv(kSecretEnv)) return wagon::binding::SecretKey::from_env(kSecretEnv);
    if (required)
        throw wagon::WagonError(wagon::ErrorCode::InvalidArgument,
                                std::string("no secret key: pass --secret-file or set $") +
                                    kSecretEnv);
    return std::nullopt;
}

struct CircuitArgs {
    std::string model_path;
    std::string policy_text = "gan-prefix:1";
    std::string calib_path;

    void attach(CLI::App* cmd, bool with_calib = true) {
        cmd->add_option("--model", model_path, "Wagon Graph Format model JSON")->required();
        cmd->add_option("--policy", policy_text, "gan-prefix:<k> or ae-bottleneck");
        if (with_calib)
            cmd->add_option("--calib", calib_path, "calibration config JSON")->required();
    }

    wagon::graph::ComputationGraph model() const {
        return wagon::graph::load_graph(read_file(model_path));
    }
    wagon::slzkcc::Policy policy() const { return wagon::slzkcc::parse_policy(policy_text); }
    wagon::slzkcc::CalibrationConfig calib() const {
        return wagon::slzkcc::CalibrationConfig::from_json(read_file(calib_path));
    }
};

wagon::graph::FixedPointTensor latent_for(const wagon::graph::ComputationGraph& g,
                                          std::uint64_t seed, unsigned scale_bits) {
    return wagon::graph::quantize(wagon::graph::expand_latent(seed, g.input_dim), scale_bits);
}

// The vector feeding the first selected layer: the latent itself for a prefix
// selection, an intermediate activation for a bottleneck one.
wagon::graph::FixedPointTensor sub_input_for(const wagon::graph::ComputationGraph& g,
                                             const wagon::slzkcc::LayerSelection& selection,
                                             std::uint64_t seed, unsigned scale_bits) {
    wagon::graph::FixedPointTensor latent = latent_for(g, seed, scale_bits);
    std::size_t first = selection.selected_indices.front();
    if (first == 0) return latent;
    wagon::graph::ForwardTrace trace = wagon::graph::forward_fixed_trace(g, latent, scale_bits);
    wagon::graph::FixedPointTensor sub;
    sub.data = trace.layers[first - 1].out;
    sub.shape = {sub.data.size()};
    sub.scale_bits = scale_bits;
    return sub;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ZK watermarking pipeline: generate, prove, embed, verify"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "generate an (unwatermarked) image from a model");
    std::string gen_model, gen_out;
    std::uint64_t gen_seed = 0;
    unsigned gen_scale = 8;
    gen->add_option("--model", gen_model)->required();
    gen->add_option("--seed", gen_seed)->required();
    gen->add_option("--out", gen_out, "output image (.png or .ppm)")->required();
    gen->add_option("--scale-bits", gen_scale, "fixed-point scale for evaluation");

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "select layers and calibrate quantization");
    CircuitArgs cal_args;
    cal_args.attach(cal, false);
    std::string cal_out;
    double cal_tolerance = wagon::slzkcc::kDefaultTolerance;
    std::size_t cal_batches = 10, cal_batch_size = 8;
    std::uint64_t cal_seed = 1;
    cal->add_option("--out", cal_out, "calibration config output")->required();
    cal->add_option("--tolerance", cal_tolerance);
    cal->add_option("--batches", cal_batches);
    cal->add_option("--batch-size", cal_batch_size);
    cal->add_option("--batch-seed", cal_seed);

    // setup
    auto* set = app.add_subcommand("setup", "compile the circuit and emit proving/verification keys");
    CircuitArgs set_args;
    set_args.attach(set);
    std::string set_pk, set_vk;
    unsigned set_k = wagon::proof::kDefaultChallenges;
    set->add_option("--pk", set_pk, "proving key output")->required();
    set->add_option("--vk", set_vk, "verification key output")->required();
    set->add_option("--challenges", set_k, "Fiat-Shamir challenge count");

    // prove
    auto* prv = app.add_subcommand("prove", "produce a proof bundle for a seeded generation");
    CircuitArgs prv_args;
    prv_args.attach(prv);
    std::string prv_pk, prv_out, prv_remote;
    std::uint64_t prv_seed = 0;
    prv->add_option("--pk", prv_pk)->required();
    prv->add_option("--seed", prv_seed)->required();
    prv->add_option("--out", prv_out, "proof bundle output")->required();
    prv->add_option("--remote", prv_remote, "remote prover endpoint URL");

    // watermark
    auto* wm = app.add_subcommand("watermark", "generate, prove, sign, and embed in one pass");
    CircuitArgs wm_args;
    wm_args.attach(wm);
    std::string wm_pk, wm_out, wm_bundle_out, wm_original_out, wm_secret, wm_remote;
    std::uint64_t wm_seed = 0;
    wm->add_option("--pk", wm_pk)->required();
    wm->add_option("--seed", wm_seed)->required();
    wm->add_option("--out", wm_out, "watermarked image output (.png or .ppm)")->required();
    wm->add_option("--bundle-out", wm_bundle_out, "also write the signed bundle JSON");
    wm->add_option("--original-out", wm_original_out, "also write the pre-embedding image");
    wm->add_option("--secret-file", wm_secret, "secret key file (or set $WAGON_SECRET_KEY)");
    wm->add_option("--remote", wm_remote, "remote prover endpoint URL");

    // extract
    auto* ext = app.add_subcommand("extract", "recover the embedded bundle without verifying");
    std::string ext_image, ext_out;
    ext->add_option("--image", ext_image)->required();
    ext->add_option("--out", ext_out, "write the extracted bundle JSON here");

    // verify
    auto* ver = app.add_subcommand("verify", "verify a watermarked image end to end");
    std::string ver_image, ver_vk, ver_secret, ver_report;
    ver->add_option("--image", ver_image)->required();
    ver->add_option("--vk", ver_vk)->required();
    ver->add_option("--secret-file", ver_secret, "owner-mode signature check");
    ver->add_option("--report", ver_report, "write the verdict JSON here");

    // serve
    auto* srv = app.add_subcommand("serve", "run the HTTP service (or the mock prover)");
    CircuitArgs srv_args;
    srv_args.attach(srv);
    std::string srv_pk, srv_vk, srv_secret, srv_remote;
    int srv_port = 8080;
    bool srv_mock = false;
    srv->add_option("--pk", srv_pk)->required();
    srv->add_option("--vk", srv_vk);
    srv->add_option("--port", srv_port);
    srv->add_option("--secret-file", srv_secret);
    srv->add_option("--remote", srv_remote, "proxy proving to this endpoint");
    srv->add_flag("--mock-prover", srv_mock, "serve the remote-prover mock protocol instead");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*gen) {
            auto g = wagon::graph::load_graph(read_file(gen_model));
            auto out = wagon::graph::forward_fixed(g, latent_for(g, gen_seed, gen_scale), gen_scale);
            wagon::save_image(gen_out, wagon::graph::render_image(out, g.output_shape));
            return 0;
        }
        if (*cal) {
            auto g = cal_args.model();
            auto selection = wagon::slzkcc::select_layers(g, cal_args.policy());
            // Calibrate on the distribution the sub-circuit actually sees:
            // model latents mapped through the layers before the selection.
            std::vector<wagon::slzkcc::Batch> batches(cal_batches);
            std::size_t first = selection.selected_indices.front();
            std::uint64_t counter = 0;
            for (auto& batch : batches)
                for (std::size_t i = 0; i < cal_batch_size; ++i) {
                    auto z = wagon::graph::expand_latent((cal_seed << 32) + counter++, g.input_dim);
                    batch.push_back(first == 0 ? z
                                               : wagon::graph::forward_float_range(g, z, 0, first));
                }
            auto cfg = wagon::slzkcc::calibrate(selection, batches, cal_tolerance);
            write_file(cal_out, cfg.to_json());
            std::cout << cfg.to_json() << "\n";
            return 0;
        }
        if (*set) {
            auto g = set_args.model();
            auto selection = wagon::slzkcc::select_layers(g, set_args.policy());
            auto instance = wagon::r1cs::compile_r1cs(selection, set_args.calib());
            auto [pk, vk] = wagon::proof::setup(instance, set_k);
            write_file(set_pk, pk.to_json());
            write_file(set_vk, vk.to_json());
            return 0;
        }
        if (*prv) {
            auto g = prv_args.model();
            auto selection = wagon::slzkcc::select_layers(g, prv_args.policy());
            auto calib = prv_args.calib();
            auto pk = wagon::proof::ProvingKey::from_json(read_file(prv_pk));
            auto latent = sub_input_for(g, selection, prv_seed, calib.scale_bits);
            wagon::Field field(pk.instance.modulus);
            auto pubs = wagon::pipeline::public_inputs_for(g, selection, calib, latent, field);
            wagon::proof::ProofBundle bundle;
            if (prv_remote.empty()) {
                auto witness = wagon::r1cs::gen_witness(pk.instance, selection, calib, latent, pubs);
                bundle = wagon::proof::prove(pk, witness);
            } else {
                bundle = wagon::remote::remote_prove(prv_remote, g.model_id,
                                                     wagon::remote::make_prove_input(latent, pubs),
                                                     std::chrono::milliseconds(50),
                                                     std::chrono::milliseconds(60000));
            }
            write_file(prv_out, bundle.to_json());
            return 0;
        }
        if (*wm) {
            auto g = wm_args.model();
            auto secret = resolve_secret(wm_secret, true);
            auto pk = wagon::proof::ProvingKey::from_json(read_file(wm_pk));
            wagon::pipeline::ProverBackend backend{wm_remote};
            auto created = wagon::pipeline::create_watermarked_image(
                g, wm_args.policy(), wm_args.calib(), wm_seed, *secret, pk, backend);
            wagon::save_image(wm_out, created.watermarked);
            if (!wm_bundle_out.empty()) write_file(wm_bundle_out, created.bundle.to_json());
            if (!wm_original_out.empty()) wagon::save_image(wm_original_out, created.original);
            return 0;
        }
        if (*ext) {
            auto img = wagon::load_image(ext_image);
            auto result = wagon::pipeline::inspect(img);
            std::cout << result.to_json() << "\n";
            if (!result.bundle) {
                std::cerr << result.to_json() << "\n";
                return 1;
            }
            if (!ext_out.empty()) write_file(ext_out, result.bundle->to_json());
            return 0;
        }
        if (*ver) {
            auto img = wagon::load_image(ver_image);
            auto vk = wagon::proof::VerificationKey::from_json(read_file(ver_vk));
            auto secret = resolve_secret(ver_secret, false);
            auto verdict = wagon::pipeline::verify_watermarked_image(img, vk, secret);
            std::cout << verdict.to_json() << "\n";
            if (!verdict.accepted) {
                std::cerr << verdict.to_json() << "\n";
            }
            if (!ver_report.empty()) write_file(ver_report, verdict.to_json());
            return verdict.accepted ? 0 : 1;
        }
        if (*srv) {
            auto g = srv_args.model();
            auto selection = wagon::slzkcc::select_layers(g, srv_args.policy());
            auto calib = srv_args.calib();
            auto pk = wagon::proof::ProvingKey::from_json(read_file(srv_pk));
            if (srv_mock) {
                wagon::remote::MockProverServer mock;
                mock.deploy(g.model_id, {selection, calib, pk, false});
                std::cerr << "mock prover listening on 127.0.0.1:" << srv_port << "\n";
                mock.run(srv_port);
                return 0;
            }
            if (srv_vk.empty())
                throw wagon::WagonError(wagon::ErrorCode::InvalidArgument, "--vk is required");
            wagon::service::Service::Config cfg{
                g,
                srv_args.policy(),
                calib,
                pk,
                wagon::proof::VerificationKey::from_json(read_file(srv_vk)),
                resolve_secret(srv_secret, false),
                wagon::pipeline::ProverBackend{srv_remote}};
            wagon::service::Service service(std::move(cfg));
            std::cerr << "service listening on 0.0.0.0:" << srv_port << "\n";
            service.run(srv_port);
            return 0;
        }
    } catch (const wagon::WagonError& e) {
        std::cerr << e.what() << "\n";
        switch (e.code()) {
            case wagon::ErrorCode::InvalidArgument:
            case wagon::ErrorCode::IoError:
                return 2;
            default:
                return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedvit/artifacts.hpp"
#include "fedvit/attack.hpp"
#include "fedvit/crypto.hpp"
#include "fedvit/data_io.hpp"
#include "fedvit/errors.hpp"
#include "fedvit/federation.hpp"
#include "fedvit/run_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fedvit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

std::string format_accuracy_pct(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
    return buf;
}

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string key_id_hex(std::uint64_t id) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, id);
    return buf;
}

RunConfig load_config_with_overrides(const std::string& path, const std::string& mode_flag,
                                     const std::string& transport_flag, const std::string& address,
                                     int port) {
    RunConfig cfg = load_run_config(path);
    if (!mode_flag.empty()) cfg.mode = mode_from_string(mode_flag);
    if (!transport_flag.empty()) cfg.transport.kind = transport_flag;
    if (!address.empty()) cfg.transport.address = address;
    if (port >= 0) cfg.transport.port = static_cast<std::uint16_t>(port);
    cfg.validate();
    return cfg;
}

void write_metrics_csv(const std::vector<RoundRecord>& records, std::uint32_t clients,
                       const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot write metrics: " + path);
    out << "round";
    for (std::uint32_t c = 0; c < clients; ++c) out << ",loss_client" << c;
    out << ",accuracy\n";
    for (const auto& r : records) {
        out << r.round;
        for (double loss : r.client_losses) out << "," << format_full(loss);
        out << "," << format_full(r.accuracy) << "\n";
    }
}

json records_to_json(const std::vector<RoundRecord>& records) {
    json arr = json::array();
    for (const auto& r : records) {
        json losses = json::array();
        for (double l : r.client_losses) losses.push_back(l);
        arr.push_back({{"round", r.round},
                       {"client_losses", losses},
                       {"accuracy", r.accuracy},
                       {"wall_seconds", r.wall_seconds}});
    }
    return arr;
}

void write_manifest(const RunConfig& cfg, const std::vector<RoundRecord>& records,
                    double final_accuracy, std::uint64_t key_id, bool model_encrypted,
                    const fs::path& dir) {
    json manifest;
    manifest["schema"] = "fedvit-manifest-v1";
    manifest["config"] = json::parse(run_config_to_json(cfg));
    manifest["key_id"] = key_id ? key_id_hex(key_id) : "";
    manifest["rounds"] = records_to_json(records);
    manifest["final_accuracy"] = final_accuracy;
    manifest["final_accuracy_pct"] = format_accuracy_pct(final_accuracy);
    manifest["artifacts"] = {{"model", "model.fvw"},
                             {"metrics_csv", "metrics.csv"},
                             {"gradients", "gradients.fvg"},
                             {"model_encrypted", model_encrypted}};
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) throw FormatError("cannot write manifest in " + dir.string());
    out << manifest.dump(2) << "\n";
}

/// Round-1 single-sample gradient of client 0, the restoration-attack
/// input. Equals the wire update when batch_size is 1.
void write_attack_snapshot(const RunConfig& cfg, const SecretKey* key, const fs::path& dir) {
    const RunData data = prepare_run_data(cfg);
    const ModelParams initial = initial_model(cfg);
    const Sample& sample = data.train.samples[data.partition.by_client[0][0]];
    const GradientUpdate grad = backward(forward_loss(sample, initial, cfg.model), initial);

    AttackSnapshot snap;
    snap.config = cfg.model;
    snap.sample = sample;
    snap.g_pat = grad.g_pat;
    snap.g_pos = grad.g_pos;
    snap.matches_wire = cfg.batch_size == 1 && cfg.strategy == Strategy::FedSgd;
    if (cfg.mode == Mode::Encrypted) {
        const GradientUpdate enc = encrypt_grad(grad, *key);
        snap.enc_g_pat = enc.g_pat;
        snap.enc_g_pos = enc.g_pos;
    }
    save_attack_snapshot(snap, (dir / "gradients.fvg").string());
}

json metrics_json(const AttackMetrics& m) {
    json j;
    j["mse"] = m.mse;
    j["psnr_db"] = m.exact ? json("exact") : json(m.psnr);
    j["max_abs_err"] = m.max_abs_err;
    j["rank_used"] = m.rank_used;
    return j;
}

json case_json(const AttackCase& c) {
    json j;
    if (c.metrics.has_value()) {
        j = metrics_json(*c.metrics);
        j["inconclusive"] = false;
    } else {
        j["inconclusive"] = true;
        j["numerical_rank"] = c.rank_reported;
    }
    return j;
}

int cmd_keygen(const std::string& config_path, std::uint64_t seed, const std::string& out_path) {
    const RunConfig cfg = load_run_config(config_path);
    const SecretKey key = keygen(seed, cfg.model.patch_len(), cfg.model.num_patches());
    save_key(key, out_path);
    std::cout << "key_id: " << key_id_hex(key.key_id) << "\n";
    std::cout << "written: " << out_path << " (L=" << key.patch_len() << ", N=" << key.num_patches()
              << ")\n";
    return kExitOk;
}

int cmd_train(const RunConfig& cfg, const std::optional<SecretKey>& key, const std::string& role,
              std::uint32_t client_id, const std::string& out_dir) {
    const SecretKey* key_ptr = key.has_value() ? &*key : nullptr;

    if (role == "client") {
        RunData data = prepare_run_data(cfg);
        ClientRunContext ctx;
        ctx.client_id = client_id;
        ctx.key = key_ptr;
        ctx.options = {cfg.mode, cfg.strategy, cfg.lr, cfg.batch_size, cfg.local_epochs, cfg.model};
        ctx.train = &data.train;
        ctx.partition = data.partition.by_client[client_id];
        ctx.test = client_id == 0 ? &data.test : nullptr;
        ctx.rounds = cfg.rounds;
        auto conn = socket_connect(cfg.transport.address, cfg.transport.port);
        run_client(*conn, ctx);
        std::cout << "client " << client_id << " finished\n";
        return kExitOk;
    }

    const fs::path dir(out_dir);
    fs::create_directories(dir);

    SimulationResult result;
    bool model_encrypted = false;
    if (role == "server") {
        // Real distributed path: M external client processes connect.
        const ModelParams initial = initial_model(cfg);
        ModelParams initial_global =
            cfg.mode == Mode::Encrypted ? encrypt_model(initial, *key_ptr) : initial;
        SocketListener listener(cfg.transport.address, cfg.transport.port);
        std::vector<std::unique_ptr<Endpoint>> conns;
        for (std::uint32_t i = 0; i < cfg.clients; ++i) conns.push_back(listener.accept());
        ServerRunResult sr = run_server(std::move(conns), std::move(initial_global), cfg.strategy,
                                        cfg.lr, cfg.rounds);
        result.records = std::move(sr.records);
        result.final_accuracy = sr.final_accuracy;
        result.final_model = std::move(sr.final_global);  // ciphertext in encrypted mode
        result.key_id = key_ptr ? key_ptr->key_id : 0;
        model_encrypted = result.final_model.encrypted;
    } else {
        result = run_simulation(cfg, key_ptr);
    }

    save_model({cfg.model, result.final_model}, (dir / "model.fvw").string());
    write_metrics_csv(result.records, cfg.clients, (dir / "metrics.csv").string());
    write_manifest(cfg, result.records, result.final_accuracy, result.key_id, model_encrypted, dir);
    write_attack_snapshot(cfg, key_ptr, dir);
    {
        std::ofstream out(dir / "run_config.json", std::ios::trunc);
        out << run_config_to_json(cfg) << "\n";
    }
    std::cout << "rounds: " << result.records.size() << "\n";
    std::cout << "final accuracy (%): " << format_accuracy_pct(result.final_accuracy) << "\n";
    std::cout << "manifest: " << (dir / "manifest.json").string() << "\n";
    return kExitOk;
}

int cmd_attack(const std::string& run_dir, bool live, const std::string& config_path,
               std::size_t sample_index, const std::string& key_path, const std::string& out_dir) {
    const fs::path dir(out_dir);
    fs::create_directories(dir);

    std::optional<SecretKey> key;
    if (!key_path.empty()) key = load_key(key_path);

    json report;
    Sample truth;
    AttackCase plain_case, enc_case, dec_case;
    bool have_encrypted = false;
    bool have_decrypted = false;

    if (live) {
        const RunConfig cfg = load_run_config(config_path);
        const RunData data = prepare_run_data(cfg);
        if (sample_index >= data.test.size()) {
            throw ConfigError("sample index " + std::to_string(sample_index) +
                              " out of range (test set has " + std::to_string(data.test.size()) +
                              " samples)");
        }
        truth = data.test.samples[sample_index];
        if (!key.has_value()) {
            // No key file given: derive the run key from the config seed.
            key = keygen(cfg.seed, cfg.model.patch_len(), cfg.model.num_patches());
        }
        const ModelParams params = initial_model(cfg);
        const AttackReport rep = evaluate_attack(params, cfg.model, *key, truth);
        plain_case = rep.plain;
        enc_case = rep.encrypted;
        dec_case = rep.decrypted;
        have_encrypted = true;
        have_decrypted = true;
        report["baseline"] = metrics_json(rep.baseline);
    } else {
        const AttackSnapshot snap =
            load_attack_snapshot((fs::path(run_dir) / "gradients.fvg").string());
        truth = snap.sample;
        report["gradients_match_wire"] = snap.matches_wire;
        plain_case = attack_gradients(snap.g_pat, snap.g_pos, snap.config, false, truth);
        if (snap.enc_g_pat.has_value()) {
            have_encrypted = true;
            enc_case = attack_gradients(*snap.enc_g_pat, *snap.enc_g_pos, snap.config, true, truth);
            if (key.has_value()) {
                GradientUpdate enc = zero_gradient(snap.config);
                enc.g_pat = *snap.enc_g_pat;
                enc.g_pos = *snap.enc_g_pos;
                enc.encrypted = true;
                const GradientUpdate dec = decrypt_grad(enc, *key);
                dec_case = attack_gradients(dec.g_pat, dec.g_pos, snap.config, false, truth);
                have_decrypted = true;
            }
        }
        report["baseline"] = metrics_json(midgray_baseline(truth));
    }

    write_image(truth, (dir / "original.ppm").string());
    report["plain"] = case_json(plain_case);
    if (plain_case.reconstruction.has_value()) {
        write_image(*plain_case.reconstruction, (dir / "reconstructed_plain.ppm").string());
    }
    if (have_encrypted) {
        report["encrypted"] = case_json(enc_case);
        if (enc_case.reconstruction.has_value()) {
            write_image(*enc_case.reconstruction, (dir / "reconstructed_encrypted.ppm").string());
        }
        if (have_decrypted) {
            report["decrypted_with_key"] = case_json(dec_case);
            if (dec_case.reconstruction.has_value()) {
                write_image(*dec_case.reconstruction, (dir / "reconstructed_decrypted.ppm").string());
            }
        }
    }
    {
        std::ofstream out(dir / "attack_report.json", std::ios::trunc);
        out << report.dump(2) << "\n";
    }
    std::cout << report.dump(2) << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& model_path, const std::string& data_kind,
             const std::vector<std::string>& data_paths, std::uint64_t seed, std::size_t count,
             const std::string& key_path) {
    StoredModel stored = load_model(model_path);
    if (stored.params.encrypted) {
        if (key_path.empty()) {
            throw ConfigError("model is encrypted; pass --key to decrypt for evaluation");
        }
        stored.params = decrypt_model(stored.params, load_key(key_path));
    }
    Dataset ds;
    if (data_kind == "synth") {
        ds = synth_generate(Rng(seed).stream("test-data"), count, stored.config,
                            stored.config.num_classes);
    } else if (data_kind == "cifar10") {
        ds = load_cifar10_binary(data_paths);
    } else if (data_kind == "idx") {
        if (data_paths.size() != 2) throw ConfigError("idx eval needs --paths images,labels");
        ds = load_idx(data_paths[0], data_paths[1]);
    } else {
        throw ConfigError("--data must be synth|cifar10|idx");
    }
    if (ds.size() == 0) throw ConfigError("evaluation dataset is empty");
    if (ds.samples[0].h != stored.config.image_h || ds.samples[0].w != stored.config.image_w ||
        ds.samples[0].c != stored.config.channels) {
        throw ConfigError("dataset and model shapes disagree");
    }
    const double acc = evaluate_accuracy(stored.params, stored.config, ds.samples);
    std::cout << "accuracy (%): " << format_accuracy_pct(acc) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Encrypted federated learning for ViT-style embedding layers"};
    app.require_subcommand(1);

    auto* keygen_cmd = app.add_subcommand("keygen", "Generate a shared secret key file");
    std::uint64_t kg_seed = 0;
    std::string kg_out, kg_config;
    keygen_cmd->add_option("--seed", kg_seed, "Key seed")->required();
    keygen_cmd->add_option("--out", kg_out, "Key file path")->required();
    keygen_cmd->add_option("--model-config", kg_config, "Run config with the model block")
        ->required();

    auto* train_cmd = app.add_subcommand("train", "Run a federated training experiment");
    std::string tr_config, tr_mode, tr_transport, tr_key, tr_out = "run_out", tr_role, tr_address;
    int tr_port = -1;
    std::uint32_t tr_client_id = 0;
    train_cmd->add_option("--config", tr_config, "Run config JSON")->required();
    train_cmd->add_option("--mode", tr_mode, "plain|encrypted (overrides config)");
    train_cmd->add_option("--transport", tr_transport, "loopback|socket (overrides config)");
    train_cmd->add_option("--key", tr_key, "Key file (required in encrypted mode)");
    train_cmd->add_option("--out-dir", tr_out, "Output directory");
    train_cmd->add_option("--role", tr_role, "server|client for multi-process socket runs");
    train_cmd->add_option("--client-id", tr_client_id, "Client id for --role client");
    train_cmd->add_option("--address", tr_address, "Socket address (overrides config)");
    train_cmd->add_option("--port", tr_port, "Socket port (overrides config)");

    auto* attack_cmd = app.add_subcommand("attack", "Gradient-inversion restoration attack");
    std::string at_run, at_config, at_key, at_out = "attack_out";
    std::size_t at_index = 0;
    bool at_live = false;
    attack_cmd->add_option("--gradients-from-run", at_run, "Run directory with gradients.fvg");
    attack_cmd->add_flag("--live", at_live, "Generate gradients from the config instead");
    attack_cmd->add_option("--config", at_config, "Run config (required with --live)");
    attack_cmd->add_option("--sample-index", at_index, "Test-set sample to attack (--live)");
    attack_cmd->add_option("--key", at_key, "Key file for decrypt-then-attack");
    attack_cmd->add_option("--out-dir", at_out, "Output directory");

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model file on a dataset");
    std::string ev_model, ev_data = "synth", ev_key;
    std::vector<std::string> ev_paths;
    std::uint64_t ev_seed = 42;
    std::size_t ev_count = 500;
    eval_cmd->add_option("--model", ev_model, "Model file (FVW1)")->required();
    eval_cmd->add_option("--data", ev_data, "synth|cifar10|idx");
    eval_cmd->add_option("--paths", ev_paths, "Dataset files for cifar10/idx")->delimiter(',');
    eval_cmd->add_option("--seed", ev_seed, "Synthetic dataset seed");
    eval_cmd->add_option("--count", ev_count, "Synthetic dataset size");
    eval_cmd->add_option("--key", ev_key, "Key file when the model is encrypted");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand(keygen_cmd)) {
            return cmd_keygen(kg_config, kg_seed, kg_out);
        }
        if (app.got_subcommand(train_cmd)) {
            const RunConfig cfg =
                load_config_with_overrides(tr_config, tr_mode, tr_transport, tr_address, tr_port);
            if (!tr_role.empty() && tr_role != "server" && tr_role != "client") {
                throw ConfigError("--role must be server or client");
            }
            if (!tr_role.empty() && cfg.transport.kind != "socket") {
                throw ConfigError("--role requires --transport socket");
            }
            if (!tr_role.empty() && cfg.transport.port == 0) {
                throw ConfigError("--role requires an explicit --port");
            }
            if (tr_role == "client" && tr_client_id >= cfg.clients) {
                throw ConfigError("--client-id out of range");
            }
            std::optional<SecretKey> key;
            if (cfg.mode == Mode::Encrypted) {
                if (tr_key.empty()) {
                    throw ConfigError("encrypted mode requires --key <keyfile>");
                }
                key = load_key(tr_key);
                if (key->patch_len() != cfg.model.patch_len() ||
                    key->num_patches() != cfg.model.num_patches()) {
                    throw ConfigError("key dimensions do not match the model config");
                }
            }
            return cmd_train(cfg, key, tr_role, tr_client_id, tr_out);
        }
        if (app.got_subcommand(attack_cmd)) {
            if (!at_live && at_run.empty()) {
                throw ConfigError("need --gradients-from-run DIR or --live");
            }
            if (at_live && at_config.empty()) {
                throw ConfigError("--live requires --config");
            }
            return cmd_attack(at_run, at_live, at_config, at_index, at_key, at_out);
        }
        if (app.got_subcommand(eval_cmd)) {
            return cmd_eval(ev_model, ev_data, ev_paths, ev_seed, ev_count, ev_key);
        }
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const AbortedRunError& e) {
        std::cerr << "aborted: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

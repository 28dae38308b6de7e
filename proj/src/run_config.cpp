#include "fedvit/run_config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fedvit/errors.hpp"

namespace fedvit {

using nlohmann::json;

std::string to_string(Mode m) { return m == Mode::Plain ? "plain" : "encrypted"; }
std::string to_string(Strategy s) { return s == Strategy::FedSgd ? "fedsgd" : "fedavg"; }

Mode mode_from_string(const std::string& s) {
    if (s == "plain") return Mode::Plain;
    if (s == "encrypted") return Mode::Encrypted;
    throw ConfigError("mode must be 'plain' or 'encrypted', got '" + s + "'");
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "fedsgd") return Strategy::FedSgd;
    if (s == "fedavg") return Strategy::FedAvg;
    throw ConfigError("strategy must be 'fedsgd' or 'fedavg', got '" + s + "'");
}

void RunConfig::validate() const {
    if (clients < 1) throw ConfigError("clients must be >= 1");
    if (lr <= 0.0) throw ConfigError("lr must be positive");
    if (local_epochs < 1) throw ConfigError("local_epochs must be >= 1");
    model.validate();
    if (data.source != "synth" && data.source != "cifar10" && data.source != "idx") {
        throw ConfigError("data.source must be synth|cifar10|idx, got '" + data.source + "'");
    }
    if (transport.kind != "loopback" && transport.kind != "socket") {
        throw ConfigError("transport.kind must be loopback|socket, got '" + transport.kind + "'");
    }
    if (data.source == "synth" && clients * data.per_client > data.train_count) {
        throw ConfigError("clients * per_client exceeds train_count");
    }
}

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("run config is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    try {
        if (j.contains("mode")) cfg.mode = mode_from_string(j["mode"].get<std::string>());
        if (j.contains("strategy")) cfg.strategy = strategy_from_string(j["strategy"].get<std::string>());
        if (j.contains("clients")) cfg.clients = j["clients"].get<std::uint32_t>();
        if (j.contains("rounds")) cfg.rounds = j["rounds"].get<std::uint32_t>();
        if (j.contains("lr")) cfg.lr = j["lr"].get<double>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<std::size_t>();
        if (j.contains("local_epochs")) cfg.local_epochs = j["local_epochs"].get<std::size_t>();
        if (j.contains("model")) {
            const auto& m = j["model"];
            if (m.contains("image_h")) cfg.model.image_h = m["image_h"].get<std::size_t>();
            if (m.contains("image_w")) cfg.model.image_w = m["image_w"].get<std::size_t>();
            if (m.contains("channels")) cfg.model.channels = m["channels"].get<std::size_t>();
            if (m.contains("patch_size")) cfg.model.patch_size = m["patch_size"].get<std::size_t>();
            if (m.contains("embed_dim")) cfg.model.embed_dim = m["embed_dim"].get<std::size_t>();
            if (m.contains("num_classes")) cfg.model.num_classes = m["num_classes"].get<std::size_t>();
            if (m.contains("hidden_dim")) cfg.model.hidden_dim = m["hidden_dim"].get<std::size_t>();
        }
        if (j.contains("data")) {
            const auto& d = j["data"];
            if (d.contains("source")) cfg.data.source = d["source"].get<std::string>();
            if (d.contains("train_count")) cfg.data.train_count = d["train_count"].get<std::size_t>();
            if (d.contains("test_count")) cfg.data.test_count = d["test_count"].get<std::size_t>();
            if (d.contains("per_client")) cfg.data.per_client = d["per_client"].get<std::size_t>();
            if (d.contains("train_paths")) cfg.data.train_paths = d["train_paths"].get<std::vector<std::string>>();
            if (d.contains("test_paths")) cfg.data.test_paths = d["test_paths"].get<std::vector<std::string>>();
        }
        if (j.contains("transport")) {
            const auto& t = j["transport"];
            if (t.contains("kind")) cfg.transport.kind = t["kind"].get<std::string>();
            if (t.contains("address")) cfg.transport.address = t["address"].get<std::string>();
            if (t.contains("port")) cfg.transport.port = t["port"].get<std::uint16_t>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("run config field error: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open run config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string run_config_to_json(const RunConfig& cfg) {
    json j;
    j["mode"] = to_string(cfg.mode);
    j["strategy"] = to_string(cfg.strategy);
    j["clients"] = cfg.clients;
    j["rounds"] = cfg.rounds;
    j["lr"] = cfg.lr;
    j["seed"] = cfg.seed;
    j["batch_size"] = cfg.batch_size;
    j["local_epochs"] = cfg.local_epochs;
    j["model"] = {{"image_h", cfg.model.image_h},       {"image_w", cfg.model.image_w},
                  {"channels", cfg.model.channels},     {"patch_size", cfg.model.patch_size},
                  {"embed_dim", cfg.model.embed_dim},   {"num_classes", cfg.model.num_classes},
                  {"hidden_dim", cfg.model.hidden_dim}};
    j["data"] = {{"source", cfg.data.source},
                 {"train_count", cfg.data.train_count},
                 {"test_count", cfg.data.test_count},
                 {"per_client", cfg.data.per_client},
                 {"train_paths", cfg.data.train_paths},
                 {"test_paths", cfg.data.test_paths}};
    j["transport"] = {{"kind", cfg.transport.kind},
                      {"address", cfg.transport.address},
                      {"port", cfg.transport.port}};
    return j.dump(2);
}

}  // namespace fedvit

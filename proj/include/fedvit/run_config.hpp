#pragma once

#include <cstdint>
#include <string>

#include "fedvit/model.hpp"

namespace fedvit {

enum class Mode { Plain, Encrypted };
enum class Strategy { FedSgd, FedAvg };

std::string to_string(Mode m);
std::string to_string(Strategy s);
Mode mode_from_string(const std::string& s);
Strategy strategy_from_string(const std::string& s);

struct DataConfig {
    std::string source = "synth";  // synth | cifar10 | idx
    std::size_t train_count = 500;
    std::size_t test_count = 500;
    std::size_t per_client = 100;
    std::vector<std::string> train_paths;  // cifar10 batches or idx image/label pair
    std::vector<std::string> test_paths;
};

struct TransportConfig {
    std::string kind = "loopback";  // loopback | socket
    std::string address = "127.0.0.1";
    std::uint16_t port = 0;  // 0 = ephemeral (in-process socket runs)
};

struct RunConfig {
    Mode mode = Mode::Plain;
    Strategy strategy = Strategy::FedSgd;
    std::uint32_t clients = 5;
    std::uint32_t rounds = 20;
    double lr = 0.1;
    std::uint64_t seed = 42;
    std::size_t batch_size = 0;  // 0 = full client partition per round
    std::size_t local_epochs = 1;
    ModelConfig model;
    DataConfig data;
    TransportConfig transport;

    void validate() const;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string run_config_to_json(const RunConfig& cfg);

}  // namespace fedvit

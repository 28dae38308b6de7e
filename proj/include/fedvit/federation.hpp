#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "fedvit/crypto.hpp"
#include "fedvit/data_io.hpp"
#include "fedvit/model.hpp"
#include "fedvit/run_config.hpp"
#include "fedvit/transport.hpp"

namespace fedvit {

/// Locally updated parameters sent by a FedAvg client.
struct ParamsUpdate {
    ModelParams params;
    std::uint32_t round = 0;
    std::uint32_t client_id = 0;
};

/// Server side of the round protocol. In encrypted mode `global` holds
/// ciphertext and every update it ever sees is ciphertext; there is no
/// field capable of holding key material.
struct ServerState {
    ModelParams global;
    std::uint32_t round = 0;  // completed aggregations
    Strategy strategy = Strategy::FedSgd;
    double lr = 0.1;
    std::uint32_t expected_clients = 1;
    std::vector<GradientUpdate> received_grads;
    std::vector<ParamsUpdate> received_params;

    bool quorum() const;
    void clear_received();
};

/// Buffer one update; returns true when the round's quorum is complete.
bool server_receive(ServerState& s, GradientUpdate update);
bool server_receive(ServerState& s, ParamsUpdate update);

/// FedSGD: global <- global - lr * mean(gradients), applied layer-wise
/// (ciphertext embeddings update in cipher space, head in plaintext);
/// advances the round by one. Updates are processed in client_id order.
void server_aggregate_fedsgd(ServerState& s, const std::vector<GradientUpdate>& updates);

/// FedAvg: every field <- mean over clients; advances the round by one.
void server_aggregate_fedavg(ServerState& s, const std::vector<ParamsUpdate>& updates);

/// Client side. `local` stays plaintext between rounds; `key` is null in
/// plain mode.
struct ClientState {
    std::uint32_t client_id = 0;
    const SecretKey* key = nullptr;
    ModelParams local;
    std::vector<std::size_t> partition;
    std::uint32_t round = 0;  // last round this client completed
};

struct LocalStepOptions {
    Mode mode = Mode::Plain;
    Strategy strategy = Strategy::FedSgd;
    double lr = 0.1;
    std::size_t batch_size = 0;  // 0 = full partition
    std::size_t local_epochs = 1;
    ModelConfig model;
};

struct ClientUpdate {
    bool is_grad = true;
    GradientUpdate grad;
    ParamsUpdate params;
    double mean_loss = 0.0;
};

/// One client round: decrypt the incoming global (encrypted mode), train
/// on this round's batch (FedSGD: mean gradient, not applied locally;
/// FedAvg: local_epochs of SGD), then encrypt the outbound payload.
/// msg_round must be exactly state.round + 1.
ClientUpdate client_local_step(ClientState& state, const ModelParams& global,
                               std::uint32_t msg_round, const Dataset& train,
                               const LocalStepOptions& opt);

struct RoundRecord {
    std::uint32_t round = 0;  // 1-based
    std::vector<double> client_losses;
    double accuracy = -1.0;  // test accuracy of the post-aggregation model
    double wall_seconds = 0.0;
};

// --- wire payload conversions (shared by drivers, CLI and tests) ---

RoundMessage make_register_msg(std::uint32_t client_id);
RoundMessage make_global_model_msg(std::uint32_t round, const ModelParams& params);
RoundMessage make_grad_update_msg(std::uint32_t round, std::uint32_t sender,
                                  const GradientUpdate& grad, double loss, double acc);
RoundMessage make_params_update_msg(std::uint32_t round, std::uint32_t sender,
                                    const ParamsUpdate& update, double loss, double acc);
RoundMessage make_round_complete_msg(std::uint32_t round, std::uint32_t sender, double acc);
RoundMessage make_shutdown_msg();

ModelParams params_from_payload(const RoundMessage& msg);
GradientUpdate grad_from_payload(const RoundMessage& msg);
double scalar_from_payload(const RoundMessage& msg, const std::string& name);

// --- protocol drivers ---

struct ServerRunResult {
    ModelParams final_global;
    std::vector<RoundRecord> records;
    double final_accuracy = -1.0;
};

/// Drive the full protocol against M registered-or-registering client
/// connections: T distribution/aggregation rounds, then a final model
/// distribution answered by round_complete, then shutdown.
ServerRunResult run_server(std::vector<std::unique_ptr<Endpoint>> conns, ModelParams initial_global,
                           Strategy strategy, double lr, std::uint32_t rounds);

struct ClientRunContext {
    std::uint32_t client_id = 0;
    const SecretKey* key = nullptr;  // required in encrypted mode
    LocalStepOptions options;
    const Dataset* train = nullptr;
    std::vector<std::size_t> partition;
    const Dataset* test = nullptr;  // evaluated by client 0 only
    std::uint32_t rounds = 0;       // total rounds T (round T+1 is final)
};

/// Run a client until shutdown; returns the final plaintext model.
ModelParams run_client(Endpoint& conn, const ClientRunContext& ctx);

struct SimulationResult {
    std::vector<RoundRecord> records;
    ModelParams final_model;  // plaintext
    double final_accuracy = -1.0;
    std::uint64_t key_id = 0;  // 0 in plain mode
};

/// Datasets and partition derived from a run config (shared by the
/// simulation, the multi-process CLI roles, and tests).
struct RunData {
    Dataset train;
    Dataset test;
    Partition partition;
};
RunData prepare_run_data(const RunConfig& cfg);

/// Fresh plaintext initial model for the run (seed stream "init").
ModelParams initial_model(const RunConfig& cfg);

/// Single-process federated run over the configured transport: the server
/// and M client state machines exchange real protocol messages (loopback
/// queues or localhost TCP). In encrypted mode the initial model is
/// encrypted before the server state ever sees it, and `key` must be
/// non-null.
SimulationResult run_simulation(const RunConfig& cfg, const SecretKey* key = nullptr);

}  // namespace fedvit

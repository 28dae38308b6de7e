#include "fedvit/federation.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <thread>

#include "fedvit/errors.hpp"

namespace fedvit {

namespace {

Matrix scalar(double v) { return Matrix(1, 1, v); }

// This round's sample indices for a FedSGD client: the whole partition, or
// a batch-sized window walked cyclically so every round is deterministic.
std::vector<std::size_t> round_batch(const std::vector<std::size_t>& partition,
                                     std::size_t batch_size, std::uint32_t round) {
    if (batch_size == 0 || batch_size >= partition.size()) return partition;
    std::vector<std::size_t> out(batch_size);
    const std::size_t start = (static_cast<std::size_t>(round - 1) * batch_size) % partition.size();
    for (std::size_t j = 0; j < batch_size; ++j) out[j] = partition[(start + j) % partition.size()];
    return out;
}

std::vector<Sample> gather(const Dataset& ds, const std::vector<std::size_t>& indices) {
    std::vector<Sample> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(ds.samples[i]);
    return out;
}

void check_quorum_common(const ServerState& s, std::size_t count, std::uint32_t round,
                         std::uint32_t client_id, bool encrypted) {
    if (count > s.expected_clients) {
        throw ProtocolError("server received more updates than expected clients");
    }
    if (round != s.round + 1) {
        throw StaleRoundError("update for round " + std::to_string(round) + ", server is at " +
                              std::to_string(s.round));
    }
    if (client_id >= s.expected_clients) {
        throw ProtocolError("client_id " + std::to_string(client_id) + " out of range");
    }
    if (encrypted != s.global.encrypted) {
        throw DomainMixError("update encrypted flag does not match server domain");
    }
}

ModelParams mean_params(std::vector<ParamsUpdate> updates) {
    std::sort(updates.begin(), updates.end(),
              [](const ParamsUpdate& a, const ParamsUpdate& b) { return a.client_id < b.client_id; });
    ModelParams acc = updates.front().params;
    for (std::size_t i = 1; i < updates.size(); ++i) {
        const ModelParams& p = updates[i].params;
        axpy_inplace(acc.e_pat, 1.0, p.e_pat);
        axpy_inplace(acc.e_pos, 1.0, p.e_pos);
        axpy_inplace(acc.x_class, 1.0, p.x_class);
        axpy_inplace(acc.head_w1, 1.0, p.head_w1);
        axpy_inplace(acc.head_b1, 1.0, p.head_b1);
        axpy_inplace(acc.head_w2, 1.0, p.head_w2);
        axpy_inplace(acc.head_b2, 1.0, p.head_b2);
    }
    const double inv = 1.0 / static_cast<double>(updates.size());
    acc.e_pat = scaled(acc.e_pat, inv);
    acc.e_pos = scaled(acc.e_pos, inv);
    acc.x_class = scaled(acc.x_class, inv);
    acc.head_w1 = scaled(acc.head_w1, inv);
    acc.head_b1 = scaled(acc.head_b1, inv);
    acc.head_w2 = scaled(acc.head_w2, inv);
    acc.head_b2 = scaled(acc.head_b2, inv);
    return acc;
}

}  // namespace

bool ServerState::quorum() const {
    return received_grads.size() + received_params.size() >= expected_clients;
}

void ServerState::clear_received() {
    received_grads.clear();
    received_params.clear();
}

bool server_receive(ServerState& s, GradientUpdate update) {
    if (s.strategy != Strategy::FedSgd) {
        throw ProtocolError("gradient update received while aggregating parameters");
    }
    check_quorum_common(s, s.received_grads.size() + 1, update.round, update.client_id,
                        update.encrypted);
    for (const auto& u : s.received_grads) {
        if (u.client_id == update.client_id) {
            throw ProtocolError("duplicate update from client " + std::to_string(update.client_id));
        }
    }
    s.received_grads.push_back(std::move(update));
    return s.quorum();
}

bool server_receive(ServerState& s, ParamsUpdate update) {
    if (s.strategy != Strategy::FedAvg) {
        throw ProtocolError("parameter update received while aggregating gradients");
    }
    check_quorum_common(s, s.received_params.size() + 1, update.round, update.client_id,
                        update.params.encrypted);
    for (const auto& u : s.received_params) {
        if (u.client_id == update.client_id) {
            throw ProtocolError("duplicate update from client " + std::to_string(update.client_id));
        }
    }
    s.received_params.push_back(std::move(update));
    return s.quorum();
}

void server_aggregate_fedsgd(ServerState& s, const std::vector<GradientUpdate>& updates) {
    if (updates.size() != s.expected_clients) {
        throw ProtocolError("FedSGD aggregation needs " + std::to_string(s.expected_clients) +
                            " updates, got " + std::to_string(updates.size()));
    }
    std::vector<GradientUpdate> sorted = updates;
    std::sort(sorted.begin(), sorted.end(), [](const GradientUpdate& a, const GradientUpdate& b) {
        return a.client_id < b.client_id;
    });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i > 0 && sorted[i].client_id == sorted[i - 1].client_id) {
            throw ProtocolError("duplicate client_id " + std::to_string(sorted[i].client_id));
        }
        if (sorted[i].round != s.round + 1) {
            throw StaleRoundError("update round " + std::to_string(sorted[i].round) +
                                  " does not match aggregation round " + std::to_string(s.round + 1));
        }
        if (sorted[i].encrypted != s.global.encrypted) {
            throw DomainMixError("mixed plaintext/ciphertext updates in one round");
        }
    }
    const GradientUpdate mean =
        grad_scaled(grad_sum(sorted), 1.0 / static_cast<double>(sorted.size()));
    s.global = apply_sgd(s.global, mean, s.lr);
    s.round += 1;
    s.clear_received();
}

void server_aggregate_fedavg(ServerState& s, const std::vector<ParamsUpdate>& updates) {
    if (updates.size() != s.expected_clients) {
        throw ProtocolError("FedAvg aggregation needs " + std::to_string(s.expected_clients) +
                            " updates, got " + std::to_string(updates.size()));
    }
    for (std::size_t i = 0; i < updates.size(); ++i) {
        for (std::size_t j = i + 1; j < updates.size(); ++j) {
            if (updates[i].client_id == updates[j].client_id) {
                throw ProtocolError("duplicate client_id " + std::to_string(updates[i].client_id));
            }
        }
        if (updates[i].round != s.round + 1) {
            throw StaleRoundError("update round " + std::to_string(updates[i].round) +
                                  " does not match aggregation round " + std::to_string(s.round + 1));
        }
        if (updates[i].params.encrypted != s.global.encrypted) {
            throw DomainMixError("mixed plaintext/ciphertext updates in one round");
        }
    }
    const bool flag = s.global.encrypted;
    s.global = mean_params(updates);
    s.global.encrypted = flag;
    s.round += 1;
    s.clear_received();
}

ClientUpdate client_local_step(ClientState& state, const ModelParams& global,
                               std::uint32_t msg_round, const Dataset& train,
                               const LocalStepOptions& opt) {
    if (msg_round != state.round + 1) {
        throw StaleRoundError("client " + std::to_string(state.client_id) + " expected round " +
                              std::to_string(state.round + 1) + ", got " + std::to_string(msg_round));
    }
    if (opt.mode == Mode::Encrypted) {
        if (!global.encrypted) throw DomainMixError("encrypted mode but plaintext global received");
        if (state.key == nullptr) throw ConfigError("encrypted mode requires a client key");
    } else if (global.encrypted) {
        throw DomainMixError("plain mode but encrypted global received");
    }

    const ModelParams plain =
        opt.mode == Mode::Encrypted ? decrypt_model(global, *state.key) : global;

    ClientUpdate out;
    if (opt.strategy == Strategy::FedSgd) {
        const auto batch = gather(train, round_batch(state.partition, opt.batch_size, msg_round));
        BatchGradient bg = batch_gradient(plain, opt.model, batch);
        bg.grad.round = msg_round;
        bg.grad.client_id = state.client_id;
        out.is_grad = true;
        out.grad = opt.mode == Mode::Encrypted ? encrypt_grad(bg.grad, *state.key) : bg.grad;
        out.grad.round = msg_round;
        out.grad.client_id = state.client_id;
        out.mean_loss = bg.mean_loss;
        state.local = plain;  // gradients are not applied locally under FedSGD
    } else {
        ModelParams local = plain;
        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        const std::size_t bs =
            (opt.batch_size == 0 || opt.batch_size > state.partition.size()) ? state.partition.size()
                                                                             : opt.batch_size;
        for (std::size_t epoch = 0; epoch < opt.local_epochs; ++epoch) {
            for (std::size_t start = 0; start < state.partition.size(); start += bs) {
                const std::size_t end = std::min(start + bs, state.partition.size());
                std::vector<std::size_t> idx(state.partition.begin() + static_cast<std::ptrdiff_t>(start),
                                              state.partition.begin() + static_cast<std::ptrdiff_t>(end));
                const auto batch = gather(train, idx);
                const BatchGradient bg = batch_gradient(local, opt.model, batch);
                local = apply_sgd(local, bg.grad, opt.lr);
                loss_sum += bg.mean_loss;
                ++loss_count;
            }
        }
        out.is_grad = false;
        out.params.params = opt.mode == Mode::Encrypted ? encrypt_model(local, *state.key) : local;
        out.params.round = msg_round;
        out.params.client_id = state.client_id;
        out.mean_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
        state.local = local;
    }
    state.round = msg_round;
    return out;
}

// --------------------------------------------------------------- payloads

RoundMessage make_register_msg(std::uint32_t client_id) {
    return RoundMessage{MsgType::Register, 0, client_id, {}};
}

RoundMessage make_global_model_msg(std::uint32_t round, const ModelParams& p) {
    RoundMessage msg{MsgType::GlobalModel, round, 0, {}};
    msg.payload = {{"meta", scalar(p.encrypted ? 1.0 : 0.0)},
                   {"e_pat", p.e_pat},
                   {"e_pos", p.e_pos},
                   {"x_class", p.x_class},
                   {"head_w1", p.head_w1},
                   {"head_b1", p.head_b1},
                   {"head_w2", p.head_w2},
                   {"head_b2", p.head_b2}};
    return msg;
}

RoundMessage make_grad_update_msg(std::uint32_t round, std::uint32_t sender,
                                  const GradientUpdate& g, double loss, double acc) {
    RoundMessage msg{MsgType::LocalUpdateGrad, round, sender, {}};
    msg.payload = {{"meta", scalar(g.encrypted ? 1.0 : 0.0)},
                   {"loss", scalar(loss)},
                   {"acc", scalar(acc)},
                   {"g_pat", g.g_pat},
                   {"g_pos", g.g_pos},
                   {"g_class", g.g_class},
                   {"g_head_w1", g.g_head_w1},
                   {"g_head_b1", g.g_head_b1},
                   {"g_head_w2", g.g_head_w2},
                   {"g_head_b2", g.g_head_b2}};
    return msg;
}

RoundMessage make_params_update_msg(std::uint32_t round, std::uint32_t sender,
                                    const ParamsUpdate& u, double loss, double acc) {
    RoundMessage msg{MsgType::LocalUpdateParams, round, sender, {}};
    const ModelParams& p = u.params;
    msg.payload = {{"meta", scalar(p.encrypted ? 1.0 : 0.0)},
                   {"loss", scalar(loss)},
                   {"acc", scalar(acc)},
                   {"e_pat", p.e_pat},
                   {"e_pos", p.e_pos},
                   {"x_class", p.x_class},
                   {"head_w1", p.head_w1},
                   {"head_b1", p.head_b1},
                   {"head_w2", p.head_w2},
                   {"head_b2", p.head_b2}};
    return msg;
}

RoundMessage make_round_complete_msg(std::uint32_t round, std::uint32_t sender, double acc) {
    RoundMessage msg{MsgType::RoundComplete, round, sender, {}};
    msg.payload = {{"acc", scalar(acc)}};
    return msg;
}

RoundMessage make_shutdown_msg() { return RoundMessage{MsgType::Shutdown, 0, 0, {}}; }

double scalar_from_payload(const RoundMessage& msg, const std::string& name) {
    for (const auto& t : msg.payload) {
        if (t.name == name) return t.value(0, 0);
    }
    throw ProtocolError("payload has no tensor named '" + name + "'");
}

namespace {

const Matrix& tensor_named(const RoundMessage& msg, const char* name) {
    for (const auto& t : msg.payload) {
        if (t.name == name) return t.value;
    }
    throw ProtocolError(std::string("payload has no tensor named '") + name + "'");
}

}  // namespace

ModelParams params_from_payload(const RoundMessage& msg) {
    if (msg.type != MsgType::GlobalModel && msg.type != MsgType::LocalUpdateParams) {
        throw ProtocolError("message does not carry model parameters");
    }
    ModelParams p;
    p.encrypted = scalar_from_payload(msg, "meta") != 0.0;
    p.e_pat = tensor_named(msg, "e_pat");
    p.e_pos = tensor_named(msg, "e_pos");
    p.x_class = tensor_named(msg, "x_class");
    p.head_w1 = tensor_named(msg, "head_w1");
    p.head_b1 = tensor_named(msg, "head_b1");
    p.head_w2 = tensor_named(msg, "head_w2");
    p.head_b2 = tensor_named(msg, "head_b2");
    return p;
}

GradientUpdate grad_from_payload(const RoundMessage& msg) {
    if (msg.type != MsgType::LocalUpdateGrad) {
        throw ProtocolError("message does not carry gradients");
    }
    GradientUpdate g;
    g.encrypted = scalar_from_payload(msg, "meta") != 0.0;
    g.round = msg.round;
    g.client_id = msg.sender_id;
    g.g_pat = tensor_named(msg, "g_pat");
    g.g_pos = tensor_named(msg, "g_pos");
    g.g_class = tensor_named(msg, "g_class");
    g.g_head_w1 = tensor_named(msg, "g_head_w1");
    g.g_head_b1 = tensor_named(msg, "g_head_b1");
    g.g_head_w2 = tensor_named(msg, "g_head_w2");
    g.g_head_b2 = tensor_named(msg, "g_head_b2");
    return g;
}

// ---------------------------------------------------------------- drivers

ServerRunResult run_server(std::vector<std::unique_ptr<Endpoint>> conns, ModelParams initial_global,
                           Strategy strategy, double lr, std::uint32_t rounds) {
    const std::uint32_t m = static_cast<std::uint32_t>(conns.size());
    if (m == 0) throw ConfigError("run_server: need at least one client connection");

    ServerState state;
    state.global = std::move(initial_global);
    state.strategy = strategy;
    state.lr = lr;
    state.expected_clients = m;

    ServerRunResult result;
    std::uint32_t completed = 0;
    try {
        // Registration: map client_id -> connection.
        std::vector<std::unique_ptr<Endpoint>> by_id(m);
        for (auto& conn : conns) {
            const RoundMessage msg = conn->recv();
            if (msg.type != MsgType::Register) {
                throw ProtocolError("expected register message, got type " +
                                    std::to_string(static_cast<unsigned>(msg.type)));
            }
            if (msg.sender_id >= m) {
                throw ProtocolError("register with client_id " + std::to_string(msg.sender_id) +
                                    " >= " + std::to_string(m));
            }
            if (by_id[msg.sender_id]) {
                throw ProtocolError("duplicate registration for client " +
                                    std::to_string(msg.sender_id));
            }
            by_id[msg.sender_id] = std::move(conn);
        }

        result.records.reserve(rounds);
        for (std::uint32_t t = 1; t <= rounds; ++t) {
            const auto started = std::chrono::steady_clock::now();
            const RoundMessage out = make_global_model_msg(t, state.global);
            for (std::uint32_t id = 0; id < m; ++id) by_id[id]->send(out);

            RoundRecord record;
            record.round = t;
            record.client_losses.assign(m, 0.0);
            double acc_of_previous = -1.0;
            for (std::uint32_t id = 0; id < m; ++id) {
                const RoundMessage reply = by_id[id]->recv();
                if (reply.sender_id != id) {
                    throw ProtocolError("update from client " + std::to_string(reply.sender_id) +
                                        " on connection of client " + std::to_string(id));
                }
                record.client_losses[id] = scalar_from_payload(reply, "loss");
                if (id == 0) acc_of_previous = scalar_from_payload(reply, "acc");
                if (strategy == Strategy::FedSgd) {
                    server_receive(state, grad_from_payload(reply));
                } else {
                    if (reply.type != MsgType::LocalUpdateParams) {
                        throw ProtocolError("FedAvg expects parameter updates");
                    }
                    ParamsUpdate u{params_from_payload(reply), reply.round, reply.sender_id};
                    server_receive(state, u);
                }
            }
            // Client 0 reports the accuracy of the model distributed this
            // round, i.e. the result of the previous aggregation.
            if (t >= 2) result.records[t - 2].accuracy = acc_of_previous;

            if (strategy == Strategy::FedSgd) {
                server_aggregate_fedsgd(state, state.received_grads);
            } else {
                server_aggregate_fedavg(state, state.received_params);
            }
            completed = state.round;
            record.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            result.records.push_back(std::move(record));
        }

        // Final distribution: clients measure the end model and ack.
        const RoundMessage final_msg = make_global_model_msg(rounds + 1, state.global);
        for (std::uint32_t id = 0; id < m; ++id) by_id[id]->send(final_msg);
        for (std::uint32_t id = 0; id < m; ++id) {
            const RoundMessage ack = by_id[id]->recv();
            if (ack.type != MsgType::RoundComplete) {
                throw ProtocolError("expected round_complete, got type " +
                                    std::to_string(static_cast<unsigned>(ack.type)));
            }
            if (id == 0) result.final_accuracy = scalar_from_payload(ack, "acc");
        }
        if (!result.records.empty()) result.records.back().accuracy = result.final_accuracy;

        const RoundMessage bye = make_shutdown_msg();
        for (std::uint32_t id = 0; id < m; ++id) by_id[id]->send(bye);
        result.final_global = state.global;
        return result;
    } catch (const TransportError& e) {
        throw AbortedRunError("run aborted after round " + std::to_string(completed) + ": " +
                              e.what(),
                              completed);
    }
}

ModelParams run_client(Endpoint& conn, const ClientRunContext& ctx) {
    if (ctx.options.mode == Mode::Encrypted && ctx.key == nullptr) {
        throw ConfigError("run_client: encrypted mode requires a key");
    }
    ClientState state;
    state.client_id = ctx.client_id;
    state.key = ctx.key;
    state.partition = ctx.partition;

    conn.send(make_register_msg(ctx.client_id));

    const bool evaluates = ctx.client_id == 0 && ctx.test != nullptr;
    ModelParams final_local;
    for (;;) {
        const RoundMessage msg = conn.recv();
        if (msg.type == MsgType::Shutdown) break;
        if (msg.type != MsgType::GlobalModel) {
            throw ProtocolError("client expected global_model or shutdown, got type " +
                                std::to_string(static_cast<unsigned>(msg.type)));
        }
        const ModelParams global = params_from_payload(msg);

        if (msg.round > ctx.rounds) {
            // Final model distribution: decrypt, evaluate, acknowledge.
            final_local = ctx.options.mode == Mode::Encrypted ? decrypt_model(global, *ctx.key)
                                                              : global;
            const double acc = evaluates ? evaluate_accuracy(final_local, ctx.options.model,
                                                             ctx.test->samples)
                                         : -1.0;
            conn.send(make_round_complete_msg(msg.round, ctx.client_id, acc));
            continue;
        }

        double acc = -1.0;
        if (evaluates) {
            const ModelParams plain = ctx.options.mode == Mode::Encrypted
                                          ? decrypt_model(global, *ctx.key)
                                          : global;
            acc = evaluate_accuracy(plain, ctx.options.model, ctx.test->samples);
        }
        const ClientUpdate update =
            client_local_step(state, global, msg.round, *ctx.train, ctx.options);
        if (update.is_grad) {
            conn.send(make_grad_update_msg(msg.round, ctx.client_id, update.grad, update.mean_loss,
                                           acc));
        } else {
            conn.send(make_params_update_msg(msg.round, ctx.client_id, update.params,
                                             update.mean_loss, acc));
        }
    }
    return final_local;
}

// ------------------------------------------------------------- simulation

RunData prepare_run_data(const RunConfig& cfg) {
    RunData data;
    if (cfg.data.source == "synth") {
        const Rng root(cfg.seed);
        data.train = synth_generate(root.stream("train-data"), cfg.data.train_count, cfg.model,
                                    cfg.model.num_classes);
        data.test = synth_generate(root.stream("test-data"), cfg.data.test_count, cfg.model,
                                   cfg.model.num_classes);
    } else if (cfg.data.source == "cifar10") {
        data.train = load_cifar10_binary(cfg.data.train_paths);
        data.test = load_cifar10_binary(cfg.data.test_paths);
    } else {
        if (cfg.data.train_paths.size() != 2 || cfg.data.test_paths.size() != 2) {
            throw ConfigError("idx source needs [images, labels] paths for train and test");
        }
        data.train = load_idx(cfg.data.train_paths[0], cfg.data.train_paths[1]);
        data.test = load_idx(cfg.data.test_paths[0], cfg.data.test_paths[1]);
    }
    const std::size_t per_client =
        cfg.data.per_client > 0 ? cfg.data.per_client : data.train.size() / cfg.clients;
    data.partition = partition_random(data.train, cfg.clients, per_client, cfg.seed);
    return data;
}

ModelParams initial_model(const RunConfig& cfg) {
    Rng rng = Rng(cfg.seed).stream("init");
    return init_params(cfg.model, rng);
}

SimulationResult run_simulation(const RunConfig& cfg, const SecretKey* key) {
    cfg.validate();
    if (cfg.mode == Mode::Encrypted && key == nullptr) {
        throw ConfigError("run_simulation: encrypted mode requires a key");
    }

    const RunData data = prepare_run_data(cfg);
    const ModelParams initial = initial_model(cfg);
    // In encrypted mode the server only ever receives ciphertext: the
    // trusted initializer (this harness) encrypts before handing over.
    ModelParams initial_global =
        cfg.mode == Mode::Encrypted ? encrypt_model(initial, *key) : initial;

    LocalStepOptions opt;
    opt.mode = cfg.mode;
    opt.strategy = cfg.strategy;
    opt.lr = cfg.lr;
    opt.batch_size = cfg.batch_size;
    opt.local_epochs = cfg.local_epochs;
    opt.model = cfg.model;

    std::vector<std::unique_ptr<Endpoint>> server_side(cfg.clients);
    std::vector<std::unique_ptr<Endpoint>> client_side(cfg.clients);
    std::unique_ptr<SocketListener> listener;
    if (cfg.transport.kind == "socket") {
        listener = std::make_unique<SocketListener>(cfg.transport.address, cfg.transport.port);
    }

    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> client_errors(cfg.clients);
    std::vector<ModelParams> finals(cfg.clients);

    if (cfg.transport.kind == "loopback") {
        for (std::uint32_t i = 0; i < cfg.clients; ++i) {
            auto [a, b] = loopback_pair();
            server_side[i] = std::move(a);
            client_side[i] = std::move(b);
        }
    }

    for (std::uint32_t i = 0; i < cfg.clients; ++i) {
        threads.emplace_back([&, i] {
            try {
                ClientRunContext ctx;
                ctx.client_id = i;
                ctx.key = cfg.mode == Mode::Encrypted ? key : nullptr;
                ctx.options = opt;
                ctx.train = &data.train;
                ctx.partition = data.partition.by_client[i];
                ctx.test = i == 0 ? &data.test : nullptr;
                ctx.rounds = cfg.rounds;
                std::unique_ptr<Endpoint> conn =
                    listener ? socket_connect(cfg.transport.address, listener->port())
                             : std::move(client_side[i]);
                finals[i] = run_client(*conn, ctx);
                conn->close();
            } catch (...) {
                client_errors[i] = std::current_exception();
            }
        });
    }

    ServerRunResult server_result;
    std::exception_ptr server_error;
    try {
        if (listener) {
            for (std::uint32_t i = 0; i < cfg.clients; ++i) server_side[i] = listener->accept();
        }
        server_result = run_server(std::move(server_side), std::move(initial_global), cfg.strategy,
                                   cfg.lr, cfg.rounds);
    } catch (...) {
        server_error = std::current_exception();
    }
    for (auto& t : threads) t.join();
    if (server_error) std::rethrow_exception(server_error);
    for (std::uint32_t i = 0; i < cfg.clients; ++i) {
        if (client_errors[i]) std::rethrow_exception(client_errors[i]);
    }

    SimulationResult result;
    result.records = std::move(server_result.records);
    result.final_model = std::move(finals[0]);
    result.final_accuracy = server_result.final_accuracy;
    result.key_id = cfg.mode == Mode::Encrypted ? key->key_id : 0;
    return result;
}

}  // namespace fedvit

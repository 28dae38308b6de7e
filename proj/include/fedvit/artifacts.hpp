#pragma once

#include <optional>
#include <string>

#include "fedvit/model.hpp"

namespace fedvit {

/// Binary model file ("FVW1"): config header + the seven named parameter
/// tensors in the shared tensor layout. Bit-exact round trip.
struct StoredModel {
    ModelConfig config;
    ModelParams params;
};

void save_model(const StoredModel& model, const std::string& path);
StoredModel load_model(const std::string& path);

/// Single-sample gradient snapshot ("FVG1") for the restoration attack:
/// the ground-truth pixels plus the embedding-layer gradients as plaintext
/// and (when the run was encrypted) as they crossed the wire.
struct AttackSnapshot {
    ModelConfig config;
    Sample sample;
    Matrix g_pat;  // plaintext L x D
    Matrix g_pos;  // plaintext (N+1) x D
    std::optional<Matrix> enc_g_pat;
    std::optional<Matrix> enc_g_pos;
    bool matches_wire = false;  // true when batch_size was 1 (the snapshot
                                // equals the round-1 update of client 0)
};

void save_attack_snapshot(const AttackSnapshot& snap, const std::string& path);
AttackSnapshot load_attack_snapshot(const std::string& path);

}  // namespace fedvit

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedvit/serialize.hpp"

namespace fedvit {

/// Message kinds of the client/server round protocol.
///
/// register_client  client -> server   announce sender_id          (no payload)
/// global_model     server -> client   model to train on this round
/// local_update_grad    client -> server  FedSGD gradients
/// local_update_params  client -> server  FedAvg locally updated params
/// round_complete   client -> server   final-model ack with test accuracy
/// shutdown         server -> client   end of run                  (no payload)
enum class MsgType : std::uint8_t {
    Register = 0,
    GlobalModel = 1,
    LocalUpdateGrad = 2,
    LocalUpdateParams = 3,
    RoundComplete = 4,
    Shutdown = 5,
};

/// Payload tensor names are fixed per message type:
///
///   register            (none)
///   global_model        meta, e_pat, e_pos, x_class, head_w1, head_b1,
///                       head_w2, head_b2
///   local_update_grad   meta, loss, acc, g_pat, g_pos, g_class, g_head_w1,
///                       g_head_b1, g_head_w2, g_head_b2
///   local_update_params meta, loss, acc, e_pat, e_pos, x_class, head_w1,
///                       head_b1, head_w2, head_b2
///   round_complete      acc
///   shutdown            (none)
///
/// "meta" is 1x1 holding the encrypted flag (0/1); "loss" is the client's
/// mean training loss; "acc" is the test accuracy measured by client 0 on
/// the model it just received (-1 when not evaluated).
const std::vector<std::string>& schema_for(MsgType type);

struct RoundMessage {
    MsgType type = MsgType::Shutdown;
    std::uint32_t round = 0;
    std::uint32_t sender_id = 0;
    std::vector<NamedTensor> payload;
};

/// Frame layout: total-length u32 (bytes after this field), magic "FVM1",
/// version u8 = 1, msg_type u8, round u32, sender u32, tensor count u16,
/// then each tensor in the shared layout. Deterministic and bit-exact.
std::vector<std::uint8_t> encode(const RoundMessage& msg);

/// Inverse of encode on a complete frame. Truncation raises
/// IncompleteFrameError (retryable); wrong magic or schema violations
/// raise CorruptFrameError; an unknown version raises
/// UnsupportedVersionError.
RoundMessage decode(std::span<const std::uint8_t> frame);

inline constexpr std::uint32_t kMaxFrameBytes = 0x7FFFFFFF;  // 2^31 - 1

}  // namespace fedvit

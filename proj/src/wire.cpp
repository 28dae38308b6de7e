#include "fedvit/wire.hpp"

#include <cstring>

#include "fedvit/errors.hpp"

namespace fedvit {

namespace {

constexpr char kMsgMagic[4] = {'F', 'V', 'M', '1'};
constexpr std::uint8_t kWireVersion = 1;

const std::vector<std::string> kNone{};
const std::vector<std::string> kModelTensors{"meta",    "e_pat",   "e_pos",   "x_class",
                                             "head_w1", "head_b1", "head_w2", "head_b2"};
const std::vector<std::string> kGradTensors{"meta",      "loss",      "acc",       "g_pat",
                                            "g_pos",     "g_class",   "g_head_w1", "g_head_b1",
                                            "g_head_w2", "g_head_b2"};
const std::vector<std::string> kParamsUpdateTensors{"meta",    "loss",    "acc",     "e_pat",
                                                    "e_pos",   "x_class", "head_w1", "head_b1",
                                                    "head_w2", "head_b2"};
const std::vector<std::string> kRoundCompleteTensors{"acc"};

}  // namespace

const std::vector<std::string>& schema_for(MsgType type) {
    switch (type) {
        case MsgType::Register:
        case MsgType::Shutdown:
            return kNone;
        case MsgType::GlobalModel:
            return kModelTensors;
        case MsgType::LocalUpdateGrad:
            return kGradTensors;
        case MsgType::LocalUpdateParams:
            return kParamsUpdateTensors;
        case MsgType::RoundComplete:
            return kRoundCompleteTensors;
    }
    throw CorruptFrameError("unknown message type " +
                            std::to_string(static_cast<unsigned>(type)));
}

std::vector<std::uint8_t> encode(const RoundMessage& msg) {
    const auto& schema = schema_for(msg.type);
    if (msg.payload.size() != schema.size()) {
        throw ProtocolError("encode: message type " + std::to_string(static_cast<unsigned>(msg.type)) +
                            " expects " + std::to_string(schema.size()) + " tensors, got " +
                            std::to_string(msg.payload.size()));
    }
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (msg.payload[i].name != schema[i]) {
            throw ProtocolError("encode: tensor " + std::to_string(i) + " must be named '" +
                                schema[i] + "', got '" + msg.payload[i].name + "'");
        }
    }

    ByteWriter body;
    body.bytes(kMsgMagic, 4);
    body.u8(kWireVersion);
    body.u8(static_cast<std::uint8_t>(msg.type));
    body.u32(msg.round);
    body.u32(msg.sender_id);
    body.u16(static_cast<std::uint16_t>(msg.payload.size()));
    for (const auto& t : msg.payload) write_tensor(body, t.name, t.value);

    if (body.size() > kMaxFrameBytes) {
        throw SizeError("encode: frame of " + std::to_string(body.size()) + " bytes exceeds 2^31-1");
    }
    ByteWriter frame;
    frame.u32(static_cast<std::uint32_t>(body.size()));
    frame.bytes(body.data().data(), body.size());
    return frame.take();
}

RoundMessage decode(std::span<const std::uint8_t> frame) {
    ByteReader r(frame);
    const std::uint32_t declared = r.u32();
    if (declared > kMaxFrameBytes) {
        throw CorruptFrameError("frame length " + std::to_string(declared) + " exceeds limit");
    }
    if (r.remaining() < declared) {
        throw IncompleteFrameError("frame declares " + std::to_string(declared) + " bytes, only " +
                                   std::to_string(r.remaining()) + " available");
    }
    ByteReader body(frame.subspan(4, declared));

    char magic[4];
    body.raw(magic, 4);
    if (std::memcmp(magic, kMsgMagic, 4) != 0) throw CorruptFrameError("bad magic");
    const std::uint8_t version = body.u8();
    if (version != kWireVersion) {
        throw UnsupportedVersionError("wire version " + std::to_string(version) + " not supported");
    }
    const std::uint8_t raw_type = body.u8();
    if (raw_type > static_cast<std::uint8_t>(MsgType::Shutdown)) {
        throw CorruptFrameError("unknown message type " + std::to_string(raw_type));
    }

    RoundMessage msg;
    msg.type = static_cast<MsgType>(raw_type);
    msg.round = body.u32();
    msg.sender_id = body.u32();
    const std::uint16_t count = body.u16();

    const auto& schema = schema_for(msg.type);
    if (count != schema.size()) {
        throw CorruptFrameError("message type " + std::to_string(raw_type) + " must carry " +
                                std::to_string(schema.size()) + " tensors, frame has " +
                                std::to_string(count));
    }
    msg.payload.reserve(count);
    try {
        for (std::uint16_t i = 0; i < count; ++i) {
            NamedTensor t = read_tensor(body);
            if (t.name != schema[i]) {
                throw CorruptFrameError("tensor " + std::to_string(i) + " named '" + t.name +
                                        "', schema requires '" + schema[i] + "'");
            }
            msg.payload.push_back(std::move(t));
        }
    } catch (const IncompleteFrameError&) {
        // The outer length said the frame was complete, so this is damage.
        throw CorruptFrameError("tensor data overruns declared frame length");
    }
    if (body.remaining() != 0) throw CorruptFrameError("trailing bytes inside frame");
    return msg;
}

}  // namespace fedvit

#include <doctest.h>

#include "fedvit/errors.hpp"
#include "fedvit/wire.hpp"
#include "test_helpers.hpp"

using namespace fedvit;
using namespace fedvit::test;

namespace {

Matrix random_tensor(Rng& rng) {
    const std::size_t rows = 1 + rng.below(4);
    const std::size_t cols = 1 + rng.below(4);
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.normal() * 1e3;
    return m;
}

RoundMessage random_message(Rng& rng) {
    RoundMessage msg;
    msg.type = static_cast<MsgType>(rng.below(6));
    msg.round = static_cast<std::uint32_t>(rng.below(1000));
    msg.sender_id = static_cast<std::uint32_t>(rng.below(64));
    for (const std::string& name : schema_for(msg.type)) {
        msg.payload.push_back({name, random_tensor(rng)});
    }
    return msg;
}

bool messages_equal(const RoundMessage& a, const RoundMessage& b) {
    if (a.type != b.type || a.round != b.round || a.sender_id != b.sender_id) return false;
    if (a.payload.size() != b.payload.size()) return false;
    for (std::size_t i = 0; i < a.payload.size(); ++i) {
        if (a.payload[i].name != b.payload[i].name) return false;
        const Matrix& ma = a.payload[i].value;
        const Matrix& mb = b.payload[i].value;
        if (ma.rows != mb.rows || ma.cols != mb.cols || ma.data != mb.data) return false;
    }
    return true;
}

}  // namespace

TEST_SUITE_BEGIN("wire");

TEST_CASE("empty-payload shutdown frame is exactly 20 bytes") {
    // length u32 + magic + version + msg_type + round u32 + sender u32
    // + tensor count u16 = 4+4+1+1+4+4+2
    const auto bytes = encode(RoundMessage{MsgType::Shutdown, 0, 0, {}});
    CHECK(bytes.size() == 20);
    const auto reg = encode(RoundMessage{MsgType::Register, 3, 7, {}});
    CHECK(reg.size() == 20);
}

TEST_CASE("encode is deterministic") {
    Rng rng(1);
    const RoundMessage msg = random_message(rng);
    CHECK(encode(msg) == encode(msg));
}

TEST_CASE("decode(encode(m)) round-trips bit-exactly over 1000 fuzz cases") {
    Rng rng(2);
    for (int i = 0; i < 1000; ++i) {
        const RoundMessage msg = random_message(rng);
        const auto bytes = encode(msg);
        const RoundMessage back = decode(bytes);
        CHECK(messages_equal(msg, back));
        CHECK(encode(back) == bytes);
    }
}

TEST_CASE("flipped magic byte is a corrupt frame") {
    auto bytes = encode(RoundMessage{MsgType::Shutdown, 1, 2, {}});
    bytes[4] = 'X';
    CHECK_THROWS_AS(decode(bytes), CorruptFrameError);
}

TEST_CASE("future version is rejected as unsupported") {
    auto bytes = encode(RoundMessage{MsgType::Shutdown, 1, 2, {}});
    bytes[8] = 2;  // version field
    CHECK_THROWS_AS(decode(bytes), UnsupportedVersionError);
}

TEST_CASE("unknown message type is corrupt") {
    auto bytes = encode(RoundMessage{MsgType::Shutdown, 1, 2, {}});
    bytes[9] = 250;
    CHECK_THROWS_AS(decode(bytes), CorruptFrameError);
}

TEST_CASE("truncation at every byte boundary never yields a message") {
    Rng rng(3);
    RoundMessage msg;
    msg.type = MsgType::RoundComplete;
    msg.round = 9;
    msg.sender_id = 1;
    msg.payload.push_back({"acc", Matrix(1, 1, 0.5)});
    const auto bytes = encode(msg);
    for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
        const std::span<const std::uint8_t> prefix(bytes.data(), cut);
        CHECK_THROWS_AS(decode(prefix), IncompleteFrameError);
    }
    CHECK(messages_equal(decode(bytes), msg));
}

TEST_CASE("schema violations are corrupt frames") {
    RoundMessage msg;
    msg.type = MsgType::RoundComplete;
    msg.round = 1;
    msg.sender_id = 0;
    msg.payload.push_back({"acc", Matrix(1, 1, 1.0)});
    auto bytes = encode(msg);
    // tensor name starts right after the u16 count at offset 18; name
    // length byte at 18, name at 19..21
    bytes[19] = 'x';
    CHECK_THROWS_AS(decode(bytes), CorruptFrameError);
}

TEST_CASE("encode refuses schema-invalid payloads") {
    RoundMessage msg;
    msg.type = MsgType::Shutdown;
    msg.payload.push_back({"meta", Matrix(1, 1, 0.0)});
    CHECK_THROWS_AS(encode(msg), ProtocolError);

    RoundMessage wrong_name;
    wrong_name.type = MsgType::RoundComplete;
    wrong_name.payload.push_back({"accuracy", Matrix(1, 1, 0.0)});
    CHECK_THROWS_AS(encode(wrong_name), ProtocolError);
}

TEST_CASE("trailing garbage inside the declared frame is corrupt") {
    auto bytes = encode(RoundMessage{MsgType::Shutdown, 0, 0, {}});
    // grow declared length and append a byte
    bytes.push_back(0xAB);
    bytes[0] += 1;
    CHECK_THROWS_AS(decode(bytes), CorruptFrameError);
}

TEST_SUITE_END();

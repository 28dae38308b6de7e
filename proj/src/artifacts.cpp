#include "fedvit/artifacts.hpp"

#include <cstring>

#include "fedvit/errors.hpp"
#include "fedvit/serialize.hpp"

namespace fedvit {

namespace {

constexpr char kModelMagic[4] = {'F', 'V', 'W', '1'};
constexpr char kSnapshotMagic[4] = {'F', 'V', 'G', '1'};

void write_config(ByteWriter& w, const ModelConfig& cfg) {
    w.u32(static_cast<std::uint32_t>(cfg.image_h));
    w.u32(static_cast<std::uint32_t>(cfg.image_w));
    w.u32(static_cast<std::uint32_t>(cfg.channels));
    w.u32(static_cast<std::uint32_t>(cfg.patch_size));
    w.u32(static_cast<std::uint32_t>(cfg.embed_dim));
    w.u32(static_cast<std::uint32_t>(cfg.num_classes));
    w.u32(static_cast<std::uint32_t>(cfg.hidden_dim));
}

ModelConfig read_config(ByteReader& r) {
    ModelConfig cfg;
    cfg.image_h = r.u32();
    cfg.image_w = r.u32();
    cfg.channels = r.u32();
    cfg.patch_size = r.u32();
    cfg.embed_dim = r.u32();
    cfg.num_classes = r.u32();
    cfg.hidden_dim = r.u32();
    return cfg;
}

Matrix expect_tensor(ByteReader& r, const char* name) {
    NamedTensor t = read_tensor(r);
    if (t.name != name) {
        throw FormatError("expected tensor '" + std::string(name) + "', found '" + t.name + "'");
    }
    return std::move(t.value);
}

}  // namespace

void save_model(const StoredModel& model, const std::string& path) {
    ByteWriter w;
    w.bytes(kModelMagic, 4);
    w.u8(1);
    write_config(w, model.config);
    w.u8(model.params.encrypted ? 1 : 0);
    w.u16(7);
    write_tensor(w, "e_pat", model.params.e_pat);
    write_tensor(w, "e_pos", model.params.e_pos);
    write_tensor(w, "x_class", model.params.x_class);
    write_tensor(w, "head_w1", model.params.head_w1);
    write_tensor(w, "head_b1", model.params.head_b1);
    write_tensor(w, "head_w2", model.params.head_w2);
    write_tensor(w, "head_b2", model.params.head_b2);
    write_file(path, w.data());
}

StoredModel load_model(const std::string& path) {
    const auto bytes = read_file(path);
    ByteReader r(bytes);
    try {
        char magic[4];
        r.raw(magic, 4);
        if (std::memcmp(magic, kModelMagic, 4) != 0) {
            throw FormatError("not a model file (bad magic): " + path);
        }
        const std::uint8_t version = r.u8();
        if (version != 1) {
            throw UnsupportedVersionError("model file version " + std::to_string(version));
        }
        StoredModel out;
        out.config = read_config(r);
        out.params.encrypted = r.u8() != 0;
        const std::uint16_t count = r.u16();
        if (count != 7) throw FormatError("model file must carry 7 tensors");
        out.params.e_pat = expect_tensor(r, "e_pat");
        out.params.e_pos = expect_tensor(r, "e_pos");
        out.params.x_class = expect_tensor(r, "x_class");
        out.params.head_w1 = expect_tensor(r, "head_w1");
        out.params.head_b1 = expect_tensor(r, "head_b1");
        out.params.head_w2 = expect_tensor(r, "head_w2");
        out.params.head_b2 = expect_tensor(r, "head_b2");
        if (r.remaining() != 0) throw FormatError("trailing bytes in model file: " + path);
        return out;
    } catch (const IncompleteFrameError&) {
        throw FormatError("model file truncated: " + path);
    }
}

void save_attack_snapshot(const AttackSnapshot& snap, const std::string& path) {
    ByteWriter w;
    w.bytes(kSnapshotMagic, 4);
    w.u8(1);
    write_config(w, snap.config);
    std::uint8_t flags = 0;
    if (snap.enc_g_pat.has_value()) flags |= 1;
    if (snap.matches_wire) flags |= 2;
    w.u8(flags);
    w.u32(snap.sample.label);
    const std::uint16_t count = snap.enc_g_pat.has_value() ? 5 : 3;
    w.u16(count);
    Matrix pixels(1, snap.sample.pixels.size());
    pixels.data = snap.sample.pixels;
    write_tensor(w, "pixels", pixels);
    write_tensor(w, "g_pat", snap.g_pat);
    write_tensor(w, "g_pos", snap.g_pos);
    if (snap.enc_g_pat.has_value()) {
        write_tensor(w, "enc_g_pat", *snap.enc_g_pat);
        write_tensor(w, "enc_g_pos", *snap.enc_g_pos);
    }
    write_file(path, w.data());
}

AttackSnapshot load_attack_snapshot(const std::string& path) {
    const auto bytes = read_file(path);
    ByteReader r(bytes);
    try {
        char magic[4];
        r.raw(magic, 4);
        if (std::memcmp(magic, kSnapshotMagic, 4) != 0) {
            throw FormatError("not a gradient snapshot (bad magic): " + path);
        }
        const std::uint8_t version = r.u8();
        if (version != 1) {
            throw UnsupportedVersionError("snapshot version " + std::to_string(version));
        }
        AttackSnapshot out;
        out.config = read_config(r);
        const std::uint8_t flags = r.u8();
        out.matches_wire = (flags & 2) != 0;
        const std::uint32_t label = r.u32();
        const std::uint16_t count = r.u16();
        if (count != 3 && count != 5) throw FormatError("snapshot must carry 3 or 5 tensors");

        const Matrix pixels = expect_tensor(r, "pixels");
        out.sample.h = out.config.image_h;
        out.sample.w = out.config.image_w;
        out.sample.c = out.config.channels;
        out.sample.label = label;
        if (pixels.data.size() != out.sample.h * out.sample.w * out.sample.c) {
            throw FormatError("snapshot pixel count does not match config");
        }
        out.sample.pixels = pixels.data;
        out.g_pat = expect_tensor(r, "g_pat");
        out.g_pos = expect_tensor(r, "g_pos");
        if ((flags & 1) != 0) {
            if (count != 5) throw FormatError("snapshot flags promise encrypted tensors");
            out.enc_g_pat = expect_tensor(r, "enc_g_pat");
            out.enc_g_pos = expect_tensor(r, "enc_g_pos");
        }
        if (r.remaining() != 0) throw FormatError("trailing bytes in snapshot: " + path);
        return out;
    } catch (const IncompleteFrameError&) {
        throw FormatError("snapshot truncated: " + path);
    }
}

}  // namespace fedvit

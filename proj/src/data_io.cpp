#include "fedvit/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>

#include "fedvit/errors.hpp"
#include "fedvit/serialize.hpp"

namespace fedvit {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

std::uint32_t read_be_u32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw FormatError("unexpected end of IDX header: " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
           std::uint32_t(b[3]);
}

}  // namespace

Dataset synth_generate(const Rng& root, std::size_t n, const ModelConfig& cfg, std::size_t k) {
    if (k < 2) throw ConfigError("synth_generate: need at least 2 classes");
    Rng noise = root.stream("synth-noise");

    Dataset ds;
    ds.num_classes = k;
    ds.name = "synth";
    ds.samples.reserve(n);
    const double span = static_cast<double>(std::max(cfg.image_h, cfg.image_w));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t cls = i % k;
        const double theta = kPi * static_cast<double>(cls) / static_cast<double>(k);
        const double freq = 1.0 + static_cast<double>(cls % 5);
        const double phase = 0.9 * static_cast<double>(cls);
        Sample s;
        s.h = cfg.image_h;
        s.w = cfg.image_w;
        s.c = cfg.channels;
        s.label = static_cast<std::uint32_t>(cls);
        s.pixels.resize(cfg.image_h * cfg.image_w * cfg.channels);
        for (std::size_t y = 0; y < cfg.image_h; ++y) {
            for (std::size_t x = 0; x < cfg.image_w; ++x) {
                const double u =
                    (std::cos(theta) * static_cast<double>(x) + std::sin(theta) * static_cast<double>(y)) /
                    span;
                const double base = 0.5 + 0.45 * std::sin(2.0 * kPi * freq * u + phase);
                for (std::size_t ch = 0; ch < cfg.channels; ++ch) {
                    const double tint =
                        0.08 * std::sin(2.0 * kPi * static_cast<double>(ch) / 3.0 +
                                        static_cast<double>(cls));
                    s.at(y, x, ch) = clamp01(base + tint + 0.05 * noise.normal());
                }
            }
        }
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

Dataset synth_generate(std::uint64_t seed, std::size_t n, const ModelConfig& cfg, std::size_t k) {
    return synth_generate(Rng(seed), n, cfg, k);
}

Dataset load_cifar10_binary(const std::vector<std::string>& paths) {
    constexpr std::size_t kRecord = 3073;  // label + 3 * 1024
    constexpr std::size_t kPlane = 1024;
    Dataset ds;
    ds.num_classes = 10;
    ds.name = "cifar10";
    for (const auto& path : paths) {
        const auto bytes = read_file(path);
        if (bytes.size() % kRecord != 0) {
            throw FormatError("CIFAR-10 file " + path + " has " + std::to_string(bytes.size()) +
                              " bytes, not a multiple of 3073 (truncated record at offset " +
                              std::to_string(bytes.size() - bytes.size() % kRecord) + ")");
        }
        for (std::size_t off = 0; off < bytes.size(); off += kRecord) {
            const std::uint8_t label = bytes[off];
            if (label > 9) {
                throw FormatError("CIFAR-10 label byte " + std::to_string(label) + " at offset " +
                                  std::to_string(off) + " in " + path);
            }
            Sample s;
            s.h = 32;
            s.w = 32;
            s.c = 3;
            s.label = label;
            s.pixels.resize(32 * 32 * 3);
            for (std::size_t y = 0; y < 32; ++y)
                for (std::size_t x = 0; x < 32; ++x)
                    for (std::size_t ch = 0; ch < 3; ++ch) {
                        const std::uint8_t v = bytes[off + 1 + ch * kPlane + y * 32 + x];
                        s.at(y, x, ch) = static_cast<double>(v) / 255.0;
                    }
            ds.samples.push_back(std::move(s));
        }
    }
    return ds;
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw FormatError("cannot open IDX images: " + images_path);
    if (read_be_u32(img, images_path) != 0x00000803) {
        throw FormatError("IDX image magic mismatch in " + images_path);
    }
    const std::uint32_t count = read_be_u32(img, images_path);
    const std::uint32_t rows = read_be_u32(img, images_path);
    const std::uint32_t cols = read_be_u32(img, images_path);

    std::ifstream lbl(labels_path, std::ios::binary);
    if (!lbl) throw FormatError("cannot open IDX labels: " + labels_path);
    if (read_be_u32(lbl, labels_path) != 0x00000801) {
        throw FormatError("IDX label magic mismatch in " + labels_path);
    }
    const std::uint32_t label_count = read_be_u32(lbl, labels_path);
    if (label_count != count) {
        throw FormatError("IDX image/label count mismatch: " + std::to_string(count) + " vs " +
                          std::to_string(label_count));
    }

    Dataset ds;
    ds.name = "idx";
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(rows) * cols);
    std::uint32_t max_label = 0;
    for (std::uint32_t i = 0; i < count; ++i) {
        img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!img) throw FormatError("IDX images truncated at record " + std::to_string(i));
        int lv = lbl.get();
        if (lv == EOF) throw FormatError("IDX labels truncated at record " + std::to_string(i));
        Sample s;
        s.h = rows;
        s.w = cols;
        s.c = 1;
        s.label = static_cast<std::uint32_t>(lv);
        max_label = std::max(max_label, s.label);
        s.pixels.resize(buf.size());
        for (std::size_t j = 0; j < buf.size(); ++j) s.pixels[j] = static_cast<double>(buf[j]) / 255.0;
        ds.samples.push_back(std::move(s));
    }
    ds.num_classes = max_label + 1;
    return ds;
}

Partition partition_random(const Dataset& ds, std::size_t m, std::size_t per_client,
                           std::uint64_t seed) {
    if (m * per_client > ds.size()) {
        throw ConfigError("partition_random: need " + std::to_string(m * per_client) +
                          " samples, dataset has " + std::to_string(ds.size()));
    }
    std::vector<std::size_t> indices(ds.size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    Rng rng = Rng(seed).stream("partition");
    for (std::size_t i = indices.size(); i-- > 1;) {
        std::swap(indices[i], indices[static_cast<std::size_t>(rng.below(i + 1))]);
    }
    Partition p;
    p.by_client.resize(m);
    std::size_t next = 0;
    for (std::size_t c = 0; c < m; ++c) {
        p.by_client[c].assign(indices.begin() + static_cast<std::ptrdiff_t>(next),
                              indices.begin() + static_cast<std::ptrdiff_t>(next + per_client));
        next += per_client;
    }
    return p;
}

void write_image(const Sample& sample, const std::string& path) {
    if (sample.c != 1 && sample.c != 3) {
        throw FormatError("write_image: only 1- or 3-channel images, got " +
                          std::to_string(sample.c));
    }
    bool clamped = false;
    std::vector<std::uint8_t> bytes;
    bytes.reserve(sample.pixels.size());
    for (double v : sample.pixels) {
        if (v < 0.0 || v > 1.0) {
            clamped = true;
            v = clamp01(v);
        }
        bytes.push_back(static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5)));
    }
    if (clamped) {
        std::cerr << "write_image: pixel values outside [0,1] clamped for " << path << "\n";
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open image for writing: " + path);
    out << (sample.c == 3 ? "P6" : "P5") << "\n" << sample.w << " " << sample.h << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("image write failed: " + path);
}

}  // namespace fedvit

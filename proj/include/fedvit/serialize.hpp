#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedvit/matrix.hpp"

namespace fedvit {

/// Little-endian byte sink shared by the wire codec and the binary file
/// formats (key, model, gradient snapshot).
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void bytes(const void* p, std::size_t n);
    void str(std::string_view s) { bytes(s.data(), s.size()); }

    const std::vector<std::uint8_t>& data() const { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }
    std::size_t size() const { return buf_.size(); }

private:
    std::vector<std::uint8_t> buf_;
};

/// Bounds-checked little-endian reader. Running past the end raises
/// IncompleteFrameError so callers can distinguish truncation from
/// corruption.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    std::string str(std::size_t n);
    void raw(void* out, std::size_t n);

    std::size_t remaining() const { return data_.size() - pos_; }
    std::size_t position() const { return pos_; }

private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;

    void need(std::size_t n) const;
};

/// Tensor layout shared by the wire format and the model/key files:
/// name length u8 + ASCII name + rows u32 + cols u32 + row-major LE f64.
void write_tensor(ByteWriter& w, std::string_view name, const Matrix& m);

struct NamedTensor {
    std::string name;
    Matrix value;
};

NamedTensor read_tensor(ByteReader& r);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace fedvit

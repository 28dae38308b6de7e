#include "fedvit/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "fedvit/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

namespace fedvit {

void ByteWriter::u16(std::uint16_t v) { bytes(&v, 2); }
void ByteWriter::u32(std::uint32_t v) { bytes(&v, 4); }
void ByteWriter::u64(std::uint64_t v) { bytes(&v, 8); }

void ByteWriter::f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
}

void ByteWriter::bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
}

void ByteReader::need(std::size_t n) const {
    if (pos_ + n > data_.size()) {
        throw IncompleteFrameError("truncated at byte " + std::to_string(pos_) + ", need " +
                                   std::to_string(n) + " more");
    }
}

std::uint8_t ByteReader::u8() {
    need(1);
    return data_[pos_++];
}

std::uint16_t ByteReader::u16() {
    need(2);
    std::uint16_t v;
    std::memcpy(&v, data_.data() + pos_, 2);
    pos_ += 2;
    return v;
}

std::uint32_t ByteReader::u32() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, data_.data() + pos_, 4);
    pos_ += 4;
    return v;
}

std::uint64_t ByteReader::u64() {
    need(8);
    std::uint64_t v;
    std::memcpy(&v, data_.data() + pos_, 8);
    pos_ += 8;
    return v;
}

double ByteReader::f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::string ByteReader::str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
}

void ByteReader::raw(void* out, std::size_t n) {
    need(n);
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
}

void write_tensor(ByteWriter& w, std::string_view name, const Matrix& m) {
    if (name.empty() || name.size() > 255) {
        throw SizeError("tensor name length must be 1..255");
    }
    w.u8(static_cast<std::uint8_t>(name.size()));
    w.str(name);
    w.u32(static_cast<std::uint32_t>(m.rows));
    w.u32(static_cast<std::uint32_t>(m.cols));
    w.bytes(m.data.data(), m.data.size() * sizeof(double));
}

NamedTensor read_tensor(ByteReader& r) {
    const std::uint8_t name_len = r.u8();
    if (name_len == 0) throw CorruptFrameError("tensor with empty name");
    NamedTensor t;
    t.name = r.str(name_len);
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (rows == 0 || cols == 0) {
        throw CorruptFrameError("tensor '" + t.name + "' with zero dimension");
    }
    t.value = Matrix(rows, cols);
    r.raw(t.value.data.data(), t.value.data.size() * sizeof(double));
    return t;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open file for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed: " + path);
}

}  // namespace fedvit

#pragma once

// Little-endian byte packing shared by the LUT and model file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>

#include "irbfn/errors.hpp"

namespace irbfn::detail {

class ByteWriter {
 public:
  void bytes(std::string_view raw) { buffer_.append(raw); }

  void u8(std::uint8_t v) { buffer_.push_back(static_cast<char>(v)); }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void write_file(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    if (!out) throw Error("failed writing '" + path.string() + "'");
  }

  const std::string& buffer() const { return buffer_; }

 private:
  std::string buffer_;
};

class ByteReader {
 public:
  ByteReader(std::string data, std::string what) : data_(std::move(data)), what_(std::move(what)) {}

  static ByteReader from_file(const std::filesystem::path& path, std::string what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return ByteReader(std::move(data), std::move(what));
  }

  void expect_magic(std::string_view magic) {
    need(magic.size(), "magic");
    if (std::string_view(data_).substr(offset_, magic.size()) != magic) {
      throw FormatError(what_ + ": bad magic (expected '" + std::string(magic) + "')");
    }
    offset_ += magic.size();
  }

  std::uint8_t u8(const char* field) {
    need(1, field);
    return static_cast<std::uint8_t>(data_[offset_++]);
  }

  std::uint32_t u32(const char* field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(raw(offset_ + i)) << (8 * i);
    offset_ += 4;
    return v;
  }

  std::uint64_t u64(const char* field) {
    need(8, field);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(raw(offset_ + i)) << (8 * i);
    offset_ += 8;
    return v;
  }

  double f64(const char* field) { return std::bit_cast<double>(u64(field)); }

  std::size_t offset() const { return offset_; }
  std::size_t remaining() const { return data_.size() - offset_; }

  void expect_end() const {
    if (offset_ != data_.size()) {
      throw FormatError(what_ + ": " + std::to_string(data_.size() - offset_) +
                        " trailing bytes after offset " + std::to_string(offset_));
    }
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw FormatError(what_ + ": " + message + " (at byte offset " + std::to_string(offset_) + ")");
  }

 private:
  std::uint8_t raw(std::size_t i) const { return static_cast<std::uint8_t>(data_[i]); }

  void need(std::size_t n, const char* field) const {
    if (data_.size() - offset_ < n) {
      throw FormatError(what_ + ": truncated while reading " + field + " at byte offset " +
                        std::to_string(offset_) + " (file is " + std::to_string(data_.size()) +
                        " bytes)");
    }
  }

  std::string data_;
  std::string what_;
  std::size_t offset_ = 0;
};

}  // namespace irbfn::detail

#pragma once

// Little-endian packing helpers shared by the binary file formats.

#include <algorithm>
#include <bit>
#include <cstring>
#include <filesystem>
#include <string>

namespace lada::detail {

template <typename T>
void put_le(std::string& buf, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  buf.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

/// Bounds-checked cursor; truncation raises ErrorT with the byte offset.
template <typename ErrorT>
class ByteReader {
 public:
  ByteReader(std::string data, std::string context)
      : data_(std::move(data)), context_(std::move(context)) {}

  template <typename T>
  T get(const char* what) {
    if (pos_ + sizeof(T) > data_.size()) {
      throw ErrorT(context_ + ": truncated file reading " + what + " at offset " +
                   std::to_string(pos_));
    }
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, data_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::size_t offset() const noexcept { return pos_; }
  bool at_end() const noexcept { return pos_ == data_.size(); }

 private:
  std::string data_;
  std::string context_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace lada::detail

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "ptgnn/common/errors.hpp"

namespace ptgnn {

namespace detail {

template <typename U>
U to_little(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    U out = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) out = (out << 8) | ((v >> (8 * i)) & 0xFF);
    return out;
  } else {
    return v;
  }
}

}  // namespace detail

/// Little-endian primitive writer.
class LeWriter {
 public:
  explicit LeWriter(std::ostream& out) : out_(out) {}

  void bytes(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); }
  void u32(std::uint32_t v) { put(detail::to_little(v)); }
  void u64(std::uint64_t v) { put(detail::to_little(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

 private:
  template <typename U>
  void put(U v) { out_.write(reinterpret_cast<const char*>(&v), sizeof(U)); }
  std::ostream& out_;
};

/// Little-endian primitive reader; throws DataError on truncation.
class LeReader {
 public:
  LeReader(std::istream& in, std::string origin) : in_(in), origin_(std::move(origin)) {}

  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw DataError(origin_ + ": truncated file");
  }
  std::uint32_t u32() { return detail::to_little(get<std::uint32_t>()); }
  std::uint64_t u64() { return detail::to_little(get<std::uint64_t>()); }
  double f64() { return std::bit_cast<double>(u64()); }

 private:
  template <typename U>
  U get() {
    U v{};
    bytes(&v, sizeof(U));
    return v;
  }
  std::istream& in_;
  std::string origin_;
};

}  // namespace ptgnn

#pragma once

// Minimal little-endian binary encoding used by the snapshot blobs. Doubles
// are written as their raw IEEE-754 bit pattern so decoding is bit-exact.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdo::io {

static_assert(std::endian::native == std::endian::little,
              "snapshot encoding assumes a little-endian host");

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void i64(std::int64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  void f64s(const std::vector<double>& v) {
    u64(v.size());
    raw(v.data(), v.size() * sizeof(double));
  }
  void i32s(const std::vector<int>& v) {
    u64(v.size());
    for (int x : v) u32(static_cast<std::uint32_t>(x));
  }

 private:
  void raw(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out_) throw std::runtime_error("binary write failed");
  }
  std::ostream& out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  std::uint32_t u32() { return pod<std::uint32_t>(); }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  std::int64_t i64() { return pod<std::int64_t>(); }
  double f64() { return pod<double>(); }
  std::string str() {
    std::string s(checked_length(1), '\0');
    raw(s.data(), s.size());
    return s;
  }
  std::vector<double> f64s() {
    std::vector<double> v(checked_length(sizeof(double)));
    raw(v.data(), v.size() * sizeof(double));
    return v;
  }
  std::vector<int> i32s() {
    std::vector<int> v(checked_length(4));
    for (int& x : v) x = static_cast<int>(u32());
    return v;
  }

 private:
  template <typename T>
  T pod() {
    T v;
    raw(&v, sizeof v);
    return v;
  }
  std::size_t checked_length(std::size_t element_size) {
    const std::uint64_t n = u64();
    if (n > (std::uint64_t{1} << 32) / element_size) {
      throw std::runtime_error("binary read: implausible length");
    }
    return static_cast<std::size_t>(n);
  }
  void raw(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (!in_) throw std::runtime_error("binary read: truncated input");
  }
  std::istream& in_;
};

}  // namespace pdo::io

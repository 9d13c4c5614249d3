#pragma once

#include <cstdint>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace jcas::codec {

// Raised by Reader on truncated or malformed input. `offset` is the byte
// position at which decoding failed.
class DecodeError : public std::runtime_error {
 public:
  DecodeError(std::size_t offset, const std::string& what)
      : std::runtime_error("decode error at byte " + std::to_string(offset) +
                           ": " + what),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Canonical little-endian writer. Field order is fixed by the callers;
// identical values always produce identical bytes.
class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { raw(&v, 2); }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void i64(std::int64_t v) { raw(&v, 8); }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void boolean(bool v) { u8(v ? 1 : 0); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s.data(), s.size());
  }
  template <typename T, typename Fn>
  void list(const std::vector<T>& items, Fn&& each) {
    u32(static_cast<std::uint32_t>(items.size()));
    for (const T& item : items) each(*this, item);
  }
  template <typename T, typename Fn>
  void opt(const std::optional<T>& v, Fn&& each) {
    boolean(v.has_value());
    if (v) each(*this, *v);
  }

  const std::string& bytes() const { return buf_; }
  std::string take() { return std::move(buf_); }

 private:
  void raw(const void* p, std::size_t n) {
    buf_.append(static_cast<const char*>(p), n);
  }
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint16_t u16() { return get<std::uint16_t>(); }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  std::uint64_t u64() { return get<std::uint64_t>(); }
  std::int64_t i64() { return get<std::int64_t>(); }
  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  bool boolean() {
    std::uint8_t v = u8();
    if (v > 1) fail("boolean out of range");
    return v == 1;
  }
  std::string str() {
    std::uint32_t n = u32();
    if (n > kMaxLength) fail("string length too large");
    return std::string(take(n));
  }
  template <typename T, typename Fn>
  std::vector<T> list(Fn&& each) {
    std::uint32_t n = u32();
    if (n > kMaxLength) fail("list length too large");
    std::vector<T> out;
    out.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) out.push_back(each(*this));
    return out;
  }
  template <typename T, typename Fn>
  std::optional<T> opt(Fn&& each) {
    if (!boolean()) return std::nullopt;
    return each(*this);
  }

  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == data_.size(); }
  void expect_done() const {
    if (!done()) throw DecodeError(pos_, "trailing bytes");
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw DecodeError(pos_, what);
  }

 private:
  static constexpr std::uint32_t kMaxLength = 1u << 26;

  std::string_view take(std::size_t n) {
    if (pos_ + n > data_.size()) {
      throw DecodeError(data_.size(), "truncated input");
    }
    std::string_view out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  template <typename T>
  T get() {
    std::string_view b = take(sizeof(T));
    T v;
    std::memcpy(&v, b.data(), sizeof(T));
    return v;
  }

  std::string_view data_;
  std::size_t pos_{0};
};

}  // namespace jcas::codec

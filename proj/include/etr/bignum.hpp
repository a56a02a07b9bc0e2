#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace etr {

// Seedable generator threaded through every sampling routine.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard, so a seed reproduces the same stream on every conforming
// platform. Only raw 64-bit outputs are consumed; standard distributions are
// avoided because their algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform value in [0, bound). bound must be nonzero.
  std::uint64_t below(std::uint64_t bound);

  // Uniform value in [lo, hi].
  std::int64_t in_range(std::int64_t lo, std::int64_t hi);

  // Derives an independent generator; used to give sub-tasks their own stream.
  Rng fork() { return Rng(next()); }

 private:
  std::mt19937_64 engine_;
};

// Arbitrary-precision nonnegative integer.
//
// Little-endian 64-bit limbs, always normalized (no zero high limb; zero is the
// empty vector). Values are immutable once built: every operation returns a
// fresh Natural.
class Natural {
 public:
  using Limb = std::uint64_t;
  static constexpr int kLimbBits = 64;

  Natural() = default;
  Natural(std::uint64_t v);  // NOLINT(google-explicit-constructor)

  static Natural from_limbs(std::vector<Limb> limbs);
  // Accepts decimal digits only. Returns nullopt on any other character or an
  // empty string.
  static std::optional<Natural> from_decimal(std::string_view s);
  // Accepts [0-9a-fA-F]+, with an optional "0x" prefix.
  static std::optional<Natural> from_hex(std::string_view s);
  // 2^n.
  static Natural power_of_two(std::size_t n);

  std::string to_decimal() const;
  // Canonical lowercase hex, no prefix, no leading zeros, "0" for zero.
  std::string to_hex() const;

  bool is_zero() const { return limbs_.empty(); }
  bool is_odd() const { return !limbs_.empty() && (limbs_[0] & 1u) != 0; }
  bool bit(std::size_t i) const;
  std::size_t bit_length() const;
  std::span<const Limb> limbs() const { return limbs_; }
  std::size_t limb_count() const { return limbs_.size(); }

  // Low 64 bits.
  std::uint64_t low_u64() const { return limbs_.empty() ? 0 : limbs_[0]; }
  // Throws std::overflow_error if the value does not fit.
  std::uint64_t to_u64() const;

  friend bool operator==(const Natural& a, const Natural& b) = default;
  friend std::strong_ordering operator<=>(const Natural& a, const Natural& b);

 private:
  explicit Natural(std::vector<Limb> limbs) : limbs_(std::move(limbs)) {}
  void normalize();

  std::vector<Limb> limbs_;

  friend Natural add(const Natural&, const Natural&);
  friend Natural sub(const Natural&, const Natural&);
  friend Natural mul_schoolbook(const Natural&, const Natural&);
  friend Natural mul_karatsuba(const Natural&, const Natural&, std::size_t);
  friend std::pair<Natural, Natural> divmod(const Natural&, const Natural&);
  friend Natural shift_left(const Natural&, std::size_t);
  friend Natural shift_right(const Natural&, std::size_t);
};

// Operand size (in limbs, of the smaller factor) at which mul switches from
// schoolbook to Karatsuba recursion.
inline constexpr std::size_t kDefaultKaratsubaThreshold = 32;

Natural add(const Natural& a, const Natural& b);
// Throws std::underflow_error when a < b.
Natural sub(const Natural& a, const Natural& b);
Natural mul_schoolbook(const Natural& a, const Natural& b);
Natural mul_karatsuba(const Natural& a, const Natural& b,
                      std::size_t threshold = kDefaultKaratsubaThreshold);
inline Natural mul(const Natural& a, const Natural& b) {
  return mul_karatsuba(a, b, kDefaultKaratsubaThreshold);
}
// (quotient, remainder). Throws std::domain_error when m is zero.
std::pair<Natural, Natural> divmod(const Natural& a, const Natural& m);
Natural mod(const Natural& a, const Natural& m);
Natural shift_left(const Natural& a, std::size_t bits);
Natural shift_right(const Natural& a, std::size_t bits);

// Uniform n-bit value with the top bit set. n = 0 throws std::invalid_argument.
Natural random_bits(std::size_t n, Rng& rng);
// Uniform n-bit value with top and bottom bits set.
Natural random_odd(std::size_t n, Rng& rng);

inline Natural operator+(const Natural& a, const Natural& b) { return add(a, b); }
inline Natural operator-(const Natural& a, const Natural& b) { return sub(a, b); }
inline Natural operator*(const Natural& a, const Natural& b) { return mul(a, b); }
inline Natural operator%(const Natural& a, const Natural& b) { return mod(a, b); }
inline Natural operator/(const Natural& a, const Natural& b) {
  return divmod(a, b).first;
}
inline Natural operator<<(const Natural& a, std::size_t n) { return shift_left(a, n); }
inline Natural operator>>(const Natural& a, std::size_t n) { return shift_right(a, n); }

}  // namespace etr

#include "etr/bignum.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace etr {
namespace {

using Limb = Natural::Limb;
using Limbs = std::vector<Limb>;
using u128 = unsigned __int128;

void trim(Limbs& v) {
  while (!v.empty() && v.back() == 0) v.pop_back();
}

int compare_limbs(std::span<const Limb> a, std::span<const Limb> b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  }
  return 0;
}

std::span<const Limb> trimmed(std::span<const Limb> v) {
  std::size_t n = v.size();
  while (n > 0 && v[n - 1] == 0) --n;
  return v.first(n);
}

Limbs add_limbs(std::span<const Limb> a, std::span<const Limb> b) {
  if (a.size() < b.size()) std::swap(a, b);
  Limbs out(a.size() + 1);
  Limb carry = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    u128 s = static_cast<u128>(a[i]) + (i < b.size() ? b[i] : 0) + carry;
    out[i] = static_cast<Limb>(s);
    carry = static_cast<Limb>(s >> 64);
  }
  out[a.size()] = carry;
  trim(out);
  return out;
}

// a -= b in place, requires a >= b.
void sub_in_place(Limbs& a, std::span<const Limb> b) {
  Limb borrow = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    Limb bi = i < b.size() ? b[i] : 0;
    if (i >= b.size() && borrow == 0) break;
    Limb d = a[i] - bi;
    Limb nb = (a[i] < bi) ? 1 : 0;
    Limb d2 = d - borrow;
    nb |= (d < borrow) ? 1 : 0;
    a[i] = d2;
    borrow = nb;
  }
  trim(a);
}

// out[offset..] += v, growing out as needed.
void add_shifted(Limbs& out, std::span<const Limb> v, std::size_t offset) {
  if (out.size() < offset + v.size() + 1) out.resize(offset + v.size() + 1, 0);
  Limb carry = 0;
  std::size_t i = 0;
  for (; i < v.size(); ++i) {
    u128 s = static_cast<u128>(out[offset + i]) + v[i] + carry;
    out[offset + i] = static_cast<Limb>(s);
    carry = static_cast<Limb>(s >> 64);
  }
  for (std::size_t k = offset + i; carry != 0; ++k) {
    if (k == out.size()) out.push_back(0);
    u128 s = static_cast<u128>(out[k]) + carry;
    out[k] = static_cast<Limb>(s);
    carry = static_cast<Limb>(s >> 64);
  }
}

Limbs schoolbook(std::span<const Limb> a, std::span<const Limb> b) {
  if (a.empty() || b.empty()) return {};
  Limbs out(a.size() + b.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    Limb carry = 0;
    const u128 ai = a[i];
    for (std::size_t j = 0; j < b.size(); ++j) {
      u128 p = ai * b[j] + out[i + j] + carry;
      out[i + j] = static_cast<Limb>(p);
      carry = static_cast<Limb>(p >> 64);
    }
    out[i + b.size()] = carry;
  }
  trim(out);
  return out;
}

Limbs karatsuba(std::span<const Limb> a, std::span<const Limb> b,
                std::size_t threshold) {
  a = trimmed(a);
  b = trimmed(b);
  if (a.size() < b.size()) std::swap(a, b);
  if (b.empty()) return {};
  if (b.size() < threshold || b.size() < 2) return schoolbook(a, b);

  // Unbalanced: slice the long operand into b-sized chunks.
  if (b.size() <= a.size() / 2) {
    Limbs out;
    for (std::size_t off = 0; off < a.size(); off += b.size()) {
      std::size_t len = std::min(b.size(), a.size() - off);
      Limbs part = karatsuba(a.subspan(off, len), b, threshold);
      add_shifted(out, part, off);
    }
    trim(out);
    return out;
  }

  const std::size_t k = (a.size() + 1) / 2;
  auto a0 = a.first(k);
  auto a1 = a.subspan(k);
  auto b0 = b.first(std::min(k, b.size()));
  auto b1 = b.size() > k ? b.subspan(k) : std::span<const Limb>{};

  Limbs z0 = karatsuba(a0, b0, threshold);
  Limbs z2 = karatsuba(a1, b1, threshold);
  Limbs sa = add_limbs(a0, a1);
  Limbs sb = add_limbs(b0, b1);
  Limbs z1 = karatsuba(sa, sb, threshold);
  sub_in_place(z1, z0);
  sub_in_place(z1, z2);

  Limbs out = z0;
  add_shifted(out, z1, k);
  add_shifted(out, z2, 2 * k);
  trim(out);
  return out;
}

// Divides v in place by a single limb, returning the remainder.
Limb div_small(Limbs& v, Limb d) {
  u128 rem = 0;
  for (std::size_t i = v.size(); i-- > 0;) {
    u128 cur = (rem << 64) | v[i];
    v[i] = static_cast<Limb>(cur / d);
    rem = cur % d;
  }
  trim(v);
  return static_cast<Limb>(rem);
}

Limbs shl_limbs(std::span<const Limb> a, std::size_t bits) {
  if (a.empty()) return {};
  const std::size_t whole = bits / 64;
  const unsigned part = bits % 64;
  Limbs out(a.size() + whole + 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i + whole] |= a[i] << part;
    if (part != 0) out[i + whole + 1] = a[i] >> (64 - part);
  }
  trim(out);
  return out;
}

Limbs shr_limbs(std::span<const Limb> a, std::size_t bits) {
  const std::size_t whole = bits / 64;
  const unsigned part = bits % 64;
  if (whole >= a.size()) return {};
  Limbs out(a.size() - whole, 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = a[i + whole] >> part;
    if (part != 0 && i + whole + 1 < a.size()) {
      out[i] |= a[i + whole + 1] << (64 - part);
    }
  }
  trim(out);
  return out;
}

// Long division (Knuth, TAOCP vol. 2, 4.3.1 Algorithm D) over 64-bit limbs.
// Requires divisor.size() >= 2 and dividend >= divisor.
std::pair<Limbs, Limbs> long_divide(std::span<const Limb> dividend,
                                    std::span<const Limb> divisor) {
  const unsigned shift = std::countl_zero(divisor.back());
  Limbs v = shl_limbs(divisor, shift);
  Limbs u = shl_limbs(dividend, shift);
  const std::size_t n = v.size();
  u.resize(dividend.size() + 1, 0);
  const std::size_t m = u.size() - n;
  Limbs q(m, 0);

  const u128 base = static_cast<u128>(1) << 64;
  const Limb vtop = v[n - 1];
  const Limb vnext = v[n - 2];

  for (std::size_t j = m; j-- > 0;) {
    u128 num = (static_cast<u128>(u[j + n]) << 64) | u[j + n - 1];
    u128 qhat = num / vtop;
    u128 rhat = num % vtop;
    while (qhat >= base ||
           qhat * vnext > ((rhat << 64) | u[j + n - 2])) {
      --qhat;
      rhat += vtop;
      if (rhat >= base) break;
    }

    // u[j..j+n] -= qhat * v
    Limb mul_carry = 0;
    Limb borrow = 0;
    for (std::size_t i = 0; i < n; ++i) {
      u128 p = qhat * v[i] + mul_carry;
      mul_carry = static_cast<Limb>(p >> 64);
      Limb plo = static_cast<Limb>(p);
      Limb t = u[i + j] - plo;
      Limb nb = u[i + j] < plo ? 1 : 0;
      Limb t2 = t - borrow;
      nb += t < borrow ? 1 : 0;
      u[i + j] = t2;
      borrow = nb;
    }
    Limb top = u[j + n];
    Limb t = top - mul_carry;
    bool negative = top < mul_carry;
    Limb t2 = t - borrow;
    negative = negative || t < borrow;
    u[j + n] = t2;

    if (negative) {
      --qhat;
      Limb carry = 0;
      for (std::size_t i = 0; i < n; ++i) {
        u128 s = static_cast<u128>(u[i + j]) + v[i] + carry;
        u[i + j] = static_cast<Limb>(s);
        carry = static_cast<Limb>(s >> 64);
      }
      u[j + n] += carry;
    }
    q[j] = static_cast<Limb>(qhat);
  }

  u.resize(n);
  trim(u);
  Limbs r = shr_limbs(u, shift);
  trim(q);
  return {std::move(q), std::move(r)};
}

}  // namespace

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below: bound must be nonzero");
  // Rejection sampling on the largest multiple of bound.
  const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % bound;
  for (;;) {
    std::uint64_t x = next();
    if (x < limit) return x % bound;
  }
}

std::int64_t Rng::in_range(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw std::invalid_argument("Rng::in_range: empty range");
  auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(next());
  return lo + static_cast<std::int64_t>(below(span));
}

Natural::Natural(std::uint64_t v) {
  if (v != 0) limbs_.push_back(v);
}

void Natural::normalize() { trim(limbs_); }

Natural Natural::from_limbs(std::vector<Limb> limbs) {
  Natural n(std::move(limbs));
  n.normalize();
  return n;
}

Natural Natural::power_of_two(std::size_t n) {
  Limbs v(n / 64 + 1, 0);
  v.back() = Limb{1} << (n % 64);
  return Natural(std::move(v));
}

std::optional<Natural> Natural::from_decimal(std::string_view s) {
  if (s.empty()) return std::nullopt;
  constexpr std::size_t kChunk = 19;
  Limbs v;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t len = std::min(kChunk, s.size() - pos);
    Limb chunk = 0;
    Limb scale = 1;
    for (std::size_t i = 0; i < len; ++i) {
      char c = s[pos + i];
      if (c < '0' || c > '9') return std::nullopt;
      chunk = chunk * 10 + static_cast<Limb>(c - '0');
      scale *= 10;
    }
    pos += len;
    Limb carry = chunk;
    for (auto& limb : v) {
      u128 p = static_cast<u128>(limb) * scale + carry;
      limb = static_cast<Limb>(p);
      carry = static_cast<Limb>(p >> 64);
    }
    if (carry != 0) v.push_back(carry);
  }
  return from_limbs(std::move(v));
}

std::optional<Natural> Natural::from_hex(std::string_view s) {
  if (s.size() >= 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s.remove_prefix(2);
  if (s.empty()) return std::nullopt;
  Limbs v((s.size() + 15) / 16, 0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[s.size() - 1 - i];
    Limb d;
    if (c >= '0' && c <= '9') {
      d = static_cast<Limb>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      d = static_cast<Limb>(c - 'a' + 10);
    } else if (c >= 'A' && c <= 'F') {
      d = static_cast<Limb>(c - 'A' + 10);
    } else {
      return std::nullopt;
    }
    v[i / 16] |= d << (4 * (i % 16));
  }
  return from_limbs(std::move(v));
}

std::string Natural::to_decimal() const {
  if (is_zero()) return "0";
  constexpr Limb kTen19 = 10000000000000000000ULL;
  Limbs work = limbs_;
  std::vector<Limb> chunks;
  while (!work.empty()) chunks.push_back(div_small(work, kTen19));
  std::string out = std::to_string(chunks.back());
  for (std::size_t i = chunks.size() - 1; i-- > 0;) {
    std::string part = std::to_string(chunks[i]);
    out.append(19 - part.size(), '0');
    out += part;
  }
  return out;
}

std::string Natural::to_hex() const {
  if (is_zero()) return "0";
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(limbs_.size() * 16);
  for (std::size_t i = limbs_.size(); i-- > 0;) {
    for (int nib = 15; nib >= 0; --nib) {
      char c = kDigits[(limbs_[i] >> (4 * nib)) & 0xF];
      if (out.empty() && c == '0') continue;
      out.push_back(c);
    }
  }
  return out;
}

bool Natural::bit(std::size_t i) const {
  std::size_t limb = i / 64;
  if (limb >= limbs_.size()) return false;
  return ((limbs_[limb] >> (i % 64)) & 1u) != 0;
}

std::size_t Natural::bit_length() const {
  if (limbs_.empty()) return 0;
  return (limbs_.size() - 1) * 64 +
         static_cast<std::size_t>(64 - std::countl_zero(limbs_.back()));
}

std::uint64_t Natural::to_u64() const {
  if (limbs_.size() > 1) throw std::overflow_error("Natural does not fit in 64 bits");
  return low_u64();
}

std::strong_ordering operator<=>(const Natural& a, const Natural& b) {
  int c = compare_limbs(a.limbs_, b.limbs_);
  if (c < 0) return std::strong_ordering::less;
  if (c > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Natural add(const Natural& a, const Natural& b) {
  return Natural(add_limbs(a.limbs_, b.limbs_));
}

Natural sub(const Natural& a, const Natural& b) {
  if (compare_limbs(a.limbs_, b.limbs_) < 0) {
    throw std::underflow_error("Natural subtraction would be negative");
  }
  Limbs out = a.limbs_;
  sub_in_place(out, b.limbs_);
  return Natural(std::move(out));
}

Natural mul_schoolbook(const Natural& a, const Natural& b) {
  return Natural(schoolbook(a.limbs_, b.limbs_));
}

Natural mul_karatsuba(const Natural& a, const Natural& b, std::size_t threshold) {
  return Natural(karatsuba(a.limbs_, b.limbs_, std::max<std::size_t>(threshold, 2)));
}

std::pair<Natural, Natural> divmod(const Natural& a, const Natural& m) {
  if (m.is_zero()) throw std::domain_error("Natural division by zero");
  if (compare_limbs(a.limbs_, m.limbs_) < 0) return {Natural(), a};
  if (m.limbs_.size() == 1) {
    Limbs q = a.limbs_;
    Limb r = div_small(q, m.limbs_[0]);
    return {Natural(std::move(q)), Natural(r)};
  }
  auto [q, r] = long_divide(a.limbs_, m.limbs_);
  return {Natural(std::move(q)), Natural(std::move(r))};
}

Natural mod(const Natural& a, const Natural& m) { return divmod(a, m).second; }

Natural shift_left(const Natural& a, std::size_t bits) {
  return Natural(shl_limbs(a.limbs_, bits));
}

Natural shift_right(const Natural& a, std::size_t bits) {
  return Natural(shr_limbs(a.limbs_, bits));
}

Natural random_bits(std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("random_bits: bit count must be positive");
  Limbs v((n + 63) / 64);
  for (auto& limb : v) limb = rng.next();
  const unsigned top = (n - 1) % 64;
  if (top != 63) v.back() &= (Limb{1} << (top + 1)) - 1;
  v.back() |= Limb{1} << top;
  return Natural::from_limbs(std::move(v));
}

Natural random_odd(std::size_t n, Rng& rng) {
  Natural x = random_bits(n, rng);
  if (x.is_odd()) return x;
  return add(x, Natural(1));
}

}  // namespace etr

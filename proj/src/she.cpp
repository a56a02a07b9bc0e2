#include "etr/she.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace etr::she {
namespace {

thread_local std::uint64_t g_decrypt_calls = 0;
thread_local ScopedCiphertextObserver* g_observer = nullptr;

constexpr std::uint64_t kNoiseCap = std::numeric_limits<std::uint64_t>::max();

Natural reduce(Natural v, const Natural& pk, const SecurityParams& params) {
  if (params.reduce_mod_pk && v >= pk) return mod(v, pk);
  return v;
}

}  // namespace

void notify_observers(const Ciphertext& c) {
  for (auto* o = g_observer; o != nullptr; o = o->prev_) o->cb_(c);
}

ScopedCiphertextObserver::ScopedCiphertextObserver(Callback cb)
    : cb_(std::move(cb)), prev_(g_observer) {
  g_observer = this;
}

ScopedCiphertextObserver::~ScopedCiphertextObserver() { g_observer = prev_; }

std::uint64_t decrypt_call_count() { return g_decrypt_calls; }

SecurityParams SecurityParams::standard(std::uint32_t lambda, bool reduce_mod_pk) {
  return with_eta(lambda, std::uint64_t{lambda} * lambda, reduce_mod_pk);
}

SecurityParams SecurityParams::with_eta(std::uint32_t lambda, std::uint64_t eta,
                                        bool reduce_mod_pk) {
  SecurityParams p;
  p.lambda = lambda;
  p.eta = eta;
  p.r_bits = lambda;
  p.q_bits = std::uint64_t{lambda} * lambda;
  p.pk_bits = p.q_bits * lambda;
  if (eta + 2 > p.pk_bits) p.pk_bits = eta + p.q_bits;
  p.reduce_mod_pk = reduce_mod_pk;
  return p;
}

void SecurityParams::validate() const {
  if (lambda < 2) throw InvalidParams("lambda must be at least 2");
  if (eta < std::uint64_t{lambda} + 2) {
    throw InvalidParams("eta must be at least lambda + 2 (got " + std::to_string(eta) + ")");
  }
  // The cofactor q0 needs at least two bits for pk to reach exactly pk_bits.
  if (eta + 2 > pk_bits) {
    throw InvalidParams("eta (" + std::to_string(eta) + ") must be at most pk_bits - 2 (" +
                        std::to_string(pk_bits) + ")");
  }
  if (r_bits != lambda || q_bits != std::uint64_t{lambda} * lambda) {
    throw InvalidParams("r_bits/q_bits do not follow the lambda schedule");
  }
}

std::uint64_t noise_after_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t m = std::max(a, b);
  return m == kNoiseCap ? kNoiseCap : m + 1;
}

std::uint64_t noise_after_mul(std::uint64_t a, std::uint64_t b) {
  return a > kNoiseCap - b ? kNoiseCap : a + b;
}

KeyPair keygen(const SecurityParams& params, Rng& rng) {
  params.validate();
  const std::size_t cofactor_bits = params.pk_bits - params.eta;
  for (;;) {
    Natural sk = random_odd(params.eta, rng);
    // A short cofactor can make pk_bits unreachable for a given sk, so sk is
    // redrawn after a bounded number of cofactor attempts.
    for (int attempt = 0; attempt < 64; ++attempt) {
      Natural q0 = random_odd(cofactor_bits, rng);
      Natural pk = sk * q0;
      if (pk.bit_length() == params.pk_bits) {
        return KeyPair{std::move(sk), std::move(pk), std::move(q0)};
      }
    }
  }
}

namespace {

Ciphertext assemble(const Natural& pk, bool m, const Natural& r, const Natural& q,
                    const SecurityParams& params) {
  Natural noise = add(Natural(m ? 1 : 0), shift_left(r, 1));
  Ciphertext c{add(noise, pk * q),
               std::max<std::uint64_t>(params.fresh_noise_bits(), noise.bit_length())};
  notify_observers(c);
  return c;
}

}  // namespace

Ciphertext encrypt_bit(const Natural& pk, bool m, const SecurityParams& params, Rng& rng) {
  Natural r = random_bits(params.r_bits, rng);
  Natural q = random_bits(params.q_bits, rng);
  return assemble(pk, m, r, q, params);
}

#ifdef ETR_TEST_HOOKS
Ciphertext encrypt_bit_with(const Natural& pk, bool m, const Natural& r, const Natural& q,
                            const SecurityParams& params) {
  return assemble(pk, m, r, q, params);
}
#endif

bool decrypt_bit(const Natural& sk, const Ciphertext& c) {
  ++g_decrypt_calls;
  return mod(c.value, sk).is_odd();
}

Ciphertext he_add(const Ciphertext& c1, const Ciphertext& c2, const Natural& pk,
                  const SecurityParams& params) {
  Ciphertext out{reduce(c1.value + c2.value, pk, params),
                 noise_after_add(c1.noise_bits, c2.noise_bits)};
  notify_observers(out);
  return out;
}

Ciphertext he_mul(const Ciphertext& c1, const Ciphertext& c2, const Natural& pk,
                  const SecurityParams& params) {
  Ciphertext out{reduce(c1.value * c2.value, pk, params),
                 noise_after_mul(c1.noise_bits, c2.noise_bits)};
  notify_observers(out);
  return out;
}

std::vector<Ciphertext> encrypt_value(const Natural& pk, std::uint64_t v, unsigned width,
                                      const SecurityParams& params, Rng& rng) {
  if (width == 0 || width > 64) throw std::out_of_range("encrypt_value: width must be in [1, 64]");
  if (width < 64 && v >= (std::uint64_t{1} << width)) {
    throw std::out_of_range("encrypt_value: " + std::to_string(v) + " does not fit in " +
                            std::to_string(width) + " bits");
  }
  std::vector<Ciphertext> out;
  out.reserve(width);
  for (unsigned i = 0; i < width; ++i) {
    out.push_back(encrypt_bit(pk, ((v >> i) & 1u) != 0, params, rng));
  }
  return out;
}

std::uint64_t decrypt_value(const Natural& sk, std::span<const Ciphertext> cts) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < cts.size() && i < 64; ++i) {
    if (decrypt_bit(sk, cts[i])) v |= std::uint64_t{1} << i;
  }
  return v;
}

bool noise_ok(const Ciphertext& c, const SecurityParams& params) {
  return params.eta >= 1 && c.noise_bits <= params.eta - 1;
}

}  // namespace etr::she

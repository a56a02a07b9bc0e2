#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "etr/bignum.hpp"

// Bit-level somewhat-homomorphic encryption over the integers.
//
//   encrypt:  c = m + 2r + pk * Q      (r: lambda bits, Q: lambda^2 bits)
//   decrypt:  m = (c mod sk) mod 2
//
// with pk = sk * q0, so that reducing by sk removes the pk * Q term. XOR is
// ciphertext addition, AND is ciphertext multiplication. Every ciphertext
// carries an upper bound on the bit-length of its noise term; decryption is
// guaranteed correct while that bound stays below eta - 1, where eta is the
// bit-length of sk.
namespace etr::she {

class InvalidParams : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SecurityParams {
  std::uint32_t lambda = 0;
  std::uint64_t eta = 0;      // sk bit-length
  std::uint64_t pk_bits = 0;  // lambda^3, raised when eta needs more room
  std::uint64_t r_bits = 0;   // lambda
  std::uint64_t q_bits = 0;   // lambda^2
  bool reduce_mod_pk = true;

  // The lambda schedule with eta = lambda^2.
  static SecurityParams standard(std::uint32_t lambda, bool reduce_mod_pk = true);

  // The lambda schedule with an explicit eta. When lambda^3 bits cannot hold
  // an eta-bit sk times a cofactor of at least two bits, pk_bits is raised to
  // eta + lambda^2.
  static SecurityParams with_eta(std::uint32_t lambda, std::uint64_t eta,
                                 bool reduce_mod_pk = true);

  // Upper bound on the bit-length of a fresh ciphertext.
  std::uint64_t fresh_ct_bits() const { return pk_bits + q_bits + 1; }
  // Noise bound assigned to a fresh encryption.
  std::uint64_t fresh_noise_bits() const { return std::uint64_t{lambda} + 2; }

  // Throws InvalidParams when the schedule is inconsistent.
  void validate() const;

  friend bool operator==(const SecurityParams&, const SecurityParams&) = default;
};

struct KeyPair {
  Natural sk;  // odd, eta bits
  Natural pk;  // odd, pk_bits bits, pk = sk * q0
  Natural q0;
};

struct Ciphertext {
  Natural value;
  std::uint64_t noise_bits = 0;

  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

// Noise-bound propagation rules (saturating).
std::uint64_t noise_after_add(std::uint64_t a, std::uint64_t b);
std::uint64_t noise_after_mul(std::uint64_t a, std::uint64_t b);

KeyPair keygen(const SecurityParams& params, Rng& rng);

Ciphertext encrypt_bit(const Natural& pk, bool m, const SecurityParams& params, Rng& rng);
bool decrypt_bit(const Natural& sk, const Ciphertext& c);

Ciphertext he_add(const Ciphertext& c1, const Ciphertext& c2, const Natural& pk,
                  const SecurityParams& params);
Ciphertext he_mul(const Ciphertext& c1, const Ciphertext& c2, const Natural& pk,
                  const SecurityParams& params);

// LSB first. Throws std::out_of_range if v does not fit in width bits.
std::vector<Ciphertext> encrypt_value(const Natural& pk, std::uint64_t v, unsigned width,
                                      const SecurityParams& params, Rng& rng);
std::uint64_t decrypt_value(const Natural& sk, std::span<const Ciphertext> cts);

bool noise_ok(const Ciphertext& c, const SecurityParams& params);

// Per-thread instrumentation. Tests use these to audit noise bounds against
// the secret key and to confirm which parties decrypt.
std::uint64_t decrypt_call_count();

class ScopedCiphertextObserver {
 public:
  using Callback = std::function<void(const Ciphertext&)>;
  // Invoked on every ciphertext produced by encrypt_bit, he_add and he_mul on
  // this thread while the observer is alive. Observers nest.
  explicit ScopedCiphertextObserver(Callback cb);
  ~ScopedCiphertextObserver();
  ScopedCiphertextObserver(const ScopedCiphertextObserver&) = delete;
  ScopedCiphertextObserver& operator=(const ScopedCiphertextObserver&) = delete;

 private:
  Callback cb_;
  ScopedCiphertextObserver* prev_;
  friend void notify_observers(const Ciphertext&);
};

#ifdef ETR_TEST_HOOKS
// Encryption with caller-chosen r and Q. Test builds only.
Ciphertext encrypt_bit_with(const Natural& pk, bool m, const Natural& r, const Natural& q,
                            const SecurityParams& params);
#endif

}  // namespace etr::she

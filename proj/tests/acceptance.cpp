// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "etr/bignum.hpp"
#include "etr/circuits.hpp"
#include "etr/json_io.hpp"
#include "etr/protocol.hpp"
#include "etr/she.hpp"
#include "etr/sim.hpp"

namespace {

using namespace etr;
using Clock = std::chrono::steady_clock;
using she::Ciphertext;
using she::SecurityParams;

double Since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Result {
  bool pass = true;
  std::ostringstream detail;
  void Require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

int g_failures = 0;

void Report(int id, const std::string& name, Result& r, double secs, double limit_secs = 0) {
  if (limit_secs > 0) r.Require(secs < limit_secs, "runtime over " + std::to_string(limit_secs) + " s");
  if (!r.pass) ++g_failures;
  std::printf("%s  %2d  %-34s %s(%.2f s%s)\n", r.pass ? "PASS" : "FAIL", id, name.c_str(),
              r.detail.str().c_str(), secs,
              limit_secs > 0 ? (", limit " + std::to_string(static_cast<int>(limit_secs)) + " s").c_str()
                             : "");
  std::fflush(stdout);
}

// While armed, checks every ciphertext produced on this thread against the
// secret key: the tracked bound must cover the bit-length of c mod sk.
// Ciphertexts seen before the key is known are held until it is.
class NoiseAudit {
 public:
  NoiseAudit() : observer_([this](const Ciphertext& c) { See(c); }) {}

  void Arm() {
    armed_ = true;
    has_key_ = false;
    pending_.clear();
  }
  void SetKey(const Natural& sk) {
    armed_ = true;
    sk_ = sk;
    has_key_ = true;
    for (const auto& c : pending_) Check(c);
    pending_.clear();
  }
  void Disarm() {
    armed_ = false;
    has_key_ = false;
    pending_.clear();
  }

  std::uint64_t checked() const { return checked_; }
  std::uint64_t violations() const { return violations_; }

 private:
  void See(const Ciphertext& c) {
    if (!armed_) return;
    if (has_key_) {
      Check(c);
    } else {
      pending_.push_back(c);
    }
  }
  void Check(const Ciphertext& c) {
    ++checked_;
    if (mod(c.value, sk_).bit_length() > c.noise_bits) ++violations_;
  }

  Natural sk_;
  bool armed_ = false;
  bool has_key_ = false;
  std::vector<Ciphertext> pending_;
  std::uint64_t checked_ = 0;
  std::uint64_t violations_ = 0;
  she::ScopedCiphertextObserver observer_;
};

NoiseAudit* g_audit = nullptr;

// Roundtrip of fresh encryptions at eta = lambda + 3.
void Roundtrip() {
  auto t0 = Clock::now();
  Result r;
  std::uint64_t total = 0;
  std::uint64_t wrong = 0;
  for (std::uint32_t lambda : {2u, 3u, 5u}) {
    Rng rng(1000 + lambda);
    auto params = SecurityParams::with_eta(lambda, lambda + 3);
    she::KeyPair keys;
    for (int i = 0; i < 10000; ++i) {
      if (i % 1000 == 0) keys = she::keygen(params, rng);
      const bool m = (rng.next() & 1) != 0;
      if (she::decrypt_bit(keys.sk, she::encrypt_bit(keys.pk, m, params, rng)) != m) ++wrong;
      ++total;
    }
  }
  r.Require(wrong == 0, std::to_string(wrong) + " wrong decryptions");
  r.detail << total << " encryptions over lambda {2,3,5}, " << wrong << " failures ";
  Report(1, "scheme roundtrip", r, Since(t0), 10);
}

// Exhaustive gate truth tables with eta sized from the noise rules.
void TruthTables() {
  auto t0 = Clock::now();
  Result r;
  const std::uint32_t lambda = 3;
  const std::uint64_t fresh = lambda + 2;
  const std::uint64_t gate_noise = she::noise_after_mul(fresh, fresh);
  const std::uint64_t either = she::noise_after_add(fresh, fresh);
  const std::uint64_t star_noise = she::noise_after_add(
      either, she::noise_after_mul(fresh, she::noise_after_add(gate_noise, either)));
  std::uint64_t cases = 0;
  std::uint64_t wrong = 0;

  auto run = [&](std::uint64_t eta, std::uint64_t seed, auto&& body) {
    Rng rng(seed);
    auto params = SecurityParams::with_eta(lambda, eta);
    auto keys = she::keygen(params, rng);
    g_audit->SetKey(keys.sk);
    body(keys, params, rng);
    g_audit->Disarm();
  };

  run(gate_noise + 2, 21, [&](const she::KeyPair& k, const SecurityParams& p, Rng& rng) {
    for (int b1 = 0; b1 < 2; ++b1) {
      for (int b2 = 0; b2 < 2; ++b2) {
        for (int rep = 0; rep < 200; ++rep) {
          auto c1 = she::encrypt_bit(k.pk, b1, p, rng);
          auto c2 = she::encrypt_bit(k.pk, b2, p, rng);
          auto x = she::he_add(c1, c2, k.pk, p);
          auto a = she::he_mul(c1, c2, k.pk, p);
          wrong += she::decrypt_bit(k.sk, x) != ((b1 ^ b2) != 0);
          wrong += she::decrypt_bit(k.sk, a) != ((b1 & b2) != 0);
          wrong += !she::noise_ok(x, p) || !she::noise_ok(a, p);
          cases += 2;
        }
      }
    }
  });
  run(star_noise + 2, 22, [&](const she::KeyPair& k, const SecurityParams& p, Rng& rng) {
    for (int f = 0; f < 2; ++f) {
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const bool expect = f ? (a && b) : (a != b);
          for (int rep = 0; rep < 200; ++rep) {
            auto out = circuits::star_eval(she::encrypt_bit(k.pk, a, p, rng),
                                           she::encrypt_bit(k.pk, b, p, rng),
                                           she::encrypt_bit(k.pk, f, p, rng), k.pk, p);
            wrong += she::decrypt_bit(k.sk, out) != expect;
            wrong += !she::noise_ok(out, p);
            ++cases;
          }
        }
      }
    }
  });
  r.Require(wrong == 0, std::to_string(wrong) + " mismatches");
  r.detail << cases << " gate evaluations (eta " << gate_noise + 2 << " / " << star_noise + 2
           << "), " << wrong << " mismatches ";
  Report(2, "homomorphic truth tables", r, Since(t0), 30);
}

// 4-bit adder on every input pair, plain and Star-compiled, through the
// adapter as a relay would run it.
void AdderEquivalence() {
  auto t0 = Clock::now();
  Result r;
  const std::uint32_t lambda = 3;
  const circuits::Circuit adder = circuits::build_ripple_adder(4);
  r.Require(adder.xor_count() == 10 && adder.and_count() == 7, "gate counts");
  r.Require(adder.xor_count() <= 20 && adder.and_count() <= 8, "per-node budget");
  std::uint64_t wrong = 0;
  for (auto mode : {sim::EvalMode::kPlain, sim::EvalMode::kStar}) {
    const std::uint64_t eta = sim::required_eta(4, 1, lambda, mode).eta;
    Rng rng(mode == sim::EvalMode::kStar ? 31 : 32);
    auto params = SecurityParams::with_eta(lambda, eta);
    auto keys = she::keygen(params, rng);
    g_audit->SetKey(keys.sk);
    for (std::uint64_t a = 0; a < 16; ++a) {
      for (std::uint64_t b = 0; b < 16; ++b) {
        auto acc = she::encrypt_value(keys.pk, a, 4, params, rng);
        auto local = she::encrypt_value(keys.pk, b, 4, params, rng);
        auto payload = circuits::adapt(acc, circuits::adder_interface(4), keys.pk, params, rng);
        std::pair<std::vector<Ciphertext>, circuits::EvalStats> out;
        if (mode == sim::EvalMode::kStar) {
          auto sc = circuits::compile_to_star(adder, keys.pk, params, rng);
          out = circuits::bind_and_continue(payload, local, sc, keys.pk, params, rng);
        } else {
          out = circuits::bind_and_continue(payload, local, adder, keys.pk, params, rng);
        }
        wrong += she::decrypt_value(keys.sk, out.first) != (a + b) % 16;
        for (const auto& c : out.first) wrong += !she::noise_ok(c, params);
        if (mode == sim::EvalMode::kPlain) {
          wrong += out.second.circuit_he_add() != 10 || out.second.circuit_he_mul() != 7;
        }
      }
    }
    g_audit->Disarm();
  }
  r.Require(wrong == 0, std::to_string(wrong) + " mismatches");
  r.detail << "512 sums (plain + star), " << adder.xor_count() << " XOR / " << adder.and_count()
           << " AND, " << wrong << " mismatches ";
  Report(3, "4-bit adder equivalence", r, Since(t0), 120);
}

struct SweepTotals {
  std::uint64_t runs = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t mismatches = 0;
  std::uint64_t untrusted = 0;
  std::uint64_t relay_decrypts = 0;
  std::uint32_t max_hops = 0;
};

SweepTotals g_sweep;

// Seeded random topologies of at most 10 nodes, AUTO eta, lambda 3.
void EndToEnd() {
  auto t0 = Clock::now();
  Result r;
  auto one = [&](const sim::Topology& t, protocol::NodeId s, protocol::NodeId d, bool star,
                 std::uint64_t seed) {
    sim::RunConfig cfg;
    cfg.lambda = 3;
    cfg.seed = seed;
    cfg.star_mode = star;
    cfg.on_keygen = [](const she::KeyPair& k) { g_audit->SetKey(k.sk); };
    ++g_sweep.runs;
    g_audit->Arm();
    try {
      auto rep = sim::run_discovery(t, s, d, cfg);
      g_sweep.relay_decrypts += rep.relay_decrypt_calls;
      if (rep.status == sim::Status::kDelivered) {
        ++g_sweep.delivered;
        g_sweep.max_hops = std::max(g_sweep.max_hops, rep.updating_hops);
        if (!rep.trusted) ++g_sweep.untrusted;
        if (rep.decrypted_trust != rep.oracle_trust || rep.path != rep.oracle_path) {
          ++g_sweep.mismatches;
        }
      } else {
        ++g_sweep.dropped;
      }
    } catch (const std::logic_error&) {
      ++g_sweep.mismatches;
    }
    g_audit->Disarm();
  };

  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto n = static_cast<std::uint32_t>(2 + seed % 9);
    const double degree = std::min<double>(n - 1, 2.0 + 0.5 * static_cast<double>(seed % 3));
    const sim::Topology t = sim::generate_topology(n, degree, 5000 + seed);
    protocol::NodeId s = 0;
    protocol::NodeId d = 1;
    if (seed % 2 == 0) {
      auto pair = sim::longest_greedy_pair(t, 4);
      if (pair) std::tie(s, d) = *pair;
    } else {
      Rng pick(seed);
      s = static_cast<protocol::NodeId>(pick.below(n));
      d = static_cast<protocol::NodeId>((s + 1 + pick.below(n - 1)) % n);
    }
    one(t, s, d, true, seed);
    one(t, s, d, false, seed);
  }
  // A nine-node chain forces six updating relays.
  sim::Topology chain;
  for (protocol::NodeId i = 0; i < 9; ++i) chain.nodes.push_back(i);
  for (protocol::NodeId i = 0; i < 8; ++i) {
    chain.edges.insert({i, i + 1});
    chain.trust[{i, i + 1}] = static_cast<int>(10 - i);
    chain.trust[{i + 1, i}] = 1;
  }
  one(chain, 0, 8, true, 7);

  r.Require(g_sweep.mismatches == 0, std::to_string(g_sweep.mismatches) + " oracle mismatches");
  r.Require(g_sweep.untrusted == 0, std::to_string(g_sweep.untrusted) + " noise_ok failures");
  r.Require(g_sweep.max_hops >= 6, "no route reached six updating relays");
  r.detail << g_sweep.runs << " runs, " << g_sweep.delivered << " delivered, " << g_sweep.dropped
           << " dropped, max " << g_sweep.max_hops << " updating relays, "
           << g_sweep.mismatches << " mismatches, " << g_sweep.untrusted << " untrusted ";
  Report(4, "end-to-end protocol vs oracle", r, Since(t0), 600);
}

// Plain-mode gate counts on the longest greedy path of 20-node networks.
void OpCounts() {
  auto t0 = Clock::now();
  Result r;
  std::uint64_t worst_add = 0;
  std::uint64_t worst_mul = 0;
  std::uint64_t worst_all_add = 0;
  std::uint64_t worst_all_mul = 0;
  std::uint32_t worst_hops = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const sim::Topology t = sim::generate_topology(20, 3.0, seed);
    auto pair = sim::longest_greedy_pair(t, 4);
    r.Require(pair.has_value(), "no deliverable pair");
    if (!pair) continue;
    sim::RunConfig cfg;
    cfg.lambda = 3;
    cfg.eta = 9;
    cfg.star_mode = false;
    cfg.seed = seed;
    auto rep = sim::run_discovery(t, pair->first, pair->second, cfg);
    const auto adds = rep.stats.circuit_he_add();
    const auto muls = rep.stats.circuit_he_mul();
    r.Require(adds == 10ull * rep.updating_hops && muls == 7ull * rep.updating_hops,
              "counts not structural");
    r.Require(adds <= 400 && muls <= 160, "budget exceeded at seed " + std::to_string(seed));
    if (adds >= worst_add) {
      worst_add = adds;
      worst_mul = muls;
      worst_all_add = rep.stats.n_he_add;
      worst_all_mul = rep.stats.n_he_mul;
      worst_hops = rep.updating_hops;
    }
  }
  r.detail << "worst of 20 networks: " << worst_hops << " relays, " << worst_add << " adds / "
           << worst_mul << " muls (budget 400 / 160; with adapter " << worst_all_add << " / "
           << worst_all_mul << ") ";
  Report(5, "op-count budget", r, Since(t0));
}

void Timing() {
  auto t0 = Clock::now();
  Result r;
  auto bench = sim::benchmark(1);
  for (const auto& row : bench.rows) {
    r.Require(row.seconds <= row.ceiling_seconds,
              "lambda " + std::to_string(row.lambda) + " took " + std::to_string(row.seconds) + " s");
    r.detail << "l=" << row.lambda << ":" << row.seconds << "s<=" << row.ceiling_seconds << " ";
  }
  r.detail << "(" << bench.rows.front().updating_hops << " relays) ";
  Report(6, "timing vs table ceilings", r, Since(t0));
}

void CiphertextSize() {
  auto t0 = Clock::now();
  Result r;
  for (std::uint32_t lambda : {2u, 3u, 5u}) {
    const std::uint64_t l5 = std::uint64_t{lambda} * lambda * lambda * lambda * lambda;
    const auto digit_cap = static_cast<std::size_t>(1 + std::floor(static_cast<double>(l5) * std::log10(2.0)));
    Rng rng(70 + lambda);
    auto params = SecurityParams::standard(lambda);
    r.Require(params.fresh_ct_bits() <= l5, "schedule bound");
    std::size_t max_bits = 0;
    std::size_t max_digits = 0;
    std::size_t max_value_bits = 0;
    for (int k = 0; k < 20; ++k) {
      auto keys = she::keygen(params, rng);
      for (int i = 0; i < 100; ++i) {
        auto c = she::encrypt_bit(keys.pk, (i & 1) != 0, params, rng);
        max_bits = std::max(max_bits, c.value.bit_length());
        max_digits = std::max(max_digits, c.value.to_decimal().size());
      }
      std::size_t total = 0;
      for (const auto& c : she::encrypt_value(keys.pk, 10, 4, params, rng)) total += c.value.bit_length();
      max_value_bits = std::max(max_value_bits, total);
    }
    r.Require(max_bits <= l5, "bit length");
    r.Require(max_digits <= digit_cap, "decimal digits");
    r.Require(max_value_bits <= 4 * l5, "4-bit value size");
    r.detail << "l=" << lambda << ": " << max_bits << "b/" << max_digits << "d, 4-bit "
             << max_value_bits << "b <= " << 4 * l5 << "; ";
  }
  Report(7, "ciphertext size", r, Since(t0));
}

void Karatsuba() {
  auto t0 = Clock::now();
  Result r;
  Rng rng(80);
  std::uint64_t wrong = 0;
  std::uint64_t gmp_wrong = 0;
  for (int i = 0; i < 10000; ++i) {
    const Natural a = random_bits(1 + rng.below(10000), rng);
    const Natural b = random_bits(1 + rng.below(10000), rng);
    const std::size_t threshold = 2 + rng.below(40);
    const Natural k = mul_karatsuba(a, b, threshold);
    wrong += k != mul_schoolbook(a, b);
    if (i % 10 == 0) {
      const mpz_class z = mpz_class(a.to_hex(), 16) * mpz_class(b.to_hex(), 16);
      gmp_wrong += k.to_hex() != z.get_str(16);
    }
  }
  std::uint64_t adversarial = 0;
  for (std::size_t bits : {64u, 65u, 2047u, 2048u, 2049u, 6400u, 10000u}) {
    const Natural ones = sub(Natural::power_of_two(bits), Natural(1));
    const Natural top = Natural::power_of_two(bits - 1);
    const Natural alt = Natural::from_hex(std::string((bits + 3) / 4, 'a')).value();
    for (std::size_t threshold : {2u, 3u, 32u}) {
      for (const auto& [x, y] : {std::pair{ones, ones}, std::pair{ones, top}, std::pair{top, top},
                                 std::pair{alt, ones}, std::pair{alt, Natural(1)}}) {
        wrong += mul_karatsuba(x, y, threshold) != mul_schoolbook(x, y);
        ++adversarial;
      }
    }
  }
  r.Require(wrong == 0, std::to_string(wrong) + " mismatches");
  r.Require(gmp_wrong == 0, std::to_string(gmp_wrong) + " GMP mismatches");
  r.detail << "10000 random pairs + " << adversarial << " adversarial, " << wrong
           << " mismatches ";
  Report(8, "Karatsuba equals schoolbook", r, Since(t0), 60);
}

void NoiseSoundness() {
  Result r;
  r.Require(g_audit->checked() > 0, "nothing audited");
  r.Require(g_audit->violations() == 0, std::to_string(g_audit->violations()) + " violations");
  r.detail << g_audit->checked() << " ciphertexts from criteria 2-4 checked against sk, "
           << g_audit->violations() << " violations ";
  Report(9, "noise tracker soundness", r, 0);
}

void Privacy() {
  auto t0 = Clock::now();
  Result r;
  r.Require(g_sweep.runs > 0, "no sweep runs");
  r.Require(g_sweep.relay_decrypts == 0, "relays decrypted");
  Rng rng(90);
  auto params = SecurityParams::with_eta(3, 211);
  auto keys = she::keygen(params, rng);
  auto sc = circuits::compile_to_star(circuits::build_ripple_adder(4), keys.pk, params, rng);
  const std::string text = json_io::to_json(sc).dump();
  const bool leaks = text.find("XOR") != std::string::npos ||
                     text.find("AND") != std::string::npos ||
                     text.find("kind") != std::string::npos;
  r.Require(!leaks, "gate kind serialized");
  r.detail << g_sweep.relay_decrypts << " relay decryptions over " << g_sweep.runs
           << " runs; star circuit JSON carries no gate kind ";
  Report(10, "privacy structure", r, Since(t0));
}

void Throughput() {
  Rng rng(100);
  const Natural a = random_bits(243, rng);
  const Natural b = random_bits(243, rng);
  std::size_t sink = 0;
  auto t0 = Clock::now();
  for (int i = 0; i < 1'000'000; ++i) sink += mul(a, b).limb_count();
  const double secs = Since(t0);
  std::printf("%s  --  %-34s 1e6 multiplications in %.3f s, sink %zu\n",
              secs < 1.0 ? "PASS" : "FAIL", "243-bit multiply throughput", secs, sink);
  if (secs >= 1.0) ++g_failures;
}

}  // namespace

int main() {
  NoiseAudit audit;
  g_audit = &audit;
  Roundtrip();
  TruthTables();
  AdderEquivalence();
  EndToEnd();
  OpCounts();
  Timing();
  CiphertextSize();
  Karatsuba();
  NoiseSoundness();
  Privacy();
  Throughput();
  std::printf("%s: %d failing\n", g_failures == 0 ? "ALL PASS" : "FAILURES", g_failures);
  return g_failures == 0 ? 0 : 1;
}

#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "etr/she.hpp"

// Boolean circuits over XOR/AND and their encrypted Star-gate form.
//
// A Star gate takes two operand ciphertexts and an encrypted flag f and
// computes (a ^ b) ^ f * ((a & b) ^ (a ^ b)): XOR when f = 0, AND when f = 1.
// Compiling a circuit to Star gates replaces each gate kind by an encrypted
// flag, so the evaluator learns only the wiring.
//
// Bit order is LSB first everywhere: input i of a width-w value is bit i.
namespace etr::circuits {

using she::Ciphertext;
using she::SecurityParams;

class ArityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class MalformedCircuit : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct WireRef {
  enum class Kind : std::uint8_t { kInput, kGateOutput, kConst };

  Kind kind = Kind::kInput;
  std::uint32_t index = 0;
  bool const_bit = false;

  static WireRef input(std::uint32_t i) { return {Kind::kInput, i, false}; }
  static WireRef gate(std::uint32_t i) { return {Kind::kGateOutput, i, false}; }
  static WireRef constant(bool b) { return {Kind::kConst, 0, b}; }

  friend bool operator==(const WireRef&, const WireRef&) = default;
};

enum class GateKind : std::uint8_t { kXor, kAnd };

struct Gate {
  GateKind kind;
  WireRef a;
  WireRef b;

  friend bool operator==(const Gate&, const Gate&) = default;
};

class Circuit {
 public:
  Circuit() = default;
  // Throws MalformedCircuit if any reference is out of range or points
  // forward.
  Circuit(std::uint32_t num_inputs, std::vector<Gate> gates, std::vector<WireRef> outputs);

  std::uint32_t num_inputs() const { return num_inputs_; }
  const std::vector<Gate>& gates() const { return gates_; }
  const std::vector<WireRef>& outputs() const { return outputs_; }
  std::size_t xor_count() const;
  std::size_t and_count() const;

  // Unencrypted evaluation.
  std::vector<bool> simulate(const std::vector<bool>& inputs) const;

  friend bool operator==(const Circuit&, const Circuit&) = default;

 private:
  std::uint32_t num_inputs_ = 0;
  std::vector<Gate> gates_;
  std::vector<WireRef> outputs_;
};

struct StarGate {
  WireRef a;
  WireRef b;
  Ciphertext flag;

  friend bool operator==(const StarGate&, const StarGate&) = default;
};

class StarCircuit {
 public:
  StarCircuit() = default;
  StarCircuit(std::uint32_t num_inputs, std::vector<StarGate> gates,
              std::vector<WireRef> outputs);

  std::uint32_t num_inputs() const { return num_inputs_; }
  const std::vector<StarGate>& gates() const { return gates_; }
  const std::vector<WireRef>& outputs() const { return outputs_; }

  friend bool operator==(const StarCircuit&, const StarCircuit&) = default;

 private:
  std::uint32_t num_inputs_ = 0;
  std::vector<StarGate> gates_;
  std::vector<WireRef> outputs_;
};

struct EvalStats {
  std::uint64_t n_he_add = 0;
  std::uint64_t n_he_mul = 0;
  // Portion of the totals above spent opening adapter triples.
  std::uint64_t adapter_he_add = 0;
  std::uint64_t adapter_he_mul = 0;
  std::uint64_t max_noise_bits = 0;
  std::chrono::nanoseconds wall_time{0};

  std::uint64_t circuit_he_add() const { return n_he_add - adapter_he_add; }
  std::uint64_t circuit_he_mul() const { return n_he_mul - adapter_he_mul; }

  EvalStats& operator+=(const EvalStats& o);
};

// Which ciphertext slots the next circuit expects and in what order. Labels
// are "ACC_i" (accumulated value bit i, from the previous hop) and "LOCAL_j"
// (bit j bound by the evaluating node itself).
struct CircuitInterface {
  std::uint32_t num_acc_inputs = 0;
  std::uint32_t num_local_inputs = 0;
  std::vector<std::string> layout;

  // ACC_0..ACC_{acc-1} followed by LOCAL_0..LOCAL_{local-1}.
  static CircuitInterface accumulate_then_local(std::uint32_t acc, std::uint32_t local);

  // Throws MalformedCircuit if layout is not a permutation of the declared
  // labels.
  void validate() const;

  friend bool operator==(const CircuitInterface&, const CircuitInterface&) = default;
};

struct StarTriple {
  Ciphertext a;
  Ciphertext b;
  Ciphertext flag;

  friend bool operator==(const StarTriple&, const StarTriple&) = default;
};

struct AdaptedPayload {
  std::vector<StarTriple> triples;
  CircuitInterface interface;

  friend bool operator==(const AdaptedPayload&, const AdaptedPayload&) = default;
};

// Counts every he_add/he_mul it performs and tracks the largest noise bound
// produced.
class Evaluator {
 public:
  Evaluator(const Natural& pk, const SecurityParams& params, EvalStats& stats)
      : pk_(pk), params_(params), stats_(stats) {}

  Ciphertext add(const Ciphertext& a, const Ciphertext& b);
  Ciphertext mul(const Ciphertext& a, const Ciphertext& b);
  Ciphertext star(const Ciphertext& a, const Ciphertext& b, const Ciphertext& flag);

  const Natural& pk() const { return pk_; }
  const SecurityParams& params() const { return params_; }

 private:
  void note(const Ciphertext& c);

  const Natural& pk_;
  const SecurityParams& params_;
  EvalStats& stats_;
};

// 2 he_mul + 3 he_add.
Ciphertext star_eval(const Ciphertext& a, const Ciphertext& b, const Ciphertext& flag,
                     const Natural& pk, const SecurityParams& params);

StarCircuit compile_to_star(const Circuit& c, const Natural& pk, const SecurityParams& params,
                            Rng& rng);

// Constant wires are materialized as fresh encryptions drawn from rng.
std::pair<std::vector<Ciphertext>, EvalStats> eval_plain(const Circuit& c,
                                                         std::span<const Ciphertext> inputs,
                                                         const Natural& pk,
                                                         const SecurityParams& params, Rng& rng);

std::pair<std::vector<Ciphertext>, EvalStats> eval_star(const StarCircuit& sc,
                                                        std::span<const Ciphertext> inputs,
                                                        const Natural& pk,
                                                        const SecurityParams& params, Rng& rng);

// (A + B) mod 2^width over 2*width inputs: A on inputs [0, width), B on
// [width, 2*width). Carries are (a & b) ^ (c & (a ^ b)); the final carry is
// computed but not output.
Circuit build_ripple_adder(std::uint32_t width);

// Interface a ripple adder of this width presents to its predecessor.
CircuitInterface adder_interface(std::uint32_t width);

// Wraps each output bit c as the identity Star triple (c, Enc(0), Enc(0)).
AdaptedPayload adapt(std::span<const Ciphertext> outputs, const CircuitInterface& next_iface,
                     const Natural& pk, const SecurityParams& params, Rng& rng);

// Opens the payload triples, binds them with local_bits per the interface
// layout, and evaluates the node's circuit. Stats cover both phases.
std::pair<std::vector<Ciphertext>, EvalStats> bind_and_continue(
    const AdaptedPayload& payload, std::span<const Ciphertext> local_bits,
    const StarCircuit& next_circuit, const Natural& pk, const SecurityParams& params, Rng& rng);

std::pair<std::vector<Ciphertext>, EvalStats> bind_and_continue(
    const AdaptedPayload& payload, std::span<const Ciphertext> local_bits,
    const Circuit& next_circuit, const Natural& pk, const SecurityParams& params, Rng& rng);

}  // namespace etr::circuits

#include "etr/circuits.hpp"

#include <algorithm>
#include <charconv>
#include <set>

namespace etr::circuits {
namespace {

using Clock = std::chrono::steady_clock;

void check_ref(const WireRef& w, std::uint32_t num_inputs, std::size_t gates_before,
               const std::string& where) {
  switch (w.kind) {
    case WireRef::Kind::kInput:
      if (w.index >= num_inputs) {
        throw MalformedCircuit(where + ": input " + std::to_string(w.index) +
                               " out of range (num_inputs=" + std::to_string(num_inputs) + ")");
      }
      break;
    case WireRef::Kind::kGateOutput:
      if (w.index >= gates_before) {
        throw MalformedCircuit(where + ": gate reference " + std::to_string(w.index) +
                               " is not an earlier gate");
      }
      break;
    case WireRef::Kind::kConst:
      break;
  }
}

template <typename GateT>
void check_topology(std::uint32_t num_inputs, const std::vector<GateT>& gates,
                    const std::vector<WireRef>& outputs) {
  for (std::size_t g = 0; g < gates.size(); ++g) {
    const std::string where = "gate " + std::to_string(g);
    check_ref(gates[g].a, num_inputs, g, where);
    check_ref(gates[g].b, num_inputs, g, where);
  }
  for (std::size_t o = 0; o < outputs.size(); ++o) {
    check_ref(outputs[o], num_inputs, gates.size(), "output " + std::to_string(o));
  }
}

// Resolves wires against evaluated inputs and gate outputs, materializing
// constants as fresh encryptions.
class WireTable {
 public:
  WireTable(std::span<const Ciphertext> inputs, const Natural& pk, const SecurityParams& params,
            Rng& rng)
      : inputs_(inputs), pk_(pk), params_(params), rng_(rng) {}

  Ciphertext get(const WireRef& w) {
    switch (w.kind) {
      case WireRef::Kind::kInput:
        return inputs_[w.index];
      case WireRef::Kind::kGateOutput:
        return gate_out_[w.index];
      case WireRef::Kind::kConst:
        break;
    }
    return she::encrypt_bit(pk_, w.const_bit, params_, rng_);
  }

  void push(Ciphertext c) { gate_out_.push_back(std::move(c)); }

 private:
  std::span<const Ciphertext> inputs_;
  std::vector<Ciphertext> gate_out_;
  const Natural& pk_;
  const SecurityParams& params_;
  Rng& rng_;
};

void check_arity(std::size_t got, std::uint32_t want, const char* what) {
  if (got != want) {
    throw ArityError(std::string(what) + ": expected " + std::to_string(want) +
                     " inputs, got " + std::to_string(got));
  }
}

// Maps the payload triples and local bits onto circuit input order.
std::vector<Ciphertext> open_and_bind(const AdaptedPayload& payload,
                                      std::span<const Ciphertext> local_bits,
                                      std::uint32_t circuit_inputs, Evaluator& ev) {
  const CircuitInterface& iface = payload.interface;
  iface.validate();
  if (payload.triples.size() != iface.num_acc_inputs) {
    throw ArityError("malformed payload: " + std::to_string(payload.triples.size()) +
                     " triples for " + std::to_string(iface.num_acc_inputs) + " ACC inputs");
  }
  if (local_bits.size() != iface.num_local_inputs) {
    throw ArityError("expected " + std::to_string(iface.num_local_inputs) +
                     " local bits, got " + std::to_string(local_bits.size()));
  }
  if (iface.num_acc_inputs + iface.num_local_inputs != circuit_inputs) {
    throw ArityError("interface declares " +
                     std::to_string(iface.num_acc_inputs + iface.num_local_inputs) +
                     " inputs but the circuit takes " + std::to_string(circuit_inputs));
  }

  std::vector<Ciphertext> acc;
  acc.reserve(payload.triples.size());
  for (const auto& t : payload.triples) acc.push_back(ev.star(t.a, t.b, t.flag));

  std::vector<Ciphertext> bound;
  bound.reserve(iface.layout.size());
  for (const auto& label : iface.layout) {
    const bool is_acc = label.rfind("ACC_", 0) == 0;
    const std::string_view digits = std::string_view(label).substr(is_acc ? 4 : 6);
    std::uint32_t idx = 0;
    std::from_chars(digits.data(), digits.data() + digits.size(), idx);
    bound.push_back(is_acc ? acc[idx] : local_bits[idx]);
  }
  return bound;
}

}  // namespace

Circuit::Circuit(std::uint32_t num_inputs, std::vector<Gate> gates, std::vector<WireRef> outputs)
    : num_inputs_(num_inputs), gates_(std::move(gates)), outputs_(std::move(outputs)) {
  check_topology(num_inputs_, gates_, outputs_);
}

std::size_t Circuit::xor_count() const {
  return static_cast<std::size_t>(
      std::count_if(gates_.begin(), gates_.end(), [](const Gate& g) { return g.kind == GateKind::kXor; }));
}

std::size_t Circuit::and_count() const { return gates_.size() - xor_count(); }

std::vector<bool> Circuit::simulate(const std::vector<bool>& inputs) const {
  check_arity(inputs.size(), num_inputs_, "simulate");
  std::vector<bool> vals;
  vals.reserve(gates_.size());
  auto get = [&](const WireRef& w) -> bool {
    switch (w.kind) {
      case WireRef::Kind::kInput:
        return inputs[w.index];
      case WireRef::Kind::kGateOutput:
        return vals[w.index];
      case WireRef::Kind::kConst:
        break;
    }
    return w.const_bit;
  };
  for (const auto& g : gates_) {
    const bool a = get(g.a);
    const bool b = get(g.b);
    vals.push_back(g.kind == GateKind::kXor ? (a != b) : (a && b));
  }
  std::vector<bool> out;
  out.reserve(outputs_.size());
  for (const auto& o : outputs_) out.push_back(get(o));
  return out;
}

StarCircuit::StarCircuit(std::uint32_t num_inputs, std::vector<StarGate> gates,
                         std::vector<WireRef> outputs)
    : num_inputs_(num_inputs), gates_(std::move(gates)), outputs_(std::move(outputs)) {
  check_topology(num_inputs_, gates_, outputs_);
}

EvalStats& EvalStats::operator+=(const EvalStats& o) {
  n_he_add += o.n_he_add;
  n_he_mul += o.n_he_mul;
  adapter_he_add += o.adapter_he_add;
  adapter_he_mul += o.adapter_he_mul;
  max_noise_bits = std::max(max_noise_bits, o.max_noise_bits);
  wall_time += o.wall_time;
  return *this;
}

CircuitInterface CircuitInterface::accumulate_then_local(std::uint32_t acc, std::uint32_t local) {
  CircuitInterface iface{acc, local, {}};
  for (std::uint32_t i = 0; i < acc; ++i) iface.layout.push_back("ACC_" + std::to_string(i));
  for (std::uint32_t j = 0; j < local; ++j) iface.layout.push_back("LOCAL_" + std::to_string(j));
  return iface;
}

void CircuitInterface::validate() const {
  if (layout.size() != std::size_t{num_acc_inputs} + num_local_inputs) {
    throw MalformedCircuit("interface layout has " + std::to_string(layout.size()) +
                           " labels, expected " +
                           std::to_string(num_acc_inputs + num_local_inputs));
  }
  std::set<std::string> expected;
  for (std::uint32_t i = 0; i < num_acc_inputs; ++i) expected.insert("ACC_" + std::to_string(i));
  for (std::uint32_t j = 0; j < num_local_inputs; ++j) {
    expected.insert("LOCAL_" + std::to_string(j));
  }
  std::set<std::string> seen(layout.begin(), layout.end());
  if (seen != expected) throw MalformedCircuit("interface layout labels are not ACC_i/LOCAL_j");
}

void Evaluator::note(const Ciphertext& c) {
  stats_.max_noise_bits = std::max(stats_.max_noise_bits, c.noise_bits);
}

Ciphertext Evaluator::add(const Ciphertext& a, const Ciphertext& b) {
  ++stats_.n_he_add;
  Ciphertext c = she::he_add(a, b, pk_, params_);
  note(c);
  return c;
}

Ciphertext Evaluator::mul(const Ciphertext& a, const Ciphertext& b) {
  ++stats_.n_he_mul;
  Ciphertext c = she::he_mul(a, b, pk_, params_);
  note(c);
  return c;
}

Ciphertext Evaluator::star(const Ciphertext& a, const Ciphertext& b, const Ciphertext& flag) {
  Ciphertext both = mul(a, b);
  Ciphertext either = add(a, b);
  Ciphertext diff = add(both, either);
  Ciphertext selected = mul(flag, diff);
  return add(either, selected);
}

Ciphertext star_eval(const Ciphertext& a, const Ciphertext& b, const Ciphertext& flag,
                     const Natural& pk, const SecurityParams& params) {
  EvalStats scratch;
  Evaluator ev(pk, params, scratch);
  return ev.star(a, b, flag);
}

StarCircuit compile_to_star(const Circuit& c, const Natural& pk, const SecurityParams& params,
                            Rng& rng) {
  std::vector<StarGate> gates;
  gates.reserve(c.gates().size());
  for (const auto& g : c.gates()) {
    gates.push_back(
        StarGate{g.a, g.b, she::encrypt_bit(pk, g.kind == GateKind::kAnd, params, rng)});
  }
  return StarCircuit(c.num_inputs(), std::move(gates), c.outputs());
}

std::pair<std::vector<Ciphertext>, EvalStats> eval_plain(const Circuit& c,
                                                         std::span<const Ciphertext> inputs,
                                                         const Natural& pk,
                                                         const SecurityParams& params, Rng& rng) {
  check_arity(inputs.size(), c.num_inputs(), "eval_plain");
  const auto start = Clock::now();
  EvalStats stats;
  Evaluator ev(pk, params, stats);
  WireTable wires(inputs, pk, params, rng);
  for (const auto& g : c.gates()) {
    Ciphertext a = wires.get(g.a);
    Ciphertext b = wires.get(g.b);
    wires.push(g.kind == GateKind::kXor ? ev.add(a, b) : ev.mul(a, b));
  }
  std::vector<Ciphertext> out;
  out.reserve(c.outputs().size());
  for (const auto& o : c.outputs()) out.push_back(wires.get(o));
  stats.wall_time = Clock::now() - start;
  return {std::move(out), stats};
}

std::pair<std::vector<Ciphertext>, EvalStats> eval_star(const StarCircuit& sc,
                                                        std::span<const Ciphertext> inputs,
                                                        const Natural& pk,
                                                        const SecurityParams& params, Rng& rng) {
  check_arity(inputs.size(), sc.num_inputs(), "eval_star");
  const auto start = Clock::now();
  EvalStats stats;
  Evaluator ev(pk, params, stats);
  WireTable wires(inputs, pk, params, rng);
  for (const auto& g : sc.gates()) {
    Ciphertext a = wires.get(g.a);
    Ciphertext b = wires.get(g.b);
    wires.push(ev.star(a, b, g.flag));
  }
  std::vector<Ciphertext> out;
  out.reserve(sc.outputs().size());
  for (const auto& o : sc.outputs()) out.push_back(wires.get(o));
  stats.wall_time = Clock::now() - start;
  return {std::move(out), stats};
}

Circuit build_ripple_adder(std::uint32_t width) {
  if (width == 0) throw std::invalid_argument("build_ripple_adder: width must be positive");
  std::vector<Gate> gates;
  std::vector<WireRef> outputs;
  auto emit = [&](GateKind k, WireRef a, WireRef b) {
    gates.push_back(Gate{k, a, b});
    return WireRef::gate(static_cast<std::uint32_t>(gates.size() - 1));
  };
  auto a = [](std::uint32_t i) { return WireRef::input(i); };
  auto b = [width](std::uint32_t i) { return WireRef::input(width + i); };

  outputs.push_back(emit(GateKind::kXor, a(0), b(0)));
  WireRef carry = emit(GateKind::kAnd, a(0), b(0));
  for (std::uint32_t i = 1; i < width; ++i) {
    WireRef half = emit(GateKind::kXor, a(i), b(i));
    outputs.push_back(emit(GateKind::kXor, half, carry));
    WireRef both = emit(GateKind::kAnd, a(i), b(i));
    WireRef propagated = emit(GateKind::kAnd, carry, half);
    carry = emit(GateKind::kXor, both, propagated);
  }
  return Circuit(2 * width, std::move(gates), std::move(outputs));
}

CircuitInterface adder_interface(std::uint32_t width) {
  return CircuitInterface::accumulate_then_local(width, width);
}

AdaptedPayload adapt(std::span<const Ciphertext> outputs, const CircuitInterface& next_iface,
                     const Natural& pk, const SecurityParams& params, Rng& rng) {
  next_iface.validate();
  if (outputs.size() != next_iface.num_acc_inputs) {
    throw ArityError("adapt: " + std::to_string(outputs.size()) + " outputs but next circuit expects " +
                     std::to_string(next_iface.num_acc_inputs) + " ACC inputs");
  }
  AdaptedPayload payload;
  payload.interface = next_iface;
  payload.triples.reserve(outputs.size());
  for (const auto& c : outputs) {
    Ciphertext zero_operand = she::encrypt_bit(pk, false, params, rng);
    Ciphertext xor_flag = she::encrypt_bit(pk, false, params, rng);
    payload.triples.push_back(StarTriple{c, std::move(zero_operand), std::move(xor_flag)});
  }
  return payload;
}

namespace {

template <typename Eval>
std::pair<std::vector<Ciphertext>, EvalStats> bind_then(const AdaptedPayload& payload,
                                                        std::span<const Ciphertext> local_bits,
                                                        std::uint32_t circuit_inputs,
                                                        const Natural& pk,
                                                        const SecurityParams& params,
                                                        Eval&& eval_circuit) {
  const auto start = Clock::now();
  EvalStats stats;
  Evaluator ev(pk, params, stats);
  std::vector<Ciphertext> bound = open_and_bind(payload, local_bits, circuit_inputs, ev);
  stats.adapter_he_add = stats.n_he_add;
  stats.adapter_he_mul = stats.n_he_mul;
  auto [out, circuit_stats] = eval_circuit(bound);
  circuit_stats.wall_time = std::chrono::nanoseconds{0};
  stats += circuit_stats;
  stats.wall_time = Clock::now() - start;
  return {std::move(out), stats};
}

}  // namespace

std::pair<std::vector<Ciphertext>, EvalStats> bind_and_continue(
    const AdaptedPayload& payload, std::span<const Ciphertext> local_bits,
    const StarCircuit& next_circuit, const Natural& pk, const SecurityParams& params, Rng& rng) {
  return bind_then(payload, local_bits, next_circuit.num_inputs(), pk, params,
                   [&](const std::vector<Ciphertext>& in) {
                     return eval_star(next_circuit, in, pk, params, rng);
                   });
}

std::pair<std::vector<Ciphertext>, EvalStats> bind_and_continue(
    const AdaptedPayload& payload, std::span<const Ciphertext> local_bits,
    const Circuit& next_circuit, const Natural& pk, const SecurityParams& params, Rng& rng) {
  return bind_then(payload, local_bits, next_circuit.num_inputs(), pk, params,
                   [&](const std::vector<Ciphertext>& in) {
                     return eval_plain(next_circuit, in, pk, params, rng);
                   });
}

}  // namespace etr::circuits

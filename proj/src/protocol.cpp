#include "etr/protocol.hpp"

#include <algorithm>
#include <stdexcept>

namespace etr::protocol {
namespace {

// Trust values are carried modulo 2^width; for width >= 4 this is the value
// itself.
std::uint64_t encode_trust(int trust, std::uint32_t width) {
  const auto v = static_cast<std::uint64_t>(trust);
  return width >= 64 ? v : v & ((std::uint64_t{1} << width) - 1);
}

}  // namespace

NodeState NodeState::with_adder(NodeId id, std::map<NodeId, int> trust_db, std::uint32_t width) {
  NodeState n;
  n.id = id;
  for (const auto& [nb, _] : trust_db) n.neighbors.insert(nb);
  n.trust_db = std::move(trust_db);
  n.circuit = circuits::build_ripple_adder(width);
  n.width = width;
  return n;
}

CircuitInterface NodeState::interface_of(NodeId neighbor) const {
  auto it = neighbor_interfaces.find(neighbor);
  if (it != neighbor_interfaces.end()) return it->second;
  return circuits::adder_interface(width);
}

void NodeState::validate() const {
  for (const auto& [nb, t] : trust_db) {
    if (!neighbors.contains(nb)) {
      throw std::invalid_argument("node " + std::to_string(id) + " has trust for non-neighbor " +
                                  std::to_string(nb));
    }
    if (t < kMinTrust || t > kMaxTrust) {
      throw std::invalid_argument("node " + std::to_string(id) + " trust for " +
                                  std::to_string(nb) + " is " + std::to_string(t) +
                                  ", outside [1, 10]");
    }
  }
  if (circuit.num_inputs() != 2 * width) {
    throw std::invalid_argument("node " + std::to_string(id) + " circuit arity " +
                                std::to_string(circuit.num_inputs()) + " != 2 * width");
  }
}

std::optional<NodeId> select_next_hop(const NodeState& node, const std::set<NodeId>& exclude) {
  std::optional<NodeId> best;
  int best_trust = 0;
  for (NodeId nb : node.neighbors) {
    if (exclude.contains(nb)) continue;
    auto it = node.trust_db.find(nb);
    if (it == node.trust_db.end()) continue;
    // neighbors is ordered, so strict > keeps the smallest id on ties.
    if (!best || it->second > best_trust) {
      best = nb;
      best_trust = it->second;
    }
  }
  return best;
}

Initiation source_initiate(const NodeState& node, NodeId destination,
                           const SecurityParams& params, Rng& rng) {
  if (destination == node.id) {
    throw std::invalid_argument("source_initiate: destination is the source itself");
  }
  auto next = select_next_hop(node, {node.id});
  if (!next) {
    throw std::invalid_argument("source_initiate: node " + std::to_string(node.id) +
                                " has no trusted neighbor");
  }

  Initiation init{she::keygen(params, rng), {}};
  RouteRequest& rr = init.rr;
  rr.pk = init.keys.pk;
  rr.params = params;
  rr.source = node.id;
  rr.destination = destination;
  rr.next_hop = *next;
  rr.path = {node.id};
  rr.acc_trust = she::encrypt_value(rr.pk, encode_trust(node.trust_db.at(*next), node.width),
                                    node.width, params, rng);
  rr.payload = circuits::adapt(rr.acc_trust, node.interface_of(*next), rr.pk, params, rng);
  return init;
}

ForwardDecision process_rr(const NodeState& node, const RouteRequest& rr, EvalMode mode,
                           Rng& rng) {
  if (node.id == rr.destination) return Reply{destination_reply(rr)};
  if (rr.next_hop != node.id) {
    return Drop{"RR addressed to node " + std::to_string(rr.next_hop) + ", not " +
                std::to_string(node.id)};
  }
  if (std::find(rr.path.begin(), rr.path.end(), node.id) != rr.path.end()) {
    return Drop{"node " + std::to_string(node.id) + " already on path"};
  }
  if (node.neighbors.contains(rr.destination)) return ForwardUnchanged{rr.destination};

  std::set<NodeId> exclude(rr.path.begin(), rr.path.end());
  exclude.insert(node.id);
  auto next = select_next_hop(node, exclude);
  if (!next) return Drop{"no trusted next hop"};

  const SecurityParams& params = rr.params;
  try {
    std::vector<Ciphertext> local = she::encrypt_value(
        rr.pk, encode_trust(node.trust_db.at(*next), node.width), node.width, params, rng);

    std::pair<std::vector<Ciphertext>, EvalStats> result;
    if (mode == EvalMode::kStar) {
      circuits::StarCircuit sc = circuits::compile_to_star(node.circuit, rr.pk, params, rng);
      result = circuits::bind_and_continue(rr.payload, local, sc, rr.pk, params, rng);
    } else {
      result = circuits::bind_and_continue(rr.payload, local, node.circuit, rr.pk, params, rng);
    }

    ForwardUpdated fwd{rr, result.second};
    RouteRequest& out = fwd.rr;
    out.acc_trust = std::move(result.first);
    out.payload = circuits::adapt(out.acc_trust, node.interface_of(*next), rr.pk, params, rng);
    out.path.push_back(node.id);
    out.next_hop = *next;
    out.stats_so_far += fwd.hop_stats;
    return fwd;
  } catch (const std::invalid_argument& e) {
    return Drop{std::string("malformed payload: ") + e.what()};
  } catch (const std::out_of_range& e) {
    return Drop{std::string("malformed payload: ") + e.what()};
  }
}

RouteReply destination_reply(const RouteRequest& rr) {
  RouteReply rp;
  rp.path = rr.path;
  rp.path.push_back(rr.destination);
  rp.acc_trust = rr.acc_trust;
  rp.stats = rr.stats_so_far;
  return rp;
}

Finalized source_finalize(const KeyPair& keys, const RouteReply& rp,
                          const SecurityParams& params) {
  Finalized f;
  f.path = rp.path;
  f.trust = she::decrypt_value(keys.sk, rp.acc_trust);
  f.trusted = std::all_of(rp.acc_trust.begin(), rp.acc_trust.end(),
                          [&](const Ciphertext& c) { return she::noise_ok(c, params); });
  return f;
}

}  // namespace etr::protocol

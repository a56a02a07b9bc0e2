#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "etr/circuits.hpp"
#include "etr/she.hpp"

// Encrypted trust-based route discovery.
//
// The source generates a key pair, encrypts the trust it places in its most
// trusted neighbor and sends a Route Request (RR) there. Each relay adds the
// trust it places in its own most trusted unvisited neighbor to the encrypted
// accumulator, by evaluating its trust circuit on the adapted payload, and
// forwards the RR. A relay that has the destination among its neighbors
// forwards the RR unchanged. The destination answers with a Route Reply (RP);
// only the source can decrypt the accumulated trust.
namespace etr::protocol {

using circuits::AdaptedPayload;
using circuits::Circuit;
using circuits::CircuitInterface;
using circuits::EvalStats;
using she::Ciphertext;
using she::KeyPair;
using she::SecurityParams;

using NodeId = std::uint32_t;

inline constexpr int kMinTrust = 1;
inline constexpr int kMaxTrust = 10;

enum class EvalMode : std::uint8_t { kStar, kPlain };

struct NodeState {
  NodeId id = 0;
  std::set<NodeId> neighbors;
  std::map<NodeId, int> trust_db;
  Circuit circuit;
  std::uint32_t width = 4;
  // What each neighbor's circuit expects from its predecessor. Neighbors
  // missing here are assumed to run an adder of the same width.
  std::map<NodeId, CircuitInterface> neighbor_interfaces;

  // A node whose trust circuit is the width-bit ripple adder.
  static NodeState with_adder(NodeId id, std::map<NodeId, int> trust_db, std::uint32_t width);

  CircuitInterface interface_of(NodeId neighbor) const;
  // Throws std::invalid_argument on trust values outside [1, 10], trust
  // entries for non-neighbors, or a circuit of the wrong arity.
  void validate() const;
};

struct RouteRequest {
  Natural pk;
  SecurityParams params;
  NodeId source = 0;
  NodeId destination = 0;
  NodeId next_hop = 0;
  std::vector<NodeId> path;
  std::vector<Ciphertext> acc_trust;
  AdaptedPayload payload;
  EvalStats stats_so_far;

  std::uint32_t width() const { return static_cast<std::uint32_t>(acc_trust.size()); }
};

struct RouteReply {
  std::vector<NodeId> path;
  std::vector<Ciphertext> acc_trust;
  EvalStats stats;
};

struct ForwardUnchanged {
  NodeId to;
};
struct ForwardUpdated {
  RouteRequest rr;
  EvalStats hop_stats;  // this node's contribution only
};
struct Reply {
  RouteReply rp;
};
struct Drop {
  std::string reason;
};

using ForwardDecision = std::variant<ForwardUnchanged, ForwardUpdated, Reply, Drop>;

// Highest trust among neighbors not in exclude; ties go to the smaller id.
std::optional<NodeId> select_next_hop(const NodeState& node, const std::set<NodeId>& exclude);

struct Initiation {
  KeyPair keys;
  RouteRequest rr;
};

// Throws std::invalid_argument when the node has no eligible neighbor or the
// destination is the node itself; keygen errors propagate.
Initiation source_initiate(const NodeState& node, NodeId destination,
                           const SecurityParams& params, Rng& rng);

ForwardDecision process_rr(const NodeState& node, const RouteRequest& rr, EvalMode mode,
                           Rng& rng);

RouteReply destination_reply(const RouteRequest& rr);

struct Finalized {
  std::vector<NodeId> path;
  std::uint64_t trust = 0;
  bool trusted = false;
};

Finalized source_finalize(const KeyPair& keys, const RouteReply& rp,
                          const SecurityParams& params);

}  // namespace etr::protocol

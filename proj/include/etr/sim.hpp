#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "etr/circuits.hpp"
#include "etr/protocol.hpp"

namespace etr::sim {

using circuits::EvalStats;
using protocol::EvalMode;
using protocol::NodeId;

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Topology {
  std::vector<NodeId> nodes;
  std::set<std::pair<NodeId, NodeId>> edges;       // undirected, stored (low, high)
  std::map<std::pair<NodeId, NodeId>, int> trust;  // directed arc -> [1, 10]

  std::set<NodeId> neighbors_of(NodeId n) const;
  int trust_of(NodeId from, NodeId to) const { return trust.at({from, to}); }
  bool has_node(NodeId n) const;
  bool connected() const;
  // Throws TopologyError naming the offending field.
  void validate() const;

  friend bool operator==(const Topology&, const Topology&) = default;
};

// Connected random graph with round(n * avg_degree / 2) edges and directed
// trust uniform in [1, 10]. Throws TopologyError when the degree cannot give
// a connected simple graph.
Topology generate_topology(std::uint32_t n, double avg_degree, std::uint64_t seed);

Topology load_topology(const std::filesystem::path& path);
void save_topology(const Topology& t, const std::filesystem::path& path);

enum class Status : std::uint8_t { kDelivered, kDropped };
const char* to_string(Status s);

struct OracleResult {
  Status status = Status::kDropped;
  // As reported in the route reply: the source, every relay that updated the
  // accumulator, then the destination.
  std::vector<NodeId> path;
  std::uint64_t trust = 0;
  // Arcs whose trust was summed, in order.
  std::vector<std::pair<NodeId, NodeId>> accumulated_arcs;
  std::string drop_reason;

  std::uint32_t updating_hops() const {
    return accumulated_arcs.empty() ? 0 : static_cast<std::uint32_t>(accumulated_arcs.size() - 1);
  }
};

// Unencrypted re-implementation of the discovery rules, sharing nothing with
// the protocol code beyond the topology types.
OracleResult plaintext_oracle(const Topology& t, NodeId source, NodeId destination,
                              std::uint32_t width);

inline constexpr std::uint64_t kDefaultEtaCeiling = std::uint64_t{1} << 24;

struct EtaPlan {
  std::uint64_t eta = 0;
  bool too_deep = false;
};

// Smallest sk bit-length that keeps decryption correct after `hops` chained
// adapt + bind_and_continue evaluations of a width-bit adder, obtained by
// running the noise-bound recurrence symbolically. Includes a 2-bit margin.
EtaPlan required_eta(std::uint32_t width, std::uint32_t hops, std::uint32_t lambda,
                     EvalMode mode = EvalMode::kStar,
                     std::uint64_t ceiling = kDefaultEtaCeiling);

struct RunConfig {
  std::uint32_t lambda = 3;
  std::optional<std::uint64_t> eta;  // nullopt: plan automatically
  std::uint32_t width = 4;
  std::uint64_t seed = 1;
  bool reduce_mod_pk = true;
  bool star_mode = true;
  std::uint64_t eta_ceiling = kDefaultEtaCeiling;
  // Called with the source's key pair right after initiation. Audits use it
  // to check noise bounds against the secret key.
  std::function<void(const she::KeyPair&)> on_keygen;

  void validate() const;
};

struct PhaseTimes {
  std::chrono::nanoseconds setup{0};  // keygen + source initiation
  std::chrono::nanoseconds hops{0};   // relay processing loop
  std::chrono::nanoseconds finalize{0};
};

struct RunReport {
  NodeId source = 0;
  NodeId destination = 0;
  Status status = Status::kDropped;
  std::string drop_reason;
  std::vector<NodeId> path;
  std::uint64_t decrypted_trust = 0;
  std::vector<NodeId> oracle_path;
  std::uint64_t oracle_trust = 0;
  Status oracle_status = Status::kDropped;
  bool trusted = false;
  std::uint32_t updating_hops = 0;
  EvalStats stats;
  std::vector<std::pair<NodeId, EvalStats>> per_node;
  std::uint32_t lambda = 0;
  std::uint32_t width = 0;
  std::uint64_t eta_used = 0;
  std::uint64_t pk_bits = 0;
  bool eta_auto = false;
  bool star_mode = true;
  std::uint64_t relay_decrypt_calls = 0;
  PhaseTimes times;
};

class PlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Full discovery. Throws PlanningError when an automatic eta would exceed the
// ceiling, and std::logic_error if a run within its noise budget disagrees
// with the plaintext oracle.
RunReport run_discovery(const Topology& t, NodeId source, NodeId destination,
                        const RunConfig& cfg);

// Builds protocol node states from a topology.
std::map<NodeId, protocol::NodeState> build_nodes(const Topology& t, std::uint32_t width);

// Delivered (source, destination) pair with the most updating relays;
// smallest pair wins ties. nullopt when nothing is deliverable.
std::optional<std::pair<NodeId, NodeId>> longest_greedy_pair(const Topology& t,
                                                             std::uint32_t width);

struct BenchRow {
  std::uint32_t lambda = 0;
  double seconds = 0;
  double ceiling_seconds = 0;
  std::uint64_t he_adds = 0;  // circuit gates, plain mode
  std::uint64_t he_muls = 0;
  std::uint64_t total_he_adds = 0;  // including adapter triples
  std::uint64_t total_he_muls = 0;
  double star_seconds = 0;
  std::uint64_t star_he_adds = 0;
  std::uint64_t star_he_muls = 0;
  std::uint32_t updating_hops = 0;
  std::vector<NodeId> path;
};

struct BenchResult {
  std::uint64_t seed = 0;
  std::uint32_t nodes = 0;
  NodeId source = 0;
  NodeId destination = 0;
  std::vector<BenchRow> rows;
  std::uint64_t add_budget = 400;
  std::uint64_t mul_budget = 160;
};

// Reference timings per lambda used as ceilings.
double table_ceiling_seconds(std::uint32_t lambda);

BenchResult benchmark(std::uint64_t seed, const std::vector<std::uint32_t>& lambdas = {3, 5, 8, 10},
                      std::uint32_t nodes = 20, double avg_degree = 3.0);

std::string format_bench_table(const BenchResult& r);

}  // namespace etr::sim

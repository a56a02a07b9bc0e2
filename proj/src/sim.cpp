#include "etr/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>

#include "etr/json_io.hpp"

namespace etr::sim {
namespace {

using Clock = std::chrono::steady_clock;

std::pair<NodeId, NodeId> ordered(NodeId a, NodeId b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

// Noise bounds only; mirrors circuits::Evaluator using the scheme's own
// propagation rules.
struct NoiseTracker {
  EvalMode mode;
  std::uint64_t fresh;

  std::uint64_t add(std::uint64_t a, std::uint64_t b) const { return she::noise_after_add(a, b); }
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const { return she::noise_after_mul(a, b); }
  std::uint64_t star(std::uint64_t a, std::uint64_t b, std::uint64_t flag) const {
    std::uint64_t both = mul(a, b);
    std::uint64_t either = add(a, b);
    std::uint64_t diff = add(both, either);
    return add(either, mul(flag, diff));
  }

  std::vector<std::uint64_t> eval(const circuits::Circuit& c,
                                  const std::vector<std::uint64_t>& inputs) const {
    std::vector<std::uint64_t> gate_out;
    auto get = [&](const circuits::WireRef& w) {
      switch (w.kind) {
        case circuits::WireRef::Kind::kInput:
          return inputs[w.index];
        case circuits::WireRef::Kind::kGateOutput:
          return gate_out[w.index];
        case circuits::WireRef::Kind::kConst:
          break;
      }
      return fresh;
    };
    for (const auto& g : c.gates()) {
      const std::uint64_t a = get(g.a);
      const std::uint64_t b = get(g.b);
      if (mode == EvalMode::kStar) {
        gate_out.push_back(star(a, b, fresh));
      } else {
        gate_out.push_back(g.kind == circuits::GateKind::kXor ? add(a, b) : mul(a, b));
      }
    }
    std::vector<std::uint64_t> out;
    for (const auto& o : c.outputs()) out.push_back(get(o));
    return out;
  }
};

}  // namespace

const char* to_string(Status s) { return s == Status::kDelivered ? "DELIVERED" : "DROPPED"; }

std::set<NodeId> Topology::neighbors_of(NodeId n) const {
  std::set<NodeId> out;
  for (const auto& [a, b] : edges) {
    if (a == n) out.insert(b);
    if (b == n) out.insert(a);
  }
  return out;
}

bool Topology::has_node(NodeId n) const {
  return std::find(nodes.begin(), nodes.end(), n) != nodes.end();
}

bool Topology::connected() const {
  if (nodes.empty()) return true;
  std::set<NodeId> seen{nodes.front()};
  std::deque<NodeId> queue{nodes.front()};
  while (!queue.empty()) {
    NodeId cur = queue.front();
    queue.pop_front();
    for (NodeId nb : neighbors_of(cur)) {
      if (seen.insert(nb).second) queue.push_back(nb);
    }
  }
  return seen.size() == nodes.size();
}

void Topology::validate() const {
  std::set<NodeId> ids;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!ids.insert(nodes[i]).second) {
      throw TopologyError("nodes[" + std::to_string(i) + "].id: duplicate id " +
                          std::to_string(nodes[i]));
    }
  }
  for (const auto& [a, b] : edges) {
    const std::string where = "edges[" + std::to_string(a) + "," + std::to_string(b) + "]";
    if (a == b) throw TopologyError(where + ": self-loop");
    if (a > b) throw TopologyError(where + ": edge not stored in (low, high) order");
    if (!ids.contains(a) || !ids.contains(b)) throw TopologyError(where + ": unknown node");
    for (auto arc : {std::pair{a, b}, std::pair{b, a}}) {
      if (!trust.contains(arc)) {
        throw TopologyError("trust[\"" + std::to_string(arc.first) + "->" +
                            std::to_string(arc.second) + "\"]: missing for edge " + where);
      }
    }
  }
  for (const auto& [arc, v] : trust) {
    const std::string where =
        "trust[\"" + std::to_string(arc.first) + "->" + std::to_string(arc.second) + "\"]";
    if (!edges.contains(ordered(arc.first, arc.second))) {
      throw TopologyError(where + ": no such edge");
    }
    if (v < protocol::kMinTrust || v > protocol::kMaxTrust) {
      throw TopologyError(where + ": value " + std::to_string(v) + " outside [1, 10]");
    }
  }
}

Topology generate_topology(std::uint32_t n, double avg_degree, std::uint64_t seed) {
  if (n < 2) throw TopologyError("generate_topology: need at least 2 nodes");
  const std::uint64_t max_edges = std::uint64_t{n} * (n - 1) / 2;
  const auto m = static_cast<std::uint64_t>(std::llround(n * avg_degree / 2.0));
  if (avg_degree < 0 || m > max_edges || m < n - 1) {
    throw TopologyError("generate_topology: average degree " + std::to_string(avg_degree) +
                        " cannot give a connected simple graph on " + std::to_string(n) +
                        " nodes (needs between " + std::to_string(n - 1) + " and " +
                        std::to_string(max_edges) + " edges)");
  }

  std::vector<std::pair<NodeId, NodeId>> all;
  all.reserve(max_edges);
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = a + 1; b < n; ++b) all.emplace_back(a, b);
  }

  Rng rng(seed);
  constexpr int kMaxAttempts = 1'000'000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    // Partial Fisher-Yates: the first m slots become a uniform m-subset.
    for (std::uint64_t i = 0; i < m; ++i) {
      std::uint64_t j = i + rng.below(all.size() - i);
      std::swap(all[i], all[j]);
    }
    Topology t;
    for (NodeId i = 0; i < n; ++i) t.nodes.push_back(i);
    t.edges.insert(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m));
    if (!t.connected()) continue;
    for (const auto& [a, b] : t.edges) {
      t.trust[{a, b}] = static_cast<int>(rng.in_range(protocol::kMinTrust, protocol::kMaxTrust));
      t.trust[{b, a}] = static_cast<int>(rng.in_range(protocol::kMinTrust, protocol::kMaxTrust));
    }
    return t;
  }
  throw TopologyError("generate_topology: no connected sample found");
}

Topology load_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TopologyError("cannot open topology file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw TopologyError(path.string() + ": " + e.what());
  }
  return json_io::topology_from_json(j);
}

void save_topology(const Topology& t, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw TopologyError("cannot write topology file " + path.string());
  out << json_io::to_json(t).dump(2) << "\n";
}

OracleResult plaintext_oracle(const Topology& t, NodeId source, NodeId destination,
                              std::uint32_t width) {
  OracleResult r;
  const std::uint64_t mask = width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;

  auto best_excluding = [&](NodeId at, const std::vector<NodeId>& skip) -> std::optional<NodeId> {
    std::optional<NodeId> best;
    int best_t = -1;
    for (const auto& [arc, v] : t.trust) {
      if (arc.first != at) continue;
      const NodeId cand = arc.second;
      if (cand == at || std::find(skip.begin(), skip.end(), cand) != skip.end()) continue;
      if (v > best_t || (v == best_t && cand < *best)) {
        best = cand;
        best_t = v;
      }
    }
    return best;
  };

  std::vector<NodeId> path{source};
  std::uint64_t sum = 0;
  auto first = best_excluding(source, path);
  if (!first) {
    r.drop_reason = "source has no neighbor";
    r.path = path;
    return r;
  }
  sum += static_cast<std::uint64_t>(t.trust_of(source, *first));
  r.accumulated_arcs.emplace_back(source, *first);

  NodeId at = *first;
  for (std::size_t step = 0; step <= t.nodes.size(); ++step) {
    if (at == destination) break;
    const bool sees_destination = t.trust.contains({at, destination});
    if (sees_destination) break;  // forwarded as-is; `at` is not recorded
    auto next = best_excluding(at, path);
    if (!next) {
      r.drop_reason = "no trusted next hop at node " + std::to_string(at);
      r.path = path;
      return r;
    }
    sum += static_cast<std::uint64_t>(t.trust_of(at, *next));
    r.accumulated_arcs.emplace_back(at, *next);
    path.push_back(at);
    at = *next;
  }
  path.push_back(destination);
  r.status = Status::kDelivered;
  r.path = std::move(path);
  r.trust = sum & mask;
  return r;
}

EtaPlan required_eta(std::uint32_t width, std::uint32_t hops, std::uint32_t lambda,
                     EvalMode mode, std::uint64_t ceiling) {
  const std::uint64_t fresh = std::uint64_t{lambda} + 2;
  const NoiseTracker tracker{mode, fresh};
  const circuits::Circuit adder = circuits::build_ripple_adder(width);

  std::vector<std::uint64_t> acc(width, fresh);
  for (std::uint32_t h = 0; h < hops; ++h) {
    std::vector<std::uint64_t> inputs;
    inputs.reserve(2 * width);
    for (std::uint64_t n : acc) inputs.push_back(tracker.star(n, fresh, fresh));
    inputs.insert(inputs.end(), width, fresh);
    acc = tracker.eval(adder, inputs);
    if (*std::max_element(acc.begin(), acc.end()) > ceiling) return {ceiling, true};
  }
  const std::uint64_t worst = *std::max_element(acc.begin(), acc.end());
  const std::uint64_t eta = she::noise_after_mul(worst, 2);  // worst + 2, saturating
  return {eta, eta > ceiling};
}

void RunConfig::validate() const {
  if (lambda < 2) throw std::invalid_argument("lambda must be at least 2");
  if (width < 1 || width > 8) throw std::invalid_argument("width must be in [1, 8]");
}

std::map<NodeId, protocol::NodeState> build_nodes(const Topology& t, std::uint32_t width) {
  std::map<NodeId, protocol::NodeState> nodes;
  for (NodeId id : t.nodes) {
    std::map<NodeId, int> db;
    for (NodeId nb : t.neighbors_of(id)) db[nb] = t.trust_of(id, nb);
    nodes.emplace(id, protocol::NodeState::with_adder(id, std::move(db), width));
  }
  for (auto& [id, node] : nodes) {
    for (NodeId nb : node.neighbors) {
      const auto& other = nodes.at(nb);
      node.neighbor_interfaces[nb] = circuits::adder_interface(other.width);
    }
  }
  return nodes;
}

RunReport run_discovery(const Topology& t, NodeId source, NodeId destination,
                        const RunConfig& cfg) {
  cfg.validate();
  t.validate();
  if (!t.has_node(source) || !t.has_node(destination)) {
    throw std::invalid_argument("unknown source or destination node");
  }
  if (source == destination) throw std::invalid_argument("source equals destination");

  RunReport rep;
  rep.source = source;
  rep.destination = destination;
  rep.lambda = cfg.lambda;
  rep.width = cfg.width;
  rep.star_mode = cfg.star_mode;
  const EvalMode mode = cfg.star_mode ? EvalMode::kStar : EvalMode::kPlain;

  const OracleResult oracle = plaintext_oracle(t, source, destination, cfg.width);
  rep.oracle_status = oracle.status;
  rep.oracle_path = oracle.path;
  rep.oracle_trust = oracle.trust;

  std::uint64_t eta = 0;
  if (cfg.eta) {
    eta = *cfg.eta;
  } else {
    rep.eta_auto = true;
    EtaPlan plan = required_eta(cfg.width, oracle.updating_hops(), cfg.lambda, mode,
                                cfg.eta_ceiling);
    if (plan.too_deep) {
      throw PlanningError("route with " + std::to_string(oracle.updating_hops()) +
                          " updating hops needs eta above the ceiling of " +
                          std::to_string(cfg.eta_ceiling) + " bits");
    }
    eta = plan.eta;
  }
  const auto params = she::SecurityParams::with_eta(cfg.lambda, eta, cfg.reduce_mod_pk);
  params.validate();
  rep.eta_used = params.eta;
  rep.pk_bits = params.pk_bits;

  auto nodes = build_nodes(t, cfg.width);
  Rng rng(cfg.seed);

  if (nodes.at(source).neighbors.empty()) {
    rep.drop_reason = "source has no neighbor";
    rep.path = {source};
  } else {
    auto t0 = Clock::now();
    protocol::Initiation init =
        protocol::source_initiate(nodes.at(source), destination, params, rng);
    auto t1 = Clock::now();
    rep.times.setup = t1 - t0;
    if (cfg.on_keygen) cfg.on_keygen(init.keys);

    const std::uint64_t decrypts_before = she::decrypt_call_count();
    protocol::RouteRequest rr = std::move(init.rr);
    std::optional<protocol::RouteReply> reply;
    NodeId at = rr.next_hop;
    for (std::size_t step = 0; step <= nodes.size() + 1 && !reply; ++step) {
      protocol::ForwardDecision d = protocol::process_rr(nodes.at(at), rr, mode, rng);
      if (auto* r = std::get_if<protocol::Reply>(&d)) {
        reply = std::move(r->rp);
      } else if (auto* u = std::get_if<protocol::ForwardUnchanged>(&d)) {
        at = u->to;
      } else if (auto* f = std::get_if<protocol::ForwardUpdated>(&d)) {
        rep.per_node.emplace_back(at, f->hop_stats);
        rr = std::move(f->rr);
        at = rr.next_hop;
      } else {
        rep.drop_reason = std::get<protocol::Drop>(d).reason;
        rep.path = rr.path;
        break;
      }
    }
    auto t2 = Clock::now();
    rep.times.hops = t2 - t1;
    rep.relay_decrypt_calls = she::decrypt_call_count() - decrypts_before;
    rep.updating_hops = static_cast<std::uint32_t>(rep.per_node.size());

    if (reply) {
      protocol::Finalized fin = protocol::source_finalize(init.keys, *reply, params);
      rep.times.finalize = Clock::now() - t2;
      rep.status = Status::kDelivered;
      rep.path = fin.path;
      rep.decrypted_trust = fin.trust;
      rep.trusted = fin.trusted;
      rep.stats = reply->stats;
    } else {
      rep.stats = rr.stats_so_far;
      if (rep.drop_reason.empty()) rep.drop_reason = "step limit reached";
    }
  }

  if (rep.status != oracle.status || rep.path != oracle.path) {
    throw std::logic_error("discovery diverged from the plaintext oracle");
  }
  if (rep.status == Status::kDelivered && rep.trusted && rep.decrypted_trust != oracle.trust) {
    throw std::logic_error("decryption within noise budget disagrees with the plaintext oracle");
  }
  return rep;
}

std::optional<std::pair<NodeId, NodeId>> longest_greedy_pair(const Topology& t,
                                                             std::uint32_t width) {
  std::optional<std::pair<NodeId, NodeId>> best;
  std::uint32_t best_hops = 0;
  for (NodeId s : t.nodes) {
    for (NodeId d : t.nodes) {
      if (s == d) continue;
      OracleResult r = plaintext_oracle(t, s, d, width);
      if (r.status != Status::kDelivered) continue;
      if (!best || r.updating_hops() > best_hops) {
        best = std::pair{s, d};
        best_hops = r.updating_hops();
      }
    }
  }
  return best;
}

double table_ceiling_seconds(std::uint32_t lambda) {
  switch (lambda) {
    case 3:
      return 0.3;
    case 5:
      return 1.0;
    case 8:
      return 3.0;
    case 10:
      return 8.0;
    default:
      return 0.0;
  }
}

BenchResult benchmark(std::uint64_t seed, const std::vector<std::uint32_t>& lambdas,
                      std::uint32_t nodes, double avg_degree) {
  BenchResult res;
  res.seed = seed;
  res.nodes = nodes;
  const Topology topo = generate_topology(nodes, avg_degree, seed);
  const auto pair = longest_greedy_pair(topo, 4);
  if (!pair) throw TopologyError("benchmark topology has no deliverable pair");
  res.source = pair->first;
  res.destination = pair->second;

  for (std::uint32_t lambda : lambdas) {
    RunConfig cfg;
    cfg.lambda = lambda;
    cfg.eta = std::uint64_t{lambda} * lambda;
    cfg.width = 4;
    cfg.seed = seed;
    cfg.star_mode = false;
    RunReport plain = run_discovery(topo, pair->first, pair->second, cfg);
    cfg.star_mode = true;
    RunReport star = run_discovery(topo, pair->first, pair->second, cfg);

    BenchRow row;
    row.lambda = lambda;
    row.seconds = std::chrono::duration<double>(plain.times.hops).count();
    row.ceiling_seconds = table_ceiling_seconds(lambda);
    row.he_adds = plain.stats.circuit_he_add();
    row.he_muls = plain.stats.circuit_he_mul();
    row.total_he_adds = plain.stats.n_he_add;
    row.total_he_muls = plain.stats.n_he_mul;
    row.star_seconds = std::chrono::duration<double>(star.times.hops).count();
    row.star_he_adds = star.stats.n_he_add;
    row.star_he_muls = star.stats.n_he_mul;
    row.updating_hops = plain.updating_hops;
    row.path = plain.path;
    res.rows.push_back(std::move(row));
  }
  return res;
}

std::string format_bench_table(const BenchResult& r) {
  std::ostringstream os;
  os << "nodes=" << r.nodes << " seed=" << r.seed << " route " << r.source << " -> "
     << r.destination << "\n";
  char line[256];
  std::snprintf(line, sizeof line, "%6s %12s %9s %8s %8s %10s %10s %12s %9s %9s %5s\n", "lambda",
                "seconds", "ceiling", "he_adds", "he_muls", "all_adds", "all_muls",
                "star_seconds", "star_add", "star_mul", "hops");
  os << line;
  for (const auto& row : r.rows) {
    std::snprintf(line, sizeof line,
                  "%6u %12.6f %9.2f %8llu %8llu %10llu %10llu %12.6f %9llu %9llu %5u\n",
                  row.lambda, row.seconds, row.ceiling_seconds,
                  static_cast<unsigned long long>(row.he_adds),
                  static_cast<unsigned long long>(row.he_muls),
                  static_cast<unsigned long long>(row.total_he_adds),
                  static_cast<unsigned long long>(row.total_he_muls), row.star_seconds,
                  static_cast<unsigned long long>(row.star_he_adds),
                  static_cast<unsigned long long>(row.star_he_muls), row.updating_hops);
    os << line;
  }
  os << "budget: he_adds <= " << r.add_budget << ", he_muls <= " << r.mul_budget
     << " (plain-mode circuit gates)\n";
  return os.str();
}

}  // namespace etr::sim

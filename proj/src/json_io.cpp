#include "etr/json_io.hpp"

#include <charconv>

namespace etr::json_io {
namespace {

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw FormatError(where + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(where + "." + key + ": missing");
  return *it;
}

template <typename T>
T number(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw FormatError(where + ": expected an integer");
  if constexpr (std::is_unsigned_v<T>) {
    if (j.is_number_unsigned()) return j.get<T>();
    if (j.get<std::int64_t>() < 0) throw FormatError(where + ": expected a nonnegative integer");
  }
  return j.get<T>();
}

template <typename T>
T number_field(const json& j, const char* key, const std::string& where) {
  return number<T>(field(j, key, where), where + "." + key);
}

const json& array(const json& j, const std::string& where) {
  if (!j.is_array()) throw FormatError(where + ": expected an array");
  return j;
}

Natural natural_from_hex(const json& j, const std::string& where) {
  if (!j.is_string()) throw FormatError(where + ": expected a hex string");
  auto v = Natural::from_hex(j.get<std::string>());
  if (!v) throw FormatError(where + ": invalid hex string");
  return *v;
}

std::vector<protocol::NodeId> ids_from_json(const json& j, const std::string& where) {
  std::vector<protocol::NodeId> out;
  for (std::size_t i = 0; i < array(j, where).size(); ++i) {
    out.push_back(number<protocol::NodeId>(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

json ciphertext_hexes(const std::vector<she::Ciphertext>& cts) {
  json out = json::array();
  for (const auto& c : cts) out.push_back(c.value.to_hex());
  return out;
}

json ciphertext_noises(const std::vector<she::Ciphertext>& cts) {
  json out = json::array();
  for (const auto& c : cts) out.push_back(c.noise_bits);
  return out;
}

std::vector<she::Ciphertext> ciphertexts_from_json(const json& hexes, const json& noises,
                                                   const std::string& where,
                                                   const std::string& noise_where) {
  array(hexes, where);
  array(noises, noise_where);
  if (hexes.size() != noises.size()) {
    throw FormatError(noise_where + ": length " + std::to_string(noises.size()) +
                      " does not match " + where + " length " + std::to_string(hexes.size()));
  }
  std::vector<she::Ciphertext> out;
  for (std::size_t i = 0; i < hexes.size(); ++i) {
    const std::string idx = "[" + std::to_string(i) + "]";
    out.push_back({natural_from_hex(hexes[i], where + idx),
                   number<std::uint64_t>(noises[i], noise_where + idx)});
  }
  return out;
}

std::pair<protocol::NodeId, protocol::NodeId> parse_arc(const std::string& key,
                                                        const std::string& where) {
  auto pos = key.find("->");
  if (pos == std::string::npos) throw FormatError(where + ": key is not of the form \"a->b\"");
  protocol::NodeId a = 0;
  protocol::NodeId b = 0;
  auto ra = std::from_chars(key.data(), key.data() + pos, a);
  auto rb = std::from_chars(key.data() + pos + 2, key.data() + key.size(), b);
  if (ra.ec != std::errc() || ra.ptr != key.data() + pos || rb.ec != std::errc() ||
      rb.ptr != key.data() + key.size()) {
    throw FormatError(where + ": key is not of the form \"a->b\"");
  }
  return {a, b};
}

}  // namespace

json to_json(const sim::Topology& t) {
  json nodes = json::array();
  for (auto id : t.nodes) nodes.push_back({{"id", id}});
  json edges = json::array();
  for (const auto& [a, b] : t.edges) edges.push_back({a, b});
  json trust = json::object();
  for (const auto& [arc, v] : t.trust) {
    trust[std::to_string(arc.first) + "->" + std::to_string(arc.second)] = v;
  }
  return {{"nodes", nodes}, {"edges", edges}, {"trust", trust}};
}

sim::Topology topology_from_json(const json& j) {
  sim::Topology t;
  const json& nodes = array(field(j, "nodes", "$"), "$.nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    t.nodes.push_back(
        number_field<protocol::NodeId>(nodes[i], "id", "$.nodes[" + std::to_string(i) + "]"));
  }
  const json& edges = array(field(j, "edges", "$"), "$.edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string where = "$.edges[" + std::to_string(i) + "]";
    if (!edges[i].is_array() || edges[i].size() != 2) {
      throw FormatError(where + ": expected a [a, b] pair");
    }
    auto a = number<protocol::NodeId>(edges[i][0], where + "[0]");
    auto b = number<protocol::NodeId>(edges[i][1], where + "[1]");
    if (a == b) throw FormatError(where + ": self-loop on node " + std::to_string(a));
    t.edges.insert(a < b ? std::pair{a, b} : std::pair{b, a});
  }
  const json& trust = field(j, "trust", "$");
  if (!trust.is_object()) throw FormatError("$.trust: expected an object");
  for (const auto& [key, v] : trust.items()) {
    const std::string where = "$.trust[\"" + key + "\"]";
    auto arc = parse_arc(key, where);
    t.trust[arc] = number<int>(v, where);
  }
  try {
    t.validate();
  } catch (const sim::TopologyError& e) {
    throw FormatError(std::string("$.") + e.what());
  }
  return t;
}

json to_json(const circuits::WireRef& w) {
  switch (w.kind) {
    case circuits::WireRef::Kind::kInput:
      return {{"src", "input"}, {"index", w.index}};
    case circuits::WireRef::Kind::kGateOutput:
      return {{"src", "gate"}, {"index", w.index}};
    case circuits::WireRef::Kind::kConst:
      break;
  }
  return {{"src", "const"}, {"value", w.const_bit ? 1 : 0}};
}

circuits::WireRef wire_from_json(const json& j, const std::string& where) {
  const json& src = field(j, "src", where);
  const std::string s = src.is_string() ? src.get<std::string>() : "";
  if (s == "input") return circuits::WireRef::input(number_field<std::uint32_t>(j, "index", where));
  if (s == "gate") return circuits::WireRef::gate(number_field<std::uint32_t>(j, "index", where));
  if (s == "const") {
    auto v = number_field<std::uint32_t>(j, "value", where);
    if (v > 1) throw FormatError(where + ".value: expected 0 or 1");
    return circuits::WireRef::constant(v == 1);
  }
  throw FormatError(where + ".src: expected \"input\", \"gate\" or \"const\"");
}

json to_json(const circuits::Circuit& c) {
  json gates = json::array();
  for (const auto& g : c.gates()) {
    gates.push_back({{"kind", g.kind == circuits::GateKind::kXor ? "XOR" : "AND"},
                     {"a", to_json(g.a)},
                     {"b", to_json(g.b)}});
  }
  json outputs = json::array();
  for (const auto& o : c.outputs()) outputs.push_back(to_json(o));
  return {{"num_inputs", c.num_inputs()}, {"gates", gates}, {"outputs", outputs}};
}

namespace {

std::vector<circuits::WireRef> outputs_from_json(const json& j) {
  std::vector<circuits::WireRef> out;
  const json& outs = array(field(j, "outputs", "$"), "$.outputs");
  for (std::size_t i = 0; i < outs.size(); ++i) {
    out.push_back(wire_from_json(outs[i], "$.outputs[" + std::to_string(i) + "]"));
  }
  return out;
}

template <typename Build>
auto checked_build(Build&& build) {
  try {
    return build();
  } catch (const circuits::MalformedCircuit& e) {
    throw FormatError(std::string("$: ") + e.what());
  }
}

}  // namespace

circuits::Circuit circuit_from_json(const json& j) {
  auto n = number_field<std::uint32_t>(j, "num_inputs", "$");
  std::vector<circuits::Gate> gates;
  const json& gs = array(field(j, "gates", "$"), "$.gates");
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const std::string where = "$.gates[" + std::to_string(i) + "]";
    const json& kind = field(gs[i], "kind", where);
    circuits::GateKind k;
    if (kind == "XOR") {
      k = circuits::GateKind::kXor;
    } else if (kind == "AND") {
      k = circuits::GateKind::kAnd;
    } else {
      throw FormatError(where + ".kind: expected \"XOR\" or \"AND\"");
    }
    gates.push_back({k, wire_from_json(field(gs[i], "a", where), where + ".a"),
                     wire_from_json(field(gs[i], "b", where), where + ".b")});
  }
  auto outputs = outputs_from_json(j);
  return checked_build([&] { return circuits::Circuit(n, std::move(gates), std::move(outputs)); });
}

json to_json(const circuits::StarCircuit& sc) {
  json gates = json::array();
  for (const auto& g : sc.gates()) {
    gates.push_back({{"a", to_json(g.a)},
                     {"b", to_json(g.b)},
                     {"flag", g.flag.value.to_hex()},
                     {"flag_noise", g.flag.noise_bits}});
  }
  json outputs = json::array();
  for (const auto& o : sc.outputs()) outputs.push_back(to_json(o));
  return {{"num_inputs", sc.num_inputs()}, {"star_gates", gates}, {"outputs", outputs}};
}

circuits::StarCircuit star_circuit_from_json(const json& j) {
  auto n = number_field<std::uint32_t>(j, "num_inputs", "$");
  std::vector<circuits::StarGate> gates;
  const json& gs = array(field(j, "star_gates", "$"), "$.star_gates");
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const std::string where = "$.star_gates[" + std::to_string(i) + "]";
    gates.push_back({wire_from_json(field(gs[i], "a", where), where + ".a"),
                     wire_from_json(field(gs[i], "b", where), where + ".b"),
                     {natural_from_hex(field(gs[i], "flag", where), where + ".flag"),
                      number_field<std::uint64_t>(gs[i], "flag_noise", where)}});
  }
  auto outputs = outputs_from_json(j);
  return checked_build(
      [&] { return circuits::StarCircuit(n, std::move(gates), std::move(outputs)); });
}

json to_json(const circuits::CircuitInterface& iface) {
  return {{"acc", iface.num_acc_inputs}, {"local", iface.num_local_inputs}, {"layout", iface.layout}};
}

json to_json(const circuits::AdaptedPayload& p) {
  json triples = json::array();
  json noise = json::array();
  for (const auto& t : p.triples) {
    triples.push_back({t.a.value.to_hex(), t.b.value.to_hex(), t.flag.value.to_hex()});
    noise.push_back({t.a.noise_bits, t.b.noise_bits, t.flag.noise_bits});
  }
  return {{"triples", triples}, {"noise", noise}, {"iface", to_json(p.interface)}};
}

circuits::AdaptedPayload payload_from_json(const json& j) {
  const std::string where = "$.payload";
  circuits::AdaptedPayload p;
  const json& iface = field(j, "iface", where);
  p.interface.num_acc_inputs = number_field<std::uint32_t>(iface, "acc", where + ".iface");
  p.interface.num_local_inputs = number_field<std::uint32_t>(iface, "local", where + ".iface");
  const json& layout = array(field(iface, "layout", where + ".iface"), where + ".iface.layout");
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (!layout[i].is_string()) {
      throw FormatError(where + ".iface.layout[" + std::to_string(i) + "]: expected a string");
    }
    p.interface.layout.push_back(layout[i].get<std::string>());
  }
  const json& triples = array(field(j, "triples", where), where + ".triples");
  const json& noise = array(field(j, "noise", where), where + ".noise");
  if (noise.size() != triples.size()) {
    throw FormatError(where + ".noise: length does not match triples");
  }
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const std::string tw = where + ".triples[" + std::to_string(i) + "]";
    const std::string nw = where + ".noise[" + std::to_string(i) + "]";
    if (!triples[i].is_array() || triples[i].size() != 3) {
      throw FormatError(tw + ": expected three ciphertexts");
    }
    if (!noise[i].is_array() || noise[i].size() != 3) {
      throw FormatError(nw + ": expected three noise bounds");
    }
    auto cts = ciphertexts_from_json(triples[i], noise[i], tw, nw);
    p.triples.push_back({std::move(cts[0]), std::move(cts[1]), std::move(cts[2])});
  }
  return p;
}

json to_json(const circuits::EvalStats& s) {
  return {{"adds", s.n_he_add},
          {"muls", s.n_he_mul},
          {"adapter_adds", s.adapter_he_add},
          {"adapter_muls", s.adapter_he_mul},
          {"max_noise_bits", s.max_noise_bits}};
}

circuits::EvalStats stats_from_json(const json& j, const std::string& where) {
  circuits::EvalStats s;
  s.n_he_add = number_field<std::uint64_t>(j, "adds", where);
  s.n_he_mul = number_field<std::uint64_t>(j, "muls", where);
  if (j.contains("adapter_adds")) s.adapter_he_add = number_field<std::uint64_t>(j, "adapter_adds", where);
  if (j.contains("adapter_muls")) s.adapter_he_mul = number_field<std::uint64_t>(j, "adapter_muls", where);
  s.max_noise_bits = number_field<std::uint64_t>(j, "max_noise_bits", where);
  if (s.adapter_he_add > s.n_he_add || s.adapter_he_mul > s.n_he_mul) {
    throw FormatError(where + ": adapter counts exceed totals");
  }
  return s;
}

json to_json(const protocol::RouteRequest& rr) {
  return {{"pk", rr.pk.to_hex()},
          {"lambda", rr.params.lambda},
          {"eta", rr.params.eta},
          {"reduce_mod_pk", rr.params.reduce_mod_pk},
          {"width", rr.width()},
          {"source", rr.source},
          {"destination", rr.destination},
          {"next_hop", rr.next_hop},
          {"path", rr.path},
          {"acc_trust", ciphertext_hexes(rr.acc_trust)},
          {"acc_noise", ciphertext_noises(rr.acc_trust)},
          {"payload", to_json(rr.payload)},
          {"stats", to_json(rr.stats_so_far)}};
}

protocol::RouteRequest route_request_from_json(const json& j) {
  protocol::RouteRequest rr;
  rr.pk = natural_from_hex(field(j, "pk", "$"), "$.pk");
  const auto lambda = number_field<std::uint32_t>(j, "lambda", "$");
  const auto eta = number_field<std::uint64_t>(j, "eta", "$");
  bool reduce = true;
  if (j.contains("reduce_mod_pk")) {
    if (!j["reduce_mod_pk"].is_boolean()) throw FormatError("$.reduce_mod_pk: expected a boolean");
    reduce = j["reduce_mod_pk"].get<bool>();
  }
  rr.params = she::SecurityParams::with_eta(lambda, eta, reduce);
  // The key fixes the modulus size; prefer it over the schedule.
  rr.params.pk_bits = rr.pk.bit_length();
  try {
    rr.params.validate();
  } catch (const she::InvalidParams& e) {
    throw FormatError(std::string("$.eta: ") + e.what());
  }
  const auto width = number_field<std::uint32_t>(j, "width", "$");
  rr.source = number_field<protocol::NodeId>(j, "source", "$");
  rr.destination = number_field<protocol::NodeId>(j, "destination", "$");
  rr.next_hop = number_field<protocol::NodeId>(j, "next_hop", "$");
  rr.path = ids_from_json(field(j, "path", "$"), "$.path");
  rr.acc_trust = ciphertexts_from_json(field(j, "acc_trust", "$"), field(j, "acc_noise", "$"),
                                       "$.acc_trust", "$.acc_noise");
  if (rr.acc_trust.size() != width) {
    throw FormatError("$.acc_trust: " + std::to_string(rr.acc_trust.size()) +
                      " ciphertexts for width " + std::to_string(width));
  }
  rr.payload = payload_from_json(field(j, "payload", "$"));
  rr.stats_so_far = stats_from_json(field(j, "stats", "$"), "$.stats");
  return rr;
}

json to_json(const protocol::RouteReply& rp) {
  return {{"path", rp.path},
          {"acc_trust", ciphertext_hexes(rp.acc_trust)},
          {"acc_noise", ciphertext_noises(rp.acc_trust)},
          {"stats", to_json(rp.stats)}};
}

protocol::RouteReply route_reply_from_json(const json& j) {
  protocol::RouteReply rp;
  rp.path = ids_from_json(field(j, "path", "$"), "$.path");
  rp.acc_trust = ciphertexts_from_json(field(j, "acc_trust", "$"), field(j, "acc_noise", "$"),
                                       "$.acc_trust", "$.acc_noise");
  rp.stats = stats_from_json(field(j, "stats", "$"), "$.stats");
  return rp;
}

json to_json(const sim::OracleResult& r) {
  json arcs = json::array();
  for (const auto& [a, b] : r.accumulated_arcs) arcs.push_back({a, b});
  json out = {{"status", sim::to_string(r.status)},
              {"path", r.path},
              {"trust", r.trust},
              {"accumulated_arcs", arcs},
              {"updating_hops", r.updating_hops()}};
  if (!r.drop_reason.empty()) out["drop_reason"] = r.drop_reason;
  return out;
}

namespace {

double seconds(std::chrono::nanoseconds ns) { return std::chrono::duration<double>(ns).count(); }

}  // namespace

json to_json(const sim::RunReport& r) {
  json per_node = json::array();
  for (const auto& [id, s] : r.per_node) per_node.push_back({{"node", id}, {"stats", to_json(s)}});
  json out = {
      {"source", r.source},
      {"destination", r.destination},
      {"status", sim::to_string(r.status)},
      {"path", r.path},
      {"decrypted_trust", r.decrypted_trust},
      {"oracle_status", sim::to_string(r.oracle_status)},
      {"oracle_path", r.oracle_path},
      {"oracle_trust", r.oracle_trust},
      {"trusted", r.trusted},
      {"updating_hops", r.updating_hops},
      {"lambda", r.lambda},
      {"width", r.width},
      {"eta_used", r.eta_used},
      {"eta_auto", r.eta_auto},
      {"pk_bits", r.pk_bits},
      {"star_mode", r.star_mode},
      {"relay_decrypt_calls", r.relay_decrypt_calls},
      {"stats", to_json(r.stats)},
      {"circuit_adds", r.stats.circuit_he_add()},
      {"circuit_muls", r.stats.circuit_he_mul()},
      {"per_node", per_node},
      {"wall_time",
       {{"setup_s", seconds(r.times.setup)},
        {"hops_s", seconds(r.times.hops)},
        {"finalize_s", seconds(r.times.finalize)}}},
  };
  if (!r.drop_reason.empty()) out["drop_reason"] = r.drop_reason;
  return out;
}

json to_json(const sim::BenchResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"lambda", row.lambda},
                    {"seconds", row.seconds},
                    {"ceiling_seconds", row.ceiling_seconds},
                    {"he_adds", row.he_adds},
                    {"he_muls", row.he_muls},
                    {"total_he_adds", row.total_he_adds},
                    {"total_he_muls", row.total_he_muls},
                    {"star_seconds", row.star_seconds},
                    {"star_he_adds", row.star_he_adds},
                    {"star_he_muls", row.star_he_muls},
                    {"updating_hops", row.updating_hops},
                    {"path", row.path}});
  }
  return {{"seed", r.seed},
          {"nodes", r.nodes},
          {"source", r.source},
          {"destination", r.destination},
          {"add_budget", r.add_budget},
          {"mul_budget", r.mul_budget},
          {"rows", rows}};
}

}  // namespace etr::json_io

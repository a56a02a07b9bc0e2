#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "etr/circuits.hpp"
#include "etr/protocol.hpp"
#include "etr/sim.hpp"

// JSON wire formats. Big integers travel as canonical lowercase hex strings;
// bit sequences are LSB first. Ciphertext noise bounds travel alongside their
// values so a receiver can keep tracking them.
namespace etr::json_io {

using nlohmann::json;

// Raised for structurally invalid documents; the message starts with the
// offending field path.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json to_json(const sim::Topology& t);
sim::Topology topology_from_json(const json& j);

json to_json(const circuits::WireRef& w);
circuits::WireRef wire_from_json(const json& j, const std::string& where);

json to_json(const circuits::Circuit& c);
circuits::Circuit circuit_from_json(const json& j);

// Gate entries carry only operands and an encrypted flag.
json to_json(const circuits::StarCircuit& sc);
circuits::StarCircuit star_circuit_from_json(const json& j);

json to_json(const circuits::CircuitInterface& iface);
json to_json(const circuits::AdaptedPayload& p);
circuits::AdaptedPayload payload_from_json(const json& j);

// Operation counts and noise; wall time is omitted so documents are
// reproducible.
json to_json(const circuits::EvalStats& s);
circuits::EvalStats stats_from_json(const json& j, const std::string& where);

json to_json(const protocol::RouteRequest& rr);
protocol::RouteRequest route_request_from_json(const json& j);

json to_json(const protocol::RouteReply& rp);
protocol::RouteReply route_reply_from_json(const json& j);

json to_json(const sim::OracleResult& r);
json to_json(const sim::RunReport& r);
json to_json(const sim::BenchResult& r);

}  // namespace etr::json_io

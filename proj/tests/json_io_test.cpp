#include "etr/json_io.hpp"

#include <gtest/gtest.h>

namespace etr::json_io {
namespace {

protocol::RouteRequest SampleRequest(std::uint64_t seed, protocol::Initiation* keep = nullptr) {
  auto nodes = sim::build_nodes(sim::generate_topology(6, 2.0, seed), 4);
  Rng rng(seed);
  auto params = she::SecurityParams::with_eta(3, 400);
  auto init = protocol::source_initiate(nodes.at(0), 5, params, rng);
  // Push it through one relay so path, stats and noise are non-trivial.
  auto at = init.rr.next_hop;
  auto dec = protocol::process_rr(nodes.at(at), init.rr, protocol::EvalMode::kStar, rng);
  protocol::RouteRequest rr = init.rr;
  if (auto* f = std::get_if<protocol::ForwardUpdated>(&dec)) rr = f->rr;
  if (keep) *keep = init;
  return rr;
}

std::string ErrorOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

TEST(JsonIoTest, RouteRequestRoundTrip) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    protocol::RouteRequest rr = SampleRequest(seed);
    const json first = to_json(rr);
    const protocol::RouteRequest back = route_request_from_json(json::parse(first.dump()));
    EXPECT_EQ(to_json(back).dump(), first.dump());
    EXPECT_EQ(back.acc_trust, rr.acc_trust);
    EXPECT_EQ(back.path, rr.path);
    EXPECT_EQ(back.params.eta, rr.params.eta);
  }
}

TEST(JsonIoTest, RouteRequestHasDocumentedFields) {
  const json j = to_json(SampleRequest(4));
  for (const char* key : {"pk", "lambda", "eta", "width", "source", "destination", "next_hop",
                          "path", "acc_trust", "payload", "stats"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  for (const char* key : {"triples", "iface"}) EXPECT_TRUE(j["payload"].contains(key)) << key;
  for (const char* key : {"acc", "local", "layout"}) {
    EXPECT_TRUE(j["payload"]["iface"].contains(key)) << key;
  }
  for (const char* key : {"adds", "muls", "max_noise_bits"}) EXPECT_TRUE(j["stats"].contains(key));
  EXPECT_EQ(j["pk"].get<std::string>(), Natural::from_hex(j["pk"].get<std::string>())->to_hex());
}

TEST(JsonIoTest, RouteReplyRoundTrip) {
  protocol::RouteRequest rr = SampleRequest(5);
  protocol::RouteReply rp = protocol::destination_reply(rr);
  const json first = to_json(rp);
  const protocol::RouteReply back = route_reply_from_json(json::parse(first.dump()));
  EXPECT_EQ(to_json(back), first);
  EXPECT_EQ(back.acc_trust, rp.acc_trust);
  EXPECT_EQ(back.path, rp.path);
}

TEST(JsonIoTest, DeserializedRequestStillDecrypts) {
  protocol::Initiation init;
  protocol::RouteRequest rr = SampleRequest(6, &init);
  auto back = route_request_from_json(json::parse(to_json(rr).dump()));
  EXPECT_EQ(she::decrypt_value(init.keys.sk, back.acc_trust),
            she::decrypt_value(init.keys.sk, rr.acc_trust));
}

TEST(JsonIoTest, CircuitRoundTrip) {
  circuits::Circuit c = circuits::build_ripple_adder(3);
  const json j = to_json(c);
  circuits::Circuit back = circuit_from_json(json::parse(j.dump()));
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(back.xor_count(), c.xor_count());
}

TEST(JsonIoTest, StarCircuitHidesGateKinds) {
  Rng rng(7);
  auto params = she::SecurityParams::with_eta(3, 200);
  auto keys = she::keygen(params, rng);
  auto sc = circuits::compile_to_star(circuits::build_ripple_adder(4), keys.pk, params, rng);
  const json j = to_json(sc);
  const std::string text = j.dump();
  EXPECT_EQ(text.find("XOR"), std::string::npos);
  EXPECT_EQ(text.find("AND"), std::string::npos);
  EXPECT_EQ(text.find("kind"), std::string::npos);
  ASSERT_EQ(j["star_gates"].size(), 17u);
  for (const auto& g : j["star_gates"]) {
    for (const auto& [key, _] : g.items()) {
      EXPECT_TRUE(key == "a" || key == "b" || key == "flag" || key == "flag_noise") << key;
    }
  }
  auto back = star_circuit_from_json(json::parse(text));
  EXPECT_EQ(to_json(back), j);
}

TEST(JsonIoTest, TopologyRoundTrip) {
  sim::Topology t = sim::generate_topology(9, 3.0, 8);
  EXPECT_EQ(topology_from_json(json::parse(to_json(t).dump())), t);
}

TEST(JsonIoTest, ErrorsNameTheField) {
  json rr = to_json(SampleRequest(9));
  {
    json bad = rr;
    bad["acc_trust"][2] = "zz";
    EXPECT_EQ(ErrorOf([&] { route_request_from_json(bad); }).rfind("$.acc_trust[2]", 0), 0u);
  }
  {
    json bad = rr;
    bad.erase("next_hop");
    EXPECT_EQ(ErrorOf([&] { route_request_from_json(bad); }).rfind("$.next_hop", 0), 0u);
  }
  {
    json bad = rr;
    bad["payload"]["triples"][0] = json::array({"1", "2"});
    EXPECT_EQ(ErrorOf([&] { route_request_from_json(bad); }).rfind("$.payload.triples[0]", 0), 0u);
  }
  {
    json bad = rr;
    bad["width"] = 3;
    EXPECT_EQ(ErrorOf([&] { route_request_from_json(bad); }).rfind("$.acc_trust", 0), 0u);
  }
  {
    json bad = rr;
    bad["path"][0] = -1;
    EXPECT_EQ(ErrorOf([&] { route_request_from_json(bad); }).rfind("$.path[0]", 0), 0u);
  }
  {
    json c = to_json(circuits::build_ripple_adder(2));
    c["gates"][1]["kind"] = "OR";
    EXPECT_EQ(ErrorOf([&] { circuit_from_json(c); }).rfind("$.gates[1].kind", 0), 0u);
    c = to_json(circuits::build_ripple_adder(2));
    c["gates"][0]["a"] = {{"src", "gate"}, {"index", 5}};
    EXPECT_EQ(ErrorOf([&] { circuit_from_json(c); }).rfind("$", 0), 0u);
  }
}

TEST(JsonIoTest, ReportsOmitNothingEssential) {
  sim::RunConfig cfg;
  auto rep = sim::run_discovery(sim::generate_topology(6, 2.0, 3), 0, 5, cfg);
  const json j = to_json(rep);
  for (const char* key : {"path", "decrypted_trust", "oracle_trust", "trusted", "stats", "per_node",
                          "eta_used", "wall_time"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

}  // namespace
}  // namespace etr::json_io

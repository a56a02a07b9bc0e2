// etr: encrypted trust-based route discovery simulator.
//
//   etr gen    --nodes N --degree D --seed S --out FILE
//   etr route  --topology FILE --source A --dest B --lambda L [--eta E|auto]
//              [--width W] [--star] [--seed S] [--out FILE]
//   etr oracle --topology FILE --source A --dest B [--width W]
//   etr bench  --seed S [--out FILE]
//   etr plan   --width W --hops H --lambda L [--plain]
//
// Exit status: 0 on success or a delivered route, 2 when the route request
// was dropped, 1 on any error.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "etr/json_io.hpp"
#include "etr/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitDropped = 2;

void emit(const nlohmann::json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << j.dump(2) << "\n";
}

std::optional<std::uint64_t> parse_eta(const std::string& s) {
  if (s == "auto" || s == "AUTO") return std::nullopt;
  std::size_t used = 0;
  unsigned long long v = std::stoull(s, &used);
  if (used != s.size()) throw std::invalid_argument("--eta must be an integer or 'auto'");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Encrypted trust-based route discovery simulator"};
  app.require_subcommand(1);

  std::uint32_t gen_nodes = 20;
  double gen_degree = 3.0;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Generate a connected random topology");
  gen->add_option("--nodes", gen_nodes, "Node count")->required()->check(CLI::Range(2u, 100000u));
  gen->add_option("--degree", gen_degree, "Average degree")->required();
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("--out", gen_out, "Output file (stdout if omitted)");

  std::string topo_path;
  std::uint32_t source = 0;
  std::uint32_t dest = 0;
  std::uint32_t lambda = 3;
  std::string eta_text = "auto";
  std::uint32_t width = 4;
  bool star = false;
  bool no_reduce = false;
  std::uint64_t route_seed = 1;
  std::string route_out;
  auto* route = app.add_subcommand("route", "Run an encrypted route discovery");
  route->add_option("--topology", topo_path, "Topology JSON")->required();
  route->add_option("--source", source, "Source node")->required();
  route->add_option("--dest", dest, "Destination node")->required();
  route->add_option("--lambda", lambda, "Security parameter")->required()->check(CLI::Range(2u, 64u));
  route->add_option("--eta", eta_text, "Secret-key bit-length, or 'auto'");
  route->add_option("--width", width, "Trust accumulator width in bits")->check(CLI::Range(1u, 8u));
  route->add_flag("--star", star, "Evaluate Star-compiled circuits");
  route->add_flag("--no-reduce", no_reduce, "Disable post-operation reduction mod pk");
  route->add_option("--seed", route_seed, "Seed");
  route->add_option("--out", route_out, "Report file (stdout if omitted)");

  std::string oracle_topo;
  std::uint32_t oracle_source = 0;
  std::uint32_t oracle_dest = 0;
  std::uint32_t oracle_width = 4;
  auto* oracle = app.add_subcommand("oracle", "Run the plaintext reference discovery");
  oracle->add_option("--topology", oracle_topo, "Topology JSON")->required();
  oracle->add_option("--source", oracle_source, "Source node")->required();
  oracle->add_option("--dest", oracle_dest, "Destination node")->required();
  oracle->add_option("--width", oracle_width, "Trust accumulator width")->check(CLI::Range(1u, 8u));

  std::uint64_t bench_seed = 1;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Time 20-node discoveries across lambda");
  bench->add_option("--seed", bench_seed, "Seed")->required();
  bench->add_option("--out", bench_out, "JSON output file");

  std::uint32_t plan_width = 4;
  std::uint32_t plan_hops = 1;
  std::uint32_t plan_lambda = 3;
  bool plan_plain = false;
  auto* plan = app.add_subcommand("plan", "Compute the sk bit-length a route depth needs");
  plan->add_option("--width", plan_width, "Accumulator width")->required()->check(CLI::Range(1u, 8u));
  plan->add_option("--hops", plan_hops, "Updating relays")->required();
  plan->add_option("--lambda", plan_lambda, "Security parameter")->required()->check(CLI::Range(2u, 64u));
  plan->add_flag("--plain", plan_plain, "Plan for plain-gate evaluation instead of Star gates");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      auto t = etr::sim::generate_topology(gen_nodes, gen_degree, gen_seed);
      if (gen_out.empty()) {
        std::cout << etr::json_io::to_json(t).dump(2) << "\n";
      } else {
        etr::sim::save_topology(t, gen_out);
      }
      return kExitOk;
    }

    if (*route) {
      auto t = etr::sim::load_topology(topo_path);
      etr::sim::RunConfig cfg;
      cfg.lambda = lambda;
      cfg.eta = parse_eta(eta_text);
      cfg.width = width;
      cfg.seed = route_seed;
      cfg.star_mode = star;
      cfg.reduce_mod_pk = !no_reduce;
      auto rep = etr::sim::run_discovery(t, source, dest, cfg);
      emit(etr::json_io::to_json(rep), route_out);
      if (!route_out.empty()) {
        std::cerr << etr::sim::to_string(rep.status) << " trust=" << rep.decrypted_trust
                  << " oracle=" << rep.oracle_trust << " trusted=" << (rep.trusted ? "yes" : "no")
                  << "\n";
      }
      return rep.status == etr::sim::Status::kDelivered ? kExitOk : kExitDropped;
    }

    if (*oracle) {
      auto t = etr::sim::load_topology(oracle_topo);
      if (!t.has_node(oracle_source) || !t.has_node(oracle_dest) || oracle_source == oracle_dest) {
        throw std::invalid_argument("source and destination must be distinct topology nodes");
      }
      auto r = etr::sim::plaintext_oracle(t, oracle_source, oracle_dest, oracle_width);
      std::cout << etr::json_io::to_json(r).dump(2) << "\n";
      return r.status == etr::sim::Status::kDelivered ? kExitOk : kExitDropped;
    }

    if (*bench) {
      auto r = etr::sim::benchmark(bench_seed);
      std::cout << etr::sim::format_bench_table(r);
      if (!bench_out.empty()) emit(etr::json_io::to_json(r), bench_out);
      return kExitOk;
    }

    if (*plan) {
      auto p = etr::sim::required_eta(plan_width, plan_hops, plan_lambda,
                                      plan_plain ? etr::sim::EvalMode::kPlain
                                                 : etr::sim::EvalMode::kStar);
      nlohmann::json j = {{"width", plan_width},
                          {"hops", plan_hops},
                          {"lambda", plan_lambda},
                          {"mode", plan_plain ? "plain" : "star"},
                          {"too_deep", p.too_deep}};
      if (p.too_deep) {
        j["eta"] = nullptr;
      } else {
        j["eta"] = p.eta;
        j["pk_bits"] = etr::she::SecurityParams::with_eta(plan_lambda, p.eta).pk_bits;
      }
      std::cout << j.dump(2) << "\n";
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

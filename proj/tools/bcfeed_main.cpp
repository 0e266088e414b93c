// bcfeed: achievable symmetric rates for the K-user broadcast channel with
// delayed state feedback. Subcommands:
//   gbc-sweep  SNR sweeps / scheme comparison tables for the fading Gaussian BC
//   ebc        erasure-BC queries (capacity-sym | region-check | feasible | mu-solve)
//   dof        symmetric degrees of freedom
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bcfeed/ebc.hpp"
#include "bcfeed/sweep.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

json read_json_input(const std::string& path) {
  if (path.empty() || path == "-") {
    json j;
    try {
      std::cin >> j;
    } catch (const json::parse_error& e) {
      throw std::invalid_argument(std::string("stdin: invalid JSON: ") + e.what());
    }
    return j;
  }
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open input file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path + ": invalid JSON: " + e.what());
  }
  return j;
}

bcfeed::SymmetricDeltas deltas_from_input(const json& j) {
  if (!j.contains("deltas")) throw std::invalid_argument("/deltas: required");
  const json& d = j["deltas"];
  // accept either the {"K":..,"deltas":[..]} object or a bare array
  if (d.is_array()) {
    bcfeed::SymmetricDeltas out;
    out.deltas = d.get<std::vector<double>>();
    out.validate();
    return out;
  }
  return bcfeed::SymmetricDeltas::from_json(d);
}

double alphabet_bits_from_input(const json& j) {
  if (!j.contains("alphabet_bits")) return 1.0;
  if (!j["alphabet_bits"].is_number())
    throw std::invalid_argument("/alphabet_bits: expected number");
  const double b = j["alphabet_bits"].get<double>();
  if (!(b > 0.0)) throw std::invalid_argument("/alphabet_bits: must be positive");
  return b;
}

std::vector<double> rates_from_input(const json& j) {
  if (!j.contains("rates") || !j["rates"].is_array())
    throw std::invalid_argument("/rates: expected array");
  return j["rates"].get<std::vector<double>>();
}

int run_ebc(const std::string& query, const std::string& input_path) {
  const json in = read_json_input(input_path);
  json out;
  if (query == "capacity-sym") {
    const auto deltas = deltas_from_input(in);
    const double bits = alphabet_bits_from_input(in);
    out = json{{"query", "capacity-sym"},
               {"K", deltas.users()},
               {"alphabet_bits", bits},
               {"sym_rate", bcfeed::ebc::sym_rate_ebc(deltas, bits)}};
  } else if (query == "mu-solve") {
    const auto deltas = deltas_from_input(in);
    const auto mu = bcfeed::ebc::mu_solver_symmetric(deltas);
    out = mu.to_json();
    out["query"] = "mu-solve";
    out["lemma2_max_violation"] = bcfeed::ebc::lemma2_check(mu, deltas);
    out["sym_rate"] = bcfeed::ebc::sym_rate_ebc(deltas, alphabet_bits_from_input(in));
  } else if (query == "region-check") {
    const auto deltas = deltas_from_input(in);
    const double bits = alphabet_bits_from_input(in);
    const auto rates = rates_from_input(in);
    const bool shortcut = in.value("shortcut_only", false);
    const auto rep = bcfeed::ebc::sym_capacity_region_check(rates, deltas, bits, shortcut);
    out = json{{"query", "region-check"},
               {"feasible", rep.feasible},
               {"max_weighted_sum", rep.max_weighted_sum},
               {"alphabet_bits", bits},
               {"binding_permutation", rep.binding_perm}};
  } else if (query == "feasible") {
    bcfeed::ErasurePmf pmf;
    if (in.contains("pmf")) {
      pmf = bcfeed::ErasurePmf::from_json(in["pmf"]);
    } else {
      pmf = bcfeed::symmetric_pmf(deltas_from_input(in));
    }
    if (!in.contains("params")) throw std::invalid_argument("/params: required");
    const auto params = bcfeed::ebc::EbcSchemeParams::from_json(in["params"]);
    const auto rates = rates_from_input(in);
    const auto rep = bcfeed::ebc::jsc_ebc_feasible(rates, params, pmf);
    json constraints = json::array();
    for (const auto& c : rep.constraints) {
      if (c.j == 1)
        constraints.push_back(json{{"kind", "rate"}, {"k", c.k}, {"slack", c.slack}});
      else
        constraints.push_back(
            json{{"kind", "allocation"}, {"j", c.j}, {"k", c.k}, {"J", c.J}, {"slack", c.slack}});
    }
    out = json{{"query", "feasible"},
               {"feasible", rep.feasible},
               {"min_slack", rep.min_slack},
               {"constraints", constraints}};
  } else {
    throw std::invalid_argument("unknown ebc query: " + query);
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

struct SweepCliArgs {
  std::string preset;
  std::optional<int> users, tx, rx, beta_points, threads;
  std::optional<double> snr_db, snr_start, snr_stop, snr_step, beta_min, beta_max;
  std::optional<std::int64_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> schemes, snr_ref;
  std::string format = "csv";
  bool dump_grid = false;
};

int run_sweep(const SweepCliArgs& a) {
  bcfeed::sweep::SweepSpec spec;
  if (!a.preset.empty()) {
    spec = bcfeed::sweep::preset(a.preset);
  } else {
    spec.schemes = {bcfeed::gbc::Scheme::TDMA, bcfeed::gbc::Scheme::JSC};
  }
  if (a.users) spec.users = *a.users;
  if (a.tx) spec.tx_antennas = *a.tx;
  if (a.rx) spec.rx_antennas = *a.rx;
  if (a.snr_db) {
    spec.snr_db_start = *a.snr_db;
    spec.snr_db_stop = *a.snr_db;
    spec.snr_db_step = 1.0;
  }
  if (a.snr_start) spec.snr_db_start = *a.snr_start;
  if (a.snr_stop) spec.snr_db_stop = *a.snr_stop;
  if (a.snr_step) spec.snr_db_step = *a.snr_step;
  if (a.snr_ref) spec.snr_ref = bcfeed::sweep::snr_ref_from_string(*a.snr_ref);
  if (a.samples) spec.plan.samples = *a.samples;
  if (a.seed) spec.plan.seed = *a.seed;
  if (a.beta_min) spec.grid.log10_min = std::log10(*a.beta_min);
  if (a.beta_max) spec.grid.log10_max = std::log10(*a.beta_max);
  if (a.beta_points) spec.grid.points_per_dim = *a.beta_points;
  if (a.threads) spec.threads = *a.threads;
  spec.dump_grid = a.dump_grid;
  if (a.schemes) {
    spec.schemes.clear();
    std::stringstream ss(*a.schemes);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) spec.schemes.push_back(bcfeed::gbc::scheme_from_string(tok));
  }
  if (const char* env_seed = std::getenv("BCFEED_SEED")) {
    try {
      spec.plan.seed = std::stoull(env_seed);
    } catch (const std::exception&) {
      throw std::invalid_argument("BCFEED_SEED must be an unsigned integer");
    }
  }
  if (a.format != "csv" && a.format != "json")
    throw std::invalid_argument("--format must be csv or json");
  if (a.dump_grid && a.format != "json")
    throw std::invalid_argument("--dump-grid requires --format json");

  const auto out = bcfeed::sweep::run_gbc_sweep(spec);
  if (a.format == "csv")
    std::cout << bcfeed::sweep::to_csv(out);
  else
    std::cout << bcfeed::sweep::to_json(out).dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"achievable-rate calculator for broadcast channels with delayed state feedback"};
  app.require_subcommand(1);

  SweepCliArgs sa;
  auto* sweep_cmd = app.add_subcommand("gbc-sweep", "fading Gaussian BC rate sweep");
  sweep_cmd->add_option("--preset", sa.preset, "fig2a|fig2b|fig3a|fig3b curve preset");
  sweep_cmd->add_option("--users", sa.users, "number of users K");
  sweep_cmd->add_option("--tx", sa.tx, "transmit antennas");
  sweep_cmd->add_option("--rx", sa.rx, "receive antennas per user");
  auto* snr_db_opt = sweep_cmd->add_option("--snr-db", sa.snr_db, "single SNR point in dB");
  snr_db_opt->excludes(sweep_cmd->add_option("--snr-start", sa.snr_start, "sweep start in dB"));
  snr_db_opt->excludes(sweep_cmd->add_option("--snr-stop", sa.snr_stop, "sweep stop in dB"));
  snr_db_opt->excludes(sweep_cmd->add_option("--snr-step", sa.snr_step, "sweep step in dB"));
  sweep_cmd->add_option("--snr-ref", sa.snr_ref,
                        "axis meaning: snr = P/(n_t sigma^2) or total = P/sigma^2");
  sweep_cmd->add_option("--samples", sa.samples, "Monte Carlo samples per point");
  sweep_cmd->add_option("--seed", sa.seed, "RNG seed (BCFEED_SEED env overrides)");
  sweep_cmd->add_option("--schemes", sa.schemes,
                        "comma list of TDMA,JSC,JSC_FIXED_BETA,MAT2,QMAT,UPPER");
  sweep_cmd->add_option("--beta-min", sa.beta_min, "beta grid lower bound (linear)");
  sweep_cmd->add_option("--beta-max", sa.beta_max, "beta grid upper bound (linear)");
  sweep_cmd->add_option("--beta-points", sa.beta_points, "beta grid points per dimension");
  sweep_cmd->add_option("--format", sa.format, "csv or json");
  sweep_cmd->add_flag("--dump-grid", sa.dump_grid, "include per-point optimizer rate tables (json)");
  sweep_cmd->add_option("--threads", sa.threads, "worker cap; never changes results");

  std::string ebc_query;
  std::string ebc_input = "-";
  auto* ebc_cmd = app.add_subcommand("ebc", "erasure BC queries");
  ebc_cmd->add_option("query", ebc_query, "capacity-sym|region-check|feasible|mu-solve")
      ->required();
  ebc_cmd->add_option("--input", ebc_input, "JSON input file ('-' for stdin)");

  int dof_users = 0;
  std::string dof_format = "text";
  auto* dof_cmd = app.add_subcommand("dof", "symmetric degrees of freedom");
  dof_cmd->add_option("--users", dof_users, "number of users K")->required();
  dof_cmd->add_option("--format", dof_format, "text or json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (sweep_cmd->parsed()) return run_sweep(sa);
    if (ebc_cmd->parsed()) return run_ebc(ebc_query, ebc_input);
    if (dof_cmd->parsed()) {
      const auto d = bcfeed::gbc::dof_sym(dof_users);
      if (dof_format == "json") {
        std::cout << nlohmann::json{{"users", dof_users},
                                    {"num", d.num},
                                    {"den", d.den},
                                    {"value", d.value()}}
                         .dump(2)
                  << "\n";
      } else {
        std::cout << d.str() << " = " << bcfeed::sweep::format_double(d.value()) << "\n";
      }
      return kExitOk;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const bcfeed::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

#include "bcfeed/sweep.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "bcfeed/errors.hpp"

namespace bcfeed::sweep {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

constexpr const char* kVersion = "v1";
constexpr const char* kCsvHeader = "snr_db,scheme,rate_bits,stderr,samples,seed,beta_json,alpha_json";

std::string join_schemes(const std::vector<gbc::Scheme>& schemes) {
  std::string out;
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    if (i) out += ',';
    out += gbc::to_string(schemes[i]);
  }
  return out;
}

std::vector<gbc::Scheme> parse_schemes(const std::string& csv) {
  std::vector<gbc::Scheme> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(gbc::scheme_from_string(tok));
  }
  require(!out.empty(), "schemes list must be nonempty");
  return out;
}

std::string doubles_json(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  out += ']';
  return out;
}

std::vector<double> parse_doubles_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  require(j.is_array(), "expected a JSON array of numbers");
  return j.get<std::vector<double>>();
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(begin, end, v);
  require(res.ec == std::errc() && res.ptr == end, "invalid number in " + what + ": '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string to_string(SnrRef r) { return r == SnrRef::Snr ? "snr" : "total"; }

SnrRef snr_ref_from_string(const std::string& s) {
  if (s == "snr") return SnrRef::Snr;
  if (s == "total") return SnrRef::TotalPower;
  throw std::invalid_argument("unknown snr reference: " + s + " (expected snr|total)");
}

double snr_from_axis(double snr_db, SnrRef ref, int tx_antennas) {
  const double lin = std::pow(10.0, snr_db / 10.0);
  return ref == SnrRef::Snr ? lin : lin / tx_antennas;
}

void SweepSpec::validate() const {
  require(snr_db_start <= snr_db_stop, "snr sweep: start must be <= stop");
  require(snr_db_step > 0.0, "snr sweep: step must be positive");
  require(!schemes.empty(), "schemes list must be nonempty");
  plan.validate();
  grid.validate();
  GbcConfig::from_snr_db(users, tx_antennas, rx_antennas, snr_db_start);
  for (gbc::Scheme s : schemes) {
    if (s == gbc::Scheme::MAT2)
      require(users == 2 && tx_antennas == 2 && rx_antennas == 1,
              "MAT2 requires users=2, tx=2, rx=1");
  }
}

std::vector<double> SweepSpec::snr_axis() const {
  std::vector<double> axis;
  for (double db = snr_db_start; db <= snr_db_stop + 1e-9; db += snr_db_step) axis.push_back(db);
  return axis;
}

SweepOutput run_gbc_sweep(const SweepSpec& spec) {
  spec.validate();
  SweepOutput out;
  out.spec = spec;
  out.version = kVersion;

  for (double axis_db : spec.snr_axis()) {
    const double lin = snr_from_axis(axis_db, spec.snr_ref, spec.tx_antennas);
    const GbcConfig cfg = GbcConfig::from_snr(spec.users, spec.tx_antennas, spec.rx_antennas, lin);
    // one batch per SNR point, shared by every scheme (common random numbers)
    const SampleBatch batch = SampleBatch::automatic(cfg, spec.plan, 0);
    for (gbc::Scheme s : spec.schemes) {
      gbc::RatePoint pt;
      nlohmann::json extra;
      pt.snr_db = axis_db;
      pt.scheme = s;
      switch (s) {
        case gbc::Scheme::TDMA:
          pt.rate = gbc::tdma_rate(cfg, batch, spec.threads);
          break;
        case gbc::Scheme::MAT2:
          pt.rate = gbc::mat2_rate(cfg, batch, spec.threads);
          break;
        case gbc::Scheme::QMAT:
          pt.rate = gbc::qmat_rate(cfg, batch, spec.threads);
          break;
        case gbc::Scheme::UPPER:
          pt.rate = gbc::upper_bound(cfg, batch, spec.threads);
          break;
        case gbc::Scheme::JSC_FIXED_BETA: {
          const auto betas = gbc::qmat_equivalent_betas(spec.users);
          const auto r = gbc::jsc_sym_rate(cfg, betas, batch, spec.threads);
          pt.rate = r.rate;
          pt.betas = betas;
          pt.alphas = r.alphas;
          break;
        }
        case gbc::Scheme::JSC: {
          const auto r =
              opt::optimize_beta(cfg, spec.grid, spec.plan, spec.threads, spec.dump_grid, &batch);
          pt.rate = r.best_rate;
          pt.betas = r.best_betas;
          pt.alphas = r.alphas;
          if (spec.dump_grid) extra = opt::to_json(r);
          break;
        }
      }
      out.rows.push_back(std::move(pt));
      if (spec.dump_grid) out.row_extras.push_back(std::move(extra));
    }
  }
  return out;
}

SweepSpec preset(const std::string& name) {
  SweepSpec s;
  s.snr_db_start = -5.0;
  s.snr_db_stop = 34.0;
  s.snr_db_step = 3.0;
  if (name == "fig2a" || name == "fig2b") {
    s.users = 2;
    s.tx_antennas = 2;
    s.rx_antennas = 1;
    s.snr_ref = SnrRef::TotalPower;
    s.schemes = name == "fig2a"
                    ? std::vector<gbc::Scheme>{gbc::Scheme::TDMA, gbc::Scheme::JSC,
                                               gbc::Scheme::MAT2, gbc::Scheme::UPPER}
                    : std::vector<gbc::Scheme>{gbc::Scheme::TDMA, gbc::Scheme::JSC,
                                               gbc::Scheme::JSC_FIXED_BETA, gbc::Scheme::QMAT,
                                               gbc::Scheme::UPPER};
  } else if (name == "fig3a" || name == "fig3b") {
    s.users = 3;
    s.tx_antennas = 3;
    s.rx_antennas = 1;
    s.snr_ref = SnrRef::Snr;
    s.schemes = name == "fig3a"
                    ? std::vector<gbc::Scheme>{gbc::Scheme::TDMA, gbc::Scheme::JSC,
                                               gbc::Scheme::UPPER}
                    : std::vector<gbc::Scheme>{gbc::Scheme::TDMA, gbc::Scheme::JSC,
                                               gbc::Scheme::JSC_FIXED_BETA, gbc::Scheme::QMAT,
                                               gbc::Scheme::UPPER};
  } else {
    throw std::invalid_argument("unknown preset: " + name +
                                " (expected fig2a|fig2b|fig3a|fig3b)");
  }
  return s;
}

std::string to_csv(const SweepOutput& out) {
  if (!out.row_extras.empty())
    throw std::invalid_argument("--dump-grid output requires the json format");
  std::ostringstream os;
  const SweepSpec& s = out.spec;
  os << "# bcfeed gbc-sweep " << out.version << "\n";
  os << "# users=" << s.users << " tx=" << s.tx_antennas << " rx=" << s.rx_antennas << "\n";
  os << "# snr_ref=" << to_string(s.snr_ref) << " snr_start=" << format_double(s.snr_db_start)
     << " snr_stop=" << format_double(s.snr_db_stop) << " snr_step=" << format_double(s.snr_db_step)
     << "\n";
  os << "# samples=" << s.plan.samples << " seed=" << s.plan.seed << " chunk=" << s.plan.chunk
     << "\n";
  os << "# beta_log10_min=" << format_double(s.grid.log10_min)
     << " beta_log10_max=" << format_double(s.grid.log10_max)
     << " beta_points=" << s.grid.points_per_dim << "\n";
  os << "# schemes=" << join_schemes(s.schemes) << "\n";
  os << kCsvHeader << "\n";
  for (const auto& r : out.rows) {
    os << format_double(r.snr_db) << ',' << gbc::to_string(r.scheme) << ','
       << format_double(r.rate.mean) << ',' << format_double(r.rate.std_error) << ','
       << r.rate.samples << ',' << r.rate.seed << ',';
    if (r.betas) os << '"' << doubles_json(r.betas->betas) << '"';
    os << ',';
    if (r.alphas) os << '"' << doubles_json(r.alphas->alphas) << '"';
    os << "\n";
  }
  return os.str();
}

namespace {

// Splits one CSV line honoring double quotes (fields never contain newlines).
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

// "key=value" tokens from a metadata line (after "# ").
std::string meta_value(const std::string& line, const std::string& key) {
  const std::string needle = key + "=";
  const auto pos = line.find(needle);
  require(pos != std::string::npos, "missing metadata key: " + key);
  const auto start = pos + needle.size();
  auto end = line.find(' ', start);
  if (end == std::string::npos) end = line.size();
  return line.substr(start, end - start);
}

}  // namespace

SweepOutput from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::vector<std::string> meta;
  SweepOutput out;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      meta.push_back(line);
      continue;
    }
    if (!header_seen) {
      require(line == kCsvHeader, "unexpected CSV header: " + line);
      header_seen = true;
      continue;
    }
    const auto f = split_csv_line(line);
    require(f.size() == 8, "expected 8 CSV fields, got " + std::to_string(f.size()));
    gbc::RatePoint pt;
    pt.snr_db = parse_double(f[0], "snr_db");
    pt.scheme = gbc::scheme_from_string(f[1]);
    pt.rate.mean = parse_double(f[2], "rate_bits");
    pt.rate.std_error = parse_double(f[3], "stderr");
    pt.rate.samples = std::stoll(f[4]);
    pt.rate.seed = std::stoull(f[5]);
    if (!f[6].empty()) pt.betas = gbc::BetaVector{parse_doubles_json(f[6])};
    if (!f[7].empty()) pt.alphas = gbc::AlphaVector{parse_doubles_json(f[7])};
    out.rows.push_back(std::move(pt));
  }
  require(meta.size() >= 6, "missing CSV metadata header");
  require(meta[0].rfind("# bcfeed gbc-sweep ", 0) == 0, "not a bcfeed sweep file");
  out.version = meta[0].substr(std::string("# bcfeed gbc-sweep ").size());
  SweepSpec& s = out.spec;
  s.users = std::stoi(meta_value(meta[1], "users"));
  s.tx_antennas = std::stoi(meta_value(meta[1], "tx"));
  s.rx_antennas = std::stoi(meta_value(meta[1], "rx"));
  s.snr_ref = snr_ref_from_string(meta_value(meta[2], "snr_ref"));
  s.snr_db_start = parse_double(meta_value(meta[2], "snr_start"), "snr_start");
  s.snr_db_stop = parse_double(meta_value(meta[2], "snr_stop"), "snr_stop");
  s.snr_db_step = parse_double(meta_value(meta[2], "snr_step"), "snr_step");
  s.plan.samples = std::stoll(meta_value(meta[3], "samples"));
  s.plan.seed = std::stoull(meta_value(meta[3], "seed"));
  s.plan.chunk = std::stoll(meta_value(meta[3], "chunk"));
  s.grid.log10_min = parse_double(meta_value(meta[4], "beta_log10_min"), "beta_log10_min");
  s.grid.log10_max = parse_double(meta_value(meta[4], "beta_log10_max"), "beta_log10_max");
  s.grid.points_per_dim = std::stoi(meta_value(meta[4], "beta_points"));
  s.schemes = parse_schemes(meta_value(meta[5], "schemes"));
  return out;
}

nlohmann::json to_json(const SweepOutput& out) {
  const SweepSpec& s = out.spec;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    const auto& r = out.rows[i];
    nlohmann::json row{{"snr_db", r.snr_db},
                       {"scheme", gbc::to_string(r.scheme)},
                       {"rate_bits", r.rate.mean},
                       {"stderr", r.rate.std_error},
                       {"samples", r.rate.samples},
                       {"seed", r.rate.seed}};
    row["betas"] = r.betas ? nlohmann::json(r.betas->betas) : nlohmann::json();
    row["alphas"] = r.alphas ? nlohmann::json(r.alphas->alphas) : nlohmann::json();
    if (i < out.row_extras.size() && !out.row_extras[i].is_null()) row["opt"] = out.row_extras[i];
    rows.push_back(std::move(row));
  }
  return nlohmann::json{
      {"format", "bcfeed-gbc-sweep"},
      {"version", out.version},
      {"spec",
       {{"users", s.users},
        {"tx", s.tx_antennas},
        {"rx", s.rx_antennas},
        {"snr_ref", to_string(s.snr_ref)},
        {"snr_start", s.snr_db_start},
        {"snr_stop", s.snr_db_stop},
        {"snr_step", s.snr_db_step},
        {"samples", s.plan.samples},
        {"seed", s.plan.seed},
        {"chunk", s.plan.chunk},
        {"beta_log10_min", s.grid.log10_min},
        {"beta_log10_max", s.grid.log10_max},
        {"beta_points", s.grid.points_per_dim},
        {"schemes", join_schemes(s.schemes)}}},
      {"rows", rows}};
}

SweepOutput from_json(const nlohmann::json& j) {
  require(j.value("format", "") == "bcfeed-gbc-sweep", "/format: not a bcfeed sweep document");
  SweepOutput out;
  out.version = j.value("version", "");
  const auto& sp = j.at("spec");
  SweepSpec& s = out.spec;
  s.users = sp.at("users").get<int>();
  s.tx_antennas = sp.at("tx").get<int>();
  s.rx_antennas = sp.at("rx").get<int>();
  s.snr_ref = snr_ref_from_string(sp.at("snr_ref").get<std::string>());
  s.snr_db_start = sp.at("snr_start").get<double>();
  s.snr_db_stop = sp.at("snr_stop").get<double>();
  s.snr_db_step = sp.at("snr_step").get<double>();
  s.plan.samples = sp.at("samples").get<std::int64_t>();
  s.plan.seed = sp.at("seed").get<std::uint64_t>();
  s.plan.chunk = sp.at("chunk").get<std::int64_t>();
  s.grid.log10_min = sp.at("beta_log10_min").get<double>();
  s.grid.log10_max = sp.at("beta_log10_max").get<double>();
  s.grid.points_per_dim = sp.at("beta_points").get<int>();
  s.schemes = parse_schemes(sp.at("schemes").get<std::string>());
  bool any_extra = false;
  for (const auto& row : j.at("rows")) {
    gbc::RatePoint pt;
    pt.snr_db = row.at("snr_db").get<double>();
    pt.scheme = gbc::scheme_from_string(row.at("scheme").get<std::string>());
    pt.rate.mean = row.at("rate_bits").get<double>();
    pt.rate.std_error = row.at("stderr").get<double>();
    pt.rate.samples = row.at("samples").get<std::int64_t>();
    pt.rate.seed = row.at("seed").get<std::uint64_t>();
    if (!row.at("betas").is_null()) pt.betas = gbc::BetaVector{row.at("betas").get<std::vector<double>>()};
    if (!row.at("alphas").is_null())
      pt.alphas = gbc::AlphaVector{row.at("alphas").get<std::vector<double>>()};
    out.rows.push_back(std::move(pt));
    out.row_extras.push_back(row.contains("opt") ? row["opt"] : nlohmann::json());
    if (row.contains("opt")) any_extra = true;
  }
  if (!any_extra) out.row_extras.clear();
  out.spec.dump_grid = any_extra;
  return out;
}

}  // namespace bcfeed::sweep

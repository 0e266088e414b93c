#pragma once

#include <string>
#include <vector>

#include "bcfeed/gbc.hpp"
#include "bcfeed/optimizer.hpp"

namespace bcfeed::sweep {

// Meaning of the snr_db axis: Snr is 10 log10(P/(n_t sigma^2)) (the native
// definition used inside every rate formula); TotalPower is 10 log10(P/sigma^2),
// i.e. the per-antenna snr is 10^(db/10)/n_t.
enum class SnrRef { Snr, TotalPower };

std::string to_string(SnrRef r);
SnrRef snr_ref_from_string(const std::string& s);

double snr_from_axis(double snr_db, SnrRef ref, int tx_antennas);

struct SweepSpec {
  double snr_db_start = -5.0;
  double snr_db_stop = 34.0;
  double snr_db_step = 3.0;
  SnrRef snr_ref = SnrRef::Snr;
  std::vector<gbc::Scheme> schemes;
  int users = 2;
  int tx_antennas = 2;
  int rx_antennas = 1;
  McPlan plan;
  opt::BetaGrid grid;
  int threads = 0;
  bool dump_grid = false;  // attach per-point optimizer tables to JSC rows (JSON only)

  void validate() const;
  std::vector<double> snr_axis() const;
};

struct SweepOutput {
  SweepSpec spec;       // reproduction metadata
  std::string version;  // format/tool version tag
  std::vector<gbc::RatePoint> rows;
  // aligned with rows when dump_grid is set: optimizer dump for JSC rows,
  // null otherwise
  std::vector<nlohmann::json> row_extras;
};

// Evaluates every (snr, scheme) pair. All schemes at one SNR point share one
// cached sample batch (common random numbers); the JSC optimizer reuses it as
// its search batch.
SweepOutput run_gbc_sweep(const SweepSpec& spec);

// fig2a/fig2b/fig3a/fig3b presets pin the published curve axes (two-user
// figures use the TotalPower axis; three-user figures use the native snr axis)
// and scheme sets.
SweepSpec preset(const std::string& name);

// CSV with '#' metadata header lines, then exactly:
// snr_db,scheme,rate_bits,stderr,samples,seed,beta_json,alpha_json
std::string to_csv(const SweepOutput& out);
SweepOutput from_csv(const std::string& text);

nlohmann::json to_json(const SweepOutput& out);
SweepOutput from_json(const nlohmann::json& j);

// Shortest exact decimal representation (round-trips bit-exactly).
std::string format_double(double v);

}  // namespace bcfeed::sweep

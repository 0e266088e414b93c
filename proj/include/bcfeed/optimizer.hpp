#pragma once

#include <cstdint>
#include <vector>

#include "bcfeed/gbc.hpp"

namespace bcfeed::opt {

// Logarithmic search grid for each beta dimension.
struct BetaGrid {
  double log10_min = -1.5;
  double log10_max = 1.5;
  int points_per_dim = 60;

  void validate() const;
  std::vector<double> values() const;
};

struct OptResult {
  gbc::BetaVector best_betas;
  McEstimate best_rate;  // re-estimated on an independent validation batch
  gbc::AlphaVector alphas;
  std::int64_t evaluations = 0;
  BetaGrid grid;
  // Per grid point, the search-batch rate (lexicographic beta-index order).
  // Filled only when requested.
  std::vector<double> grid_rates;
  double search_rate = 0.0;  // search-batch rate at the argmax
};

// Exhaustive grid search maximizing the JSC symmetric rate over
// (beta_1..beta_{K-1}) on one shared sample batch. beta_t enters only
// a_t(beta_t) and the b terms of phase t+1, so per-dimension 1-D tables of a
// and b means are precomputed from cached per-sample eigenvalues and each grid
// point is a table compose. The argmax is re-estimated on an independent
// validation batch (stream + 1). K = 1 returns the single-user rate directly.
OptResult optimize_beta(const GbcConfig& cfg, const BetaGrid& grid, const McPlan& plan,
                        int threads = 0, bool dump_grid = false,
                        const SampleBatch* search_batch = nullptr);

// Single evaluation at a fixed beta vector, tagged JSC_FIXED_BETA.
gbc::RatePoint rate_at_fixed_beta(const GbcConfig& cfg, const gbc::BetaVector& betas,
                                  const McPlan& plan, int threads = 0);

nlohmann::json to_json(const OptResult& r);

}  // namespace bcfeed::opt

#include <cmath>

#include "bcfeed/optimizer.hpp"
#include "doctest.h"

using namespace bcfeed;
using namespace bcfeed::gbc;
using namespace bcfeed::opt;

namespace {

McPlan plan_of(std::int64_t samples, std::uint64_t seed) {
  McPlan p;
  p.samples = samples;
  p.seed = seed;
  return p;
}

double fig2_snr(double axis_db) { return std::pow(10.0, axis_db / 10.0) / 2.0; }
double fig3_snr(double axis_db) { return std::pow(10.0, axis_db / 10.0); }

}  // namespace

TEST_CASE("grid validation and values") {
  BetaGrid g;
  g.points_per_dim = 1;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g.points_per_dim = 3;
  g.log10_min = 1.0;
  g.log10_max = -1.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);

  BetaGrid ok;
  ok.log10_min = -1.0;
  ok.log10_max = 1.0;
  ok.points_per_dim = 3;
  const auto v = ok.values();
  REQUIRE(v.size() == 3);
  CHECK(v[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(v[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v[2] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("optimized two-user rate beats the golden 10 dB floor") {
  const auto cfg = GbcConfig::from_snr(2, 2, 1, fig2_snr(10.0));
  BetaGrid grid;  // default [-1.5, 1.5] x 60
  const auto r = optimize_beta(cfg, grid, plan_of(100000, 21));
  CHECK(r.best_rate.mean >= 1.70);
  CHECK(r.evaluations == 60);
  r.alphas.validate();
}

TEST_CASE("argmax dominates every grid member, including beta = 5") {
  const auto cfg = GbcConfig::from_snr(2, 2, 1, fig2_snr(10.0));
  BetaGrid grid;
  grid.log10_min = std::log10(5.0) - 1.0;
  grid.log10_max = std::log10(5.0) + 1.0;
  grid.points_per_dim = 21;  // index 10 is exactly beta = 5
  const auto plan = plan_of(20000, 22);
  const auto batch = SampleBatch::cached(cfg, plan);
  const auto r = optimize_beta(cfg, grid, plan, 0, /*dump_grid=*/true, &batch);
  const auto at5 = jsc_sym_rate(cfg, BetaVector{{grid.values()[10]}}, batch);
  CHECK(r.search_rate >= at5.rate.mean - 1e-9);
  REQUIRE(r.grid_rates.size() == 21);
  for (double v : r.grid_rates) CHECK(r.search_rate >= v - 1e-12);
  // table-composed rate equals the direct evaluation on the shared batch
  CHECK(r.grid_rates[10] == doctest::Approx(at5.rate.mean).epsilon(1e-9));
}

TEST_CASE("three-user 34 dB optimum clears the golden floor on the default grid") {
  const auto cfg = GbcConfig::from_snr(3, 3, 1, fig3_snr(34.0));
  BetaGrid grid;
  const auto r = optimize_beta(cfg, grid, plan_of(100000, 23));
  CHECK(r.best_rate.mean >= 6.13);
  CHECK(r.evaluations == 60 * 60);
}

TEST_CASE("selection-bias guard: validation rate stays near the search rate") {
  const auto cfg = GbcConfig::from_snr(2, 2, 1, fig2_snr(16.0));
  BetaGrid grid;
  const auto r = optimize_beta(cfg, grid, plan_of(50000, 24));
  const double joint = std::max(r.best_rate.std_error, 1e-6);
  CHECK(std::abs(r.best_rate.mean - r.search_rate) <= 3.0 * 2.0 * joint);
}

TEST_CASE("optimized rate dominates the fixed quantization ladder") {
  for (double axis : {4.0, 22.0}) {
    const auto cfg = GbcConfig::from_snr(2, 2, 1, fig2_snr(axis));
    const auto plan = plan_of(30000, 25);
    const auto opt = optimize_beta(cfg, BetaGrid{}, plan);
    const auto fixed = rate_at_fixed_beta(cfg, qmat_equivalent_betas(2), plan);
    const double joint = std::hypot(opt.best_rate.std_error, fixed.rate.std_error);
    CHECK(opt.best_rate.mean >= fixed.rate.mean - 2.0 * joint);
  }
}

TEST_CASE("grid refinement never loses rate") {
  const auto cfg = GbcConfig::from_snr(2, 2, 1, fig2_snr(10.0));
  const auto plan = plan_of(30000, 26);
  BetaGrid coarse;
  coarse.points_per_dim = 30;
  BetaGrid fine;
  fine.points_per_dim = 60;
  const auto rc = optimize_beta(cfg, coarse, plan);
  const auto rf = optimize_beta(cfg, fine, plan);
  const double joint = std::hypot(rc.best_rate.std_error, rf.best_rate.std_error);
  CHECK(rf.best_rate.mean >= rc.best_rate.mean - 2.0 * joint);
}

TEST_CASE("rate_at_fixed_beta: golden K=3 point and determinism") {
  const auto cfg = GbcConfig::from_snr(3, 3, 1, fig3_snr(10.0));
  const auto pt = rate_at_fixed_beta(cfg, BetaVector{{5.0, 11.0}}, plan_of(100000, 27));
  CHECK(pt.rate.mean == doctest::Approx(1.92585).epsilon(0.05 / 1.92585));
  CHECK(pt.scheme == Scheme::JSC_FIXED_BETA);

  const auto again = rate_at_fixed_beta(cfg, BetaVector{{5.0, 11.0}}, plan_of(100000, 27));
  CHECK(pt.rate.mean == again.rate.mean);  // bit identical
  CHECK(pt.rate.std_error == again.rate.std_error);
}

TEST_CASE("K=1 returns the single-user rate") {
  const auto cfg = GbcConfig::from_snr(1, 1, 1, 10.0);
  const auto plan = plan_of(20000, 28);
  const auto r = optimize_beta(cfg, BetaGrid{}, plan);
  CHECK(r.evaluations == 1);
  CHECK(r.best_betas.betas.empty());
  const auto batch = SampleBatch::cached(cfg, plan);
  const auto direct = estimate(batch, [&cfg](const ChannelSample& s, std::int64_t) {
    return std::log2(1.0 + cfg.snr * std::norm(s.stacked(0, 0)));
  });
  CHECK(r.best_rate.mean == doctest::Approx(direct.mean).epsilon(1e-9));
}

TEST_CASE("table compose matches direct evaluation for a deep K=4 chain") {
  const auto cfg = GbcConfig::from_snr(4, 4, 1, 20.0);
  BetaGrid grid;
  grid.log10_min = -0.5;
  grid.log10_max = 0.8;
  grid.points_per_dim = 2;
  const auto plan = plan_of(500, 41);
  const auto batch = SampleBatch::cached(cfg, plan);
  const auto r = optimize_beta(cfg, grid, plan, 0, /*dump_grid=*/true, &batch);
  REQUIRE(r.grid_rates.size() == 8);
  const auto values = grid.values();
  int idx = 0;
  for (double b1 : values)
    for (double b2 : values)
      for (double b3 : values) {
        const auto direct = jsc_sym_rate(cfg, BetaVector{{b1, b2, b3}}, batch);
        CHECK(r.grid_rates[static_cast<std::size_t>(idx)] ==
              doctest::Approx(direct.rate.mean).epsilon(1e-9));
        ++idx;
      }
}

TEST_CASE("cached-eigenvalue b path equals direct recomputation") {
  // one grid point vs a fresh jsc evaluation at the same beta
  const auto cfg = GbcConfig::from_snr(3, 3, 1, fig3_snr(13.0));
  BetaGrid grid;
  grid.log10_min = 0.0;
  grid.log10_max = 1.0;
  grid.points_per_dim = 2;
  const auto plan = plan_of(5000, 29);
  const auto batch = SampleBatch::cached(cfg, plan);
  const auto r = optimize_beta(cfg, grid, plan, 0, /*dump_grid=*/true, &batch);
  REQUIRE(r.grid_rates.size() == 4);
  const auto values = grid.values();
  int idx = 0;
  for (double b1 : values)
    for (double b2 : values) {
      const auto direct = jsc_sym_rate(cfg, BetaVector{{b1, b2}}, batch);
      CHECK(r.grid_rates[static_cast<std::size_t>(idx)] ==
            doctest::Approx(direct.rate.mean).epsilon(1e-9));
      ++idx;
    }
}

#include <cmath>

#include "bcfeed/sweep.hpp"
#include "doctest.h"

using namespace bcfeed;
using namespace bcfeed::sweep;

namespace {

SweepSpec small_spec() {
  SweepSpec s;
  s.snr_db_start = 0.0;
  s.snr_db_stop = 6.0;
  s.snr_db_step = 3.0;
  s.snr_ref = SnrRef::TotalPower;
  s.users = 2;
  s.tx_antennas = 2;
  s.rx_antennas = 1;
  s.schemes = {gbc::Scheme::TDMA, gbc::Scheme::JSC_FIXED_BETA, gbc::Scheme::JSC};
  s.plan.samples = 2000;
  s.plan.seed = 77;
  s.grid.points_per_dim = 8;
  return s;
}

}  // namespace

TEST_CASE("presets pin the published axes and scheme sets") {
  const auto a = preset("fig2a");
  CHECK(a.users == 2);
  CHECK(a.snr_ref == SnrRef::TotalPower);
  CHECK(a.snr_axis().size() == 14);
  CHECK(a.schemes.size() == 4);

  const auto b = preset("fig3b");
  CHECK(b.users == 3);
  CHECK(b.tx_antennas == 3);
  CHECK(b.snr_ref == SnrRef::Snr);
  CHECK(b.schemes.size() == 5);

  CHECK_THROWS_AS(preset("fig9z"), std::invalid_argument);
}

TEST_CASE("fig2a-shaped sweep produces 14 x 4 rows") {
  auto s = preset("fig2a");
  s.plan.samples = 500;  // shape test only
  s.grid.points_per_dim = 4;
  const auto out = run_gbc_sweep(s);
  CHECK(out.rows.size() == 14 * 4);
  // monotone snr ordering
  for (std::size_t i = 1; i < out.rows.size(); ++i)
    CHECK(out.rows[i].snr_db >= out.rows[i - 1].snr_db);
}

TEST_CASE("snr axis mapping") {
  CHECK(snr_from_axis(10.0, SnrRef::Snr, 2) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(snr_from_axis(10.0, SnrRef::TotalPower, 2) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(snr_from_axis(10.0, SnrRef::TotalPower, 3) == doctest::Approx(10.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("CSV round trip is byte identical") {
  const auto out = run_gbc_sweep(small_spec());
  const std::string csv = to_csv(out);
  const auto parsed = from_csv(csv);
  CHECK(to_csv(parsed) == csv);
  CHECK(parsed.rows.size() == out.rows.size());
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    CHECK(parsed.rows[i].rate.mean == out.rows[i].rate.mean);
    CHECK(parsed.rows[i].scheme == out.rows[i].scheme);
  }
}

TEST_CASE("JSON round trip is byte identical") {
  const auto out = run_gbc_sweep(small_spec());
  const auto j = to_json(out);
  const auto parsed = from_json(j);
  CHECK(to_json(parsed).dump() == j.dump());
}

TEST_CASE("identical seeds give identical output; seeds matter") {
  const auto s = small_spec();
  const auto a = run_gbc_sweep(s);
  const auto b = run_gbc_sweep(s);
  CHECK(to_csv(a) == to_csv(b));

  auto s2 = s;
  s2.plan.seed = 78;
  const auto c = run_gbc_sweep(s2);
  CHECK(to_csv(a) != to_csv(c));
}

TEST_CASE("thread count never changes the rows") {
  auto s = small_spec();
  s.schemes = {gbc::Scheme::TDMA, gbc::Scheme::MAT2,           gbc::Scheme::QMAT,
               gbc::Scheme::UPPER, gbc::Scheme::JSC_FIXED_BETA, gbc::Scheme::JSC};
  s.threads = 1;
  const auto a = run_gbc_sweep(s);
  s.threads = 4;
  const auto b = run_gbc_sweep(s);
  // metadata does not record threads, so the whole document must match
  CHECK(to_csv(a) == to_csv(b));
}

TEST_CASE("spec validation") {
  auto s = small_spec();
  s.schemes.clear();
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);

  auto bad_axis = small_spec();
  bad_axis.snr_db_step = -1.0;
  CHECK_THROWS_AS(bad_axis.validate(), std::invalid_argument);

  auto mat_on_three = small_spec();
  mat_on_three.users = 3;
  mat_on_three.tx_antennas = 3;
  mat_on_three.schemes = {gbc::Scheme::MAT2};
  CHECK_THROWS_AS(mat_on_three.validate(), std::invalid_argument);
}

TEST_CASE("dump-grid attaches optimizer tables in JSON and rejects CSV") {
  auto s = small_spec();
  s.snr_db_stop = s.snr_db_start;  // one point
  s.dump_grid = true;
  const auto out = run_gbc_sweep(s);
  CHECK_THROWS_AS(to_csv(out), std::invalid_argument);
  const auto j = to_json(out);
  bool saw_opt = false;
  for (const auto& row : j.at("rows"))
    if (row.contains("opt")) {
      saw_opt = true;
      CHECK(row.at("opt").at("grid_rates").size() == 8);
    }
  CHECK(saw_opt);
  // and the dump survives the JSON round trip
  const auto parsed = from_json(j);
  CHECK(to_json(parsed).dump() == j.dump());
}

TEST_CASE("format_double round trips exactly") {
  for (double v : {1.0 / 3.0, 1.58176493812021, 0.0, -2.25, 1e-300}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}

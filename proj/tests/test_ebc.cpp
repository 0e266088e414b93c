#include <Eigen/Dense>
#include <cmath>

#include "bcfeed/ebc.hpp"
#include "doctest.h"

using namespace bcfeed;
using namespace bcfeed::ebc;

namespace {

SymmetricDeltas deltas_of(std::vector<double> d) {
  SymmetricDeltas s;
  s.deltas = std::move(d);
  s.validate();
  return s;
}

// random cardinality-symmetric channel, valid by construction
SymmetricDeltas random_symmetric_deltas(int users, std::uint64_t seed) {
  CounterRng rng(seed, 2, 0);
  std::vector<double> w(static_cast<std::size_t>(users) + 1);
  double norm = 0.0;
  for (int j = 0; j <= users; ++j) {
    w[static_cast<std::size_t>(j)] = 0.05 + rng.next_u01();
    norm += binomial(users, j) * w[static_cast<std::size_t>(j)];
  }
  ErasurePmf pmf;
  pmf.users = users;
  pmf.probs.assign(std::size_t{1} << users, 0.0);
  for (Mask u = 0; u <= full_mask(users); ++u)
    pmf.probs[u] = w[static_cast<std::size_t>(popcount(u))] / norm;
  SymmetricDeltas d;
  Mask f = 0;
  for (int j = 1; j <= users; ++j) {
    f |= user_bit(j);
    d.deltas.push_back(delta_of(pmf, f));
  }
  d.validate();
  return d;
}

// Independent oracle: assemble the mu equalities as a dense linear system
// (equal singletons, the k*-recursion for every |J| >= 2, total weight 1) and
// solve it with an LU factorization.
std::vector<double> mu_linear_system_oracle(const SymmetricDeltas& d) {
  const int k = d.users();
  const int n = (1 << k) - 1;  // unknowns: mu_J for nonempty J (index J-1)
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  int row = 0;
  for (int u = 2; u <= k; ++u) {  // equal singletons
    a(row, static_cast<int>(user_bit(1)) - 1) = 1.0;
    a(row, static_cast<int>(user_bit(u)) - 1) = -1.0;
    ++row;
  }
  for (Mask J = 1; J <= full_mask(k); ++J) {
    const int j = popcount(J);
    if (j < 2) continue;
    a(row, static_cast<int>(J) - 1) = 1.0;
    const int kstar = min_user(J);
    const double denom = 1.0 - d.of_card(k - j + 1);
    for (Mask I = (J - 1) & J; I != 0; I = (I - 1) & J) {
      if ((I & user_bit(kstar)) == 0) continue;
      a(row, static_cast<int>(I) - 1) -= phi_of_card(d, k - j + 1, j - popcount(I)) / denom;
    }
    ++row;
  }
  for (int c = 0; c < n; ++c) a(row, c) = 1.0;  // normalization
  rhs(row) = 1.0;
  const Eigen::VectorXd x = a.partialPivLu().solve(rhs);
  std::vector<double> mu(static_cast<std::size_t>(n) + 1, 0.0);
  for (int c = 0; c < n; ++c) mu[static_cast<std::size_t>(c) + 1] = x(c);
  return mu;
}

}  // namespace

TEST_CASE("mu solver: K=1 trivially puts all weight on the singleton") {
  const auto mu = mu_solver_symmetric(deltas_of({0.3}));
  CHECK(mu.mu[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("mu solver: hand-solved K=2 instance") {
  const auto mu = mu_solver_symmetric(deltas_of({0.5, 0.25}));
  CHECK(mu.mu[0b01] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(mu.mu[0b10] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(mu.mu[0b11] == doctest::Approx(0.2).epsilon(1e-12));
  // symmetric rate through the allocation
  CHECK(mu.mu[0b01] * (1.0 - 0.25) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("mu solver agrees with the linear-system oracle") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (int k : {2, 3, 4}) {
      const auto d = random_symmetric_deltas(k, 1000 + seed * 7 + static_cast<std::uint64_t>(k));
      const auto mu = mu_solver_symmetric(d);
      const auto oracle = mu_linear_system_oracle(d);
      for (Mask J = 1; J <= full_mask(k); ++J)
        CHECK(mu.mu[J] == doctest::Approx(oracle[J]).epsilon(1e-9));
    }
  }
}

TEST_CASE("K=3 canonical instance: rate is 21/94 of the alphabet") {
  // log|X| / (2 + 4/3 + 8/7) = 21/94
  const auto d = deltas_of({0.5, 0.25, 0.125});
  CHECK(sym_rate_ebc(d, 1.0) == doctest::Approx(21.0 / 94.0).epsilon(1e-12));
  const auto mu = mu_solver_symmetric(d);
  const double via_mu = mu.mu[0b001] * (1.0 - d.of_card(3));
  CHECK(via_mu == doctest::Approx(21.0 / 94.0).epsilon(1e-10));
  const auto oracle = mu_linear_system_oracle(d);
  CHECK(oracle[1] * (1.0 - d.of_card(3)) == doctest::Approx(21.0 / 94.0).epsilon(1e-10));
}

TEST_CASE("sym_rate_ebc limits") {
  CHECK(sym_rate_ebc(deltas_of({0.0, 0.0, 0.0}), 3.0) == doctest::Approx(1.0).epsilon(1e-12));
  const double eps = 1.0 - 1e-9;
  CHECK(sym_rate_ebc(deltas_of({eps, eps * eps}), 1.0) < 1e-8);
  CHECK(sym_rate_ebc(deltas_of({0.5, 0.25}), 1.0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK_THROWS_AS(sym_rate_ebc(deltas_of({0.5, 0.25}), 0.0), std::invalid_argument);
}

TEST_CASE("solver output equals the closed form on random instances") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (int k : {2, 3, 4, 5}) {
      const auto d = random_symmetric_deltas(k, seed * 13 + static_cast<std::uint64_t>(k));
      const auto mu = mu_solver_symmetric(d);
      const double via_mu = mu.mu[1] * (1.0 - d.of_card(k));
      CHECK(via_mu == doctest::Approx(sym_rate_ebc(d, 1.0)).epsilon(1e-9));
      CHECK(lemma2_check(mu, d) <= 1e-9);
    }
  }
}

TEST_CASE("lemma2_check diagnostics") {
  const auto d = deltas_of({0.5, 0.25});
  const auto mu = mu_solver_symmetric(d);
  CHECK(lemma2_check(mu, d) <= 1e-12);

  MuAllocation skew = mu;
  skew.mu[0b11] += 0.1;
  skew.mu[0b01] -= 0.1;
  CHECK(lemma2_check(skew, d) > 1e-3);  // a diagnostic value, not an error
}

TEST_CASE("region check: boundary, interior, exterior") {
  const auto d = deltas_of({0.5, 0.25});
  const auto boundary = sym_capacity_region_check({0.3, 0.3}, d, 1.0);
  CHECK(boundary.feasible);
  CHECK(boundary.max_weighted_sum == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(sym_capacity_region_check({0.0, 0.0}, d, 1.0).feasible);

  const auto outside = sym_capacity_region_check({0.5, 0.1}, d, 1.0);
  CHECK_FALSE(outside.feasible);
  CHECK(outside.max_weighted_sum == doctest::Approx(0.5 / 0.5 + 0.1 / 0.75).epsilon(1e-12));

  const auto spec_example = sym_capacity_region_check({0.31, 0.3}, d, 1.0);
  CHECK_FALSE(spec_example.feasible);
  REQUIRE(spec_example.binding_perm.size() == 2);
  CHECK(spec_example.binding_perm[0] == 1);  // the larger rate hits the larger weight
}

TEST_CASE("region check: enumeration and shortcut agree on random instances") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (int k : {2, 3, 4, 5, 6}) {
      const auto d = random_symmetric_deltas(k, 500 + seed * 11 + static_cast<std::uint64_t>(k));
      CounterRng rng(seed, 3, 0);
      std::vector<double> rates(static_cast<std::size_t>(k));
      for (auto& r : rates) r = 0.2 * rng.next_u01();
      // the full path cross-checks the sorted shortcut internally and throws
      // on disagreement
      const auto rep = sym_capacity_region_check(rates, d, 1.0);
      const auto rep2 = sym_capacity_region_check(rates, d, 1.0, /*shortcut_only=*/true);
      CHECK(rep.max_weighted_sum == doctest::Approx(rep2.max_weighted_sum).epsilon(1e-12));
    }
  }
}

TEST_CASE("region check guards") {
  const auto d9 = random_symmetric_deltas(9, 77);
  std::vector<double> r9(9, 0.01);
  CHECK_THROWS_AS(sym_capacity_region_check(r9, d9, 1.0), std::invalid_argument);
  CHECK(sym_capacity_region_check(r9, d9, 1.0, /*shortcut_only=*/true).feasible);
}

TEST_CASE("jsc_ebc_feasible: zero rates are always feasible") {
  const auto d = deltas_of({0.5, 0.25});
  const auto params = params_from_mu(mu_solver_symmetric(d), 1.0);
  const auto pmf = symmetric_pmf(d);
  CHECK(jsc_ebc_feasible({0.0, 0.0}, params, pmf).feasible);
}

TEST_CASE("jsc_ebc_feasible: symmetric capacity point is tight, above it fails") {
  const auto d = deltas_of({0.5, 0.25});
  const auto params = params_from_mu(mu_solver_symmetric(d), 1.0);
  const auto pmf = symmetric_pmf(d);
  const double r = 0.3;  // sym_rate_ebc at log|X| = 1
  const auto at = jsc_ebc_feasible({r, r}, params, pmf);
  CHECK(at.feasible);
  // every constraint is met with equality at the symmetric optimum
  for (const auto& c : at.constraints) CHECK(std::abs(c.slack) <= 1e-9);
  const auto above = jsc_ebc_feasible({r + 1e-3, r + 1e-3}, params, pmf);
  CHECK_FALSE(above.feasible);
}

TEST_CASE("jsc_ebc_feasible: K=3 capacity point via solver parameters") {
  const auto d = deltas_of({0.5, 0.25, 0.125});
  const auto params = params_from_mu(mu_solver_symmetric(d), 1.0);
  const auto pmf = symmetric_pmf(d);
  const double r = 21.0 / 94.0;
  const auto rep = jsc_ebc_feasible({r, r, r}, params, pmf);
  CHECK(rep.feasible);
  const auto above = jsc_ebc_feasible({r + 1e-3, r, r}, params, pmf);
  CHECK_FALSE(above.feasible);
}

TEST_CASE("jsc_ebc_feasible input validation") {
  const auto d = deltas_of({0.5, 0.25});
  const auto params = params_from_mu(mu_solver_symmetric(d), 1.0);
  const auto pmf = symmetric_pmf(d);
  CHECK_THROWS_AS(jsc_ebc_feasible({0.1}, params, pmf), std::invalid_argument);
  const auto pmf3 = symmetric_pmf(deltas_of({0.5, 0.25, 0.125}));
  CHECK_THROWS_AS(jsc_ebc_feasible({0.1, 0.1}, params, pmf3), std::invalid_argument);
}

TEST_CASE("asymmetric point with zero probabilities: 0 * anything = 0, no division") {
  // serve only user 1 in phase 1: q2({2}) = 0 is admissible and simply zeroes
  // user 2's rate cap and its side-information terms
  const auto d = deltas_of({0.5, 0.25});
  const auto pmf = symmetric_pmf(d);
  EbcSchemeParams p;
  p.alphabet_bits = 1.0;
  p.alphas.alphas = {2.0 / 3.0, 1.0 / 3.0};
  p.q2.assign(4, 0.0);
  p.q2[0b01] = 1.0;  // phase 1: always user 1
  p.q2[0b11] = 1.0;
  p.validate();
  // binding caps: R_1 <= (2/3)(1-delta_2) = 0.5, R_2 <= 0, and the pair
  // constraint for k=1 holds with equality: (1/3)(1-delta_1) = (2/3)phi_{1,1}
  const auto at = jsc_ebc_feasible({0.5, 0.0}, p, pmf);
  CHECK(at.feasible);
  for (const auto& c : at.constraints)
    if (c.j == 2 && c.k == 1) CHECK(std::abs(c.slack) <= 1e-12);
  CHECK_FALSE(jsc_ebc_feasible({0.5 + 1e-3, 0.0}, p, pmf).feasible);
  CHECK_FALSE(jsc_ebc_feasible({0.5, 1e-6}, p, pmf).feasible);
}

TEST_CASE("params JSON round trip and validation") {
  const auto d = deltas_of({0.5, 0.25, 0.125});
  const auto params = params_from_mu(mu_solver_symmetric(d), 2.0);
  const auto back = EbcSchemeParams::from_json(params.to_json());
  CHECK(back.alphabet_bits == params.alphabet_bits);
  for (std::size_t i = 0; i < params.q2.size(); ++i) CHECK(back.q2[i] == params.q2[i]);

  auto bad = params.to_json();
  bad["alphas"] = std::vector<double>{0.5, 0.5};  // wrong length
  CHECK_THROWS_AS(EbcSchemeParams::from_json(bad), std::invalid_argument);
}

TEST_CASE("mu solver rejects certain-erasure channels") {
  SymmetricDeltas d;
  d.deltas = {1.0, 0.9};  // user 1 never receives: no achievable symmetric rate
  CHECK_THROWS_AS(mu_solver_symmetric(d), std::invalid_argument);
}

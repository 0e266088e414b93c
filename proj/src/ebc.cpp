#include "bcfeed/ebc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bcfeed/errors.hpp"

namespace bcfeed::ebc {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::vector<std::vector<Mask>> masks_by_cardinality(int users) {
  std::vector<std::vector<Mask>> by(static_cast<std::size_t>(users) + 1);
  for (Mask m = 0; m <= full_mask(users); ++m)
    by[static_cast<std::size_t>(popcount(m))].push_back(m);
  return by;
}

}  // namespace

double MuAllocation::total() const {
  double s = 0.0;
  for (double v : mu) s += v;
  return s;
}

void MuAllocation::validate() const {
  require(users >= 1 && users <= kMaxUsers, "mu allocation users must be in [1, 20]");
  require(mu.size() == (std::size_t{1} << users), "mu table must have 2^K entries");
  require(mu[0] == 0.0, "mu of the empty set must be 0");
  for (double v : mu) require(v >= 0.0, "mu weights must be nonnegative");
  require(std::abs(total() - 1.0) <= 1e-10, "mu weights must sum to 1");
}

nlohmann::json MuAllocation::to_json() const {
  nlohmann::json m = nlohmann::json::object();
  for (Mask j = 1; j < mu.size(); ++j)
    if (mu[j] != 0.0) m[std::to_string(j)] = mu[j];
  return nlohmann::json{{"K", users}, {"mu", m}};
}

void EbcSchemeParams::validate() const {
  const int k = users();
  require(k >= 1 && k <= kMaxUsers, "params must cover K in [1, 20] users");
  alphas.validate();
  require(q2.size() == (std::size_t{1} << k), "q2 table must have 2^K entries");
  require(alphabet_bits > 0.0, "alphabet_bits must be positive");
  std::vector<double> card_sum(static_cast<std::size_t>(k) + 1, 0.0);
  for (Mask m = 0; m < q2.size(); ++m) {
    require(q2[m] >= 0.0, "q2 entries must be nonnegative");
    card_sum[static_cast<std::size_t>(popcount(m))] += q2[m];
  }
  require(q2[0] == 0.0, "q2 of the empty set must be 0");
  for (int j = 1; j <= k; ++j) {
    const double s = card_sum[static_cast<std::size_t>(j)];
    const double alpha = alphas.alphas[static_cast<std::size_t>(j - 1)];
    // a zero-length phase may leave its distribution empty
    require(std::abs(s - 1.0) <= 1e-10 || (alpha == 0.0 && s == 0.0),
            "q2 must sum to 1 over each cardinality");
  }
}

nlohmann::json EbcSchemeParams::to_json() const {
  nlohmann::json q = nlohmann::json::object();
  for (Mask m = 1; m < q2.size(); ++m)
    if (q2[m] != 0.0) q[std::to_string(m)] = q2[m];
  return nlohmann::json{
      {"K", users()}, {"alphas", alphas.alphas}, {"q2", q}, {"alphabet_bits", alphabet_bits}};
}

EbcSchemeParams EbcSchemeParams::from_json(const nlohmann::json& j) {
  if (!j.contains("K") || !j["K"].is_number_integer())
    throw std::invalid_argument("/K: expected integer");
  const int k = j["K"].get<int>();
  if (k < 1 || k > kMaxUsers) throw std::invalid_argument("/K: must be in [1, 20]");
  EbcSchemeParams p;
  if (!j.contains("alphas") || !j["alphas"].is_array())
    throw std::invalid_argument("/alphas: expected array");
  p.alphas.alphas = j["alphas"].get<std::vector<double>>();
  if (static_cast<int>(p.alphas.alphas.size()) != k)
    throw std::invalid_argument("/alphas: length must equal K");
  p.q2.assign(std::size_t{1} << k, 0.0);
  if (!j.contains("q2") || !j["q2"].is_object())
    throw std::invalid_argument("/q2: expected object");
  for (const auto& [key, val] : j["q2"].items()) {
    std::size_t pos = 0;
    unsigned long mask = 0;
    try {
      mask = std::stoul(key, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("/q2/" + key + ": key must be a bitmask integer");
    }
    if (pos != key.size() || mask == 0 || mask >= p.q2.size())
      throw std::invalid_argument("/q2/" + key + ": key must be a nonempty bitmask in (0, 2^K)");
    if (!val.is_number()) throw std::invalid_argument("/q2/" + key + ": expected number");
    p.q2[mask] = val.get<double>();
  }
  if (!j.contains("alphabet_bits") || !j["alphabet_bits"].is_number())
    throw std::invalid_argument("/alphabet_bits: expected number");
  p.alphabet_bits = j["alphabet_bits"].get<double>();
  p.validate();
  return p;
}

FeasibilityReport jsc_ebc_feasible(const std::vector<double>& rates, const EbcSchemeParams& params,
                                   const ErasurePmf& pmf) {
  params.validate();
  pmf.validate();
  const int k = params.users();
  require(pmf.users == k, "pmf and params disagree on K");
  require(static_cast<int>(rates.size()) == k, "rates must have K entries");
  for (double r : rates) require(r >= 0.0, "rates must be nonnegative");

  const Mask full = full_mask(k);
  const double delta_all = delta_of(pmf, full);
  FeasibilityReport rep;
  rep.min_slack = std::numeric_limits<double>::infinity();

  // per-user rate constraints (phase 1)
  for (int u = 1; u <= k; ++u) {
    const double cap = params.alphas.alphas[0] * params.q2[user_bit(u)] * (1.0 - delta_all) *
                       params.alphabet_bits;
    EbcConstraint c;
    c.j = 1;
    c.k = u;
    c.J = user_bit(u);
    c.slack = cap - rates[static_cast<std::size_t>(u - 1)];
    rep.min_slack = std::min(rep.min_slack, c.slack);
    rep.constraints.push_back(c);
  }

  // allocation constraints for every (j, k, J), k in J, |J| = j >= 2
  for (Mask J = 1; J <= full; ++J) {
    const int j = popcount(J);
    if (j < 2) continue;
    for (int u = 1; u <= k; ++u) {
      if ((J & user_bit(u)) == 0) continue;
      const Mask bar = (full & ~J) | user_bit(u);
      const double lhs =
          params.alphas.alphas[static_cast<std::size_t>(j - 1)] * params.q2[J] *
          (1.0 - delta_of(pmf, bar));
      double rhs = 0.0;
      // proper subsets I of J containing u
      for (Mask I = (J - 1) & J; I != 0; I = (I - 1) & J) {
        if ((I & user_bit(u)) == 0) continue;
        const int i = popcount(I);
        rhs += params.alphas.alphas[static_cast<std::size_t>(i - 1)] * params.q2[I] *
               phi_of(pmf, bar, J & ~I);
      }
      EbcConstraint c;
      c.j = j;
      c.k = u;
      c.J = J;
      c.slack = lhs - rhs;
      rep.min_slack = std::min(rep.min_slack, c.slack);
      rep.constraints.push_back(c);
    }
  }

  rep.feasible = rep.min_slack >= -kFeasibilityTol;
  return rep;
}

RegionReport sym_capacity_region_check(const std::vector<double>& rates,
                                       const SymmetricDeltas& deltas, double alphabet_bits,
                                       bool shortcut_only) {
  deltas.validate();
  const int k = deltas.users();
  require(static_cast<int>(rates.size()) == k, "rates must have K entries");
  for (double r : rates) require(r >= 0.0, "rates must be nonnegative");
  require(alphabet_bits > 0.0, "alphabet_bits must be positive");

  // weights 1/(1-delta_c) are nonincreasing in position c (delta antitone)
  std::vector<double> w(static_cast<std::size_t>(k));
  for (int c = 1; c <= k; ++c) {
    const double d = deltas.of_card(c);
    require(d < 1.0, "delta must be < 1 for every cardinality");
    w[static_cast<std::size_t>(c - 1)] = 1.0 / (1.0 - d);
  }

  // sorted shortcut: largest rates paired with largest weights
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 1);
  std::stable_sort(order.begin(), order.end(), [&rates](int a, int b) {
    return rates[static_cast<std::size_t>(a - 1)] > rates[static_cast<std::size_t>(b - 1)];
  });
  double shortcut_max = 0.0;
  for (int c = 0; c < k; ++c)
    shortcut_max += rates[static_cast<std::size_t>(order[static_cast<std::size_t>(c)] - 1)] *
                    w[static_cast<std::size_t>(c)];

  RegionReport rep;
  rep.shortcut_only = shortcut_only;
  if (shortcut_only) {
    rep.max_weighted_sum = shortcut_max;
    rep.binding_perm = order;
  } else {
    require(k <= 8, "full permutation enumeration requires K <= 8; pass shortcut_only for larger K");
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 1);
    double best = -1.0;
    std::vector<int> best_perm = perm;
    do {
      double lhs = 0.0;
      for (int c = 0; c < k; ++c)
        lhs += rates[static_cast<std::size_t>(perm[static_cast<std::size_t>(c)] - 1)] *
               w[static_cast<std::size_t>(c)];
      if (lhs > best) {
        best = lhs;
        best_perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (std::abs(best - shortcut_max) > 1e-12 * std::max(1.0, std::abs(best)))
      throw NumericalError("region check: enumeration and sorted shortcut disagree");
    rep.max_weighted_sum = best;
    rep.binding_perm = best_perm;
  }
  rep.feasible = rep.max_weighted_sum <= alphabet_bits + kFeasibilityTol;
  return rep;
}

MuAllocation mu_solver_symmetric(const SymmetricDeltas& deltas) {
  deltas.validate();
  const int k = deltas.users();
  require(deltas.of_card(1) < 1.0, "mu solver: delta_1 = 1 admits no achievable rate");

  MuAllocation out;
  out.users = k;
  out.mu.assign(std::size_t{1} << k, 0.0);
  for (int u = 1; u <= k; ++u) out.mu[user_bit(u)] = 1.0;

  const auto by_card = masks_by_cardinality(k);
  for (int j = 2; j <= k; ++j) {
    const double denom = 1.0 - deltas.of_card(k - j + 1);
    for (Mask J : by_card[static_cast<std::size_t>(j)]) {
      const int kstar = min_user(J);
      double acc = 0.0;
      for (Mask I = (J - 1) & J; I != 0; I = (I - 1) & J) {
        if ((I & user_bit(kstar)) == 0) continue;
        const int i = popcount(I);
        acc += phi_of_card(deltas, k - j + 1, j - i) / denom * out.mu[I];
      }
      out.mu[J] = acc;
    }
  }

  const double total = out.total();
  for (double& v : out.mu) v /= total;
  return out;
}

double lemma2_check(const MuAllocation& mu, const SymmetricDeltas& deltas) {
  deltas.validate();
  const int k = mu.users;
  require(deltas.users() == k, "mu and deltas disagree on K");
  const double one_minus_dk = 1.0 - deltas.of_card(k);

  double worst = 0.0;
  for (int u = 1; u <= k; ++u) {
    // candidate sets W with min element u: u plus any subset of {u+1..K}
    Mask tail = 0;
    for (int v = u + 1; v <= k; ++v) tail |= user_bit(v);
    Mask s = tail;
    while (true) {
      const Mask W = s | user_bit(u);
      const int w = popcount(W);
      double lhs = 0.0;
      for (Mask I = W; I != 0; I = (I - 1) & W)
        if ((I & user_bit(u)) != 0) lhs += mu.mu[I];
      const double rhs = one_minus_dk * mu.mu[user_bit(u)] / (1.0 - deltas.of_card(k - w + 1));
      worst = std::max(worst, std::abs(lhs - rhs));
      if (s == 0) break;
      s = (s - 1) & tail;
    }
  }
  return worst;
}

double sym_rate_ebc(const SymmetricDeltas& deltas, double alphabet_bits) {
  deltas.validate();
  require(alphabet_bits > 0.0, "alphabet_bits must be positive");
  double sum = 0.0;
  for (int c = 1; c <= deltas.users(); ++c) {
    const double d = deltas.of_card(c);
    if (d >= 1.0) return 0.0;  // a user that never receives pins the symmetric rate at 0
    sum += 1.0 / (1.0 - d);
  }
  return alphabet_bits / sum;
}

EbcSchemeParams params_from_mu(const MuAllocation& mu, double alphabet_bits) {
  mu.validate();
  const int k = mu.users;
  EbcSchemeParams p;
  p.alphabet_bits = alphabet_bits;
  p.alphas.alphas.assign(static_cast<std::size_t>(k), 0.0);
  p.q2.assign(std::size_t{1} << k, 0.0);
  for (Mask J = 1; J < p.q2.size(); ++J)
    p.alphas.alphas[static_cast<std::size_t>(popcount(J) - 1)] += mu.mu[J];
  for (Mask J = 1; J < p.q2.size(); ++J) {
    const double a = p.alphas.alphas[static_cast<std::size_t>(popcount(J) - 1)];
    if (a > 0.0) p.q2[J] = mu.mu[J] / a;
  }
  p.validate();
  return p;
}

}  // namespace bcfeed::ebc

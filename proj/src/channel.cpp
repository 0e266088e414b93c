#include "bcfeed/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "bcfeed/errors.hpp"

namespace bcfeed {

GbcConfig GbcConfig::from_snr_db(int users, int tx, int rx, double snr_db) {
  GbcConfig c;
  c.users = users;
  c.tx_antennas = tx;
  c.rx_antennas = rx;
  c.snr_db = snr_db;
  c.snr = std::pow(10.0, snr_db / 10.0);
  c.validate();
  return c;
}

GbcConfig GbcConfig::from_snr(int users, int tx, int rx, double snr_linear) {
  GbcConfig c;
  c.users = users;
  c.tx_antennas = tx;
  c.rx_antennas = rx;
  c.snr = snr_linear;
  c.snr_db = 10.0 * std::log10(snr_linear);
  c.validate();
  return c;
}

void GbcConfig::validate() const {
  if (users < 1 || users > kMaxUsers) throw std::invalid_argument("users must be in [1, 20]");
  if (tx_antennas < 1) throw std::invalid_argument("tx_antennas must be >= 1");
  if (rx_antennas < 1) throw std::invalid_argument("rx_antennas must be >= 1");
  if (!(snr > 0.0) || !std::isfinite(snr)) throw std::invalid_argument("snr must be positive");
}

void draw_channel_into(const GbcConfig& cfg, std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t index, ChannelSample& out) {
  const Eigen::Index rows = cfg.rx_total();
  const Eigen::Index cols = cfg.tx_antennas;
  out.users = cfg.users;
  out.rx_antennas = cfg.rx_antennas;
  if (out.stacked.rows() != rows || out.stacked.cols() != cols) out.stacked.resize(rows, cols);
  CounterRng rng(seed, stream, index);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) out.stacked(r, c) = rng.next_cn();
}

ChannelSample draw_channel(const GbcConfig& cfg, std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t index) {
  ChannelSample s;
  draw_channel_into(cfg, seed, stream, index, s);
  return s;
}

// ---------------------------------------------------------------------------
// Erasure pmf
// ---------------------------------------------------------------------------

ErasurePmf ErasurePmf::independent(int users, double epsilon) {
  if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon must be in [0,1]");
  ErasurePmf p;
  p.users = users;
  p.probs.assign(std::size_t{1} << users, 0.0);
  for (Mask u = 0; u <= full_mask(users); ++u) {
    const int e = popcount(u);
    p.probs[u] = std::pow(epsilon, e) * std::pow(1.0 - epsilon, users - e);
  }
  p.validate();
  return p;
}

void ErasurePmf::validate() const {
  if (users < 1 || users > kMaxUsers) throw std::invalid_argument("pmf users must be in [1, 20]");
  if (probs.size() != (std::size_t{1} << users))
    throw std::invalid_argument("pmf table must have 2^K entries");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || p > 1.0 + 1e-12) throw std::invalid_argument("pmf entries must be in [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("pmf entries must sum to 1 within 1e-12");
}

nlohmann::json ErasurePmf::to_json() const {
  nlohmann::json probs_j = nlohmann::json::object();
  for (Mask u = 0; u < probs.size(); ++u)
    if (probs[u] != 0.0) probs_j[std::to_string(u)] = probs[u];
  return nlohmann::json{{"K", users}, {"probs", probs_j}};
}

ErasurePmf ErasurePmf::from_json(const nlohmann::json& j) {
  if (!j.contains("K") || !j["K"].is_number_integer())
    throw std::invalid_argument("/K: expected integer");
  ErasurePmf p;
  p.users = j["K"].get<int>();
  if (p.users < 1 || p.users > kMaxUsers) throw std::invalid_argument("/K: must be in [1, 20]");
  p.probs.assign(std::size_t{1} << p.users, 0.0);
  if (!j.contains("probs") || !j["probs"].is_object())
    throw std::invalid_argument("/probs: expected object");
  for (const auto& [key, val] : j["probs"].items()) {
    std::size_t pos = 0;
    unsigned long mask = 0;
    try {
      mask = std::stoul(key, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("/probs/" + key + ": key must be a bitmask integer");
    }
    if (pos != key.size() || mask >= p.probs.size())
      throw std::invalid_argument("/probs/" + key + ": key must be a bitmask in [0, 2^K)");
    if (!val.is_number()) throw std::invalid_argument("/probs/" + key + ": expected number");
    p.probs[mask] = val.get<double>();
  }
  p.validate();
  return p;
}

double delta_of(const ErasurePmf& pmf, Mask f) {
  const Mask full = full_mask(pmf.users);
  if ((f & ~full) != 0) throw std::invalid_argument("subset out of range");
  const Mask comp = full & ~f;
  double sum = 0.0;
  Mask s = comp;
  while (true) {
    sum += pmf.probs[f | s];
    if (s == 0) break;
    s = (s - 1) & comp;
  }
  return sum;
}

double phi_of(const ErasurePmf& pmf, Mask f, Mask t) {
  const Mask full = full_mask(pmf.users);
  if (((f | t) & ~full) != 0) throw std::invalid_argument("subset out of range");
  if ((f & t) != 0) throw std::invalid_argument("phi_of requires disjoint sets");

  // direct: sum over states with F erased, T received
  const Mask rest = full & ~(f | t);
  double direct = 0.0;
  Mask s = rest;
  while (true) {
    direct += pmf.probs[f | s];
    if (s == 0) break;
    s = (s - 1) & rest;
  }

  // inclusion-exclusion over delta
  double incl = 0.0;
  Mask v = t;
  while (true) {
    incl += (popcount(v) % 2 == 0 ? 1.0 : -1.0) * delta_of(pmf, f | v);
    if (v == 0) break;
    v = (v - 1) & t;
  }

  if (std::abs(direct - incl) > 1e-10)
    throw NumericalError("phi_of: direct and inclusion-exclusion paths disagree");
  return direct;
}

// ---------------------------------------------------------------------------
// Symmetric deltas
// ---------------------------------------------------------------------------

void SymmetricDeltas::validate() const {
  const int k = users();
  if (k < 1 || k > kMaxUsers) throw std::invalid_argument("deltas must have K in [1, 20] entries");
  for (int j = 0; j < k; ++j) {
    const double d = deltas[j];
    if (!(d >= 0.0) || d > 1.0) throw std::invalid_argument("deltas must lie in [0,1]");
    if (j > 0 && d > deltas[j - 1] + 1e-15)
      throw std::invalid_argument("deltas must be nonincreasing: erasing a superset is never more likely");
  }
  if (!(deltas[k - 1] < 1.0)) throw std::invalid_argument("delta_K must be < 1");
}

nlohmann::json SymmetricDeltas::to_json() const {
  return nlohmann::json{{"K", users()}, {"deltas", deltas}};
}

SymmetricDeltas SymmetricDeltas::from_json(const nlohmann::json& j) {
  if (!j.contains("K") || !j["K"].is_number_integer())
    throw std::invalid_argument("/K: expected integer");
  if (!j.contains("deltas") || !j["deltas"].is_array())
    throw std::invalid_argument("/deltas: expected array");
  SymmetricDeltas d;
  d.deltas = j["deltas"].get<std::vector<double>>();
  if (static_cast<int>(d.deltas.size()) != j["K"].get<int>())
    throw std::invalid_argument("/deltas: length must equal K");
  d.validate();
  return d;
}

double phi_of_card(const SymmetricDeltas& d, int a, int b) {
  if (a < 0 || b < 0 || a + b > d.users()) throw std::invalid_argument("phi_of_card: a+b exceeds K");
  double sum = 0.0;
  for (int u = 0; u <= b; ++u)
    sum += (u % 2 == 0 ? 1.0 : -1.0) * binomial(b, u) * d.of_card(a + u);
  return sum;
}

ErasurePmf symmetric_pmf(const SymmetricDeltas& deltas) {
  deltas.validate();
  const int k = deltas.users();
  // pattern probability depends only on the erased-set cardinality
  std::vector<double> by_card(static_cast<std::size_t>(k) + 1, 0.0);
  for (int u = 0; u <= k; ++u) {
    const double p = phi_of_card(deltas, u, k - u);
    if (p < -1e-12)
      throw std::invalid_argument("deltas do not define a valid symmetric distribution "
                                  "(implied pattern probability is negative)");
    by_card[u] = std::max(p, 0.0);
  }
  ErasurePmf pmf;
  pmf.users = k;
  pmf.probs.assign(std::size_t{1} << k, 0.0);
  for (Mask u = 0; u <= full_mask(k); ++u) pmf.probs[u] = by_card[popcount(u)];
  pmf.validate();
  return pmf;
}

}  // namespace bcfeed

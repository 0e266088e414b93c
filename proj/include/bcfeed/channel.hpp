#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "bcfeed/rng.hpp"
#include "bcfeed/subsets.hpp"
#include "json.hpp"

namespace bcfeed {

// Fading Gaussian BC instance. `snr` is linear P/(n_t sigma^2); the dB value
// is carried alongside because pow/log10 do not round-trip exactly at double
// precision for every grid value.
struct GbcConfig {
  int users = 1;        // K
  int tx_antennas = 1;  // n_t
  int rx_antennas = 1;  // n_r, per user
  double snr = 1.0;
  double snr_db = 0.0;

  static GbcConfig from_snr_db(int users, int tx, int rx, double snr_db);
  static GbcConfig from_snr(int users, int tx, int rx, double snr_linear);

  void validate() const;  // throws std::invalid_argument
  int rx_total() const { return users * rx_antennas; }
};

// One fading realization: the vertical concatenation of H_1..H_K,
// entries i.i.d. CN(0,1). Shape (K*n_r) x n_t.
struct ChannelSample {
  Eigen::MatrixXcd stacked;
  int users = 0;
  int rx_antennas = 0;

  // H_k, 1-based user index: an n_r x n_t block view.
  auto block(int k) const {
    return stacked.middleRows(static_cast<Eigen::Index>(k - 1) * rx_antennas, rx_antennas);
  }
};

// Deterministic draw: pure function of (seed, stream, index).
ChannelSample draw_channel(const GbcConfig& cfg, std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t index);
void draw_channel_into(const GbcConfig& cfg, std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t index, ChannelSample& out);

// ---------------------------------------------------------------------------
// Erasure BC state distributions
// ---------------------------------------------------------------------------

// Full joint erasure-state distribution: probs[U] is the probability that
// exactly the users in U are erased. Indexed by K-bit mask, size 2^K.
struct ErasurePmf {
  int users = 0;
  std::vector<double> probs;

  static ErasurePmf independent(int users, double epsilon);
  void validate() const;

  nlohmann::json to_json() const;
  static ErasurePmf from_json(const nlohmann::json& j);
};

// delta_F = P(S_F = 0): probability that every user in F is erased.
// delta_of(pmf, 0) == 1.
double delta_of(const ErasurePmf& pmf, Mask f);

// phi_{F,T} = P(S_F = 0, S_T = 1) for disjoint F, T. Computed both by direct
// summation over the pmf and by inclusion-exclusion over delta; the two paths
// must agree within 1e-10 or a NumericalError is thrown.
double phi_of(const ErasurePmf& pmf, Mask f, Mask t);

// delta_j for cardinality-symmetric channels: the probability that any fixed
// set of j users is simultaneously erased. deltas[j-1] = delta_j.
struct SymmetricDeltas {
  std::vector<double> deltas;

  int users() const { return static_cast<int>(deltas.size()); }
  // delta for a set of cardinality c (delta_0 = 1).
  double of_card(int c) const { return c == 0 ? 1.0 : deltas.at(static_cast<std::size_t>(c) - 1); }
  void validate() const;  // 0 <= d_{j+1} <= d_j <= 1, d_K < 1

  nlohmann::json to_json() const;
  static SymmetricDeltas from_json(const nlohmann::json& j);
};

// phi_{a,b} for a symmetric channel (any disjoint F, T with |F|=a, |T|=b):
// sum_{u=0..b} (-1)^u C(b,u) delta_{a+u}.
double phi_of_card(const SymmetricDeltas& d, int a, int b);

// Materializes the cardinality-symmetric pmf implied by the delta vector via
// inclusion-exclusion. Throws std::invalid_argument if the deltas imply a
// negative pattern probability (below -1e-12).
ErasurePmf symmetric_pmf(const SymmetricDeltas& deltas);

}  // namespace bcfeed

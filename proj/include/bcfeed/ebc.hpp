#pragma once

#include <cstdint>
#include <vector>

#include "bcfeed/channel.hpp"
#include "bcfeed/gbc.hpp"

namespace bcfeed::ebc {

// Normalized phase-length weights mu_J over nonempty subsets J, indexed by
// mask; mu[0] is unused and zero. Sum over nonempty masks is 1.
struct MuAllocation {
  int users = 0;
  std::vector<double> mu;  // size 2^K

  double total() const;
  void validate() const;

  nlohmann::json to_json() const;
};

// Coded time-sharing parameters of the erasure-BC scheme: phase fractions,
// per-phase subset distributions P(Q2^(j) = J) (flat over masks, normalized
// within each cardinality), and log2 of the input alphabet size.
struct EbcSchemeParams {
  gbc::AlphaVector alphas;
  std::vector<double> q2;  // size 2^K, q2[J] = P(Q2^(|J|) = J)
  double alphabet_bits = 1.0;

  int users() const { return static_cast<int>(alphas.alphas.size()); }
  void validate() const;

  nlohmann::json to_json() const;
  static EbcSchemeParams from_json(const nlohmann::json& j);
};

struct EbcConstraint {
  // j == 1: the per-user rate constraint for user k (J = {k}).
  // j >= 2: the allocation constraint for (j, k, J), k in J.
  int j = 0;
  int k = 0;
  Mask J = 0;
  double slack = 0.0;
};

struct FeasibilityReport {
  bool feasible = false;
  double min_slack = 0.0;
  std::vector<EbcConstraint> constraints;
};

inline constexpr double kFeasibilityTol = 1e-9;  // slack >= -tol counts as satisfied

// Rate-region membership for the general (possibly asymmetric) erasure BC:
// R_k <= alpha_1 P(Q2^(1)={k}) (1 - delta_K) log|X| for every k, and for every
// (j,k,J) with k in J, |J| = j >= 2:
//   alpha_j P(Q2^(j)=J) (1 - delta_{(K\J)u{k}})
//     >= sum_{i<j} alpha_i sum_{I subset J, I ni k, |I|=i} P(Q2^(i)=I) phi_{(K\J)u{k}, J\I}.
FeasibilityReport jsc_ebc_feasible(const std::vector<double>& rates, const EbcSchemeParams& params,
                                   const ErasurePmf& pmf);

struct RegionReport {
  bool feasible = false;
  double max_weighted_sum = 0.0;       // max over permutations of sum R_{pi(k)}/(1-delta_k)
  std::vector<int> binding_perm;       // permutation attaining the max
  bool shortcut_only = false;
};

// Symmetric-EBC capacity region check: for every permutation pi,
// sum_k R_{pi(k)} / (1 - delta_k) <= log|X|. Full K! enumeration for K <= 8,
// cross-checked against the sorted shortcut (largest rates paired with largest
// weights); K > 8 requires shortcut_only.
RegionReport sym_capacity_region_check(const std::vector<double>& rates,
                                       const SymmetricDeltas& deltas, double alphabet_bits,
                                       bool shortcut_only = false);

// Capacity-achieving normalized phase lengths for the symmetric EBC:
// singleton weights equal, mu_J = mu_{k*_J, J} built up in increasing |J|
// order from the recursion
//   mu_{k,J} = sum_{I: k in I subset J} [phi_{K-j+1, j-i} / (1 - delta_{K-j+1})] mu_I,
// then normalized to sum 1.
MuAllocation mu_solver_symmetric(const SymmetricDeltas& deltas);

// Max absolute violation of the identities
//   sum_{I: k in I subseteq W} mu_I = (1 - delta_K) mu_{k} / (1 - delta_{K-|W|+1})
// over all k and all W subseteq {k..K} containing k. Diagnostic: a nonzero
// violation is a result, not an error.
double lemma2_check(const MuAllocation& mu, const SymmetricDeltas& deltas);

// Symmetric capacity point: log|X| / sum_k 1/(1-delta_k).
double sym_rate_ebc(const SymmetricDeltas& deltas, double alphabet_bits);

// Converts solver output to scheme parameters: alpha_j = sum_{|J|=j} mu_J,
// P(Q2^(j)=J) = mu_J / alpha_j.
EbcSchemeParams params_from_mu(const MuAllocation& mu, double alphabet_bits);

}  // namespace bcfeed::ebc

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "bcfeed/montecarlo.hpp"

namespace bcfeed::gbc {

// Compression-noise variance ratios beta_1..beta_{K-1}; the compression noise
// added in phase i has variance beta_i * sigma^2.
struct BetaVector {
  std::vector<double> betas;

  void validate(int users) const;  // size K-1, all > 0
};

// Normalized phase lengths alpha_1..alpha_K, nonnegative, summing to 1.
struct AlphaVector {
  std::vector<double> alphas;

  void validate() const;
};

enum class Scheme { JSC, JSC_FIXED_BETA, TDMA, MAT2, QMAT, UPPER };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

// One point of a rate-vs-SNR curve.
struct RatePoint {
  double snr_db = 0.0;  // axis value as swept
  Scheme scheme = Scheme::TDMA;
  McEstimate rate;  // bits per channel use
  std::optional<BetaVector> betas;
  std::optional<AlphaVector> alphas;
};

// log2 det of a Hermitian positive-definite matrix via Cholesky, accumulating
// log terms. Throws NumericalError if the matrix is not Hermitian within
// 1e-12 or not PD.
double log2det_hpd(const Eigen::MatrixXcd& m);

// ---------------------------------------------------------------------------
// Per-sample integrands (exposed for the dual-route consistency checks)
// ---------------------------------------------------------------------------

// a_t integrand: log2 det(I + snr * H_T^H Lambda_t H_T) on the n_t x n_t side,
// T = {1} u {t+1..K}, Lambda_t = diag{I_nr, (1/beta_t) I_{(K-t)nr}}.
// beta_t is ignored for t = K (the weighted block is empty).
double a_integrand(const GbcConfig& cfg, int t, double beta_t, const ChannelSample& s);

// b_{l,t} integrand: log2 det(I + (snr/beta_prev) H_l (I + snr H_1^H H_1)^{-1} H_l^H),
// an n_r x n_r determinant. Independent of t beyond the index contract.
double b_integrand(const GbcConfig& cfg, int l, double beta_prev, const ChannelSample& s);

// Two-user phase-1 integrand in its receive-side form:
// log2 det(I_2 + D^{1/2} (H H^H) D^{1/2}), D = diag(snr, snr/ratio) with
// ratio = sigma_hat^2 / sigma^2. Equals a_integrand(t=1, beta=ratio) on the
// same sample by Sylvester's identity; computed through a different route.
double two_user_phase1_integrand(const GbcConfig& cfg, double sigma_hat_ratio,
                                 const ChannelSample& s);

// ---------------------------------------------------------------------------
// Rates
// ---------------------------------------------------------------------------

// E[a_t]; beta_t must be given iff t < K.
McEstimate a_term(const GbcConfig& cfg, int t, std::optional<double> beta_t,
                  const SampleBatch& batch, int threads = 0);

// E[b_{l,t}]; requires 1 <= l <= t <= K, t >= 2, beta_prev > 0.
McEstimate b_term(const GbcConfig& cfg, int l, int t, double beta_prev, const SampleBatch& batch,
                  int threads = 0);

struct JscResult {
  McEstimate rate;
  AlphaVector alphas;
};

// Symmetric JSC rate at fixed beta: a_1 / (K + sum_j C(K,j) prod_t sumb_t/a_t),
// with the phase-length chain solved in closed form (the equalities are
// optimal). Standard error by batch means over sections.
JscResult jsc_sym_rate(const GbcConfig& cfg, const BetaVector& betas, const SampleBatch& batch,
                       int threads = 0);

struct TwoUserResult {
  McEstimate rate;
  double alpha1 = 0.0;
};

// Two-user closed form (K=2, n_r=1): R = (alpha_1/2) E[phase-1 det] with
// alpha_1 chosen so the side-information constraint holds with equality.
// sigma_hat_ratio = sigma_hat^2 / sigma^2 plays the role of beta_1.
TwoUserResult two_user_jsc_rate(const GbcConfig& cfg, double sigma_hat_ratio,
                                const SampleBatch& batch, int threads = 0);

// (1/K) E[log2 det(I + snr H_1 H_1^H)].
McEstimate tdma_rate(const GbcConfig& cfg, const SampleBatch& batch, int threads = 0);

// Two-user MAT (K=2, n_t=2, n_r=1): (1/3) E[log2 det(I + diag(snr, snr/(1+2/g)) H H^H)]
// with g = |H'_11|^2 an independent unit exponential; draws with g < 1e-300
// are rejected and redrawn.
McEstimate mat2_rate(const GbcConfig& cfg, const SampleBatch& batch, int threads = 0);

// Quantized-MAT baseline: (1/K) DoF_sym E[log2 det(I + snr Ntilde^{-1/2} H H^H Ntilde^{-1/2})],
// Ntilde diagonal per user block j with value 1+(j-1)(j+2).
McEstimate qmat_rate(const GbcConfig& cfg, const SampleBatch& batch, int threads = 0);

// Genie-aided upper bound DoF_sym * K * R_TDMA.
McEstimate upper_bound(const GbcConfig& cfg, const SampleBatch& batch, int threads = 0);

// The 1+(j-1)(j+2) equivalent compression-noise ladder, j = 2..K.
BetaVector qmat_equivalent_betas(int users);

struct Rational {
  long long num = 0;
  long long den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;
};

// DoF_sym(K) = 1 / (1 + 1/2 + ... + 1/K), exact.
Rational dof_sym(int users);

// Measured prelog between two SNR points at fixed beta:
// (R(snr2) - R(snr1)) / log2(snr2/snr1).
double dof_slope(const GbcConfig& cfg_base, const BetaVector& betas, double snr_db_lo,
                 double snr_db_hi, const McPlan& plan, int threads = 0);

}  // namespace bcfeed::gbc

#include "bcfeed/gbc.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bcfeed/rng.hpp"

namespace bcfeed::gbc {

namespace {

constexpr double kMat2RejectBelow = 1e-300;

// Suffix grams S_t = sum_{u > t} H_u^H H_u and the user-1 gram, shared by the
// a and b integrands.
struct GramSet {
  Eigen::MatrixXcd g1;                  // H_1^H H_1 (nt x nt)
  std::vector<Eigen::MatrixXcd> suffix;  // suffix[t] = S_t, t = 1..K-1 (index t-1)
};

GramSet grams(const GbcConfig& cfg, const ChannelSample& s) {
  GramSet g;
  const auto b1 = s.block(1);
  g.g1 = b1.adjoint() * b1;
  const int k = cfg.users;
  g.suffix.assign(static_cast<std::size_t>(std::max(0, k - 1)),
                  Eigen::MatrixXcd::Zero(cfg.tx_antennas, cfg.tx_antennas));
  // S_{K-1} = H_K^H H_K; S_t = S_{t+1} + H_{t+1}^H H_{t+1}
  for (int t = k - 1; t >= 1; --t) {
    const auto bt = s.block(t + 1);
    g.suffix[static_cast<std::size_t>(t - 1)] = bt.adjoint() * bt;
    if (t < k - 1) g.suffix[static_cast<std::size_t>(t - 1)] += g.suffix[static_cast<std::size_t>(t)];
  }
  return g;
}

double mat2_aux_gain(std::uint64_t seed, std::uint64_t stream, std::int64_t index) {
  CounterRng rng(seed, aux_stream(stream), static_cast<std::uint64_t>(index));
  double g = 0.0;
  do {
    g = std::norm(rng.next_cn());
  } while (g < kMat2RejectBelow);
  return g;
}

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

void BetaVector::validate(int users) const {
  require(static_cast<int>(betas.size()) == users - 1, "beta vector must have K-1 entries");
  for (double b : betas) require(b > 0.0 && std::isfinite(b), "every beta must be positive");
}

void AlphaVector::validate() const {
  double sum = 0.0;
  for (double a : alphas) {
    require(a >= 0.0, "alphas must be nonnegative");
    sum += a;
  }
  require(std::abs(sum - 1.0) <= 1e-10, "alphas must sum to 1");
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::JSC: return "JSC";
    case Scheme::JSC_FIXED_BETA: return "JSC_FIXED_BETA";
    case Scheme::TDMA: return "TDMA";
    case Scheme::MAT2: return "MAT2";
    case Scheme::QMAT: return "QMAT";
    case Scheme::UPPER: return "UPPER";
  }
  throw std::invalid_argument("unknown scheme");
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "JSC") return Scheme::JSC;
  if (name == "JSC_FIXED_BETA") return Scheme::JSC_FIXED_BETA;
  if (name == "TDMA") return Scheme::TDMA;
  if (name == "MAT2") return Scheme::MAT2;
  if (name == "QMAT") return Scheme::QMAT;
  if (name == "UPPER") return Scheme::UPPER;
  throw std::invalid_argument("unknown scheme tag: " + name);
}

double log2det_hpd(const Eigen::MatrixXcd& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) throw NumericalError("log2det_hpd: matrix is not Hermitian");
  Eigen::LLT<Eigen::MatrixXcd> llt(m);
  if (llt.info() != Eigen::Success)
    throw NumericalError("log2det_hpd: matrix is not positive definite");
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < m.rows(); ++i) acc += std::log2(std::real(l(i, i)));
  return 2.0 * acc;
}

double a_integrand(const GbcConfig& cfg, int t, double beta_t, const ChannelSample& s) {
  const int k = cfg.users;
  const int nt = cfg.tx_antennas;
  const auto g = grams(cfg, s);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(nt, nt) + cfg.snr * g.g1;
  if (t < k) m += (cfg.snr / beta_t) * g.suffix[static_cast<std::size_t>(t - 1)];
  return log2det_hpd(m);
}

double b_integrand(const GbcConfig& cfg, int l, double beta_prev, const ChannelSample& s) {
  const int nt = cfg.tx_antennas;
  const int nr = cfg.rx_antennas;
  const auto b1 = s.block(1);
  Eigen::MatrixXcd a1 = Eigen::MatrixXcd::Identity(nt, nt) + cfg.snr * (b1.adjoint() * b1);
  const auto bl = s.block(l);
  const Eigen::MatrixXcd ml = bl * a1.llt().solve(bl.adjoint().eval());
  return log2det_hpd(Eigen::MatrixXcd::Identity(nr, nr) + (cfg.snr / beta_prev) * ml);
}

double two_user_phase1_integrand(const GbcConfig& cfg, double sigma_hat_ratio,
                                 const ChannelSample& s) {
  // receive-side form: det(I_2 + D^(1/2) H H^H D^(1/2)), D = diag(snr, snr/ratio)
  const Eigen::Matrix2cd gram = (s.stacked * s.stacked.adjoint()).topLeftCorner<2, 2>();
  const double d0 = std::sqrt(cfg.snr);
  const double d1 = std::sqrt(cfg.snr / sigma_hat_ratio);
  Eigen::Matrix2cd m;
  m(0, 0) = 1.0 + d0 * d0 * gram(0, 0);
  m(0, 1) = d0 * d1 * gram(0, 1);
  m(1, 0) = d1 * d0 * gram(1, 0);
  m(1, 1) = 1.0 + d1 * d1 * gram(1, 1);
  return log2det_hpd(m);
}

McEstimate a_term(const GbcConfig& cfg, int t, std::optional<double> beta_t,
                  const SampleBatch& batch, int threads) {
  require(t >= 1 && t <= cfg.users, "a_term: t must be in [1, K]");
  require((t < cfg.users) == beta_t.has_value(), "a_term: beta_t is required iff t < K");
  if (beta_t) require(*beta_t > 0.0, "a_term: beta_t must be positive");
  const double beta = beta_t.value_or(1.0);
  return estimate(
      batch, [&cfg, t, beta](const ChannelSample& s, std::int64_t) { return a_integrand(cfg, t, beta, s); },
      threads);
}

McEstimate b_term(const GbcConfig& cfg, int l, int t, double beta_prev, const SampleBatch& batch,
                  int threads) {
  require(t >= 2 && t <= cfg.users, "b_term: t must be in [2, K]");
  require(l >= 1 && l <= t, "b_term: l must be in [1, t]");
  require(beta_prev > 0.0, "b_term: beta_prev must be positive");
  return estimate(
      batch,
      [&cfg, l, beta_prev](const ChannelSample& s, std::int64_t) {
        return b_integrand(cfg, l, beta_prev, s);
      },
      threads);
}

namespace {

// Component layout for the jsc estimator: a_1..a_K then sumb_2..sumb_K.
double compose_jsc_rate(int k, const std::vector<double>& means) {
  double denom = static_cast<double>(k);
  double prod = 1.0;
  for (int j = 2; j <= k; ++j) {
    const double a_j = means[static_cast<std::size_t>(j - 1)];
    if (!(a_j > 0.0)) throw NumericalError("jsc_sym_rate: a_t estimate is not positive");
    prod *= means[static_cast<std::size_t>(k + j - 2)] / a_j;
    denom += binomial(k, j) * prod;
  }
  return means[0] / denom;
}

AlphaVector jsc_alphas(int k, const std::vector<double>& means) {
  AlphaVector av;
  av.alphas.assign(static_cast<std::size_t>(k), 0.0);
  double denom = static_cast<double>(k);
  double prod = 1.0;
  for (int j = 2; j <= k; ++j) {
    prod *= means[static_cast<std::size_t>(k + j - 2)] / means[static_cast<std::size_t>(j - 1)];
    denom += binomial(k, j) * prod;
  }
  double alpha = static_cast<double>(k) / denom;  // alpha_1
  av.alphas[0] = alpha;
  for (int j = 2; j <= k; ++j) {
    alpha *= (binomial(k, j) / binomial(k, j - 1)) *
             (means[static_cast<std::size_t>(k + j - 2)] / means[static_cast<std::size_t>(j - 1)]);
    av.alphas[static_cast<std::size_t>(j - 1)] = alpha;
  }
  return av;
}

}  // namespace

JscResult jsc_sym_rate(const GbcConfig& cfg, const BetaVector& betas, const SampleBatch& batch,
                       int threads) {
  cfg.validate();
  betas.validate(cfg.users);
  const int k = cfg.users;
  const int nt = cfg.tx_antennas;
  const int nr = cfg.rx_antennas;
  const int n_comp = 2 * k - 1;

  MultiIntegrand f = [&cfg, &betas, k, nt, nr](const ChannelSample& s, std::int64_t, double* out) {
    const auto g = grams(cfg, s);
    const Eigen::MatrixXcd a1m = Eigen::MatrixXcd::Identity(nt, nt) + cfg.snr * g.g1;
    for (int t = 1; t < k; ++t) {
      Eigen::MatrixXcd m = a1m;
      m += (cfg.snr / betas.betas[static_cast<std::size_t>(t - 1)]) *
           g.suffix[static_cast<std::size_t>(t - 1)];
      out[t - 1] = log2det_hpd(m);
    }
    out[k - 1] = log2det_hpd(a1m);  // a_K

    if (k >= 2) {
      const auto llt = a1m.llt();
      std::vector<Eigen::MatrixXcd> ml(static_cast<std::size_t>(k));
      for (int l = 1; l <= k; ++l) {
        const auto bl = s.block(l);
        ml[static_cast<std::size_t>(l - 1)] = bl * llt.solve(bl.adjoint().eval());
      }
      for (int t = 2; t <= k; ++t) {
        const double c = cfg.snr / betas.betas[static_cast<std::size_t>(t - 2)];
        double sum = 0.0;
        for (int l = 1; l <= t; ++l)
          sum += log2det_hpd(Eigen::MatrixXcd::Identity(nr, nr) +
                             c * ml[static_cast<std::size_t>(l - 1)]);
        out[k + t - 2] = sum;
      }
    }
  };

  const MultiMeans m = estimate_multi(batch, f, n_comp, threads);
  JscResult r;
  r.rate.mean = compose_jsc_rate(k, m.mean);
  r.rate.std_error =
      section_std_error(m, [k](const std::vector<double>& v) { return compose_jsc_rate(k, v); });
  r.rate.samples = m.samples;
  r.rate.seed = batch.plan().seed;
  r.rate.stream = batch.stream();
  r.alphas = jsc_alphas(k, m.mean);
  return r;
}

TwoUserResult two_user_jsc_rate(const GbcConfig& cfg, double sigma_hat_ratio,
                                const SampleBatch& batch, int threads) {
  require(cfg.users == 2 && cfg.tx_antennas == 2 && cfg.rx_antennas == 1,
          "two_user_jsc_rate requires K=2, n_t=2, n_r=1");
  require(sigma_hat_ratio > 0.0, "sigma_hat_ratio must be positive");

  // components: phase-1 det, a2 = log2(1+snr|H_1|^2), b_1, b_2
  MultiIntegrand f = [&cfg, sigma_hat_ratio](const ChannelSample& s, std::int64_t, double* out) {
    out[0] = two_user_phase1_integrand(cfg, sigma_hat_ratio, s);
    out[1] = std::log2(1.0 + cfg.snr * s.block(1).squaredNorm());
    out[2] = b_integrand(cfg, 1, sigma_hat_ratio, s);
    out[3] = b_integrand(cfg, 2, sigma_hat_ratio, s);
  };
  const auto compose = [](const std::vector<double>& v) {
    const double alpha1 = v[1] / (v[1] + 0.5 * (v[2] + v[3]));
    return 0.5 * alpha1 * v[0];
  };

  const MultiMeans m = estimate_multi(batch, f, 4, threads);
  TwoUserResult r;
  r.rate.mean = compose(m.mean);
  r.rate.std_error = section_std_error(m, compose);
  r.rate.samples = m.samples;
  r.rate.seed = batch.plan().seed;
  r.rate.stream = batch.stream();
  r.alpha1 = m.mean[1] / (m.mean[1] + 0.5 * (m.mean[2] + m.mean[3]));
  return r;
}

McEstimate tdma_rate(const GbcConfig& cfg, const SampleBatch& batch, int threads) {
  const int nr = cfg.rx_antennas;
  McEstimate e = estimate(
      batch,
      [&cfg, nr](const ChannelSample& s, std::int64_t) {
        const auto b1 = s.block(1);
        return log2det_hpd(Eigen::MatrixXcd::Identity(nr, nr) + cfg.snr * (b1 * b1.adjoint()));
      },
      threads);
  e.mean /= cfg.users;
  e.std_error /= cfg.users;
  return e;
}

McEstimate mat2_rate(const GbcConfig& cfg, const SampleBatch& batch, int threads) {
  require(cfg.users == 2 && cfg.tx_antennas == 2 && cfg.rx_antennas == 1,
          "mat2_rate requires K=2, n_t=2, n_r=1");
  const std::uint64_t seed = batch.plan().seed;
  const std::uint64_t stream = batch.stream();
  McEstimate e = estimate(
      batch,
      [&cfg, seed, stream](const ChannelSample& s, std::int64_t i) {
        const double g = mat2_aux_gain(seed, stream, i);
        const Eigen::Matrix2cd gram = (s.stacked * s.stacked.adjoint()).topLeftCorner<2, 2>();
        const double d0 = std::sqrt(cfg.snr);
        const double d1 = std::sqrt(cfg.snr / (1.0 + 2.0 / g));
        Eigen::Matrix2cd m;
        m(0, 0) = 1.0 + d0 * d0 * gram(0, 0);
        m(0, 1) = d0 * d1 * gram(0, 1);
        m(1, 0) = d1 * d0 * gram(1, 0);
        m(1, 1) = 1.0 + d1 * d1 * gram(1, 1);
        return log2det_hpd(m);
      },
      threads);
  e.mean /= 3.0;
  e.std_error /= 3.0;
  return e;
}

McEstimate qmat_rate(const GbcConfig& cfg, const SampleBatch& batch, int threads) {
  const int k = cfg.users;
  const int nr = cfg.rx_antennas;
  const int rows = cfg.rx_total();
  Eigen::VectorXd dsqrt(rows);
  for (int j = 1; j <= k; ++j) {
    const double noise = 1.0 + static_cast<double>(j - 1) * static_cast<double>(j + 2);
    for (int r = 0; r < nr; ++r) dsqrt((j - 1) * nr + r) = std::sqrt(cfg.snr / noise);
  }
  McEstimate e = estimate(
      batch,
      [rows, &dsqrt](const ChannelSample& s, std::int64_t) {
        Eigen::MatrixXcd m = s.stacked * s.stacked.adjoint();
        for (Eigen::Index r = 0; r < rows; ++r)
          for (Eigen::Index c = 0; c < rows; ++c) m(r, c) *= dsqrt(r) * dsqrt(c);
        m += Eigen::MatrixXcd::Identity(rows, rows);
        return log2det_hpd(m);
      },
      threads);
  const double scale = dof_sym(k).value() / static_cast<double>(k);
  e.mean *= scale;
  e.std_error *= scale;
  return e;
}

McEstimate upper_bound(const GbcConfig& cfg, const SampleBatch& batch, int threads) {
  McEstimate e = tdma_rate(cfg, batch, threads);
  const double scale = dof_sym(cfg.users).value() * static_cast<double>(cfg.users);
  e.mean *= scale;
  e.std_error *= scale;
  return e;
}

BetaVector qmat_equivalent_betas(int users) {
  BetaVector b;
  for (int j = 2; j <= users; ++j)
    b.betas.push_back(1.0 + static_cast<double>(j - 1) * static_cast<double>(j + 2));
  return b;
}

std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

Rational dof_sym(int users) {
  require(users >= 1, "dof_sym: K must be >= 1");
  // harmonic sum H_K = p/q, exact
  long long p = 0, q = 1;
  for (int j = 1; j <= users; ++j) {
    p = p * j + q;
    q = q * j;
    const long long g = std::gcd(p, q);
    p /= g;
    q /= g;
  }
  return Rational{q, p};
}

double dof_slope(const GbcConfig& cfg_base, const BetaVector& betas, double snr_db_lo,
                 double snr_db_hi, const McPlan& plan, int threads) {
  require(snr_db_hi > snr_db_lo, "dof_slope: snr_db_hi must exceed snr_db_lo");
  const GbcConfig lo =
      GbcConfig::from_snr_db(cfg_base.users, cfg_base.tx_antennas, cfg_base.rx_antennas, snr_db_lo);
  const GbcConfig hi =
      GbcConfig::from_snr_db(cfg_base.users, cfg_base.tx_antennas, cfg_base.rx_antennas, snr_db_hi);
  // the fading ensemble does not depend on snr, so one batch serves both points
  const SampleBatch batch = SampleBatch::automatic(lo, plan);
  const double r_lo = jsc_sym_rate(lo, betas, batch, threads).rate.mean;
  const double r_hi = jsc_sym_rate(hi, betas, batch, threads).rate.mean;
  return (r_hi - r_lo) / std::log2(hi.snr / lo.snr);
}

}  // namespace bcfeed::gbc

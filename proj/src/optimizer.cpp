#include "bcfeed/optimizer.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <optional>

namespace bcfeed::opt {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Per-sample spectral cache: beta enters a_t and the b terms only as a scalar,
// so each table value is a sum of log2(1 + nu/beta) over cached eigenvalues.
//   a_t(beta) = logdet(A_1) + sum_i log2(1 + nu_{t,i}/beta),   nu: gen-eig of (snr*S_t, A_1)
//   b_l(beta) = sum_i log2(1 + (snr/beta) * lam_{l,i}),        lam: eig of H_l A_1^{-1} H_l^H
struct SpectralCache {
  int users = 0, nt = 0, nr = 0;
  double snr = 0.0;
  std::int64_t samples = 0;
  // flattened per-sample doubles: [logdetA1, nu(t=1..K-1, nt each), lam(l=1..K, nr each)]
  std::vector<double> data;
  int stride = 0;

  double logdet_a1(std::int64_t i) const { return data[static_cast<std::size_t>(i) * stride]; }
  const double* nu(std::int64_t i, int t) const {
    return &data[static_cast<std::size_t>(i) * stride + 1 + static_cast<std::size_t>(t - 1) * nt];
  }
  const double* lam(std::int64_t i, int l) const {
    return &data[static_cast<std::size_t>(i) * stride + 1 +
                 static_cast<std::size_t>(users - 1) * nt + static_cast<std::size_t>(l - 1) * nr];
  }
};

SpectralCache build_cache(const GbcConfig& cfg, const SampleBatch& batch, int threads) {
  SpectralCache c;
  c.users = cfg.users;
  c.nt = cfg.tx_antennas;
  c.nr = cfg.rx_antennas;
  c.snr = cfg.snr;
  c.samples = batch.size();
  c.stride = 1 + (cfg.users - 1) * cfg.tx_antennas + cfg.users * cfg.rx_antennas;
  c.data.assign(static_cast<std::size_t>(c.samples) * c.stride, 0.0);
  double* base = c.data.data();
  const int stride = c.stride;
  const int nt = c.nt, nr = c.nr, k = c.users;

  MultiIntegrand fill = [&cfg, base, stride, nt, nr, k](const ChannelSample& s, std::int64_t i,
                                                        double* out) {
    double* dst = base + static_cast<std::size_t>(i) * stride;
    const auto b1 = s.block(1);
    const Eigen::MatrixXcd a1 =
        Eigen::MatrixXcd::Identity(nt, nt) + cfg.snr * (b1.adjoint() * b1);
    dst[0] = gbc::log2det_hpd(a1);

    // suffix grams for the a tables
    Eigen::MatrixXcd suffix = Eigen::MatrixXcd::Zero(nt, nt);
    for (int t = k - 1; t >= 1; --t) {
      const auto bt = s.block(t + 1);
      suffix += bt.adjoint() * bt;
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> ges(
          (cfg.snr * suffix).eval(), a1, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
      if (ges.info() != Eigen::Success)
        throw NumericalError("optimizer cache: generalized eigensolver failed");
      for (int e = 0; e < nt; ++e)
        dst[1 + (t - 1) * nt + e] = std::max(0.0, ges.eigenvalues()(e));
    }

    const auto llt = a1.llt();
    for (int l = 1; l <= k; ++l) {
      const auto bl = s.block(l);
      const Eigen::MatrixXcd ml = bl * llt.solve(bl.adjoint().eval());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ml, Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success)
        throw NumericalError("optimizer cache: eigensolver failed");
      for (int e = 0; e < nr; ++e)
        dst[1 + (k - 1) * nt + (l - 1) * nr + e] = std::max(0.0, es.eigenvalues()(e));
    }
    out[0] = dst[0];  // keeps the finite-value guard of the driver engaged
  };
  estimate_multi(batch, fill, 1, threads);
  return c;
}

// Grid tables of the expectations. a_table[t-1][g] = E[a_t(grid[g])] for
// t = 1..K-1; a_last = E[a_K]; sumb_table[t-2][g] = E[sum_{l<=t} b_l(grid[g])].
struct Tables {
  std::vector<std::vector<double>> a_table;
  double a_last = 0.0;
  std::vector<std::vector<double>> sumb_table;
};

Tables build_tables(const SpectralCache& c, const std::vector<double>& grid) {
  const int k = c.users;
  const std::size_t p = grid.size();
  Tables t;
  t.a_table.assign(static_cast<std::size_t>(k - 1), std::vector<double>(p, 0.0));
  t.sumb_table.assign(static_cast<std::size_t>(k - 1), std::vector<double>(p, 0.0));
  std::vector<double> b_l(static_cast<std::size_t>(k) * p, 0.0);

  double ld_sum = 0.0;
  for (std::int64_t i = 0; i < c.samples; ++i) {
    ld_sum += c.logdet_a1(i);
    for (int tt = 1; tt < k; ++tt) {
      const double* nu = c.nu(i, tt);
      for (std::size_t g = 0; g < p; ++g) {
        double acc = 0.0;
        for (int e = 0; e < c.nt; ++e) acc += std::log2(1.0 + nu[e] / grid[g]);
        t.a_table[static_cast<std::size_t>(tt - 1)][g] += acc;
      }
    }
    for (int l = 1; l <= k; ++l) {
      const double* lam = c.lam(i, l);
      for (std::size_t g = 0; g < p; ++g) {
        double acc = 0.0;
        for (int e = 0; e < c.nr; ++e) acc += std::log2(1.0 + (c.snr / grid[g]) * lam[e]);
        b_l[static_cast<std::size_t>(l - 1) * p + g] += acc;
      }
    }
  }

  const double inv_n = 1.0 / static_cast<double>(c.samples);
  t.a_last = ld_sum * inv_n;
  for (auto& row : t.a_table)
    for (double& v : row) v = v * inv_n + t.a_last;  // logdetA1 + weighted part
  for (int tt = 2; tt <= k; ++tt) {
    auto& row = t.sumb_table[static_cast<std::size_t>(tt - 2)];
    for (std::size_t g = 0; g < p; ++g) {
      double acc = 0.0;
      for (int l = 1; l <= tt; ++l) acc += b_l[static_cast<std::size_t>(l - 1) * p + g];
      row[g] = acc * inv_n;
    }
  }
  return t;
}

// Rate at grid indices (idx[0..K-2]) composed from the tables.
double compose(int k, const Tables& t, const std::vector<int>& idx) {
  double denom = static_cast<double>(k);
  double prod = 1.0;
  for (int j = 2; j <= k; ++j) {
    const double a_j = (j < k) ? t.a_table[static_cast<std::size_t>(j - 1)]
                                          [static_cast<std::size_t>(idx[static_cast<std::size_t>(j - 1)])]
                               : t.a_last;
    const double sb =
        t.sumb_table[static_cast<std::size_t>(j - 2)]
                    [static_cast<std::size_t>(idx[static_cast<std::size_t>(j - 2)])];
    prod *= sb / a_j;
    denom += binomial(k, j) * prod;
  }
  return t.a_table[0][static_cast<std::size_t>(idx[0])] / denom;
}

}  // namespace

void BetaGrid::validate() const {
  require(log10_min < log10_max, "beta grid: log10_min must be < log10_max");
  require(points_per_dim >= 2, "beta grid: points_per_dim must be >= 2");
}

std::vector<double> BetaGrid::values() const {
  validate();
  std::vector<double> v(static_cast<std::size_t>(points_per_dim));
  for (int i = 0; i < points_per_dim; ++i) {
    const double x =
        log10_min + (log10_max - log10_min) * static_cast<double>(i) /
                        static_cast<double>(points_per_dim - 1);
    v[static_cast<std::size_t>(i)] = std::pow(10.0, x);
  }
  return v;
}

OptResult optimize_beta(const GbcConfig& cfg, const BetaGrid& grid, const McPlan& plan, int threads,
                        bool dump_grid, const SampleBatch* search_batch) {
  cfg.validate();
  plan.validate();
  grid.validate();
  const int k = cfg.users;

  OptResult res;
  res.grid = grid;

  std::optional<SampleBatch> owned;
  if (!search_batch) owned.emplace(SampleBatch::automatic(cfg, plan, 0));
  const SampleBatch& search = search_batch ? *search_batch : *owned;

  if (k == 1) {
    // nothing to optimize: the single-user rate
    const auto r = gbc::jsc_sym_rate(cfg, gbc::BetaVector{}, search, threads);
    res.best_rate = r.rate;
    res.alphas = r.alphas;
    res.search_rate = r.rate.mean;
    res.evaluations = 1;
    return res;
  }

  const std::vector<double> values = grid.values();
  const SpectralCache cache = build_cache(cfg, search, threads);
  const Tables tables = build_tables(cache, values);

  const int p = grid.points_per_dim;
  const int dims = k - 1;
  std::vector<int> idx(static_cast<std::size_t>(dims), 0);
  std::vector<int> best_idx = idx;
  double best = -std::numeric_limits<double>::infinity();
  std::int64_t evals = 0;
  if (dump_grid) {
    std::int64_t total = 1;
    for (int d = 0; d < dims; ++d) total *= p;
    res.grid_rates.reserve(static_cast<std::size_t>(total));
  }
  while (true) {
    const double r = compose(k, tables, idx);
    if (dump_grid) res.grid_rates.push_back(r);
    ++evals;
    if (r > best) {  // strict: ties keep the lexicographically smallest beta
      best = r;
      best_idx = idx;
    }
    int d = dims - 1;
    while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == p) {
      idx[static_cast<std::size_t>(d)] = 0;
      --d;
    }
    if (d < 0) break;
  }
  res.evaluations = evals;
  res.search_rate = best;
  res.best_betas.betas.resize(static_cast<std::size_t>(dims));
  for (int d = 0; d < dims; ++d)
    res.best_betas.betas[static_cast<std::size_t>(d)] =
        values[static_cast<std::size_t>(best_idx[static_cast<std::size_t>(d)])];

  // independent validation batch removes the selection bias of the argmax
  const SampleBatch validation = SampleBatch::automatic(cfg, plan, search.stream() + 1);
  const auto v = gbc::jsc_sym_rate(cfg, res.best_betas, validation, threads);
  res.best_rate = v.rate;
  res.alphas = v.alphas;
  return res;
}

gbc::RatePoint rate_at_fixed_beta(const GbcConfig& cfg, const gbc::BetaVector& betas,
                                  const McPlan& plan, int threads) {
  cfg.validate();
  plan.validate();
  betas.validate(cfg.users);
  const SampleBatch batch = SampleBatch::automatic(cfg, plan, 0);
  const auto r = gbc::jsc_sym_rate(cfg, betas, batch, threads);
  gbc::RatePoint pt;
  pt.snr_db = cfg.snr_db;
  pt.scheme = gbc::Scheme::JSC_FIXED_BETA;
  pt.rate = r.rate;
  pt.betas = betas;
  pt.alphas = r.alphas;
  return pt;
}

nlohmann::json to_json(const OptResult& r) {
  nlohmann::json j{{"best_betas", r.best_betas.betas},
                   {"best_rate",
                    {{"mean", r.best_rate.mean},
                     {"stderr", r.best_rate.std_error},
                     {"samples", r.best_rate.samples},
                     {"seed", r.best_rate.seed},
                     {"stream", r.best_rate.stream}}},
                   {"alphas", r.alphas.alphas},
                   {"evaluations", r.evaluations},
                   {"search_rate", r.search_rate},
                   {"grid",
                    {{"log10_min", r.grid.log10_min},
                     {"log10_max", r.grid.log10_max},
                     {"points_per_dim", r.grid.points_per_dim}}}};
  if (!r.grid_rates.empty()) j["grid_rates"] = r.grid_rates;
  return j;
}

}  // namespace bcfeed::opt

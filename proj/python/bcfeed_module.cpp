#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bcfeed/ebc.hpp"
#include "bcfeed/optimizer.hpp"
#include "bcfeed/sweep.hpp"

namespace py = pybind11;
using namespace bcfeed;

namespace {

SymmetricDeltas make_deltas(const std::vector<double>& d) {
  SymmetricDeltas s;
  s.deltas = d;
  s.validate();
  return s;
}

py::dict estimate_dict(const McEstimate& e) {
  py::dict d;
  d["mean"] = e.mean;
  d["stderr"] = e.std_error;
  d["samples"] = e.samples;
  d["seed"] = e.seed;
  d["stream"] = e.stream;
  return d;
}

McPlan make_plan(std::int64_t samples, std::uint64_t seed) {
  McPlan p;
  p.samples = samples;
  p.seed = seed;
  p.validate();
  return p;
}

}  // namespace

PYBIND11_MODULE(_bcfeed, m) {
  m.doc() = "achievable symmetric rates for broadcast channels with delayed state feedback";

  py::class_<GbcConfig>(m, "GbcConfig")
      .def_static("from_snr_db", &GbcConfig::from_snr_db, py::arg("users"), py::arg("tx"),
                  py::arg("rx"), py::arg("snr_db"))
      .def_static("from_snr", &GbcConfig::from_snr, py::arg("users"), py::arg("tx"), py::arg("rx"),
                  py::arg("snr"))
      .def_readonly("users", &GbcConfig::users)
      .def_readonly("tx_antennas", &GbcConfig::tx_antennas)
      .def_readonly("rx_antennas", &GbcConfig::rx_antennas)
      .def_readonly("snr", &GbcConfig::snr)
      .def_readonly("snr_db", &GbcConfig::snr_db);

  m.def("dof_sym", [](int users) {
    const auto d = gbc::dof_sym(users);
    return py::make_tuple(d.num, d.den);
  });

  m.def(
      "tdma_rate",
      [](const GbcConfig& cfg, std::int64_t samples, std::uint64_t seed, int threads) {
        const auto b = SampleBatch::automatic(cfg, make_plan(samples, seed));
        return estimate_dict(gbc::tdma_rate(cfg, b, threads));
      },
      py::arg("cfg"), py::arg("samples") = 100000, py::arg("seed") = 0, py::arg("threads") = 0);
  m.def(
      "mat2_rate",
      [](const GbcConfig& cfg, std::int64_t samples, std::uint64_t seed, int threads) {
        const auto b = SampleBatch::automatic(cfg, make_plan(samples, seed));
        return estimate_dict(gbc::mat2_rate(cfg, b, threads));
      },
      py::arg("cfg"), py::arg("samples") = 100000, py::arg("seed") = 0, py::arg("threads") = 0);
  m.def(
      "qmat_rate",
      [](const GbcConfig& cfg, std::int64_t samples, std::uint64_t seed, int threads) {
        const auto b = SampleBatch::automatic(cfg, make_plan(samples, seed));
        return estimate_dict(gbc::qmat_rate(cfg, b, threads));
      },
      py::arg("cfg"), py::arg("samples") = 100000, py::arg("seed") = 0, py::arg("threads") = 0);
  m.def(
      "upper_bound",
      [](const GbcConfig& cfg, std::int64_t samples, std::uint64_t seed, int threads) {
        const auto b = SampleBatch::automatic(cfg, make_plan(samples, seed));
        return estimate_dict(gbc::upper_bound(cfg, b, threads));
      },
      py::arg("cfg"), py::arg("samples") = 100000, py::arg("seed") = 0, py::arg("threads") = 0);
  m.def(
      "jsc_sym_rate",
      [](const GbcConfig& cfg, const std::vector<double>& betas, std::int64_t samples,
         std::uint64_t seed, int threads) {
        const auto b = SampleBatch::automatic(cfg, make_plan(samples, seed));
        const auto r = gbc::jsc_sym_rate(cfg, gbc::BetaVector{betas}, b, threads);
        py::dict d = estimate_dict(r.rate);
        d["alphas"] = r.alphas.alphas;
        return d;
      },
      py::arg("cfg"), py::arg("betas"), py::arg("samples") = 100000, py::arg("seed") = 0,
      py::arg("threads") = 0);
  m.def(
      "two_user_jsc_rate",
      [](const GbcConfig& cfg, double sigma_hat_ratio, std::int64_t samples, std::uint64_t seed,
         int threads) {
        const auto b = SampleBatch::automatic(cfg, make_plan(samples, seed));
        const auto r = gbc::two_user_jsc_rate(cfg, sigma_hat_ratio, b, threads);
        py::dict d = estimate_dict(r.rate);
        d["alpha1"] = r.alpha1;
        return d;
      },
      py::arg("cfg"), py::arg("sigma_hat_ratio"), py::arg("samples") = 100000, py::arg("seed") = 0,
      py::arg("threads") = 0);
  m.def(
      "optimize_beta",
      [](const GbcConfig& cfg, double log10_min, double log10_max, int points,
         std::int64_t samples, std::uint64_t seed, int threads) {
        opt::BetaGrid grid;
        grid.log10_min = log10_min;
        grid.log10_max = log10_max;
        grid.points_per_dim = points;
        const auto r = opt::optimize_beta(cfg, grid, make_plan(samples, seed), threads);
        py::dict d = estimate_dict(r.best_rate);
        d["betas"] = r.best_betas.betas;
        d["alphas"] = r.alphas.alphas;
        d["evaluations"] = r.evaluations;
        d["search_rate"] = r.search_rate;
        return d;
      },
      py::arg("cfg"), py::arg("log10_min") = -1.5, py::arg("log10_max") = 1.5,
      py::arg("points") = 60, py::arg("samples") = 100000, py::arg("seed") = 0,
      py::arg("threads") = 0);
  m.def("qmat_equivalent_betas",
        [](int users) { return gbc::qmat_equivalent_betas(users).betas; });

  // erasure BC
  m.def("sym_rate_ebc", [](const std::vector<double>& deltas, double alphabet_bits) {
    return ebc::sym_rate_ebc(make_deltas(deltas), alphabet_bits);
  });
  m.def("mu_solve", [](const std::vector<double>& deltas) {
    const auto mu = ebc::mu_solver_symmetric(make_deltas(deltas));
    py::dict d;
    for (Mask j = 1; j < mu.mu.size(); ++j)
      if (mu.mu[j] != 0.0) d[py::int_(j)] = mu.mu[j];
    return d;
  });
  m.def(
      "region_check",
      [](const std::vector<double>& rates, const std::vector<double>& deltas, double alphabet_bits) {
        const auto rep = ebc::sym_capacity_region_check(rates, make_deltas(deltas), alphabet_bits);
        py::dict d;
        d["feasible"] = rep.feasible;
        d["max_weighted_sum"] = rep.max_weighted_sum;
        d["binding_permutation"] = rep.binding_perm;
        return d;
      },
      py::arg("rates"), py::arg("deltas"), py::arg("alphabet_bits") = 1.0);
  m.def("lemma2_check", [](const std::vector<double>& deltas) {
    const auto d = make_deltas(deltas);
    return ebc::lemma2_check(ebc::mu_solver_symmetric(d), d);
  });

  m.attr("__version__") = "0.1.0";
}

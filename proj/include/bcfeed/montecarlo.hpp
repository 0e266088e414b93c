#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "bcfeed/channel.hpp"
#include "bcfeed/errors.hpp"

namespace bcfeed {

struct McPlan {
  std::int64_t samples = 100000;
  std::uint64_t seed = 0;
  std::int64_t chunk = 8192;  // work-unit granularity; never affects results

  void validate() const;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

inline constexpr std::size_t kDefaultBatchBudgetBytes = std::size_t{1} << 30;

// A channel-sample ensemble addressed by index. Cached batches hold all
// samples in memory (common random numbers across beta grids and schemes);
// streaming batches redraw sample i on demand. Both produce bit-identical
// estimates because sample i is a pure function of (seed, stream, i).
class SampleBatch {
 public:
  // Throws NumericalError if the cache would exceed budget_bytes,
  // suggesting streaming mode.
  static SampleBatch cached(const GbcConfig& cfg, const McPlan& plan, std::uint64_t stream = 0,
                            std::size_t budget_bytes = kDefaultBatchBudgetBytes);
  static SampleBatch streaming(const GbcConfig& cfg, const McPlan& plan, std::uint64_t stream = 0);
  // cached if it fits the budget, streaming otherwise
  static SampleBatch automatic(const GbcConfig& cfg, const McPlan& plan, std::uint64_t stream = 0,
                               std::size_t budget_bytes = kDefaultBatchBudgetBytes);

  static std::size_t cache_bytes(const GbcConfig& cfg, const McPlan& plan);

  const GbcConfig& config() const { return cfg_; }
  const McPlan& plan() const { return plan_; }
  std::uint64_t stream() const { return stream_; }
  std::int64_t size() const { return plan_.samples; }
  bool is_cached() const { return cached_.has_value(); }

  // Fills `scratch` in streaming mode; returns a reference valid until the
  // next call with the same scratch.
  const ChannelSample& sample(std::int64_t i, ChannelSample& scratch) const;
  ChannelSample sample(std::int64_t i) const;

 private:
  SampleBatch(const GbcConfig& cfg, const McPlan& plan, std::uint64_t stream)
      : cfg_(cfg), plan_(plan), stream_(stream) {}

  GbcConfig cfg_;
  McPlan plan_;
  std::uint64_t stream_ = 0;
  std::optional<std::vector<ChannelSample>> cached_;
};

// Per-sample integrand: f(sample, index) -> value. Must be finite on every
// valid sample; a non-finite value aborts with the offending index.
using Integrand = std::function<double(const ChannelSample&, std::int64_t)>;

// Mean and standard error (sample std / sqrt(n)) of an integrand over a batch.
// Identical results for any thread count or plan.chunk: samples are reduced in
// fixed 1024-sample blocks combined in block order.
McEstimate estimate(const SampleBatch& batch, const Integrand& f, int threads = 0);

// Streaming convenience: draws samples on the fly from (plan.seed, stream).
McEstimate estimate(const McPlan& plan, const GbcConfig& cfg, const Integrand& f,
                    std::uint64_t stream = 0, int threads = 0);

// Joint estimation of several per-sample components, with per-section means
// for batch-means error bars on derived (nonlinear) quantities. Sections are
// fixed, contiguous runs of reduction blocks, so they too are independent of
// threading.
struct MultiMeans {
  std::vector<double> mean;                       // per component
  std::vector<std::vector<double>> section_mean;  // [section][component]
  std::vector<std::int64_t> section_count;
  std::int64_t samples = 0;
};

inline constexpr int kSections = 20;

using MultiIntegrand =
    std::function<void(const ChannelSample&, std::int64_t, double* out /* n_components */)>;

MultiMeans estimate_multi(const SampleBatch& batch, const MultiIntegrand& f, int n_components,
                          int threads = 0);

// Standard error of a scalar functional g applied to the component means,
// via batch means over the sections: sd(g(section means)) / sqrt(#sections).
double section_std_error(const MultiMeans& m,
                         const std::function<double(const std::vector<double>&)>& g);

}  // namespace bcfeed

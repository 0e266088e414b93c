#include "bcfeed/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

namespace bcfeed {

namespace {

constexpr std::int64_t kReduceBlock = 1024;  // fixed; reduction order never changes

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs fn(block_index, sample_begin, sample_end) over all reduction blocks,
// distributing whole blocks to workers. Each block is processed entirely by
// one worker; callers combine per-block results in block order.
template <class Fn>
void run_blocks(std::int64_t samples, std::int64_t chunk, int threads, const Fn& fn) {
  const std::int64_t n_blocks = (samples + kReduceBlock - 1) / kReduceBlock;
  const std::int64_t blocks_per_task =
      std::max<std::int64_t>(1, (std::max<std::int64_t>(chunk, 1) + kReduceBlock - 1) / kReduceBlock);
  const std::int64_t n_tasks = (n_blocks + blocks_per_task - 1) / blocks_per_task;
  const int workers = static_cast<int>(std::min<std::int64_t>(resolve_threads(threads), n_tasks));

  auto run_task = [&](std::int64_t task) {
    const std::int64_t b0 = task * blocks_per_task;
    const std::int64_t b1 = std::min(b0 + blocks_per_task, n_blocks);
    for (std::int64_t b = b0; b < b1; ++b) {
      const std::int64_t s0 = b * kReduceBlock;
      const std::int64_t s1 = std::min(s0 + kReduceBlock, samples);
      fn(b, s0, s1);
    }
  };

  if (workers <= 1) {
    for (std::int64_t t = 0; t < n_tasks; ++t) run_task(t);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        while (!failed.load(std::memory_order_relaxed)) {
          const std::int64_t t = next.fetch_add(1);
          if (t >= n_tasks) break;
          run_task(t);
        }
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

void McPlan::validate() const {
  if (samples < 1) throw std::invalid_argument("plan.samples must be >= 1");
  if (chunk < 1) throw std::invalid_argument("plan.chunk must be >= 1");
}

std::size_t SampleBatch::cache_bytes(const GbcConfig& cfg, const McPlan& plan) {
  const std::size_t per =
      sizeof(ChannelSample) +
      static_cast<std::size_t>(cfg.rx_total()) * cfg.tx_antennas * sizeof(std::complex<double>);
  return per * static_cast<std::size_t>(plan.samples);
}

SampleBatch SampleBatch::cached(const GbcConfig& cfg, const McPlan& plan, std::uint64_t stream,
                                std::size_t budget_bytes) {
  cfg.validate();
  plan.validate();
  const std::size_t need = cache_bytes(cfg, plan);
  if (need > budget_bytes) {
    std::ostringstream msg;
    msg << "sample cache needs " << need << " bytes, budget is " << budget_bytes
        << "; use streaming mode";
    throw NumericalError(msg.str());
  }
  SampleBatch b(cfg, plan, stream);
  b.cached_.emplace();
  b.cached_->resize(static_cast<std::size_t>(plan.samples));
  auto& cache = *b.cached_;
  run_blocks(plan.samples, plan.chunk, 0, [&](std::int64_t, std::int64_t s0, std::int64_t s1) {
    for (std::int64_t i = s0; i < s1; ++i)
      draw_channel_into(cfg, plan.seed, stream, static_cast<std::uint64_t>(i),
                        cache[static_cast<std::size_t>(i)]);
  });
  return b;
}

SampleBatch SampleBatch::streaming(const GbcConfig& cfg, const McPlan& plan, std::uint64_t stream) {
  cfg.validate();
  plan.validate();
  return SampleBatch(cfg, plan, stream);
}

SampleBatch SampleBatch::automatic(const GbcConfig& cfg, const McPlan& plan, std::uint64_t stream,
                                   std::size_t budget_bytes) {
  if (cache_bytes(cfg, plan) <= budget_bytes) return cached(cfg, plan, stream, budget_bytes);
  return streaming(cfg, plan, stream);
}

const ChannelSample& SampleBatch::sample(std::int64_t i, ChannelSample& scratch) const {
  if (cached_) return (*cached_)[static_cast<std::size_t>(i)];
  draw_channel_into(cfg_, plan_.seed, stream_, static_cast<std::uint64_t>(i), scratch);
  return scratch;
}

ChannelSample SampleBatch::sample(std::int64_t i) const {
  if (cached_) return (*cached_)[static_cast<std::size_t>(i)];
  return draw_channel(cfg_, plan_.seed, stream_, static_cast<std::uint64_t>(i));
}

McEstimate estimate(const SampleBatch& batch, const Integrand& f, int threads) {
  const std::int64_t n = batch.size();
  const std::int64_t n_blocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> sums(static_cast<std::size_t>(n_blocks), 0.0);
  std::vector<double> sqs(static_cast<std::size_t>(n_blocks), 0.0);
  std::atomic<std::int64_t> bad_index{-1};

  run_blocks(n, batch.plan().chunk, threads, [&](std::int64_t b, std::int64_t s0, std::int64_t s1) {
    ChannelSample scratch;
    double sum = 0.0, sq = 0.0;
    for (std::int64_t i = s0; i < s1; ++i) {
      const double v = f(batch.sample(i, scratch), i);
      if (!std::isfinite(v)) {
        std::int64_t cur = bad_index.load();
        while ((cur == -1 || i < cur) && !bad_index.compare_exchange_weak(cur, i)) {
        }
        return;
      }
      sum += v;
      sq += v * v;
    }
    sums[static_cast<std::size_t>(b)] = sum;
    sqs[static_cast<std::size_t>(b)] = sq;
  });

  if (bad_index.load() >= 0) {
    std::ostringstream msg;
    msg << "non-finite integrand value at sample index " << bad_index.load();
    throw NumericalError(msg.str());
  }

  double s1 = 0.0, s2 = 0.0;
  for (std::int64_t b = 0; b < n_blocks; ++b) {
    s1 += sums[static_cast<std::size_t>(b)];
    s2 += sqs[static_cast<std::size_t>(b)];
  }
  McEstimate e;
  e.samples = n;
  e.seed = batch.plan().seed;
  e.stream = batch.stream();
  e.mean = s1 / static_cast<double>(n);
  if (n >= 2) {
    const double var = std::max(0.0, (s2 - s1 * s1 / static_cast<double>(n)) /
                                         static_cast<double>(n - 1));
    e.std_error = std::sqrt(var / static_cast<double>(n));
  }
  return e;
}

McEstimate estimate(const McPlan& plan, const GbcConfig& cfg, const Integrand& f,
                    std::uint64_t stream, int threads) {
  return estimate(SampleBatch::streaming(cfg, plan, stream), f, threads);
}

MultiMeans estimate_multi(const SampleBatch& batch, const MultiIntegrand& f, int n_components,
                          int threads) {
  const std::int64_t n = batch.size();
  const std::int64_t n_blocks = (n + kReduceBlock - 1) / kReduceBlock;
  const std::size_t c = static_cast<std::size_t>(n_components);
  std::vector<double> block_sums(static_cast<std::size_t>(n_blocks) * c, 0.0);
  std::atomic<std::int64_t> bad_index{-1};

  run_blocks(n, batch.plan().chunk, threads, [&](std::int64_t b, std::int64_t s0, std::int64_t s1) {
    ChannelSample scratch;
    std::vector<double> vals(c);
    std::vector<double> acc(c, 0.0);
    for (std::int64_t i = s0; i < s1; ++i) {
      f(batch.sample(i, scratch), i, vals.data());
      for (std::size_t j = 0; j < c; ++j) {
        if (!std::isfinite(vals[j])) {
          std::int64_t cur = bad_index.load();
          while ((cur == -1 || i < cur) && !bad_index.compare_exchange_weak(cur, i)) {
          }
          return;
        }
        acc[j] += vals[j];
      }
    }
    for (std::size_t j = 0; j < c; ++j) block_sums[static_cast<std::size_t>(b) * c + j] = acc[j];
  });

  if (bad_index.load() >= 0) {
    std::ostringstream msg;
    msg << "non-finite integrand value at sample index " << bad_index.load();
    throw NumericalError(msg.str());
  }

  // section s owns reduction blocks [floor(s*NB/S), floor((s+1)*NB/S)); a
  // fixed function of the sample count, so error bars are thread-invariant
  const int n_sections = static_cast<int>(std::min<std::int64_t>(kSections, n_blocks));
  MultiMeans m;
  m.samples = n;
  m.mean.assign(c, 0.0);
  m.section_mean.assign(static_cast<std::size_t>(n_sections), std::vector<double>(c, 0.0));
  m.section_count.assign(static_cast<std::size_t>(n_sections), 0);
  for (std::int64_t b = 0; b < n_blocks; ++b) {
    const int sec = static_cast<int>(b * n_sections / n_blocks);
    const std::int64_t s0 = b * kReduceBlock;
    const std::int64_t s1 = std::min(s0 + kReduceBlock, n);
    m.section_count[static_cast<std::size_t>(sec)] += s1 - s0;
    for (std::size_t j = 0; j < c; ++j) {
      const double v = block_sums[static_cast<std::size_t>(b) * c + j];
      m.mean[j] += v;
      m.section_mean[static_cast<std::size_t>(sec)][j] += v;
    }
  }
  for (std::size_t j = 0; j < c; ++j) m.mean[j] /= static_cast<double>(n);
  for (std::size_t s = 0; s < m.section_mean.size(); ++s)
    for (std::size_t j = 0; j < c; ++j)
      m.section_mean[s][j] /= static_cast<double>(m.section_count[s]);
  return m;
}

double section_std_error(const MultiMeans& m,
                         const std::function<double(const std::vector<double>&)>& g) {
  const std::size_t s = m.section_mean.size();
  if (s < 2) return 0.0;
  std::vector<double> vals(s);
  double mean = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    vals[i] = g(m.section_mean[i]);
    mean += vals[i];
  }
  mean /= static_cast<double>(s);
  double var = 0.0;
  for (double v : vals) var += (v - mean) * (v - mean);
  var /= static_cast<double>(s - 1);
  return std::sqrt(var / static_cast<double>(s));
}

}  // namespace bcfeed

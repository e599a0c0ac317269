#pragma once

// Paired bootstrap resampling for system comparison.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "structeval/docmetrics.hpp"
#include "structeval/error.hpp"

namespace structeval {

struct BootstrapConfig {
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Document indices drawn with replacement for one trial. The stream depends
// only on (seed, trial), so trials can run in any order.
inline std::vector<std::size_t> bootstrap_sample(std::size_t n, std::uint64_t seed, std::size_t trial) {
  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(trial)));
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = static_cast<std::size_t>(rng() % n);
  return idx;
}

// One-sided p-value for "system beats baseline": the add-one smoothed share
// of resamples in which the baseline scores at least as high as the system.
// `metric(per_doc, indices)` recomputes a corpus score from a resample.
// Throws LengthMismatch, ConfigError.
template <typename T, typename Metric>
double paired_bootstrap(std::span<const T> baseline, std::span<const T> system, Metric&& metric,
                        const BootstrapConfig& cfg = {}) {
  if (baseline.size() != system.size()) throw LengthMismatch(baseline.size(), system.size());
  if (baseline.size() < 2) throw ConfigError("bootstrap needs at least 2 documents");
  if (cfg.trials < 1) throw ConfigError("bootstrap needs at least 1 trial");

  std::vector<char> baseline_wins(cfg.trials, 0);
  parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
    auto idx = bootstrap_sample(baseline.size(), cfg.seed, t);
    std::span<const std::size_t> s(idx);
    baseline_wins[t] = metric(baseline, s) >= metric(system, s);
  });
  std::size_t count = 0;
  for (char w : baseline_wins) count += w ? 1 : 0;
  return static_cast<double>(count + 1) / static_cast<double>(cfg.trials + 1);
}

// Mean of per-document values over a resample.
inline double resample_mean(std::span<const double> values, std::span<const std::size_t> idx) {
  double s = 0.0;
  for (std::size_t i : idx) s += values[i];
  return s / static_cast<double>(idx.size());
}

inline double paired_bootstrap_mean(std::span<const double> baseline, std::span<const double> system,
                                    const BootstrapConfig& cfg = {}) {
  return paired_bootstrap<double>(baseline, system, resample_mean, cfg);
}

}  // namespace structeval

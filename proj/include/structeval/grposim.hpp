#pragma once

// GRPO on a categorical policy over a fixed candidate pool.
//
// Each step samples K candidates with replacement, standardizes their
// rewards within the group, and takes one plain gradient-ascent step on
//
//   J(theta) = (1/K) sum_i A_i log pi(a_i)  -  beta * KL(pi || pi_ref)
//
// with pi = softmax(theta). The gradient is analytic:
//   d/dtheta_j log pi(a)   = [j == a] - pi_j
//   d/dtheta_j KL(pi||ref) = pi_j * (log pi_j - log ref_j - KL)

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "structeval/error.hpp"
#include "structeval/rewards.hpp"

namespace structeval {

struct CandidatePool {
  std::string source_id;
  std::vector<std::string> candidates;
  std::string reference;
  std::vector<double> rewards;  // scaled reward per candidate
};

// Scores every candidate against the reference. Throws ConfigError when the
// pool has fewer than two candidates, InvalidReference on a bad reference.
inline CandidatePool make_pool(std::string source_id, std::vector<std::string> candidates, std::string reference,
                               const RewardSpec& spec) {
  if (candidates.size() < 2) throw ConfigError("candidate pool needs at least 2 candidates");
  CandidatePool pool{std::move(source_id), std::move(candidates), std::move(reference), {}};
  for (const auto& c : pool.candidates) pool.rewards.push_back(score_reward(c, pool.reference, spec));
  return pool;
}

inline std::vector<double> softmax(std::span<const double> logits) {
  double mx = -INFINITY;
  for (double l : logits) mx = std::max(mx, l);
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) z += p[i] = std::exp(logits[i] - mx);
  for (double& x : p) x /= z;
  return p;
}

inline std::vector<double> log_softmax(std::span<const double> logits) {
  double mx = -INFINITY;
  for (double l : logits) mx = std::max(mx, l);
  double z = 0.0;
  for (double l : logits) z += std::exp(l - mx);
  double lz = mx + std::log(z);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = logits[i] - lz;
  return out;
}

inline double kl_divergence(std::span<const double> logits, std::span<const double> reference_logits) {
  auto lp = log_softmax(logits);
  auto lq = log_softmax(reference_logits);
  double kl = 0.0;
  for (std::size_t i = 0; i < lp.size(); ++i) kl += std::exp(lp[i]) * (lp[i] - lq[i]);
  return std::max(kl, 0.0);
}

inline double entropy(std::span<const double> logits) {
  auto lp = log_softmax(logits);
  double h = 0.0;
  for (double l : lp) h -= std::exp(l) * l;
  return h;
}

class CategoricalPolicy {
 public:
  explicit CategoricalPolicy(std::vector<double> logits) : logits_(std::move(logits)), reference_(logits_) {}
  static CategoricalPolicy uniform(std::size_t n) { return CategoricalPolicy(std::vector<double>(n, 0.0)); }

  const std::vector<double>& logits() const { return logits_; }
  const std::vector<double>& reference_logits() const { return reference_; }
  std::vector<double> probabilities() const { return softmax(logits_); }
  double kl() const { return kl_divergence(logits_, reference_); }

  void set_logits(std::vector<double> l) { logits_ = std::move(l); }

 private:
  std::vector<double> logits_;
  std::vector<double> reference_;
};

struct TrainConfig {
  std::size_t k = 8;
  double learning_rate = 0.1;
  double beta = 0.01;
  std::size_t steps = 200;
  std::uint64_t seed = 0;

  void validate() const {
    if (k < 2) throw ConfigError("K must be at least 2");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(beta >= 0.0)) throw ConfigError("beta must be non-negative");
    if (steps < 1) throw ConfigError("steps must be at least 1");
  }
};

// Objective value for fixed samples and advantages.
inline double grpo_objective(std::span<const double> logits, std::span<const double> reference_logits,
                             std::span<const std::size_t> samples, std::span<const double> advantages,
                             double beta) {
  auto lp = log_softmax(logits);
  double pg = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) pg += advantages[i] * lp[samples[i]];
  pg /= static_cast<double>(samples.size());
  return pg - beta * kl_divergence(logits, reference_logits);
}

inline std::vector<double> grpo_gradient(std::span<const double> logits, std::span<const double> reference_logits,
                                         std::span<const std::size_t> samples, std::span<const double> advantages,
                                         double beta) {
  auto lp = log_softmax(logits);
  auto lq = log_softmax(reference_logits);
  std::size_t n = logits.size();
  std::vector<double> p(n);
  for (std::size_t j = 0; j < n; ++j) p[j] = std::exp(lp[j]);

  std::vector<double> g(n, 0.0);
  double adv_sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    g[samples[i]] += advantages[i];
    adv_sum += advantages[i];
  }
  auto k = static_cast<double>(samples.size());
  for (std::size_t j = 0; j < n; ++j) g[j] = (g[j] - adv_sum * p[j]) / k;

  if (beta > 0.0) {
    double kl = 0.0;
    for (std::size_t j = 0; j < n; ++j) kl += p[j] * (lp[j] - lq[j]);
    for (std::size_t j = 0; j < n; ++j) g[j] -= beta * p[j] * (lp[j] - lq[j] - kl);
  }
  return g;
}

struct StepStats {
  std::size_t step = 0;
  double mean_reward = 0.0;      // group mean of the sampled rewards
  double expected_reward = 0.0;  // under the updated policy
  double kl = 0.0;               // KL(pi || pi_ref) after the update
  double entropy = 0.0;
};

// Uniform double in [0,1) built from the top 53 bits.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::size_t sample_index(std::span<const double> probs, std::mt19937_64& rng) {
  double u = unit_uniform(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

inline StepStats grpo_step(CategoricalPolicy& policy, const CandidatePool& pool, const TrainConfig& cfg,
                           std::mt19937_64& rng) {
  auto probs = policy.probabilities();
  std::vector<std::size_t> samples(cfg.k);
  std::vector<double> rewards(cfg.k);
  for (std::size_t i = 0; i < cfg.k; ++i) {
    samples[i] = sample_index(probs, rng);
    rewards[i] = pool.rewards[samples[i]];
  }
  auto adv = group_advantages(rewards);
  auto grad = grpo_gradient(policy.logits(), policy.reference_logits(), samples, adv, cfg.beta);
  std::vector<double> next = policy.logits();
  for (std::size_t j = 0; j < next.size(); ++j) next[j] += cfg.learning_rate * grad[j];
  policy.set_logits(std::move(next));

  StepStats st;
  for (double r : rewards) st.mean_reward += r;
  st.mean_reward /= static_cast<double>(cfg.k);
  auto p = policy.probabilities();
  for (std::size_t j = 0; j < p.size(); ++j) st.expected_reward += p[j] * pool.rewards[j];
  st.kl = policy.kl();
  st.entropy = entropy(policy.logits());
  return st;
}

struct TrainingTrace {
  std::string source_id;
  std::vector<StepStats> steps;
  std::vector<double> initial_probabilities;
  std::vector<double> final_probabilities;
  double initial_expected_reward = 0.0;
};

inline TrainingTrace run_training(const CandidatePool& pool, const TrainConfig& cfg) {
  cfg.validate();
  if (pool.candidates.size() < 2 || pool.rewards.size() != pool.candidates.size())
    throw ConfigError("candidate pool needs at least 2 scored candidates");
  for (double r : pool.rewards)
    if (!std::isfinite(r)) throw ConfigError("candidate rewards must be finite");

  auto policy = CategoricalPolicy::uniform(pool.candidates.size());
  std::mt19937_64 rng(cfg.seed);
  TrainingTrace trace;
  trace.source_id = pool.source_id;
  trace.initial_probabilities = policy.probabilities();
  for (std::size_t j = 0; j < pool.rewards.size(); ++j)
    trace.initial_expected_reward += trace.initial_probabilities[j] * pool.rewards[j];
  for (std::size_t s = 0; s < cfg.steps; ++s) {
    auto st = grpo_step(policy, pool, cfg, rng);
    st.step = s + 1;
    trace.steps.push_back(st);
  }
  trace.final_probabilities = policy.probabilities();
  return trace;
}

}  // namespace structeval

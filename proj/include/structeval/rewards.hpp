#pragma once

// Reward scoring for RL trainers and GRPO group advantages.
//
// Each reward component is computed on its native scale and mapped so that
// its magnitude lies in [0, 10]: TreeSim and binary metrics are multiplied
// by 10, 0..100 metrics by 0.1. The TreeSim penalty for unparseable output
// (-0.1) therefore becomes -1. Components are summed.

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "structeval/docmetrics.hpp"
#include "structeval/error.hpp"

namespace structeval {

inline const std::vector<std::string>& reward_names() {
  static const std::vector<std::string> names{"treesim",      "node_chrf", "optimal_node_chrf", "content_bleu",
                                              "xml_validity", "xml_match", "xml_bleu"};
  return names;
}

class RewardSpec {
 public:
  // Throws ConfigError on an empty list, unknown or repeated names.
  explicit RewardSpec(std::vector<std::string> components) : components_(std::move(components)) {
    if (components_.empty()) throw ConfigError("reward spec needs at least one component");
    for (std::size_t i = 0; i < components_.size(); ++i) {
      const auto& names = reward_names();
      if (std::find(names.begin(), names.end(), components_[i]) == names.end())
        throw ConfigError("unknown reward '" + components_[i] + "'");
      for (std::size_t j = 0; j < i; ++j)
        if (components_[j] == components_[i]) throw ConfigError("duplicate reward '" + components_[i] + "'");
    }
  }

  // Comma-separated list, e.g. "treesim,node_chrf".
  static RewardSpec parse(std::string_view csv) {
    std::vector<std::string> parts;
    std::size_t b = 0;
    while (b <= csv.size()) {
      std::size_t e = csv.find(',', b);
      if (e == std::string_view::npos) e = csv.size();
      auto part = text::trim(csv.substr(b, e - b));
      if (!part.empty()) parts.emplace_back(part);
      b = e + 1;
    }
    return RewardSpec(std::move(parts));
  }

  const std::vector<std::string>& components() const { return components_; }

 private:
  std::vector<std::string> components_;
};

inline double reward_scale(std::string_view name) {
  if (name == "treesim" || name == "xml_validity" || name == "xml_match") return 10.0;
  return 0.1;
}

struct RewardBreakdown {
  std::map<std::string, double> native;  // component -> native-scale value
  double total = 0.0;
};

// Throws InvalidReference.
inline RewardBreakdown score_reward_detailed(std::string_view hypothesis, std::string_view reference,
                                             const RewardSpec& spec) {
  auto ref = parse_document(reference);
  if (!ref) throw InvalidReference(ref.reason());
  auto hyp = parse_document(hypothesis);
  const DocTree& r = ref.tree();

  std::optional<OptimalAlignment> al;
  RewardBreakdown out;
  for (const auto& name : spec.components()) {
    double v = 0.0;
    if (name == "treesim") {
      v = hyp ? tree_sim(hyp.tree(), r) : kInvalidTreeSim;
    } else if (name == "node_chrf") {
      v = hyp ? node_chrf(hyp.tree(), r) : 0.0;
    } else if (name == "optimal_node_chrf") {
      if (hyp) {
        if (!al) al = optimal_alignment(hyp.tree(), r);
        v = optimal_node_chrf(*al, hyp.tree(), r);
      }
    } else if (name == "content_bleu") {
      v = bleu_from_stats(bleu_stats(strip_markup(hypothesis), strip_markup(reference)));
    } else if (name == "xml_validity") {
      v = hyp ? 1.0 : 0.0;
    } else if (name == "xml_match") {
      v = xml_match(hyp, r);
    } else if (name == "xml_bleu") {
      BleuStats st;
      for (const auto& [h, rs] : xml_bleu_pairs(hyp, r)) st += bleu_stats(h, rs);
      v = bleu_from_stats(st);
    }
    out.native[name] = v;
    out.total += v * reward_scale(name);
  }
  return out;
}

inline double score_reward(std::string_view hypothesis, std::string_view reference, const RewardSpec& spec) {
  return score_reward_detailed(hypothesis, reference, spec).total;
}

inline constexpr double kDegenerateSigma = 1e-12;

// (r_i - mean) / population stdev; all zeros when the group has no spread.
// Throws GroupTooSmall when fewer than two rewards are given.
inline std::vector<double> group_advantages(std::span<const double> rewards) {
  if (rewards.size() < 2) throw GroupTooSmall(rewards.size());
  auto k = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= k;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  double sigma = std::sqrt(var / k);
  std::vector<double> out(rewards.size(), 0.0);
  if (sigma < kDegenerateSigma) return out;
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / sigma;
  return out;
}

struct CandidateGroup {
  std::string source_id;
  std::vector<double> raw_rewards;
  std::vector<double> scaled_rewards;
  std::vector<double> advantages;
};

// Scores K candidates for one source. raw_rewards are the unscaled component
// sums; advantages are computed from the scaled rewards.
inline CandidateGroup score_group(std::string source_id, std::span<const std::string> candidates,
                                  std::string_view reference, const RewardSpec& spec) {
  CandidateGroup g;
  g.source_id = std::move(source_id);
  for (const auto& c : candidates) {
    auto b = score_reward_detailed(c, reference, spec);
    double raw = 0.0;
    for (const auto& [name, v] : b.native) raw += v;
    g.raw_rewards.push_back(raw);
    g.scaled_rewards.push_back(b.total);
  }
  g.advantages = group_advantages(g.scaled_rewards);
  return g;
}

}  // namespace structeval

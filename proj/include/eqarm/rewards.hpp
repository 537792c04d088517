#pragma once

#include <array>
#include <optional>
#include <vector>

namespace eqarm {

enum class AugKind { Temporal = 0, Spatial = 1, Reasoning = 2 };
inline constexpr int kAugKindCount = 3;

struct RewardConfig {
  double delta = 0.95;      // batch-mean comparison factor
  double mu = 0.3;          // boost value
  double h_min_acc = 0.1;   // per-evaluation accuracy floor for boost eligibility
  double epsilon = 1e-8;    // advantage stability constant
  double score_scale = 10.0;

  void validate() const;
};

/// max(0, 1 - (|s_r - s_gt| / scale)^2). Scores must lie in [0,10].
double accuracy_reward(double s_r, double s_gt, const RewardConfig& cfg = {});

/// mu iff mean_orig >= delta * mean_aug and per_eval_acc >= h_min_acc, else 0.
double contrastive_boost(double mean_orig, double mean_aug, double per_eval_acc,
                         const RewardConfig& cfg);

/// Boost per augmentation kind; disengaged entries mark inactive kinds.
using BoostSet = std::array<std::optional<double>, kAugKindCount>;

/// acc + fmt + (sum of active boosts) / (number of active kinds);
/// acc + fmt when no kind is active.
double total_reward(double acc, double fmt, const BoostSet& boosts);

/// Group-normalized advantages: (x - mean) / (population std + epsilon).
std::vector<double> group_advantages(const std::vector<double>& totals,
                                     const RewardConfig& cfg);

/// Arithmetic mean; empty input is an error.
double batch_mean(const std::vector<double>& values);

/// Per-sample reward decomposition for one original evaluation.
struct RewardBreakdown {
  double acc = 0.0;
  double fmt = 0.0;
  BoostSet boosts{};
  double total = 0.0;
  double advantage = 0.0;
};

}  // namespace eqarm

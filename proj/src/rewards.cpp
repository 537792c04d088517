#include "eqarm/rewards.hpp"

#include <cmath>
#include <string>

#include "eqarm/errors.hpp"
#include "eqarm/types.hpp"

namespace eqarm {

void RewardConfig::validate() const {
  if (!(delta > 0.0 && delta <= 1.0))
    throw ValidationError("reward: delta must be in (0,1]");
  if (mu < 0.0) throw ValidationError("reward: mu must be >= 0");
  if (!(h_min_acc >= 0.0 && h_min_acc <= 1.0))
    throw ValidationError("reward: h_min_acc must be in [0,1]");
  if (!(epsilon > 0.0)) throw ValidationError("reward: epsilon must be > 0");
  if (!(score_scale > 0.0)) throw ValidationError("reward: score_scale must be > 0");
}

double accuracy_reward(double s_r, double s_gt, const RewardConfig& cfg) {
  if (!(s_r >= kScoreMin && s_r <= kScoreMax) ||
      !(s_gt >= kScoreMin && s_gt <= kScoreMax))
    throw ValidationError("accuracy_reward: score outside [0,10]");
  const double gap = std::abs(s_r - s_gt) / cfg.score_scale;
  return std::max(0.0, 1.0 - gap * gap);
}

double contrastive_boost(double mean_orig, double mean_aug, double per_eval_acc,
                         const RewardConfig& cfg) {
  const bool group_ok = mean_orig >= cfg.delta * mean_aug;
  const bool eval_ok = per_eval_acc >= cfg.h_min_acc;
  return group_ok && eval_ok ? cfg.mu : 0.0;
}

double total_reward(double acc, double fmt, const BoostSet& boosts) {
  double sum = 0.0;
  int active = 0;
  for (const auto& boost : boosts) {
    if (boost) {
      sum += *boost;
      ++active;
    }
  }
  // Denominator is the number of ACTIVE augmentation kinds so the boost term
  // keeps the same scale across ablation arms.
  if (active == 0) return acc + fmt;
  return acc + fmt + sum / static_cast<double>(active);
}

std::vector<double> group_advantages(const std::vector<double>& totals,
                                     const RewardConfig& cfg) {
  if (totals.empty()) throw ValidationError("group_advantages: empty group");
  double mean = 0.0;
  for (const double v : totals) mean += v;
  mean /= static_cast<double>(totals.size());
  double var = 0.0;
  for (const double v : totals) var += (v - mean) * (v - mean);
  var /= static_cast<double>(totals.size());
  const double denom = std::sqrt(var) + cfg.epsilon;
  std::vector<double> advantages(totals.size());
  for (std::size_t i = 0; i < totals.size(); ++i)
    advantages[i] = (totals[i] - mean) / denom;
  return advantages;
}

double batch_mean(const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("batch_mean: empty input");
  double sum = 0.0;
  for (const double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace eqarm

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <utility>

#include "eqarm/augment.hpp"
#include "eqarm/policy.hpp"
#include "eqarm/rewards.hpp"
#include "eqarm/types.hpp"

namespace eqarm {

struct CgrpoConfig {
  std::size_t g = 8;      // evaluations sampled per condition
  double beta_kl = 0.04;  // KL coefficient against the reference policy
  double clip_eps = 0.2;  // ratio clipping half-width
  double lr = 1e-2;
  std::set<AugKind> active_augs{AugKind::Temporal, AugKind::Spatial,
                                AugKind::Reasoning};
  RewardConfig reward{};
  MaskConfig mask{};
  std::size_t keyframes = 5;  // 0 = use every frame
  std::size_t steps = 0;
  std::size_t batch_size = 1;  // instances per optimizer step
  std::uint64_t seed = 0;
  std::size_t feature_dim = kDefaultFeatureDim;
  bool batch_means_over_minibatch = false;  // boost means across the whole batch
  bool kl_on_augmented = false;             // include augmented contexts in the KL
  bool train_on_augmented = false;  // advantages/gradients over all conditions

  void validate() const;
};

/// Per-step training telemetry.
struct StepReport {
  std::size_t step = 0;
  double objective = 0.0;
  double mean_total = 0.0;
  double mean_advantage = 0.0;
  double mean_acc = 0.0;
  double kl = 0.0;
  double clip_fraction = 0.0;
  std::array<std::size_t, kAugKindCount> boost_counts{};  // active boosts per kind
};

/// Features and sampled evaluations for the original condition plus every
/// active augmented condition, with the pairing rules applied: temporal and
/// spatial conditions use the original trace, the reasoning condition uses
/// the original visuals.
struct ConditionEvaluations {
  std::map<ContextVariant, ContextFeatures> features;
  std::map<ContextVariant, std::vector<PolicySample>> samples;
};

ConditionEvaluations evaluate_conditions(const ToySoftmaxPolicy& policy,
                                         const EqaInstance& instance,
                                         const ConditionSet& conditions,
                                         std::size_t g, std::uint64_t seed,
                                         const std::set<AugKind>& active_augs,
                                         std::size_t feature_dim = kDefaultFeatureDim);

/// Accuracy/format/boost/total/advantage for the g ORIGINAL samples.
/// `external_means` overrides the per-variant accuracy means (used when boost
/// comparisons span more than this instance's group).
std::vector<RewardBreakdown> assemble_rewards(
    const ConditionEvaluations& evaluations, int s_gt, const RewardConfig& cfg,
    const std::map<ContextVariant, double>* external_means = nullptr);

/// Mean over samples of min(r*A, clip(r, 1-eps, 1+eps)*A), r = exp(new - old).
double surrogate_objective(const std::vector<double>& logp_new,
                           const std::vector<double>& logp_old,
                           const std::vector<double>& advantages, double clip_eps);

/// Everything the objective needs about one optimizer step's samples.
struct ObjectiveBatch {
  std::vector<ContextFeatures> features;  // one entry per sample
  std::vector<int> scores;
  std::vector<double> advantages;
  std::vector<double> old_logps;
  std::vector<ContextFeatures> kl_features;  // contexts the KL is averaged over
};

/// J = surrogate - beta_kl * mean KL(policy || ref), with its analytic
/// gradient in the policy weights.
std::pair<double, Mat> cgrpo_objective(const ToySoftmaxPolicy& policy,
                                       const ToySoftmaxPolicy& ref_policy,
                                       const ObjectiveBatch& batch,
                                       const CgrpoConfig& cfg);

/// Full loop: per step, snapshot the policy, sample all conditions for a
/// mini-batch of instances, assemble rewards, take one ascent step on J.
/// The reference policy for the KL is the policy passed in (its SFT-analogue
/// pre-fit state). Deterministic given cfg.seed.
std::pair<ToySoftmaxPolicy, std::vector<StepReport>> train(
    const ToySoftmaxPolicy& policy, const std::vector<EqaInstance>& dataset,
    const CgrpoConfig& cfg);

/// Central finite differences of `objective` over every weight.
Mat finite_diff_gradient(const ToySoftmaxPolicy& policy,
                         const std::function<double(const ToySoftmaxPolicy&)>& objective,
                         double step);

/// Step telemetry as CSV, bytes fully determined by the reports.
std::string step_reports_csv(const std::vector<StepReport>& reports);

}  // namespace eqarm

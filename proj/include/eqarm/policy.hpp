#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "eqarm/types.hpp"

namespace eqarm {

/// Fixed-length real feature vector standing in for a model's perception of
/// one (question, answer, trace, episode) context.
struct ContextFeatures {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
};

inline constexpr std::size_t kMinFeatureDim = 16;
inline constexpr std::size_t kDefaultFeatureDim = 32;

/// One evaluation context: an episode paired with a trace.
struct ConditionView {
  const EpisodeMemory* episode = nullptr;
  const ReasoningTrace* trace = nullptr;
};

/// Deterministic, order-sensitive featurization. Components include
/// position-weighted frame statistics (frame shuffles move them), the
/// zero-intensity fraction (masking moves it), position-weighted step hashes
/// (jumbling moves them) and question/answer text hashes.
ContextFeatures featurize(const EqaInstance& instance, const ConditionView& view,
                          std::size_t dim = kDefaultFeatureDim);

/// The instance's own episode and trace.
ContextFeatures featurize_original(const EqaInstance& instance,
                                   std::size_t dim = kDefaultFeatureDim);

/// Row-major dense matrix; small enough here that nothing fancier is needed.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
};

/// Trainable 11-way softmax scorer over context features: one weight row per
/// score 0..10. Immutable value type; updates produce new policies.
class ToySoftmaxPolicy {
 public:
  explicit ToySoftmaxPolicy(std::size_t feature_dim);
  static ToySoftmaxPolicy random(std::size_t feature_dim, std::uint64_t seed,
                                 double scale = 0.1);

  std::size_t feature_dim() const { return weights_.cols; }
  const Mat& weights() const { return weights_; }
  Mat& weights() { return weights_; }

  /// Checkpoint format: a small text header (version, dims) then one
  /// whitespace-separated row of weights per score, round-trip exact.
  void save(const std::filesystem::path& path) const;
  static ToySoftmaxPolicy load(const std::filesystem::path& path);

 private:
  Mat weights_;  // kScoreCount x feature_dim
};

/// Softmax of weights * features; sums to 1 within 1e-12.
std::vector<double> toy_distribution(const ToySoftmaxPolicy& policy,
                                     const ContextFeatures& features);

/// Log-probabilities of all scores (stable log-softmax).
std::vector<double> toy_log_distribution(const ToySoftmaxPolicy& policy,
                                         const ContextFeatures& features);

enum class ContextVariant { Original = 0, Temporal = 1, Spatial = 2, Reasoning = 3 };
std::string_view to_string(ContextVariant v);

/// One sampled evaluation with its log-probability under the sampling policy.
/// Remote policies leave logp disengaged. format_ok is false when the sample
/// came from output the tag parser rejected (score then defaults to 0).
struct PolicySample {
  Evaluation evaluation;
  std::optional<double> logp;
  ContextVariant variant = ContextVariant::Original;
  bool format_ok = true;
};

/// g independent categorical draws; deterministic given seed.
std::vector<PolicySample> sample_group(const ToySoftmaxPolicy& policy,
                                       const ContextFeatures& features,
                                       std::size_t g, std::uint64_t seed,
                                       ContextVariant variant = ContextVariant::Original);

/// Abstract scorer: samples evaluations for one instance context. The toy
/// realization records exact log-probabilities; remote realizations cannot
/// and are therefore usable for benchmarking only.
class EvaluationPolicy {
 public:
  virtual ~EvaluationPolicy() = default;
  virtual std::vector<PolicySample> evaluate(const EqaInstance& instance,
                                             const ConditionView& view,
                                             ContextVariant variant,
                                             std::size_t count,
                                             std::uint64_t seed) = 0;
  virtual bool supports_logprobs() const = 0;
  virtual std::string_view name() const = 0;
};

class ToyEvaluationPolicy final : public EvaluationPolicy {
 public:
  ToyEvaluationPolicy(ToySoftmaxPolicy policy, std::size_t feature_dim)
      : policy_(std::move(policy)), feature_dim_(feature_dim) {}

  std::vector<PolicySample> evaluate(const EqaInstance& instance,
                                     const ConditionView& view,
                                     ContextVariant variant, std::size_t count,
                                     std::uint64_t seed) override {
    return sample_group(policy_, featurize(instance, view, feature_dim_), count,
                        seed, variant);
  }
  bool supports_logprobs() const override { return true; }
  std::string_view name() const override { return "toy-softmax"; }
  const ToySoftmaxPolicy& policy() const { return policy_; }

 private:
  ToySoftmaxPolicy policy_;
  std::size_t feature_dim_;
};

/// Throws CapabilityError unless the policy records log-probabilities, which
/// gradient-based training requires.
void require_trainable(const EvaluationPolicy& policy);

/// Analytic d log p(score | features) / d weights: (e_score - p) x features.
Mat grad_logp(const ToySoftmaxPolicy& policy, const ContextFeatures& features,
              int score);

/// Exact categorical KL(p || q) over the 11 scores.
double exact_kl(const ToySoftmaxPolicy& policy_p, const ToySoftmaxPolicy& policy_q,
                const ContextFeatures& features);

/// Hidden linear labeler producing ground-truth scores for synthetic data.
struct SyntheticLabeler {
  std::vector<double> weights;
  double bias = 5.0;
  double noise_std = 0.0;

  static SyntheticLabeler random(std::size_t dim, std::uint64_t seed, double gain,
                                 double bias);
};

/// clamp(round(w*x + b + noise), 0, 10), rounding half away from zero.
/// Labels are always computed from ORIGINAL-context features.
int synthetic_label(const ContextFeatures& features_of_original,
                    const SyntheticLabeler& labeler, std::uint64_t noise_seed);

struct MleFitConfig {
  std::size_t steps = 100;
  double lr = 0.5;
  std::uint64_t seed = 0;
  std::size_t batch_size = 0;  // 0 = full batch
};

/// Gradient ascent on mean log-likelihood. Returns the iterate with the best
/// training NLL seen, so the result is never worse than the input policy.
ToySoftmaxPolicy toy_mle_fit(const ToySoftmaxPolicy& policy,
                             const std::vector<std::pair<ContextFeatures, int>>& data,
                             const MleFitConfig& cfg);

/// Training NLL of score labels under the policy, via the SFT loss over
/// one-token target sequences.
double score_nll(const ToySoftmaxPolicy& policy,
                 const std::vector<std::pair<ContextFeatures, int>>& data);

}  // namespace eqarm

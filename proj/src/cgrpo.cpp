#include "eqarm/cgrpo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "eqarm/errors.hpp"
#include "eqarm/rng.hpp"
#include "eqarm/structured_io.hpp"

namespace eqarm {

namespace {

ContextVariant variant_of(AugKind kind) {
  switch (kind) {
    case AugKind::Temporal: return ContextVariant::Temporal;
    case AugKind::Spatial: return ContextVariant::Spatial;
    case AugKind::Reasoning: return ContextVariant::Reasoning;
  }
  return ContextVariant::Temporal;
}

double evaluation_format_reward(const Evaluation& evaluation) {
  // Round-trip through the tag grammar so the format check is the same one
  // applied to raw model output.
  return format_reward(parse_evaluation(render_evaluation(evaluation)));
}

double sample_accuracy(const PolicySample& sample, int s_gt,
                       const RewardConfig& cfg) {
  return accuracy_reward(sample.evaluation.score, s_gt, cfg);
}

}  // namespace

void CgrpoConfig::validate() const {
  if (g == 0) throw ValidationError("cgrpo: g must be >= 1");
  if (beta_kl < 0.0) throw ValidationError("cgrpo: beta_kl must be >= 0");
  if (!(clip_eps > 0.0 && clip_eps < 1.0))
    throw ValidationError("cgrpo: clip_eps must be in (0,1)");
  if (batch_size == 0) throw ValidationError("cgrpo: batch_size must be >= 1");
  if (feature_dim < kMinFeatureDim)
    throw ValidationError("cgrpo: feature_dim too small");
  reward.validate();
  mask.validate();
}

ConditionEvaluations evaluate_conditions(const ToySoftmaxPolicy& policy,
                                         const EqaInstance& instance,
                                         const ConditionSet& conditions,
                                         std::size_t g, std::uint64_t seed,
                                         const std::set<AugKind>& active_augs,
                                         std::size_t feature_dim) {
  if (g == 0) throw ValidationError("evaluate_conditions: g must be >= 1");
  ConditionEvaluations out;

  const auto add = [&](ContextVariant variant, const EpisodeMemory& episode,
                       const ReasoningTrace& trace) {
    auto features =
        featurize(instance, ConditionView{&episode, &trace}, feature_dim);
    const auto stream = mix_seed(seed, static_cast<std::uint64_t>(variant));
    out.samples[variant] = sample_group(policy, features, g, stream, variant);
    out.features[variant] = std::move(features);
  };

  add(ContextVariant::Original, conditions.original_episode,
      conditions.original_trace);
  // Pairing rules: perturbed visuals keep the original trace, the perturbed
  // trace keeps the original visuals.
  if (active_augs.count(AugKind::Temporal))
    add(ContextVariant::Temporal, conditions.temporal, conditions.original_trace);
  if (active_augs.count(AugKind::Spatial))
    add(ContextVariant::Spatial, conditions.spatial, conditions.original_trace);
  if (active_augs.count(AugKind::Reasoning))
    add(ContextVariant::Reasoning, conditions.original_episode,
        conditions.reasoning);
  return out;
}

std::vector<RewardBreakdown> assemble_rewards(
    const ConditionEvaluations& evaluations, int s_gt, const RewardConfig& cfg,
    const std::map<ContextVariant, double>* external_means) {
  if (s_gt < kScoreMin || s_gt > kScoreMax)
    throw ValidationError("assemble_rewards: gt score outside [0,10]");
  const auto original_it = evaluations.samples.find(ContextVariant::Original);
  if (original_it == evaluations.samples.end() || original_it->second.empty())
    throw ValidationError("assemble_rewards: no original-condition samples");
  const auto& originals = original_it->second;

  std::map<ContextVariant, double> means;
  if (external_means != nullptr) {
    means = *external_means;
  } else {
    for (const auto& [variant, samples] : evaluations.samples) {
      std::vector<double> accs;
      accs.reserve(samples.size());
      for (const auto& sample : samples)
        accs.push_back(sample_accuracy(sample, s_gt, cfg));
      means[variant] = batch_mean(accs);
    }
  }
  const auto mean_orig_it = means.find(ContextVariant::Original);
  if (mean_orig_it == means.end())
    throw ValidationError("assemble_rewards: missing original-condition mean");
  const double mean_orig = mean_orig_it->second;

  std::vector<RewardBreakdown> breakdowns(originals.size());
  std::vector<double> totals(originals.size());
  for (std::size_t i = 0; i < originals.size(); ++i) {
    RewardBreakdown& rb = breakdowns[i];
    rb.acc = sample_accuracy(originals[i], s_gt, cfg);
    rb.fmt = evaluation_format_reward(originals[i].evaluation);
    for (int k = 0; k < kAugKindCount; ++k) {
      const auto kind = static_cast<AugKind>(k);
      const auto mean_it = means.find(variant_of(kind));
      if (mean_it == means.end()) continue;  // augmentation not active
      rb.boosts[static_cast<std::size_t>(k)] =
          contrastive_boost(mean_orig, mean_it->second, rb.acc, cfg);
    }
    rb.total = total_reward(rb.acc, rb.fmt, rb.boosts);
    totals[i] = rb.total;
  }
  const auto advantages = group_advantages(totals, cfg);
  for (std::size_t i = 0; i < breakdowns.size(); ++i)
    breakdowns[i].advantage = advantages[i];
  return breakdowns;
}

double surrogate_objective(const std::vector<double>& logp_new,
                           const std::vector<double>& logp_old,
                           const std::vector<double>& advantages,
                           double clip_eps) {
  if (logp_new.size() != logp_old.size() || logp_new.size() != advantages.size())
    throw ValidationError("surrogate_objective: length mismatch");
  if (logp_new.empty())
    throw ValidationError("surrogate_objective: empty batch");
  double sum = 0.0;
  for (std::size_t k = 0; k < logp_new.size(); ++k) {
    const double ratio = std::exp(logp_new[k] - logp_old[k]);
    const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
    sum += std::min(ratio * advantages[k], clipped * advantages[k]);
  }
  return sum / static_cast<double>(logp_new.size());
}

std::pair<double, Mat> cgrpo_objective(const ToySoftmaxPolicy& policy,
                                       const ToySoftmaxPolicy& ref_policy,
                                       const ObjectiveBatch& batch,
                                       const CgrpoConfig& cfg) {
  const std::size_t n = batch.features.size();
  if (n == 0 || batch.scores.size() != n || batch.advantages.size() != n ||
      batch.old_logps.size() != n)
    throw ValidationError("cgrpo_objective: inconsistent batch");

  Mat grad(policy.weights().rows, policy.weights().cols);
  double surrogate = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& features = batch.features[k];
    const int score = batch.scores[k];
    const double advantage = batch.advantages[k];
    const auto logp = toy_log_distribution(policy, features);
    const double logp_k = logp[static_cast<std::size_t>(score)];
    const double ratio = std::exp(logp_k - batch.old_logps[k]);
    const double clipped = std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
    const double unclipped_value = ratio * advantage;
    const double clipped_value = clipped * advantage;
    surrogate += std::min(unclipped_value, clipped_value);
    // Subgradient at ties follows the unclipped branch; when the clipped
    // branch wins the clip is binding, so its derivative is zero.
    if (unclipped_value <= clipped_value) {
      const double coeff = ratio * advantage;
      for (std::size_t r = 0; r < grad.rows; ++r) {
        const double indicator = static_cast<int>(r) == score ? 1.0 : 0.0;
        const double row_coeff = coeff * (indicator - std::exp(logp[r]));
        for (std::size_t c = 0; c < grad.cols; ++c)
          grad.at(r, c) += row_coeff * features.values[c];
      }
    }
  }
  surrogate /= static_cast<double>(n);
  for (auto& g : grad.v) g /= static_cast<double>(n);

  double kl_mean = 0.0;
  if (cfg.beta_kl > 0.0 && !batch.kl_features.empty()) {
    Mat kl_grad(grad.rows, grad.cols);
    for (const auto& features : batch.kl_features) {
      const auto logp = toy_log_distribution(policy, features);
      const auto logq = toy_log_distribution(ref_policy, features);
      double kl = 0.0;
      for (std::size_t s = 0; s < logp.size(); ++s)
        kl += std::exp(logp[s]) * (logp[s] - logq[s]);
      kl_mean += kl;
      // dKL/dlogit_j = p_j * ((log p_j - log q_j) - KL)
      for (std::size_t r = 0; r < kl_grad.rows; ++r) {
        const double coeff = std::exp(logp[r]) * ((logp[r] - logq[r]) - kl);
        for (std::size_t c = 0; c < kl_grad.cols; ++c)
          kl_grad.at(r, c) += coeff * features.values[c];
      }
    }
    const double inv = 1.0 / static_cast<double>(batch.kl_features.size());
    kl_mean *= inv;
    for (std::size_t i = 0; i < grad.v.size(); ++i)
      grad.v[i] -= cfg.beta_kl * inv * kl_grad.v[i];
  }
  return {surrogate - cfg.beta_kl * kl_mean, std::move(grad)};
}

std::pair<ToySoftmaxPolicy, std::vector<StepReport>> train(
    const ToySoftmaxPolicy& policy, const std::vector<EqaInstance>& dataset,
    const CgrpoConfig& cfg) {
  cfg.validate();
  if (dataset.empty()) throw ValidationError("train: empty dataset");
  for (const auto& inst : dataset) {
    if (!inst.trace.steps.empty() && !inst.episode.frames.empty()) continue;
    throw ValidationError("train: invalid instance '" + inst.id + "'");
  }

  const ToySoftmaxPolicy ref = policy;
  ToySoftmaxPolicy current = policy;
  std::vector<StepReport> reports;
  reports.reserve(cfg.steps);

  Rng order_rng = Rng(cfg.seed).fork(0x0bde7);
  std::vector<std::size_t> order;
  std::size_t cursor = 0;

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    ObjectiveBatch batch;
    StepReport report;
    report.step = step;

    double total_sum = 0.0, advantage_sum = 0.0, acc_sum = 0.0;
    std::size_t original_count = 0;

    struct InstanceEval {
      const EqaInstance* instance;
      ConditionEvaluations evals;
    };
    std::vector<InstanceEval> evaluated;
    for (std::size_t slot = 0; slot < cfg.batch_size; ++slot) {
      if (cursor % dataset.size() == 0) {
        order = random_permutation(dataset.size(), order_rng);
        cursor = 0;
      }
      const EqaInstance& inst = dataset[order[cursor]];
      ++cursor;

      const std::uint64_t inst_seed = mix_seed(cfg.seed, step * 8191 + slot);
      ConditionSeeds seeds;
      seeds.temporal = mix_seed(inst_seed, 1);
      seeds.spatial = mix_seed(inst_seed, 2);
      seeds.reasoning = mix_seed(inst_seed, 3);
      const auto conditions =
          build_condition_set(inst, cfg.mask, seeds, cfg.keyframes);
      auto evals = evaluate_conditions(current, inst, conditions, cfg.g,
                                       mix_seed(inst_seed, 4), cfg.active_augs,
                                       cfg.feature_dim);
      evaluated.push_back(InstanceEval{&inst, std::move(evals)});
    }

    // Optionally pool the boost comparison means over the whole mini-batch.
    std::map<ContextVariant, double> pooled;
    if (cfg.batch_means_over_minibatch) {
      std::map<ContextVariant, std::vector<double>> accs;
      for (const auto& entry : evaluated)
        for (const auto& [variant, samples] : entry.evals.samples)
          for (const auto& sample : samples)
            accs[variant].push_back(
                sample_accuracy(sample, entry.instance->gt_score, cfg.reward));
      for (const auto& [variant, values] : accs) pooled[variant] = batch_mean(values);
    }

    for (const auto& entry : evaluated) {
      const auto& evals = entry.evals;
      const int s_gt = entry.instance->gt_score;
      const auto breakdowns = assemble_rewards(
          evals, s_gt, cfg.reward,
          cfg.batch_means_over_minibatch ? &pooled : nullptr);

      const auto& original_features = evals.features.at(ContextVariant::Original);
      const auto& originals = evals.samples.at(ContextVariant::Original);

      std::vector<double> combined_totals;
      if (cfg.train_on_augmented) {
        // Alternative grouping: every condition's samples share one group.
        // Augmented samples earn accuracy + format only (no boosts).
        for (const auto& [variant, samples] : evals.samples) {
          for (std::size_t i = 0; i < samples.size(); ++i) {
            if (variant == ContextVariant::Original) {
              combined_totals.push_back(breakdowns[i].total);
            } else {
              const double acc = sample_accuracy(samples[i], s_gt, cfg.reward);
              combined_totals.push_back(acc + 1.0);
            }
          }
        }
        const auto advantages = group_advantages(combined_totals, cfg.reward);
        std::size_t flat = 0;
        for (const auto& [variant, samples] : evals.samples) {
          const auto& features = evals.features.at(variant);
          for (const auto& sample : samples) {
            batch.features.push_back(features);
            batch.scores.push_back(sample.evaluation.score);
            batch.advantages.push_back(advantages[flat]);
            batch.old_logps.push_back(*sample.logp);
            ++flat;
          }
        }
      } else {
        for (std::size_t i = 0; i < originals.size(); ++i) {
          batch.features.push_back(original_features);
          batch.scores.push_back(originals[i].evaluation.score);
          batch.advantages.push_back(breakdowns[i].advantage);
          if (!originals[i].logp)
            throw CapabilityError("train: policy samples lack log-probabilities");
          batch.old_logps.push_back(*originals[i].logp);
        }
      }

      batch.kl_features.push_back(original_features);
      if (cfg.kl_on_augmented) {
        for (const auto& [variant, features] : evals.features)
          if (variant != ContextVariant::Original)
            batch.kl_features.push_back(features);
      }

      for (const auto& rb : breakdowns) {
        total_sum += rb.total;
        advantage_sum += rb.advantage;
        acc_sum += rb.acc;
        for (int k = 0; k < kAugKindCount; ++k) {
          const auto& boost = rb.boosts[static_cast<std::size_t>(k)];
          if (boost && *boost > 0.0)
            ++report.boost_counts[static_cast<std::size_t>(k)];
        }
      }
      original_count += originals.size();
    }

    const auto [objective, gradient] = cgrpo_objective(current, ref, batch, cfg);

    // Telemetry at the pre-update policy (the point J was evaluated at).
    double kl_mean = 0.0;
    for (const auto& features : batch.kl_features)
      kl_mean += exact_kl(current, ref, features);
    kl_mean /= static_cast<double>(batch.kl_features.size());

    std::size_t clipped = 0;
    for (std::size_t k = 0; k < batch.features.size(); ++k) {
      const auto logp = toy_log_distribution(current, batch.features[k]);
      const double ratio = std::exp(
          logp[static_cast<std::size_t>(batch.scores[k])] - batch.old_logps[k]);
      if (ratio < 1.0 - cfg.clip_eps || ratio > 1.0 + cfg.clip_eps) ++clipped;
    }

    report.objective = objective;
    report.mean_total = total_sum / static_cast<double>(original_count);
    report.mean_advantage = advantage_sum / static_cast<double>(original_count);
    report.mean_acc = acc_sum / static_cast<double>(original_count);
    report.kl = kl_mean;
    report.clip_fraction =
        static_cast<double>(clipped) / static_cast<double>(batch.features.size());
    reports.push_back(report);

    for (std::size_t i = 0; i < gradient.v.size(); ++i)
      current.weights().v[i] += cfg.lr * gradient.v[i];
  }
  return {std::move(current), std::move(reports)};
}

std::string step_reports_csv(const std::vector<StepReport>& reports) {
  std::string out =
      "step,objective,mean_total_reward,mean_advantage,mean_accuracy_reward,"
      "kl,clip_fraction,boost_temporal,boost_spatial,boost_reasoning\n";
  char line[256];
  for (const auto& r : reports) {
    std::snprintf(line, sizeof(line),
                  "%zu,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%zu,%zu,%zu\n", r.step,
                  r.objective, r.mean_total, r.mean_advantage, r.mean_acc, r.kl,
                  r.clip_fraction, r.boost_counts[0], r.boost_counts[1],
                  r.boost_counts[2]);
    out += line;
  }
  return out;
}

Mat finite_diff_gradient(const ToySoftmaxPolicy& policy,
                         const std::function<double(const ToySoftmaxPolicy&)>& objective,
                         double step) {
  if (!(step > 0.0)) throw ValidationError("finite_diff_gradient: step must be > 0");
  ToySoftmaxPolicy probe = policy;
  Mat grad(policy.weights().rows, policy.weights().cols);
  for (std::size_t i = 0; i < grad.v.size(); ++i) {
    const double saved = probe.weights().v[i];
    probe.weights().v[i] = saved + step;
    const double upper = objective(probe);
    probe.weights().v[i] = saved - step;
    const double lower = objective(probe);
    probe.weights().v[i] = saved;
    grad.v[i] = (upper - lower) / (2.0 * step);
  }
  return grad;
}

}  // namespace eqarm

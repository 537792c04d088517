#include "eqarm/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "eqarm/errors.hpp"
#include "eqarm/rft.hpp"
#include "eqarm/rng.hpp"

namespace eqarm {

namespace {

constexpr char kFieldSep = '\x1f';

double frame_mean(const Frame& frame) {
  double sum = 0.0;
  for (const float v : frame.pixels) sum += v;
  return sum / static_cast<double>(frame.pixels.size());
}

double frame_std(const Frame& frame, double mean) {
  double var = 0.0;
  for (const float v : frame.pixels) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(frame.pixels.size()));
}

double zero_fraction(const Frame& frame) {
  std::size_t zeros = 0;
  for (const float v : frame.pixels)
    if (v == 0.0f) ++zeros;
  return static_cast<double>(zeros) / static_cast<double>(frame.pixels.size());
}

}  // namespace

ContextFeatures featurize(const EqaInstance& instance, const ConditionView& view,
                          std::size_t dim) {
  if (view.episode == nullptr || view.trace == nullptr)
    throw ValidationError("featurize: condition view is incomplete");
  if (dim < kMinFeatureDim)
    throw ValidationError("featurize: feature dim must be >= " +
                          std::to_string(kMinFeatureDim));
  const auto& frames = view.episode->frames;
  const auto& steps = view.trace->steps;
  if (frames.empty() || steps.empty())
    throw ValidationError("featurize: empty episode or trace");

  const std::size_t n = frames.size();
  const std::size_t t = steps.size();

  std::vector<double> means(n), stds(n), zeros(n);
  for (std::size_t i = 0; i < n; ++i) {
    means[i] = frame_mean(frames[i]);
    stds[i] = frame_std(frames[i], means[i]);
    zeros[i] = zero_fraction(frames[i]);
  }
  std::vector<double> step_hash(t);
  for (std::size_t i = 0; i < t; ++i) step_hash[i] = hash01(steps[i]);

  const auto pos = [](std::size_t i, std::size_t len) {
    return len > 1 ? 2.0 * static_cast<double>(i) / static_cast<double>(len - 1) - 1.0
                   : 0.0;
  };

  ContextFeatures features;
  auto& x = features.values;
  x.assign(dim, 0.0);

  double mean_of_means = 0.0;
  for (const double m : means) mean_of_means += m;
  mean_of_means /= static_cast<double>(n);
  double var_of_means = 0.0;
  for (const double m : means) var_of_means += (m - mean_of_means) * (m - mean_of_means);
  var_of_means = std::sqrt(var_of_means / static_cast<double>(n));

  double order_lin = 0.0, order_sin = 0.0, order_cos = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double phase =
        std::numbers::pi * static_cast<double>(i + 1) / static_cast<double>(n + 1);
    order_lin += means[i] * pos(i, n);
    order_sin += means[i] * std::sin(phase);
    order_cos += means[i] * std::cos(phase);
  }
  order_lin /= static_cast<double>(n);
  order_sin /= static_cast<double>(n);
  order_cos /= static_cast<double>(n);

  double zero_frac = 0.0, texture = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    zero_frac += zeros[i];
    texture += stds[i];
  }
  zero_frac /= static_cast<double>(n);
  texture /= static_cast<double>(n);

  double roughness = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) roughness += std::abs(means[i + 1] - means[i]);
  if (n > 1) roughness /= static_cast<double>(n - 1);

  double hash_mean = 0.0, hash_lin = 0.0, hash_sin = 0.0;
  for (std::size_t i = 0; i < t; ++i) {
    const double phase =
        std::numbers::pi * static_cast<double>(i + 1) / static_cast<double>(t + 1);
    hash_mean += step_hash[i];
    hash_lin += step_hash[i] * pos(i, t);
    hash_sin += step_hash[i] * std::sin(phase);
  }
  hash_mean /= static_cast<double>(t);
  hash_lin /= static_cast<double>(t);
  hash_sin /= static_cast<double>(t);

  std::string joined;
  for (std::size_t i = 0; i < t; ++i) {
    if (i > 0) joined.push_back(kFieldSep);
    joined += steps[i];
  }

  x[0] = 1.0;
  x[1] = mean_of_means;
  x[2] = var_of_means;
  x[3] = order_lin;
  x[4] = order_sin;
  x[5] = order_cos;
  x[6] = zero_frac;
  x[7] = roughness;
  x[8] = texture;
  x[9] = hash_mean;
  x[10] = hash_lin;
  x[11] = hash_sin;
  x[12] = hash01(joined);
  x[13] = hash01(instance.question);
  x[14] = hash01(instance.answer);
  x[15] = hash01(instance.question + kFieldSep + instance.answer);

  // Remaining slots: raw per-frame means, then per-step hashes, zero-padded.
  const std::size_t filler = dim - kMinFeatureDim;
  const std::size_t frame_slots = filler - filler / 2;
  for (std::size_t i = 0; i < frame_slots && i < n; ++i)
    x[kMinFeatureDim + i] = means[i];
  for (std::size_t i = 0; i + frame_slots < filler && i < t; ++i)
    x[kMinFeatureDim + frame_slots + i] = step_hash[i];

  return features;
}

ContextFeatures featurize_original(const EqaInstance& instance, std::size_t dim) {
  return featurize(instance, ConditionView{&instance.episode, &instance.trace}, dim);
}

ToySoftmaxPolicy::ToySoftmaxPolicy(std::size_t feature_dim)
    : weights_(static_cast<std::size_t>(kScoreCount), feature_dim) {
  if (feature_dim == 0)
    throw ValidationError("policy: feature dim must be > 0");
}

ToySoftmaxPolicy ToySoftmaxPolicy::random(std::size_t feature_dim,
                                          std::uint64_t seed, double scale) {
  ToySoftmaxPolicy policy(feature_dim);
  Rng rng(seed);
  for (auto& w : policy.weights_.v) w = rng.normal(0.0, scale);
  return policy;
}

void ToySoftmaxPolicy::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write policy checkpoint " + path.string());
  out << "eqarm-policy 1\n" << weights_.rows << " " << weights_.cols << "\n";
  char buf[64];
  for (std::size_t r = 0; r < weights_.rows; ++r) {
    for (std::size_t c = 0; c < weights_.cols; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", weights_.at(r, c));
      out << buf << (c + 1 == weights_.cols ? "\n" : " ");
    }
  }
  if (!out) throw ValidationError("short write to " + path.string());
}

ToySoftmaxPolicy ToySoftmaxPolicy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open policy checkpoint " + path.string());
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "eqarm-policy" || version != 1)
    throw ValidationError(path.string() + ": not a version-1 policy checkpoint");
  std::size_t rows = 0, cols = 0;
  in >> rows >> cols;
  if (rows != static_cast<std::size_t>(kScoreCount) || cols == 0)
    throw ValidationError(path.string() + ": bad checkpoint dimensions");
  ToySoftmaxPolicy policy(cols);
  for (auto& w : policy.weights_.v) {
    if (!(in >> w))
      throw ValidationError(path.string() + ": truncated checkpoint");
  }
  return policy;
}

namespace {

std::vector<double> logits_of(const ToySoftmaxPolicy& policy,
                              const ContextFeatures& features) {
  if (features.dim() != policy.feature_dim())
    throw ValidationError("policy: feature dim mismatch");
  const Mat& w = policy.weights();
  std::vector<double> logits(w.rows, 0.0);
  for (std::size_t r = 0; r < w.rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < w.cols; ++c) acc += w.at(r, c) * features.values[c];
    logits[r] = acc;
  }
  return logits;
}

}  // namespace

std::vector<double> toy_log_distribution(const ToySoftmaxPolicy& policy,
                                         const ContextFeatures& features) {
  auto logits = logits_of(policy, features);
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (const double z : logits) sum += std::exp(z - top);
  const double log_norm = top + std::log(sum);
  for (double& z : logits) z -= log_norm;
  return logits;
}

std::vector<double> toy_distribution(const ToySoftmaxPolicy& policy,
                                     const ContextFeatures& features) {
  auto probs = toy_log_distribution(policy, features);
  double sum = 0.0;
  for (double& p : probs) {
    p = std::exp(p);
    sum += p;
  }
  for (double& p : probs) p /= sum;
  return probs;
}

std::string_view to_string(ContextVariant v) {
  switch (v) {
    case ContextVariant::Original: return "original";
    case ContextVariant::Temporal: return "temporal";
    case ContextVariant::Spatial: return "spatial";
    case ContextVariant::Reasoning: return "reasoning";
  }
  return "original";
}

std::vector<PolicySample> sample_group(const ToySoftmaxPolicy& policy,
                                       const ContextFeatures& features,
                                       std::size_t g, std::uint64_t seed,
                                       ContextVariant variant) {
  if (g == 0) throw ValidationError("sample_group: g must be >= 1");
  const auto logp = toy_log_distribution(policy, features);
  std::vector<double> probs(logp.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logp.size(); ++i) {
    probs[i] = std::exp(logp[i]);
    sum += probs[i];
  }
  Rng rng(seed);
  std::vector<PolicySample> samples;
  samples.reserve(g);
  for (std::size_t k = 0; k < g; ++k) {
    const double u = rng.next_double() * sum;
    double cdf = 0.0;
    int score = kScoreCount - 1;
    for (std::size_t s = 0; s < probs.size(); ++s) {
      cdf += probs[s];
      if (u < cdf) {
        score = static_cast<int>(s);
        break;
      }
    }
    PolicySample sample;
    sample.evaluation.critique = "score-only toy evaluation";
    sample.evaluation.score = score;
    sample.logp = logp[static_cast<std::size_t>(score)];
    sample.variant = variant;
    samples.push_back(std::move(sample));
  }
  return samples;
}

void require_trainable(const EvaluationPolicy& policy) {
  if (!policy.supports_logprobs())
    throw CapabilityError("policy '" + std::string(policy.name()) +
                          "' does not record log-probabilities; training "
                          "requires gradient support");
}

Mat grad_logp(const ToySoftmaxPolicy& policy, const ContextFeatures& features,
              int score) {
  if (score < kScoreMin || score > kScoreMax)
    throw ValidationError("grad_logp: score outside [0,10]");
  const auto probs = toy_distribution(policy, features);
  Mat grad(policy.weights().rows, policy.weights().cols);
  for (std::size_t r = 0; r < grad.rows; ++r) {
    const double coeff = (static_cast<int>(r) == score ? 1.0 : 0.0) - probs[r];
    for (std::size_t c = 0; c < grad.cols; ++c)
      grad.at(r, c) = coeff * features.values[c];
  }
  return grad;
}

double exact_kl(const ToySoftmaxPolicy& policy_p, const ToySoftmaxPolicy& policy_q,
                const ContextFeatures& features) {
  if (policy_p.feature_dim() != policy_q.feature_dim())
    throw ValidationError("exact_kl: policy dims differ");
  const auto logp = toy_log_distribution(policy_p, features);
  const auto logq = toy_log_distribution(policy_q, features);
  double kl = 0.0;
  for (std::size_t s = 0; s < logp.size(); ++s)
    kl += std::exp(logp[s]) * (logp[s] - logq[s]);
  return kl;
}

SyntheticLabeler SyntheticLabeler::random(std::size_t dim, std::uint64_t seed,
                                          double gain, double bias) {
  SyntheticLabeler labeler;
  labeler.bias = bias;
  Rng rng(seed);
  labeler.weights.resize(dim);
  double norm = 0.0;
  for (auto& w : labeler.weights) {
    w = rng.normal();
    norm += w * w;
  }
  norm = std::sqrt(norm);
  if (norm > 0.0)
    for (auto& w : labeler.weights) w *= gain / norm;
  return labeler;
}

int synthetic_label(const ContextFeatures& features_of_original,
                    const SyntheticLabeler& labeler, std::uint64_t noise_seed) {
  if (features_of_original.dim() != labeler.weights.size())
    throw ValidationError("synthetic_label: feature dim mismatch");
  double value = labeler.bias;
  for (std::size_t i = 0; i < labeler.weights.size(); ++i)
    value += labeler.weights[i] * features_of_original.values[i];
  if (labeler.noise_std > 0.0) {
    Rng rng(noise_seed);
    value += rng.normal(0.0, labeler.noise_std);
  }
  // Round half away from zero, then clamp into the score range.
  const double rounded = std::round(value);
  return static_cast<int>(std::clamp(rounded, 0.0, 10.0));
}

double score_nll(const ToySoftmaxPolicy& policy,
                 const std::vector<std::pair<ContextFeatures, int>>& data) {
  std::vector<TokenLogProbs> samples;
  samples.reserve(data.size());
  for (const auto& [features, score] : data) {
    const auto logp = toy_log_distribution(policy, features);
    TokenLogProbs sample;
    sample.target_tokens = {score};
    sample.logps = {logp[static_cast<std::size_t>(score)]};
    samples.push_back(std::move(sample));
  }
  return sft_nll(samples);
}

ToySoftmaxPolicy toy_mle_fit(const ToySoftmaxPolicy& policy,
                             const std::vector<std::pair<ContextFeatures, int>>& data,
                             const MleFitConfig& cfg) {
  if (data.empty()) throw ValidationError("toy_mle_fit: empty dataset");
  for (const auto& [features, score] : data) {
    if (score < kScoreMin || score > kScoreMax)
      throw ValidationError("toy_mle_fit: label outside [0,10]");
    if (features.dim() != policy.feature_dim())
      throw ValidationError("toy_mle_fit: feature dim mismatch");
  }

  ToySoftmaxPolicy current = policy;
  ToySoftmaxPolicy best = policy;
  double best_nll = score_nll(policy, data);

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::size_t cursor = 0;

  const std::size_t batch =
      cfg.batch_size == 0 ? data.size() : std::min(cfg.batch_size, data.size());

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    Mat grad(current.weights().rows, current.weights().cols);
    for (std::size_t b = 0; b < batch; ++b) {
      std::size_t index;
      if (batch == data.size()) {
        index = b;
      } else {
        if (cursor == 0) order = random_permutation(data.size(), rng);
        index = order[cursor];
        cursor = (cursor + 1) % data.size();
      }
      const auto& [features, score] = data[index];
      const auto probs = toy_distribution(current, features);
      for (std::size_t r = 0; r < grad.rows; ++r) {
        const double coeff = (static_cast<int>(r) == score ? 1.0 : 0.0) - probs[r];
        for (std::size_t c = 0; c < grad.cols; ++c)
          grad.at(r, c) += coeff * features.values[c];
      }
    }
    const double scale = cfg.lr / static_cast<double>(batch);
    for (std::size_t i = 0; i < grad.v.size(); ++i)
      current.weights().v[i] += scale * grad.v[i];

    const double nll = score_nll(current, data);
    if (nll < best_nll) {
      best_nll = nll;
      best = current;
    }
  }
  return best;
}

}  // namespace eqarm

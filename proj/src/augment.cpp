#include "eqarm/augment.hpp"

#include <cmath>

#include "eqarm/errors.hpp"
#include "eqarm/rng.hpp"

namespace eqarm {

namespace {

bool is_identity(const std::vector<std::size_t>& perm) {
  for (std::size_t i = 0; i < perm.size(); ++i)
    if (perm[i] != i) return false;
  return true;
}

/// Uniform permutation, re-drawn until non-identity when n >= 2.
std::vector<std::size_t> non_identity_permutation(std::size_t n, Rng& rng) {
  auto perm = random_permutation(n, rng);
  while (n >= 2 && is_identity(perm)) perm = random_permutation(n, rng);
  return perm;
}

}  // namespace

void MaskConfig::validate() const {
  if (patch_height < 1 || patch_width < 1)
    throw ValidationError("mask: patch dims must be >= 1");
  if (!(ratio > 0.0 && ratio < 1.0))
    throw ValidationError("mask: ratio must be in (0,1)");
  if (!(fill_value >= 0.0f && fill_value <= 1.0f))
    throw ValidationError("mask: fill_value must be in [0,1]");
}

EpisodeMemory select_keyframes(const EpisodeMemory& episode, std::size_t n) {
  if (n == 0) throw ValidationError("select_keyframes: n must be >= 1");
  const std::size_t total = episode.frames.size();
  if (total <= n) return episode;
  EpisodeMemory out;
  out.source_id = episode.source_id;
  out.frames.reserve(n);
  if (n == 1) {
    out.frames.push_back(episode.frames.front());
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t index = i * (total - 1) / (n - 1);
    out.frames.push_back(episode.frames[index]);
  }
  return out;
}

EpisodeMemory shuffle_frames(const EpisodeMemory& episode, std::uint64_t seed) {
  if (episode.frames.empty())
    throw ValidationError("shuffle_frames: episode has no frames");
  Rng rng(seed);
  const auto perm = non_identity_permutation(episode.frames.size(), rng);
  EpisodeMemory out;
  out.source_id = episode.source_id;
  out.frames.reserve(perm.size());
  for (const std::size_t i : perm) out.frames.push_back(episode.frames[i]);
  return out;
}

EpisodeMemory mask_frames(const EpisodeMemory& episode, const MaskConfig& cfg,
                          std::uint64_t seed) {
  cfg.validate();
  EpisodeMemory out = episode;
  Rng rng(seed);
  for (Frame& frame : out.frames) {
    if (frame.height < cfg.patch_height || frame.width < cfg.patch_width)
      throw ValidationError("mask_frames: frame smaller than one patch");
    const int tile_rows = (frame.height + cfg.patch_height - 1) / cfg.patch_height;
    const int tile_cols = (frame.width + cfg.patch_width - 1) / cfg.patch_width;
    const std::size_t tile_count =
        static_cast<std::size_t>(tile_rows) * static_cast<std::size_t>(tile_cols);
    const auto masked = static_cast<std::size_t>(
        std::lround(cfg.ratio * static_cast<double>(tile_count)));
    if (masked == 0) continue;

    auto perm = random_permutation(tile_count, rng);
    for (std::size_t k = 0; k < masked; ++k) {
      const std::size_t tile = perm[k];
      const int tr = static_cast<int>(tile) / tile_cols;
      const int tc = static_cast<int>(tile) % tile_cols;
      const int y0 = tr * cfg.patch_height;
      const int x0 = tc * cfg.patch_width;
      const int y1 = std::min(y0 + cfg.patch_height, frame.height);
      const int x1 = std::min(x0 + cfg.patch_width, frame.width);
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
          for (int c = 0; c < frame.channels; ++c) frame.at(y, x, c) = cfg.fill_value;
    }
  }
  return out;
}

ReasoningTrace jumble_reasoning(const ReasoningTrace& trace, std::uint64_t seed) {
  if (trace.steps.empty())
    throw ValidationError("jumble_reasoning: trace has no steps");
  Rng rng(seed);
  const auto perm = non_identity_permutation(trace.steps.size(), rng);
  ReasoningTrace out;
  out.steps.reserve(perm.size());
  for (const std::size_t i : perm) out.steps.push_back(trace.steps[i]);
  return out;
}

ConditionSet build_condition_set(const EqaInstance& instance, const MaskConfig& cfg,
                                 ConditionSeeds seeds, std::size_t keyframes) {
  instance.validate("build_condition_set");
  ConditionSet set;
  set.seeds = seeds;
  set.original_episode = keyframes > 0
                             ? select_keyframes(instance.episode, keyframes)
                             : instance.episode;
  set.original_trace = instance.trace;
  set.temporal = shuffle_frames(set.original_episode, seeds.temporal);
  set.spatial = mask_frames(set.original_episode, cfg, seeds.spatial);
  set.reasoning = jumble_reasoning(set.original_trace, seeds.reasoning);
  return set;
}

}  // namespace eqarm

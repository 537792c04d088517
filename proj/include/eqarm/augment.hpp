#pragma once

#include <cstdint>

#include "eqarm/types.hpp"

namespace eqarm {

/// Spatial masking settings: frames are tiled into patch_height x patch_width
/// tiles (ragged edge tiles allowed) and round(ratio * tile_count) tiles per
/// frame are filled with fill_value.
struct MaskConfig {
  int patch_height = 16;
  int patch_width = 16;
  double ratio = 0.15;
  float fill_value = 0.0f;

  void validate() const;
};

/// If the episode has more than n frames, keeps n frames at evenly spaced
/// indices floor(i*(L-1)/(n-1)), order preserved; otherwise identity.
EpisodeMemory select_keyframes(const EpisodeMemory& episode, std::size_t n);

/// Uniform permutation of the frames, re-drawn until it differs from the
/// identity whenever there are at least two frames.
EpisodeMemory shuffle_frames(const EpisodeMemory& episode, std::uint64_t seed);

/// Masks round(ratio * tile_count) tiles per frame, chosen uniformly without
/// replacement and independently per frame. Unmasked pixels are untouched.
EpisodeMemory mask_frames(const EpisodeMemory& episode, const MaskConfig& cfg,
                          std::uint64_t seed);

/// Uniform permutation of the steps, re-drawn until it differs from the
/// identity whenever there are at least two steps.
ReasoningTrace jumble_reasoning(const ReasoningTrace& trace, std::uint64_t seed);

struct ConditionSeeds {
  std::uint64_t temporal = 0;
  std::uint64_t spatial = 0;
  std::uint64_t reasoning = 0;
};

/// The four evaluation contexts of one instance. The temporal and spatial
/// conditions pair perturbed visuals with the original trace; the reasoning
/// condition pairs the perturbed trace with the original visuals.
struct ConditionSet {
  EpisodeMemory original_episode;
  ReasoningTrace original_trace;
  EpisodeMemory temporal;
  EpisodeMemory spatial;
  ReasoningTrace reasoning;
  ConditionSeeds seeds;
};

/// keyframes > 0 selects that many keyframes before perturbing, so every
/// condition (including the original) sees the same selected frames.
ConditionSet build_condition_set(const EqaInstance& instance, const MaskConfig& cfg,
                                 ConditionSeeds seeds, std::size_t keyframes = 0);

}  // namespace eqarm

#pragma once

#include <cstdint>
#include <filesystem>
#include <unordered_map>

#include "eqarm/types.hpp"

namespace eqarm {

// Dataset files are newline-delimited JSON, one instance per line, with
// fields: id, question, answer, reasoning_steps, frames, gt_score,
// gt_critique, question_type, environment. The frames object carries
// source_id, height, width, channels and either "data_b64" (base-64 of raw
// intensity bytes, one entry per frame) or "paths" (relative references to
// lossless netpbm images).

std::vector<EqaInstance> load_dataset(const std::filesystem::path& path);

/// Writes instances in order; frames embedded as base-64 intensity bytes.
void save_dataset(const std::filesystem::path& path,
                  const std::vector<EqaInstance>& instances);

enum class SplitSide { Finetune, Bench };

/// Assigns every instance (by id) to exactly one side of the split.
struct SplitDescriptor {
  std::unordered_map<std::string, SplitSide> by_instance_id;
};

/// Routes a fraction of distinct ScanNet episode sources (seeded shuffle) to
/// the finetune side; everything else, including all HM3D, goes to bench.
SplitDescriptor descriptor_by_source_fraction(
    const std::vector<EqaInstance>& instances, double finetune_fraction,
    std::uint64_t seed);

/// Routes the first `n` ScanNet instances in file order to finetune, whole
/// episodes at a time; remainder to bench.
SplitDescriptor descriptor_scannet_count(
    const std::vector<EqaInstance>& instances, std::size_t n);

/// Applies a descriptor and validates the DatasetSplit invariants.
DatasetSplit split_dataset(const std::vector<EqaInstance>& instances,
                           const SplitDescriptor& descriptor);

/// Synthetic data generation settings. The hidden labeler scores each
/// instance from its original-context features (see policy module).
struct SynthConfig {
  std::size_t count = 0;
  int frame_height = 32;
  int frame_width = 32;
  int frame_channels = 1;
  std::size_t frames_min = 5;
  std::size_t frames_max = 5;
  std::size_t trace_len_min = 3;
  std::size_t trace_len_max = 6;
  double scannet_fraction = 1.0;  // remainder becomes HM3D
  std::size_t feature_dim = 32;
  double labeler_gain = 9.0;
  double labeler_bias = 5.0;
  double labeler_noise_std = 0.0;

  void validate() const;
};

std::vector<EqaInstance> synth_dataset(const SynthConfig& config,
                                       std::uint64_t seed);

}  // namespace eqarm

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "eqarm/adapter.hpp"
#include "eqarm/augment.hpp"
#include "eqarm/bench.hpp"
#include "eqarm/cgrpo.hpp"
#include "eqarm/rewards.hpp"

namespace eqarm {

/// Engine-wide configuration. Every field can come from the JSON config file
/// and be overridden by a CLI flag (flag > file > default).
struct EngineConfig {
  std::string train_path;
  std::string bench_path;
  std::string output_dir = "out";
  std::optional<std::uint64_t> seed;
  RewardConfig reward{};
  MaskConfig mask{};
  CgrpoConfig cgrpo{};
  BenchConfig bench{};
  std::optional<RemoteConfig> remote;

  /// Pushes the shared reward/mask blocks into the nested cgrpo config.
  void sync_nested();
};

EngineConfig load_engine_config(const std::filesystem::path& path);

/// Effective-config echo for run manifests (deterministic key order).
std::string engine_config_to_json(const EngineConfig& config);

}  // namespace eqarm

#include "eqarm/engine_config.hpp"

#include <fstream>

#include <json.hpp>

#include "eqarm/errors.hpp"

namespace eqarm {

using nlohmann::json;

namespace {

template <typename T>
void read_if(const json& obj, const char* key, T& target) {
  if (obj.contains(key)) target = obj.at(key).get<T>();
}

std::set<AugKind> augs_from_names(const std::vector<std::string>& names) {
  std::set<AugKind> augs;
  for (const auto& name : names) {
    if (name == "temporal") augs.insert(AugKind::Temporal);
    else if (name == "spatial") augs.insert(AugKind::Spatial);
    else if (name == "reasoning") augs.insert(AugKind::Reasoning);
    else throw ConfigError("unknown augmentation '" + name + "'");
  }
  return augs;
}

std::vector<std::string> aug_names(const std::set<AugKind>& augs) {
  std::vector<std::string> names;
  if (augs.count(AugKind::Temporal)) names.push_back("temporal");
  if (augs.count(AugKind::Spatial)) names.push_back("spatial");
  if (augs.count(AugKind::Reasoning)) names.push_back("reasoning");
  return names;
}

}  // namespace

void EngineConfig::sync_nested() {
  cgrpo.reward = reward;
  cgrpo.mask = mask;
}

EngineConfig load_engine_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }

  EngineConfig config;
  if (root.contains("dataset")) {
    const auto& dataset = root.at("dataset");
    read_if(dataset, "train", config.train_path);
    read_if(dataset, "bench", config.bench_path);
  }
  read_if(root, "output_dir", config.output_dir);
  if (root.contains("seed")) config.seed = root.at("seed").get<std::uint64_t>();

  if (root.contains("reward")) {
    const auto& reward = root.at("reward");
    read_if(reward, "delta", config.reward.delta);
    read_if(reward, "mu", config.reward.mu);
    read_if(reward, "h_min_acc", config.reward.h_min_acc);
    read_if(reward, "epsilon", config.reward.epsilon);
    config.reward.validate();
  }
  if (root.contains("mask")) {
    const auto& mask = root.at("mask");
    read_if(mask, "patch_height", config.mask.patch_height);
    read_if(mask, "patch_width", config.mask.patch_width);
    read_if(mask, "ratio", config.mask.ratio);
    read_if(mask, "fill_value", config.mask.fill_value);
    config.mask.validate();
  }
  if (root.contains("cgrpo")) {
    const auto& cgrpo = root.at("cgrpo");
    read_if(cgrpo, "g", config.cgrpo.g);
    read_if(cgrpo, "beta_kl", config.cgrpo.beta_kl);
    read_if(cgrpo, "clip_eps", config.cgrpo.clip_eps);
    read_if(cgrpo, "lr", config.cgrpo.lr);
    read_if(cgrpo, "steps", config.cgrpo.steps);
    read_if(cgrpo, "batch_size", config.cgrpo.batch_size);
    read_if(cgrpo, "keyframes", config.cgrpo.keyframes);
    read_if(cgrpo, "feature_dim", config.cgrpo.feature_dim);
    read_if(cgrpo, "batch_means_over_minibatch",
            config.cgrpo.batch_means_over_minibatch);
    read_if(cgrpo, "kl_on_augmented", config.cgrpo.kl_on_augmented);
    read_if(cgrpo, "train_on_augmented", config.cgrpo.train_on_augmented);
    if (cgrpo.contains("active_augs"))
      config.cgrpo.active_augs =
          augs_from_names(cgrpo.at("active_augs").get<std::vector<std::string>>());
  }
  if (root.contains("bench")) {
    const auto& bench = root.at("bench");
    read_if(bench, "tau", config.bench.tau);
    read_if(bench, "k", config.bench.k);
    if (bench.contains("aggregation"))
      config.bench.aggregation =
          aggregation_from_string(bench.at("aggregation").get<std::string>());
  }
  if (root.contains("remote")) {
    const auto& remote = root.at("remote");
    RemoteConfig rc;
    read_if(remote, "endpoint", rc.endpoint);
    read_if(remote, "model_name", rc.model_name);
    read_if(remote, "temperature", rc.temperature);
    read_if(remote, "top_p", rc.top_p);
    read_if(remote, "max_output_tokens", rc.max_output_tokens);
    read_if(remote, "max_parallel", rc.max_parallel);
    read_if(remote, "retry_attempts", rc.retry.attempts);
    read_if(remote, "retry_backoff_ms", rc.retry.backoff_ms);
    read_if(remote, "auth_env", rc.auth_env);
    read_if(remote, "cache_dir", rc.cache_dir);
    rc.validate();
    config.remote = std::move(rc);
  }
  config.sync_nested();
  return config;
}

std::string engine_config_to_json(const EngineConfig& config) {
  json root;
  root["dataset"]["train"] = config.train_path;
  root["dataset"]["bench"] = config.bench_path;
  root["output_dir"] = config.output_dir;
  if (config.seed) root["seed"] = *config.seed;
  else root["seed"] = nullptr;

  root["reward"] = {{"delta", config.reward.delta},
                    {"mu", config.reward.mu},
                    {"h_min_acc", config.reward.h_min_acc},
                    {"epsilon", config.reward.epsilon}};
  root["mask"] = {{"patch_height", config.mask.patch_height},
                  {"patch_width", config.mask.patch_width},
                  {"ratio", config.mask.ratio},
                  {"fill_value", config.mask.fill_value}};
  root["cgrpo"] = {{"g", config.cgrpo.g},
                   {"beta_kl", config.cgrpo.beta_kl},
                   {"clip_eps", config.cgrpo.clip_eps},
                   {"lr", config.cgrpo.lr},
                   {"steps", config.cgrpo.steps},
                   {"batch_size", config.cgrpo.batch_size},
                   {"keyframes", config.cgrpo.keyframes},
                   {"feature_dim", config.cgrpo.feature_dim},
                   {"active_augs", aug_names(config.cgrpo.active_augs)},
                   {"batch_means_over_minibatch",
                    config.cgrpo.batch_means_over_minibatch},
                   {"kl_on_augmented", config.cgrpo.kl_on_augmented},
                   {"train_on_augmented", config.cgrpo.train_on_augmented}};
  root["bench"] = {{"tau", config.bench.tau},
                   {"k", config.bench.k},
                   {"aggregation", std::string(to_string(config.bench.aggregation))}};
  if (config.remote) {
    root["remote"] = {{"endpoint", config.remote->endpoint},
                      {"model_name", config.remote->model_name},
                      {"temperature", config.remote->temperature},
                      {"top_p", config.remote->top_p},
                      {"max_output_tokens", config.remote->max_output_tokens},
                      {"max_parallel", config.remote->max_parallel},
                      {"retry_attempts", config.remote->retry.attempts},
                      {"retry_backoff_ms", config.remote->retry.backoff_ms},
                      {"auth_env", config.remote->auth_env},
                      {"cache_dir", config.remote->cache_dir}};
  }
  return root.dump(2);
}

}  // namespace eqarm

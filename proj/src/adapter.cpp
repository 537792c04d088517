#include "eqarm/adapter.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "eqarm/augment.hpp"
#include "eqarm/encoding.hpp"
#include "eqarm/errors.hpp"
#include "eqarm/image_io.hpp"
#include "eqarm/rng.hpp"

namespace eqarm {

using nlohmann::json;

void RemoteConfig::validate() const {
  if (endpoint.empty()) throw ConfigError("remote: endpoint is required");
  if (!(temperature > 0.0)) throw ConfigError("remote: temperature must be > 0");
  if (!(top_p > 0.0 && top_p <= 1.0))
    throw ConfigError("remote: top_p must be in (0,1]");
  if (max_parallel < 1) throw ConfigError("remote: max_parallel must be >= 1");
  if (max_output_tokens < 1)
    throw ConfigError("remote: max_output_tokens must be >= 1");
  if (retry.attempts < 1) throw ConfigError("remote: retry attempts must be >= 1");
}

namespace {

struct ParsedUrl {
  std::string host;
  int port = 80;
  std::string path = "/";
};

ParsedUrl parse_url(const std::string& url) {
  constexpr std::string_view scheme = "http://";
  if (url.rfind(scheme.data(), 0) != 0)
    throw ConfigError("remote: only http:// endpoints are supported, got " + url);
  ParsedUrl out;
  const std::string rest = url.substr(scheme.size());
  const auto slash = rest.find('/');
  std::string authority = slash == std::string::npos ? rest : rest.substr(0, slash);
  if (slash != std::string::npos) out.path = rest.substr(slash);
  const auto colon = authority.find(':');
  if (colon == std::string::npos) {
    out.host = authority;
  } else {
    out.host = authority.substr(0, colon);
    out.port = std::stoi(authority.substr(colon + 1));
  }
  if (out.host.empty()) throw ConfigError("remote: endpoint has no host");
  return out;
}

class HttplibTransport final : public Transport {
 public:
  HttpResponse post(const std::string& url, const std::string& body,
                    const std::vector<std::pair<std::string, std::string>>& headers)
      override {
    const ParsedUrl parsed = parse_url(url);
    httplib::Client client(parsed.host, parsed.port);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);
    httplib::Headers hdrs;
    for (const auto& [key, value] : headers) hdrs.emplace(key, value);
    auto result = client.Post(parsed.path, hdrs, body, "application/json");
    if (!result)
      throw TransportError("connection to " + url + " failed: " +
                           httplib::to_string(result.error()));
    return HttpResponse{result->status, result->body};
  }
};

std::string data_url_for_frame(const Frame& frame) {
  std::ostringstream ppm;
  ppm << (frame.channels == 1 ? "P5" : "P6") << "\n"
      << frame.width << " " << frame.height << "\n255\n";
  std::string bytes = ppm.str();
  bytes.reserve(bytes.size() + frame.pixel_count());
  for (const float v : frame.pixels)
    bytes.push_back(static_cast<char>(intensity_to_byte(v)));
  return "data:image/x-portable-anymap;base64," +
         base64_encode(reinterpret_cast<const std::uint8_t*>(bytes.data()),
                       bytes.size());
}

json build_request(const RemoteConfig& cfg, const std::string& prompt,
                   const std::vector<Frame>* images, std::uint64_t seed) {
  json message;
  message["role"] = "user";
  if (images == nullptr || images->empty()) {
    message["content"] = prompt;
  } else {
    json parts = json::array();
    parts.push_back({{"type", "text"}, {"text", prompt}});
    for (const auto& frame : *images)
      parts.push_back(
          {{"type", "image_url"}, {"image_url", {{"url", data_url_for_frame(frame)}}}});
    message["content"] = parts;
  }
  json request;
  request["model"] = cfg.model_name;
  request["messages"] = json::array({message});
  request["temperature"] = cfg.temperature;
  request["top_p"] = cfg.top_p;
  request["n"] = 1;
  request["max_tokens"] = cfg.max_output_tokens;
  request["seed"] = seed;
  return request;
}

std::string extract_completion(const std::string& body, const std::string& context) {
  json response;
  try {
    response = json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(context + ": response is not JSON: " + e.what());
  }
  try {
    const auto& choices = response.at("choices");
    if (!choices.is_array() || choices.empty())
      throw ProtocolError(context + ": response has no choices");
    return choices.at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw ProtocolError(context + ": unexpected response shape: " + e.what());
  }
}

std::filesystem::path cache_path(const RemoteConfig& cfg, const std::string& body) {
  char name[32];
  std::snprintf(name, sizeof(name), "%016llx.json",
                static_cast<unsigned long long>(fnv1a64(cfg.endpoint + "\n" + body)));
  return std::filesystem::path(cfg.cache_dir) / name;
}

/// One completion with retry; used by the fan-out workers.
std::string fetch_one(const RemoteConfig& cfg, Transport& transport,
                      const std::string& request_body,
                      const std::vector<std::pair<std::string, std::string>>& headers,
                      GenerateStats* stats, std::mutex& stats_mu) {
  if (!cfg.cache_dir.empty()) {
    const auto path = cache_path(cfg, request_body);
    std::ifstream cached(path);
    if (cached) {
      std::stringstream buffer;
      buffer << cached.rdbuf();
      if (stats != nullptr) {
        const std::lock_guard lock(stats_mu);
        ++stats->cache_hits;
      }
      return extract_completion(buffer.str(), "cached response");
    }
  }

  std::string last_error;
  for (int attempt = 1; attempt <= cfg.retry.attempts; ++attempt) {
    if (attempt > 1) {
      const auto& schedule = cfg.retry.backoff_ms;
      const int sleep_ms =
          schedule.empty()
              ? 0
              : schedule[std::min<std::size_t>(attempt - 2, schedule.size() - 1)];
      std::this_thread::sleep_for(std::chrono::milliseconds(sleep_ms));
      if (stats != nullptr) {
        const std::lock_guard lock(stats_mu);
        ++stats->retries;
      }
    }
    if (stats != nullptr) {
      const std::lock_guard lock(stats_mu);
      ++stats->requests;
    }
    try {
      const HttpResponse response =
          transport.post(cfg.endpoint, request_body, headers);
      if (response.status >= 200 && response.status < 300) {
        std::string text = extract_completion(response.body, cfg.endpoint);
        if (!cfg.cache_dir.empty()) {
          std::filesystem::create_directories(cfg.cache_dir);
          std::ofstream out(cache_path(cfg, request_body));
          out << response.body;
        }
        return text;
      }
      if (response.status >= 500) {  // transient
        last_error = "server error " + std::to_string(response.status);
        continue;
      }
      throw TransportError(cfg.endpoint + ": permanent failure, status " +
                           std::to_string(response.status) + ", body: " +
                           response.body.substr(0, 200));
    } catch (const ProtocolError&) {
      throw;
    } catch (const TransportError& e) {
      if (std::string_view(e.what()).find("permanent failure") !=
          std::string_view::npos)
        throw;
      last_error = e.what();
    }
  }
  throw TransportError(cfg.endpoint + ": retries exhausted after " +
                       std::to_string(cfg.retry.attempts) + " attempts; last: " +
                       last_error);
}

}  // namespace

std::unique_ptr<Transport> make_http_transport() {
  return std::make_unique<HttplibTransport>();
}

std::vector<std::string> generate(const RemoteConfig& cfg, Transport& transport,
                                  const std::string& prompt,
                                  const std::vector<Frame>* images, int n,
                                  std::uint64_t seed_hint, GenerateStats* stats) {
  cfg.validate();
  if (n < 1) throw ValidationError("generate: n must be >= 1");

  std::vector<std::pair<std::string, std::string>> headers;
  if (!cfg.auth_env.empty()) {
    const char* key = std::getenv(cfg.auth_env.c_str());
    if (key == nullptr || *key == '\0')
      throw ConfigError("remote: auth environment variable '" + cfg.auth_env +
                        "' is not set");
    headers.emplace_back("Authorization", std::string("Bearer ") + key);
  }

  std::vector<std::string> bodies(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    bodies[static_cast<std::size_t>(i)] =
        build_request(cfg, prompt, images, mix_seed(seed_hint, i)).dump();

  std::vector<std::string> results(static_cast<std::size_t>(n));
  std::mutex stats_mu;

  const int workers = std::min(cfg.max_parallel, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i)
      results[static_cast<std::size_t>(i)] =
          fetch_one(cfg, transport, bodies[static_cast<std::size_t>(i)], headers,
                    stats, stats_mu);
    return results;
  }

  std::atomic<int> next{0};
  std::mutex error_mu;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const int index = next.fetch_add(1);
        if (index >= n) return;
        {
          const std::lock_guard lock(error_mu);
          if (first_error) return;
        }
        try {
          results[static_cast<std::size_t>(index)] =
              fetch_one(cfg, transport, bodies[static_cast<std::size_t>(index)],
                        headers, stats, stats_mu);
        } catch (...) {
          const std::lock_guard lock(error_mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& thread : pool) thread.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

std::vector<CandidateEvaluation> generate_rft_candidates(
    const RemoteConfig& cfg, Transport& transport, const PromptTemplate& tmpl,
    const EqaInstance& instance, int n_rft, double tau, std::uint64_t seed_hint,
    GenerateStats* stats) {
  if (n_rft < 1) throw ValidationError("generate_rft_candidates: n_rft must be >= 1");
  // Candidates are produced without the ground truth: include_gt stays false,
  // so a template carrying {answer_gt} is rejected up front.
  const std::string prompt = render_prompt(tmpl, instance, /*include_gt=*/false);
  const EpisodeMemory frames =
      tmpl.frame_slots > 0
          ? select_keyframes(instance.episode,
                             static_cast<std::size_t>(tmpl.frame_slots))
          : instance.episode;
  const auto texts =
      generate(cfg, transport, prompt, &frames.frames, n_rft, seed_hint, stats);

  std::vector<CandidateEvaluation> candidates;
  candidates.reserve(texts.size());
  for (const auto& text : texts) {
    const ParsedEvaluation parsed = parse_evaluation(text);
    CandidateEvaluation cand;
    cand.instance_id = instance.id;
    cand.evaluation = parsed.evaluation;
    cand.parsed_ok = parsed.format_ok;
    cand.correct = parsed.format_ok &&
                   classify_correct(instance.gt_score, parsed.evaluation.score, tau);
    candidates.push_back(std::move(cand));
  }
  return candidates;
}

std::vector<PolicySample> remote_policy_sample(
    const RemoteConfig& cfg, Transport& transport, const PromptTemplate& tmpl,
    const EqaInstance& instance, const ConditionView& view, ContextVariant variant,
    int k, std::uint64_t seed_hint, GenerateStats* stats) {
  if (k < 1) throw ValidationError("remote_policy_sample: k must be >= 1");
  if (view.episode == nullptr || view.trace == nullptr)
    throw ValidationError("remote_policy_sample: incomplete condition view");
  const std::string prompt =
      render_prompt(tmpl, instance, /*include_gt=*/false, {}, view.trace);
  const EpisodeMemory frames =
      tmpl.frame_slots > 0
          ? select_keyframes(*view.episode,
                             static_cast<std::size_t>(tmpl.frame_slots))
          : *view.episode;
  const auto texts =
      generate(cfg, transport, prompt, &frames.frames, k, seed_hint, stats);

  std::vector<PolicySample> samples;
  samples.reserve(texts.size());
  for (const auto& text : texts) {
    const ParsedEvaluation parsed = parse_evaluation(text);
    PolicySample sample;
    sample.evaluation = parsed.evaluation;
    sample.logp = std::nullopt;  // unavailable over the wire
    sample.variant = variant;
    sample.format_ok = parsed.format_ok;
    samples.push_back(std::move(sample));
  }
  return samples;
}

}  // namespace eqarm

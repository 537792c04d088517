#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <vector>

#include "eqarm/policy.hpp"
#include "eqarm/rft.hpp"
#include "eqarm/structured_io.hpp"
#include "eqarm/types.hpp"

namespace eqarm {

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Minimal POST transport. The production implementation speaks HTTP; tests
/// substitute scripted stubs, so no test needs a live endpoint.
class Transport {
 public:
  virtual ~Transport() = default;
  /// Throws TransportError on connection-level failure.
  virtual HttpResponse post(
      const std::string& url, const std::string& body,
      const std::vector<std::pair<std::string, std::string>>& headers) = 0;
};

std::unique_ptr<Transport> make_http_transport();

struct RetrySchedule {
  int attempts = 3;                        // total tries per request
  std::vector<int> backoff_ms{100, 400};   // sleep before retry i (last repeats)
};

struct RemoteConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8080/v1/chat/completions
  std::string model_name;
  double temperature = 0.8;
  double top_p = 0.9;
  int max_output_tokens = 768;
  int max_parallel = 4;
  RetrySchedule retry{};
  std::string auth_env;   // env var holding the bearer token; empty = no auth
  std::string cache_dir;  // response replay cache; empty = disabled

  void validate() const;
};

struct GenerateStats {
  int requests = 0;  // HTTP posts actually issued
  int retries = 0;
  int cache_hits = 0;
};

/// n completions for one prompt. Requests fan out one completion each, at most
/// max_parallel in flight; transient failures (connect errors, 5xx) retry per
/// the schedule; permanent failures carry the request context. Results are
/// returned in request order.
std::vector<std::string> generate(const RemoteConfig& cfg, Transport& transport,
                                  const std::string& prompt,
                                  const std::vector<Frame>* images, int n,
                                  std::uint64_t seed_hint,
                                  GenerateStats* stats = nullptr);

/// Renders the evaluator prompt WITHOUT ground truth, samples n_rft candidate
/// evaluations and classifies each against the instance's gt_score (locally;
/// the gt never enters the outbound payload). Unparseable completions become
/// score-0 candidates with parsed_ok = false.
std::vector<CandidateEvaluation> generate_rft_candidates(
    const RemoteConfig& cfg, Transport& transport, const PromptTemplate& tmpl,
    const EqaInstance& instance, int n_rft, double tau,
    std::uint64_t seed_hint = 0, GenerateStats* stats = nullptr);

/// k parsed evaluations for one condition of an instance. Log-probabilities
/// are unavailable remotely, so the samples suit benchmarking and TTS only.
std::vector<PolicySample> remote_policy_sample(
    const RemoteConfig& cfg, Transport& transport, const PromptTemplate& tmpl,
    const EqaInstance& instance, const ConditionView& view, ContextVariant variant,
    int k, std::uint64_t seed_hint = 0, GenerateStats* stats = nullptr);

/// EvaluationPolicy facade over a remote endpoint (sampling-only).
class RemoteEvaluationPolicy final : public EvaluationPolicy {
 public:
  RemoteEvaluationPolicy(RemoteConfig cfg, PromptTemplate tmpl,
                         std::shared_ptr<Transport> transport)
      : cfg_(std::move(cfg)), tmpl_(std::move(tmpl)),
        transport_(std::move(transport)) {}

  std::vector<PolicySample> evaluate(const EqaInstance& instance,
                                     const ConditionView& view,
                                     ContextVariant variant, std::size_t count,
                                     std::uint64_t seed) override {
    return remote_policy_sample(cfg_, *transport_, tmpl_, instance, view, variant,
                                static_cast<int>(count), seed);
  }
  bool supports_logprobs() const override { return false; }
  std::string_view name() const override { return "remote"; }

 private:
  RemoteConfig cfg_;
  PromptTemplate tmpl_;
  std::shared_ptr<Transport> transport_;
};

}  // namespace eqarm

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eqarm/policy.hpp"
#include "eqarm/types.hpp"

namespace eqarm {

enum class Aggregation { MajorityVote, Average };
std::string_view to_string(Aggregation a);
Aggregation aggregation_from_string(std::string_view s);

/// K raw sampled scores for one instance, optionally already aggregated.
struct Prediction {
  std::string instance_id;
  std::vector<int> raw_scores;
  std::optional<double> aggregated;
  std::size_t parse_failures = 0;  // samples that fell back to score 0
};

/// Fraction of |pred - gt| <= tau (non-strict, unlike the RFT filter).
double accuracy_at_tolerance(const std::vector<double>& preds,
                             const std::vector<double>& gts, double tau);

double rmse(const std::vector<double>& preds, const std::vector<double>& gts);

/// MajorityVote: most frequent score; ties resolved by the tied value closest
/// to the mean of all K scores, then by the smaller value. Average: arithmetic
/// mean, kept real-valued.
double tts_aggregate(const std::vector<int>& raw, Aggregation method);

struct BenchConfig {
  double tau = 2.0;
  std::size_t k = 1;
  Aggregation aggregation = Aggregation::Average;
};

struct MetricRow {
  std::size_t count = 0;
  double acc = 0.0;
  double rmse = 0.0;
};

struct BenchReport {
  MetricRow overall;
  std::map<Environment, MetricRow> by_environment;
  std::map<QuestionType, MetricRow> by_question_type;
  std::vector<std::string> missing_instance_ids;  // instances with no prediction
  std::size_t parse_failures = 0;
  BenchConfig config;
};

/// Metrics over the covered instances; missing predictions are listed in the
/// report, never silently dropped. A prediction whose instance_id matches no
/// instance is an error.
BenchReport evaluate(const std::vector<Prediction>& predictions,
                     const std::vector<EqaInstance>& instances,
                     const BenchConfig& cfg);

std::string render_report_text(const BenchReport& report);
std::string render_report_csv(const BenchReport& report);

/// Prediction files: newline-delimited JSON with fields instance_id,
/// raw_scores, method and optionally aggregated, parse_failures.
std::vector<Prediction> load_predictions(const std::filesystem::path& path);
void save_predictions(const std::filesystem::path& path,
                      const std::vector<Prediction>& predictions,
                      Aggregation method);

/// Samples k evaluations per instance from any evaluation policy (original
/// condition) and collects the parsed scores into raw predictions.
std::vector<Prediction> predict(EvaluationPolicy& policy,
                                const std::vector<EqaInstance>& instances,
                                std::size_t k, std::uint64_t seed);

}  // namespace eqarm

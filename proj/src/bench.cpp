#include "eqarm/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "eqarm/errors.hpp"
#include "eqarm/rng.hpp"

namespace eqarm {

using nlohmann::json;

std::string_view to_string(Aggregation a) {
  return a == Aggregation::MajorityVote ? "majority_vote" : "average";
}

Aggregation aggregation_from_string(std::string_view s) {
  if (s == "majority_vote") return Aggregation::MajorityVote;
  if (s == "average") return Aggregation::Average;
  throw ValidationError("unknown aggregation method '" + std::string(s) + "'");
}

double accuracy_at_tolerance(const std::vector<double>& preds,
                             const std::vector<double>& gts, double tau) {
  if (preds.size() != gts.size())
    throw ValidationError("accuracy_at_tolerance: length mismatch");
  if (preds.empty()) throw ValidationError("accuracy_at_tolerance: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (std::abs(preds[i] - gts[i]) <= tau) ++hits;
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double rmse(const std::vector<double>& preds, const std::vector<double>& gts) {
  if (preds.size() != gts.size()) throw ValidationError("rmse: length mismatch");
  if (preds.empty()) throw ValidationError("rmse: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double diff = preds[i] - gts[i];
    sum += diff * diff;
  }
  return std::sqrt(sum / static_cast<double>(preds.size()));
}

double tts_aggregate(const std::vector<int>& raw, Aggregation method) {
  if (raw.empty()) throw ValidationError("tts_aggregate: no raw scores");
  double mean = 0.0;
  for (const int s : raw) {
    if (s < kScoreMin || s > kScoreMax)
      throw ValidationError("tts_aggregate: raw score outside [0,10]");
    mean += s;
  }
  mean /= static_cast<double>(raw.size());
  if (method == Aggregation::Average) return mean;

  std::array<int, kScoreCount> counts{};
  for (const int s : raw) ++counts[static_cast<std::size_t>(s)];
  const int top = *std::max_element(counts.begin(), counts.end());
  // Tie-break: tied value closest to the mean of all K scores, then smaller.
  int best = -1;
  double best_dist = 0.0;
  for (int s = kScoreMin; s <= kScoreMax; ++s) {
    if (counts[static_cast<std::size_t>(s)] != top) continue;
    const double dist = std::abs(static_cast<double>(s) - mean);
    if (best < 0 || dist < best_dist) {
      best = s;
      best_dist = dist;
    }
  }
  return static_cast<double>(best);
}

namespace {

MetricRow make_row(const std::vector<double>& preds, const std::vector<double>& gts,
                   double tau) {
  MetricRow row;
  row.count = preds.size();
  if (!preds.empty()) {
    row.acc = accuracy_at_tolerance(preds, gts, tau);
    row.rmse = rmse(preds, gts);
  }
  return row;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

BenchReport evaluate(const std::vector<Prediction>& predictions,
                     const std::vector<EqaInstance>& instances,
                     const BenchConfig& cfg) {
  std::unordered_map<std::string, const EqaInstance*> by_id;
  for (const auto& inst : instances) by_id[inst.id] = &inst;

  std::unordered_map<std::string, const Prediction*> pred_by_id;
  for (const auto& pred : predictions) {
    if (!by_id.count(pred.instance_id))
      throw ValidationError("evaluate: prediction for unknown instance '" +
                            pred.instance_id + "'");
    if (!pred_by_id.emplace(pred.instance_id, &pred).second)
      throw ValidationError("evaluate: duplicate prediction for instance '" +
                            pred.instance_id + "'");
  }

  BenchReport report;
  report.config = cfg;

  std::vector<double> all_preds, all_gts;
  std::map<Environment, std::pair<std::vector<double>, std::vector<double>>> env_data;
  std::map<QuestionType, std::pair<std::vector<double>, std::vector<double>>> type_data;

  for (const auto& inst : instances) {
    const auto it = pred_by_id.find(inst.id);
    if (it == pred_by_id.end()) {
      report.missing_instance_ids.push_back(inst.id);
      continue;
    }
    const Prediction& pred = *it->second;
    const double value = pred.aggregated
                             ? *pred.aggregated
                             : tts_aggregate(pred.raw_scores, cfg.aggregation);
    report.parse_failures += pred.parse_failures;
    const auto gt = static_cast<double>(inst.gt_score);
    all_preds.push_back(value);
    all_gts.push_back(gt);
    env_data[inst.environment].first.push_back(value);
    env_data[inst.environment].second.push_back(gt);
    type_data[inst.question_type].first.push_back(value);
    type_data[inst.question_type].second.push_back(gt);
  }

  if (all_preds.empty())
    throw ValidationError("evaluate: no instance has a prediction");

  report.overall = make_row(all_preds, all_gts, cfg.tau);
  for (const auto& [env, data] : env_data)
    report.by_environment[env] = make_row(data.first, data.second, cfg.tau);
  for (const auto& [type, data] : type_data)
    report.by_question_type[type] = make_row(data.first, data.second, cfg.tau);
  return report;
}

std::string render_report_text(const BenchReport& report) {
  std::ostringstream out;
  char line[160];
  out << "Benchmark report (tau=" << format_double(report.config.tau)
      << ", K=" << report.config.k << ", aggregation="
      << to_string(report.config.aggregation) << ")\n";
  out << "----------------------------------------------------------------\n";
  std::snprintf(line, sizeof(line), "%-34s %7s %9s %9s\n", "scope", "count",
                "acc", "rmse");
  out << line;
  const auto emit = [&](const std::string& scope, const MetricRow& row) {
    std::snprintf(line, sizeof(line), "%-34s %7zu %9.4f %9.4f\n", scope.c_str(),
                  row.count, row.acc, row.rmse);
    out << line;
  };
  emit("overall", report.overall);
  for (const auto& [env, row] : report.by_environment)
    emit("env:" + std::string(to_string(env)) +
             (env == Environment::HM3D ? " (OOD)" : " (ID)"),
         row);
  for (const auto& [type, row] : report.by_question_type)
    emit("qtype:" + std::string(to_string(type)), row);
  out << "----------------------------------------------------------------\n";
  out << "parse failures contributing score 0: " << report.parse_failures << "\n";
  if (!report.missing_instance_ids.empty()) {
    out << "WARNING: " << report.missing_instance_ids.size()
        << " instance(s) have no prediction; metrics cover the predicted "
           "subset only:\n";
    for (const auto& id : report.missing_instance_ids) out << "  missing: " << id << "\n";
  }
  return out.str();
}

std::string render_report_csv(const BenchReport& report) {
  std::ostringstream out;
  out << "scope,count,acc,rmse\n";
  const auto emit = [&](const std::string& scope, const MetricRow& row) {
    out << scope << "," << row.count << "," << format_double(row.acc) << ","
        << format_double(row.rmse) << "\n";
  };
  emit("overall", report.overall);
  for (const auto& [env, row] : report.by_environment)
    emit("env:" + std::string(to_string(env)), row);
  for (const auto& [type, row] : report.by_question_type)
    emit("qtype:" + std::string(to_string(type)), row);
  out << "meta:parse_failures," << report.parse_failures << ",,\n";
  out << "meta:missing," << report.missing_instance_ids.size() << ",,\n";
  return out.str();
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open prediction file " + path.string());
  std::vector<Prediction> predictions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
      Prediction pred;
      pred.instance_id = rec.at("instance_id").get<std::string>();
      pred.raw_scores = rec.at("raw_scores").get<std::vector<int>>();
      if (rec.contains("aggregated") && !rec.at("aggregated").is_null())
        pred.aggregated = rec.at("aggregated").get<double>();
      if (rec.contains("parse_failures"))
        pred.parse_failures = rec.at("parse_failures").get<std::size_t>();
      predictions.push_back(std::move(pred));
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " +
                            e.what());
    }
  }
  return predictions;
}

void save_predictions(const std::filesystem::path& path,
                      const std::vector<Prediction>& predictions,
                      Aggregation method) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write prediction file " + path.string());
  for (const auto& pred : predictions) {
    json rec;
    rec["instance_id"] = pred.instance_id;
    rec["raw_scores"] = pred.raw_scores;
    rec["method"] = to_string(method);
    if (pred.aggregated) rec["aggregated"] = *pred.aggregated;
    if (pred.parse_failures > 0) rec["parse_failures"] = pred.parse_failures;
    out << rec.dump() << "\n";
  }
  if (!out) throw ValidationError("short write to " + path.string());
}

std::vector<Prediction> predict(EvaluationPolicy& policy,
                                const std::vector<EqaInstance>& instances,
                                std::size_t k, std::uint64_t seed) {
  if (k == 0) throw ValidationError("predict: k must be >= 1");
  std::vector<Prediction> predictions;
  predictions.reserve(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    const ConditionView view{&inst.episode, &inst.trace};
    const auto samples = policy.evaluate(inst, view, ContextVariant::Original, k,
                                         mix_seed(seed, i));
    Prediction pred;
    pred.instance_id = inst.id;
    for (const auto& sample : samples) {
      pred.raw_scores.push_back(sample.evaluation.score);
      if (!sample.format_ok) ++pred.parse_failures;
    }
    predictions.push_back(std::move(pred));
  }
  return predictions;
}

}  // namespace eqarm

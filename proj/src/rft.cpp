#include "eqarm/rft.hpp"

#include <cmath>

#include "eqarm/errors.hpp"

namespace eqarm {

bool classify_correct(int s_gt, int s_aux, double tau) {
  if (s_gt < kScoreMin || s_gt > kScoreMax || s_aux < kScoreMin || s_aux > kScoreMax)
    throw ValidationError("classify_correct: score outside [0,10]");
  if (!(tau > 0.0)) throw ValidationError("classify_correct: tau must be > 0");
  return std::abs(s_gt - s_aux) < tau;
}

std::vector<CandidateEvaluation> rejective_filter(
    const std::vector<CandidateEvaluation>& group) {
  if (group.empty()) throw ValidationError("rejective_filter: empty group");
  const std::string& id = group.front().instance_id;
  std::size_t correct_count = 0;
  for (const auto& cand : group) {
    if (cand.instance_id != id)
      throw ValidationError("rejective_filter: mixed instance ids '" + id +
                            "' vs '" + cand.instance_id + "'");
    if (cand.correct) ++correct_count;
  }
  std::vector<CandidateEvaluation> kept;
  if (correct_count == group.size()) return kept;  // all-correct: too easy
  for (const auto& cand : group)
    if (cand.correct) kept.push_back(cand);
  return kept;
}

void TokenLogProbs::validate() const {
  if (target_tokens.empty())
    throw ValidationError("token logprobs: empty sample");
  if (target_tokens.size() != logps.size())
    throw ValidationError("token logprobs: token/logp length mismatch");
  for (const double lp : logps)
    if (!(lp <= 0.0)) throw ValidationError("token logprobs: logp above 0");
}

double sft_nll(const std::vector<TokenLogProbs>& samples) {
  if (samples.empty()) throw ValidationError("sft_nll: empty sample set");
  double loss = 0.0;
  for (const auto& sample : samples) {
    sample.validate();
    for (const double lp : sample.logps) loss -= lp;
  }
  return loss;
}

}  // namespace eqarm

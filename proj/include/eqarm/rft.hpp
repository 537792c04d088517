#pragma once

#include <string>
#include <vector>

#include "eqarm/types.hpp"

namespace eqarm {

/// One candidate evaluation of an instance by an auxiliary evaluator.
struct CandidateEvaluation {
  Evaluation evaluation;
  bool correct = false;
  std::string instance_id;
  bool parsed_ok = true;  // false for completions the tag parser rejected
};

/// Strict inequality: |s_gt - s_aux| < tau. Note the Acc@tau benchmark metric
/// uses the non-strict form; the filter is strict.
bool classify_correct(int s_gt, int s_aux, double tau);

/// Keeps a candidate iff it is correct and the group is not all-correct
/// ("too easy"). All candidates must share one instance_id.
std::vector<CandidateEvaluation> rejective_filter(
    const std::vector<CandidateEvaluation>& group);

/// Target-token log-probabilities for one supervised sample.
struct TokenLogProbs {
  std::vector<int> target_tokens;
  std::vector<double> logps;

  void validate() const;
};

/// Negative log-likelihood, summed over samples and tokens (a double sum,
/// not a mean).
double sft_nll(const std::vector<TokenLogProbs>& samples);

}  // namespace eqarm

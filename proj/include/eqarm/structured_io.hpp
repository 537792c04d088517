#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>

#include "eqarm/types.hpp"

namespace eqarm {

/// A prompt text with named placeholders. Recognized placeholders:
/// {question}, {reasoning_trace}, {predicted_answer}, {answer_gt}.
struct PromptTemplate {
  std::string role_preamble;
  std::string body;
  int frame_slots = 0;

  /// Throws TemplateError on an unknown {placeholder} in the body.
  void validate() const;

  /// Plain-text asset. An optional leading "#! frame_slots=N" directive sets
  /// frame_slots; the first paragraph (up to the first blank line) becomes the
  /// role preamble and the remainder the body.
  static PromptTemplate load(const std::filesystem::path& path);
};

/// Substitutes every placeholder. {answer_gt} requires include_gt = true and a
/// non-empty answer_gt argument; passing include_gt = false for a template
/// that uses {answer_gt} is a TemplateError. trace_override substitutes a
/// different trace for {reasoning_trace} (perturbed-condition prompting).
std::string render_prompt(const PromptTemplate& tmpl, const EqaInstance& instance,
                          bool include_gt, std::string_view answer_gt = {},
                          const ReasoningTrace* trace_override = nullptr);

struct ParsedEvaluation {
  Evaluation evaluation;
  bool format_ok = false;
  std::string raw;
};

/// Total function: extracts the first <critique>...</critique> and the first
/// <score>...</score> blocks, ignoring surrounding prose. format_ok is true
/// iff both blocks exist, the critique is non-blank and the score is an
/// integer in [0,10]. Unparseable or out-of-range scores fall back to 0.
ParsedEvaluation parse_evaluation(std::string_view text);

/// 1 iff the evaluation adheres to the critique-score structure, else 0.
int format_reward(const ParsedEvaluation& parsed);

/// Inverse of parse_evaluation for well-formed evaluations.
std::string render_evaluation(const Evaluation& evaluation);

/// Parses a policy generation: every <think>...</think> block inside the first
/// <reasoning_trace> block becomes one trace step; returns the trace and the
/// trimmed <predicted_answer> content. Throws ParseError naming the missing or
/// malformed tag.
std::pair<ReasoningTrace, std::string> parse_generation(std::string_view text);

}  // namespace eqarm

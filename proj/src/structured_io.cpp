#include "eqarm/structured_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>

#include "eqarm/errors.hpp"

namespace eqarm {

namespace {

constexpr std::string_view kPlaceholders[] = {"question", "reasoning_trace",
                                              "predicted_answer", "answer_gt"};

bool known_placeholder(std::string_view name) {
  return std::find(std::begin(kPlaceholders), std::end(kPlaceholders), name) !=
         std::end(kPlaceholders);
}

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto begin = s.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(ws);
  return s.substr(begin, end - begin + 1);
}

/// First <tag>...</tag> block; returns inner content or nullopt.
std::optional<std::string_view> first_block(std::string_view text,
                                            std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  const auto start = text.find(open);
  if (start == std::string_view::npos) return std::nullopt;
  const auto body_begin = start + open.size();
  const auto end = text.find(close, body_begin);
  if (end == std::string_view::npos) return std::nullopt;
  return text.substr(body_begin, end - body_begin);
}

std::optional<int> parse_int_strict(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::size_t i = 0;
  bool negative = false;
  if (s[0] == '-' || s[0] == '+') {
    negative = s[0] == '-';
    i = 1;
    if (s.size() == 1) return std::nullopt;
  }
  long value = 0;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
    value = value * 10 + (s[i] - '0');
    if (value > 1000000) return std::nullopt;  // wildly out of range anyway
  }
  return static_cast<int>(negative ? -value : value);
}

std::string render_text(std::string_view text, const EqaInstance& instance,
                        bool include_gt, std::string_view answer_gt,
                        const ReasoningTrace* trace_override) {
  const ReasoningTrace& trace =
      trace_override != nullptr ? *trace_override : instance.trace;
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    const auto close = text.find('}', open + 1);
    if (close == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));
    const std::string_view name = text.substr(open + 1, close - open - 1);
    if (name == "question") {
      out.append(instance.question);
    } else if (name == "predicted_answer") {
      out.append(instance.answer);
    } else if (name == "reasoning_trace") {
      for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        if (i > 0) out.push_back('\n');
        out.append(trace.steps[i]);
      }
    } else if (name == "answer_gt") {
      if (!include_gt)
        throw TemplateError(
            "placeholder {answer_gt} present but include_gt is false");
      if (answer_gt.empty())
        throw TemplateError("placeholder {answer_gt} unresolvable: no ground-truth "
                            "answer supplied");
      out.append(answer_gt);
    } else {
      throw TemplateError("unresolvable placeholder {" + std::string(name) + "}");
    }
    pos = close + 1;
  }
  return out;
}

}  // namespace

void PromptTemplate::validate() const {
  std::size_t pos = 0;
  while (pos < body.size()) {
    const auto open = body.find('{', pos);
    if (open == std::string::npos) break;
    const auto close = body.find('}', open + 1);
    if (close == std::string::npos) break;
    const std::string_view name =
        std::string_view(body).substr(open + 1, close - open - 1);
    if (!known_placeholder(name))
      throw TemplateError("unknown placeholder {" + std::string(name) +
                          "} in template body");
    pos = close + 1;
  }
  if (frame_slots < 0) throw TemplateError("frame_slots must be >= 0");
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TemplateError("cannot open template file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();

  PromptTemplate tmpl;
  if (text.rfind("#!", 0) == 0) {
    const auto eol = text.find('\n');
    const std::string directive =
        text.substr(2, eol == std::string::npos ? std::string::npos : eol - 2);
    const auto eq = directive.find("frame_slots=");
    if (eq != std::string::npos) {
      const auto value = parse_int_strict(
          std::string_view(directive).substr(eq + std::string("frame_slots=").size()));
      if (!value) throw TemplateError(path.string() + ": bad frame_slots directive");
      tmpl.frame_slots = *value;
    }
    text = eol == std::string::npos ? std::string() : text.substr(eol + 1);
  }

  const auto gap = text.find("\n\n");
  if (gap == std::string::npos) {
    tmpl.body = text;
  } else {
    tmpl.role_preamble = text.substr(0, gap);
    tmpl.body = text.substr(gap + 2);
  }
  tmpl.validate();
  return tmpl;
}

std::string render_prompt(const PromptTemplate& tmpl, const EqaInstance& instance,
                          bool include_gt, std::string_view answer_gt,
                          const ReasoningTrace* trace_override) {
  tmpl.validate();
  std::string out;
  if (!tmpl.role_preamble.empty()) {
    out = render_text(tmpl.role_preamble, instance, include_gt, answer_gt,
                      trace_override);
    out += "\n\n";
  }
  out += render_text(tmpl.body, instance, include_gt, answer_gt, trace_override);
  return out;
}

ParsedEvaluation parse_evaluation(std::string_view text) {
  ParsedEvaluation parsed;
  parsed.raw.assign(text);

  const auto critique = first_block(text, "critique");
  const auto score_text = first_block(text, "score");

  bool ok = critique.has_value() && score_text.has_value();
  if (critique) parsed.evaluation.critique.assign(*critique);
  if (ok && trim(*critique).empty()) ok = false;

  if (score_text) {
    const auto value = parse_int_strict(*score_text);
    if (value && *value >= kScoreMin && *value <= kScoreMax) {
      parsed.evaluation.score = *value;
    } else {
      parsed.evaluation.score = 0;
      ok = false;
    }
  }
  parsed.format_ok = ok;
  return parsed;
}

int format_reward(const ParsedEvaluation& parsed) {
  return parsed.format_ok ? 1 : 0;
}

std::string render_evaluation(const Evaluation& evaluation) {
  return "<critique>" + evaluation.critique + "</critique>\n<score>" +
         std::to_string(evaluation.score) + "</score>";
}

std::pair<ReasoningTrace, std::string> parse_generation(std::string_view text) {
  const auto trace_block = first_block(text, "reasoning_trace");
  if (!trace_block)
    throw ParseError("generation is missing a <reasoning_trace> block");
  const auto answer_block = first_block(text, "predicted_answer");
  if (!answer_block)
    throw ParseError("generation is missing a <predicted_answer> block");

  ReasoningTrace trace;
  std::string_view rest = *trace_block;
  constexpr std::string_view kOpen = "<think>";
  constexpr std::string_view kClose = "</think>";
  while (true) {
    const auto open = rest.find(kOpen);
    const auto stray_close = rest.find(kClose);
    if (open == std::string_view::npos) {
      if (stray_close != std::string_view::npos)
        throw ParseError("malformed <think> tags: closer without opener");
      break;
    }
    if (stray_close != std::string_view::npos && stray_close < open)
      throw ParseError("malformed <think> tags: closer without opener");
    const auto body_begin = open + kOpen.size();
    const auto close = rest.find(kClose, body_begin);
    if (close == std::string_view::npos)
      throw ParseError("malformed <think> tags: unterminated block");
    const std::string_view body = rest.substr(body_begin, close - body_begin);
    if (body.find(kOpen) != std::string_view::npos)
      throw ParseError("malformed <think> tags: nested opener");
    const auto step = trim(body);
    if (step.empty()) throw ParseError("empty <think> step");
    trace.steps.emplace_back(step);
    rest = rest.substr(close + kClose.size());
  }
  if (trace.steps.empty())
    throw ParseError("reasoning_trace contains no <think> steps");
  return {std::move(trace), std::string(trim(*answer_block))};
}

}  // namespace eqarm

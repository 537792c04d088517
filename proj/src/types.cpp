#include "eqarm/types.hpp"

#include <algorithm>
#include <unordered_set>

#include "eqarm/errors.hpp"

namespace eqarm {

namespace {
std::string loc(std::string_view where, std::string_view what) {
  return std::string(where) + ": " + std::string(what);
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
  });
}
}  // namespace

void Frame::validate(std::string_view where) const {
  if (height < 1 || width < 1)
    throw ValidationError(loc(where, "height and width must be >= 1"));
  if (channels != 1 && channels != 3)
    throw ValidationError(loc(where, "channels must be 1 or 3"));
  if (pixels.size() != pixel_count())
    throw ValidationError(loc(where, "pixel buffer size does not match dims"));
  for (const float v : pixels) {
    if (!(v >= 0.0f && v <= 1.0f))
      throw ValidationError(loc(where, "intensity outside [0,1]"));
  }
}

void EpisodeMemory::validate(std::string_view where) const {
  if (frames.empty()) throw ValidationError(loc(where, "no frames"));
  const Frame& first = frames.front();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    frames[i].validate(where);
    if (frames[i].height != first.height || frames[i].width != first.width ||
        frames[i].channels != first.channels)
      throw ValidationError(loc(where, "frames disagree on height/width/channels"));
  }
}

void ReasoningTrace::validate(std::string_view where) const {
  if (steps.empty()) throw ValidationError(loc(where, "trace has no steps"));
  for (const auto& step : steps) {
    if (is_blank(step))
      throw ValidationError(loc(where, "trace step empty after trimming"));
  }
}

std::string_view to_string(QuestionType t) {
  switch (t) {
    case QuestionType::ObjectRecognition: return "ObjectRecognition";
    case QuestionType::ObjectLocalization: return "ObjectLocalization";
    case QuestionType::AttributeRecognition: return "AttributeRecognition";
    case QuestionType::SpatialUnderstanding: return "SpatialUnderstanding";
    case QuestionType::ObjectStateRecognition: return "ObjectStateRecognition";
    case QuestionType::FunctionalReasoning: return "FunctionalReasoning";
    case QuestionType::WorldKnowledge: return "WorldKnowledge";
  }
  return "ObjectRecognition";
}

std::string_view to_string(Environment e) {
  return e == Environment::HM3D ? "HM3D" : "ScanNet";
}

QuestionType question_type_from_string(std::string_view s) {
  for (int i = 0; i < kQuestionTypeCount; ++i) {
    const auto t = static_cast<QuestionType>(i);
    if (to_string(t) == s) return t;
  }
  throw ValidationError("unknown question_type '" + std::string(s) + "'");
}

Environment environment_from_string(std::string_view s) {
  if (s == "HM3D") return Environment::HM3D;
  if (s == "ScanNet") return Environment::ScanNet;
  throw ValidationError("unknown environment '" + std::string(s) + "'");
}

void EqaInstance::validate(std::string_view where) const {
  if (id.empty()) throw ValidationError(loc(where, "empty id"));
  if (gt_score < kScoreMin || gt_score > kScoreMax)
    throw ValidationError(loc(where, "gt_score outside [0,10]"));
  trace.validate(where);
  episode.validate(where);
}

void DatasetSplit::validate() const {
  std::unordered_set<std::string> finetune_sources;
  for (const auto& inst : finetune) {
    if (inst.environment != Environment::ScanNet)
      throw ValidationError("split: non-ScanNet instance '" + inst.id +
                            "' on the finetune side");
    finetune_sources.insert(inst.episode.source_id);
  }
  for (const auto& inst : bench) {
    if (finetune_sources.count(inst.episode.source_id))
      throw ValidationError("split: episode source '" + inst.episode.source_id +
                            "' appears on both sides");
  }
}

}  // namespace eqarm

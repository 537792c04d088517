#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eqarm {

/// One video frame, row-major (height x width x channels), intensities in [0, 1].
struct Frame {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<float> pixels;

  float at(int y, int x, int c) const {
    return pixels[static_cast<std::size_t>((y * width + x) * channels + c)];
  }
  float& at(int y, int x, int c) {
    return pixels[static_cast<std::size_t>((y * width + x) * channels + c)];
  }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
           static_cast<std::size_t>(channels);
  }

  /// Throws ValidationError; `where` prefixes the message.
  void validate(std::string_view where = "frame") const;
};

/// Ordered frame sequence an agent observed; the visual context of an instance.
struct EpisodeMemory {
  std::string source_id;
  std::vector<Frame> frames;

  void validate(std::string_view where = "episode") const;
};

/// Ordered textual steps explaining the agent's answer.
struct ReasoningTrace {
  std::vector<std::string> steps;

  void validate(std::string_view where = "trace") const;
};

enum class QuestionType {
  ObjectRecognition,
  ObjectLocalization,
  AttributeRecognition,
  SpatialUnderstanding,
  ObjectStateRecognition,
  FunctionalReasoning,
  WorldKnowledge,
};
inline constexpr int kQuestionTypeCount = 7;

enum class Environment { HM3D, ScanNet };

std::string_view to_string(QuestionType t);
std::string_view to_string(Environment e);
QuestionType question_type_from_string(std::string_view s);
Environment environment_from_string(std::string_view s);

inline constexpr int kScoreMin = 0;
inline constexpr int kScoreMax = 10;
inline constexpr int kScoreCount = kScoreMax - kScoreMin + 1;

/// A critique plus an integer score in [0, 10]: the reward model's output unit.
struct Evaluation {
  std::string critique;
  int score = 0;

  bool operator==(const Evaluation&) const = default;
};

/// One benchmark row.
struct EqaInstance {
  std::string id;
  std::string question;
  std::string answer;  // the agent's predicted answer
  ReasoningTrace trace;
  EpisodeMemory episode;
  int gt_score = 0;
  std::optional<std::string> gt_critique;  // stored for analysis, never trained on
  QuestionType question_type = QuestionType::ObjectRecognition;
  Environment environment = Environment::ScanNet;

  void validate(std::string_view where = "instance") const;
};

/// Finetune / benchmark partition. Episode sources never straddle the sides
/// and the finetune side holds only ScanNet instances.
struct DatasetSplit {
  std::vector<EqaInstance> finetune;
  std::vector<EqaInstance> bench;

  void validate() const;
};

}  // namespace eqarm

#include "eqarm/dataset.hpp"

#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "eqarm/encoding.hpp"
#include "eqarm/errors.hpp"
#include "eqarm/image_io.hpp"
#include "eqarm/rng.hpp"

namespace eqarm {

using nlohmann::json;

namespace {

[[noreturn]] void record_error(const std::filesystem::path& path, std::size_t line,
                               const std::string& field, const std::string& what) {
  throw ValidationError(path.string() + ":" + std::to_string(line) + ": field '" +
                        field + "': " + what);
}

template <typename T>
T require_field(const json& rec, const char* field,
                const std::filesystem::path& path, std::size_t line) {
  if (!rec.contains(field)) record_error(path, line, field, "missing");
  try {
    return rec.at(field).get<T>();
  } catch (const json::exception& e) {
    record_error(path, line, field, e.what());
  }
}

EpisodeMemory parse_frames(const json& frames, const std::filesystem::path& path,
                           std::size_t line) {
  EpisodeMemory episode;
  episode.source_id = require_field<std::string>(frames, "source_id", path, line);
  const int height = require_field<int>(frames, "height", path, line);
  const int width = require_field<int>(frames, "width", path, line);
  const int channels = require_field<int>(frames, "channels", path, line);
  const bool embedded = frames.contains("data_b64");
  const bool referenced = frames.contains("paths");
  if (embedded == referenced)
    record_error(path, line, "frames",
                 "exactly one of 'data_b64' or 'paths' must be present");

  if (embedded) {
    const auto blobs = require_field<std::vector<std::string>>(frames, "data_b64",
                                                               path, line);
    for (const auto& blob : blobs) {
      Frame frame;
      frame.height = height;
      frame.width = width;
      frame.channels = channels;
      std::vector<std::uint8_t> bytes;
      try {
        bytes = base64_decode(blob);
      } catch (const ValidationError& e) {
        record_error(path, line, "frames.data_b64", e.what());
      }
      if (bytes.size() != frame.pixel_count())
        record_error(path, line, "frames.data_b64",
                     "decoded byte count does not match height*width*channels");
      frame.pixels.resize(bytes.size());
      for (std::size_t i = 0; i < bytes.size(); ++i)
        frame.pixels[i] = byte_to_intensity(bytes[i]);
      episode.frames.push_back(std::move(frame));
    }
  } else {
    const auto rel_paths = require_field<std::vector<std::string>>(frames, "paths",
                                                                   path, line);
    const auto base = path.parent_path();
    for (const auto& rel : rel_paths) {
      Frame frame = load_frame_image(base / rel);
      if (frame.height != height || frame.width != width ||
          frame.channels != channels)
        record_error(path, line, "frames.paths",
                     "image '" + rel + "' does not match the declared dims");
      episode.frames.push_back(std::move(frame));
    }
  }
  return episode;
}

EqaInstance parse_record(const json& rec, const std::filesystem::path& path,
                         std::size_t line) {
  if (!rec.is_object()) record_error(path, line, "<record>", "not a JSON object");
  EqaInstance inst;
  inst.id = require_field<std::string>(rec, "id", path, line);
  inst.question = require_field<std::string>(rec, "question", path, line);
  inst.answer = require_field<std::string>(rec, "answer", path, line);
  inst.trace.steps =
      require_field<std::vector<std::string>>(rec, "reasoning_steps", path, line);
  if (!rec.contains("frames")) record_error(path, line, "frames", "missing");
  inst.episode = parse_frames(rec.at("frames"), path, line);
  inst.gt_score = require_field<int>(rec, "gt_score", path, line);
  if (rec.contains("gt_critique") && !rec.at("gt_critique").is_null())
    inst.gt_critique = require_field<std::string>(rec, "gt_critique", path, line);
  inst.question_type = question_type_from_string(
      require_field<std::string>(rec, "question_type", path, line));
  inst.environment = environment_from_string(
      require_field<std::string>(rec, "environment", path, line));

  if (inst.gt_score < kScoreMin || inst.gt_score > kScoreMax)
    record_error(path, line, "gt_score",
                 "value " + std::to_string(inst.gt_score) + " outside [0,10]");
  try {
    inst.validate("record");
  } catch (const ValidationError& e) {
    record_error(path, line, "<record>", e.what());
  }
  return inst;
}

}  // namespace

std::vector<EqaInstance> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset file " + path.string());
  std::vector<EqaInstance> instances;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      record_error(path, line_no, "<json>", e.what());
    }
    try {
      instances.push_back(parse_record(rec, path, line_no));
    } catch (const ValidationError&) {
      throw;
    }
  }
  return instances;
}

void save_dataset(const std::filesystem::path& path,
                  const std::vector<EqaInstance>& instances) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write dataset file " + path.string());
  for (const auto& inst : instances) {
    inst.validate("save_dataset");
    json frames;
    frames["source_id"] = inst.episode.source_id;
    const Frame& first = inst.episode.frames.front();
    frames["height"] = first.height;
    frames["width"] = first.width;
    frames["channels"] = first.channels;
    std::vector<std::string> blobs;
    for (const auto& frame : inst.episode.frames) {
      std::vector<std::uint8_t> bytes(frame.pixel_count());
      for (std::size_t i = 0; i < bytes.size(); ++i)
        bytes[i] = intensity_to_byte(frame.pixels[i]);
      blobs.push_back(base64_encode(bytes));
    }
    frames["data_b64"] = blobs;

    json rec;
    rec["id"] = inst.id;
    rec["question"] = inst.question;
    rec["answer"] = inst.answer;
    rec["reasoning_steps"] = inst.trace.steps;
    rec["frames"] = frames;
    rec["gt_score"] = inst.gt_score;
    if (inst.gt_critique) rec["gt_critique"] = *inst.gt_critique;
    else rec["gt_critique"] = nullptr;
    rec["question_type"] = to_string(inst.question_type);
    rec["environment"] = to_string(inst.environment);
    out << rec.dump() << "\n";
  }
  if (!out) throw ValidationError("short write to " + path.string());
}

SplitDescriptor descriptor_by_source_fraction(
    const std::vector<EqaInstance>& instances, double finetune_fraction,
    std::uint64_t seed) {
  if (!(finetune_fraction >= 0.0 && finetune_fraction <= 1.0))
    throw ValidationError("split: finetune_fraction must be in [0,1]");
  // Distinct ScanNet sources in first-appearance order, then seeded shuffle.
  std::vector<std::string> sources;
  std::set<std::string> seen;
  for (const auto& inst : instances) {
    if (inst.environment != Environment::ScanNet) continue;
    if (seen.insert(inst.episode.source_id).second)
      sources.push_back(inst.episode.source_id);
  }
  Rng rng(seed);
  const auto perm = random_permutation(sources.size(), rng);
  const auto take = static_cast<std::size_t>(
      std::llround(finetune_fraction * static_cast<double>(sources.size())));
  std::set<std::string> finetune_sources;
  for (std::size_t i = 0; i < take; ++i) finetune_sources.insert(sources[perm[i]]);

  SplitDescriptor desc;
  for (const auto& inst : instances) {
    const bool to_finetune = inst.environment == Environment::ScanNet &&
                             finetune_sources.count(inst.episode.source_id) > 0;
    desc.by_instance_id[inst.id] =
        to_finetune ? SplitSide::Finetune : SplitSide::Bench;
  }
  return desc;
}

SplitDescriptor descriptor_scannet_count(
    const std::vector<EqaInstance>& instances, std::size_t n) {
  SplitDescriptor desc;
  std::set<std::string> finetune_sources;
  std::size_t taken = 0;
  for (const auto& inst : instances) {
    bool to_finetune = false;
    if (inst.environment == Environment::ScanNet) {
      if (finetune_sources.count(inst.episode.source_id)) {
        to_finetune = true;  // keep episodes whole
      } else if (taken < n) {
        finetune_sources.insert(inst.episode.source_id);
        to_finetune = true;
      }
    }
    if (to_finetune) ++taken;
    desc.by_instance_id[inst.id] =
        to_finetune ? SplitSide::Finetune : SplitSide::Bench;
  }
  if (taken < n)
    throw ValidationError("split: only " + std::to_string(taken) +
                          " ScanNet instances available, need " + std::to_string(n));
  return desc;
}

DatasetSplit split_dataset(const std::vector<EqaInstance>& instances,
                           const SplitDescriptor& descriptor) {
  DatasetSplit split;
  for (const auto& inst : instances) {
    const auto it = descriptor.by_instance_id.find(inst.id);
    if (it == descriptor.by_instance_id.end())
      throw ValidationError("split: descriptor does not assign instance '" +
                            inst.id + "'");
    if (it->second == SplitSide::Finetune) {
      if (inst.environment == Environment::HM3D)
        throw ValidationError("split: HM3D instance '" + inst.id +
                              "' routed to the finetune side");
      split.finetune.push_back(inst);
    } else {
      split.bench.push_back(inst);
    }
  }
  split.validate();  // rejects episode sources straddling the sides
  return split;
}

void SynthConfig::validate() const {
  if (count == 0) throw ValidationError("synth: instance count must be > 0");
  if (frame_height < 1 || frame_width < 1)
    throw ValidationError("synth: frame dims must be >= 1");
  if (frame_channels != 1 && frame_channels != 3)
    throw ValidationError("synth: channels must be 1 or 3");
  if (frames_min == 0 || frames_min > frames_max)
    throw ValidationError("synth: bad frame count range");
  if (trace_len_min == 0 || trace_len_min > trace_len_max)
    throw ValidationError("synth: bad trace length range");
  if (!(scannet_fraction >= 0.0 && scannet_fraction <= 1.0))
    throw ValidationError("synth: scannet_fraction must be in [0,1]");
  if (labeler_noise_std < 0.0)
    throw ValidationError("synth: labeler_noise_std must be >= 0");
}

}  // namespace eqarm

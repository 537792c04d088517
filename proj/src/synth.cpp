#include "eqarm/dataset.hpp"
#include "eqarm/image_io.hpp"
#include "eqarm/policy.hpp"
#include "eqarm/rng.hpp"

namespace eqarm {

namespace {

const char* const kObjects[] = {"backpack", "power strip", "chair",  "mug",
                                "lamp",     "cushion",     "window", "shelf",
                                "plant",    "monitor",     "kettle", "rug"};
const char* const kPlaces[] = {"desk",   "bed",    "doorway", "corner",
                               "table",  "wall",   "floor",   "cabinet",
                               "couch",  "sill"};

std::string make_token(Rng& rng) {
  static const char* const kSyllables[] = {"ka", "ri", "to", "ne", "su",
                                           "mo", "la", "vi", "ze", "du"};
  std::string token;
  const std::size_t parts = 2 + rng.bounded(3);
  for (std::size_t i = 0; i < parts; ++i)
    token += kSyllables[rng.bounded(std::size(kSyllables))];
  return token;
}

Frame make_frame(const SynthConfig& cfg, Rng& rng) {
  Frame frame;
  frame.height = cfg.frame_height;
  frame.width = cfg.frame_width;
  frame.channels = cfg.frame_channels;
  frame.pixels.resize(frame.pixel_count());
  // Per-frame base intensity plus pixel noise, quantized to the storage grid
  // and kept strictly above zero so masking is the only source of 0.0 pixels.
  const double base = 0.15 + 0.7 * rng.next_double();
  for (auto& px : frame.pixels) {
    const double noise = (rng.next_double() - 0.5) * 0.16;
    double v = base + noise;
    if (v < 1.0 / 255.0) v = 1.0 / 255.0;
    if (v > 1.0) v = 1.0;
    px = byte_to_intensity(intensity_to_byte(static_cast<float>(v)));
    if (px == 0.0f) px = byte_to_intensity(1);
  }
  return frame;
}

}  // namespace

std::vector<EqaInstance> synth_dataset(const SynthConfig& config,
                                       std::uint64_t seed) {
  config.validate();
  const SyntheticLabeler labeler = SyntheticLabeler::random(
      config.feature_dim, mix_seed(seed, 0x14be1), config.labeler_gain,
      config.labeler_bias);

  std::vector<EqaInstance> instances;
  instances.reserve(config.count);
  for (std::size_t i = 0; i < config.count; ++i) {
    Rng rng = Rng(seed).fork(i + 1);
    EqaInstance inst;
    char id_buf[32];
    std::snprintf(id_buf, sizeof(id_buf), "synth-%05zu", i);
    inst.id = id_buf;

    const char* object = kObjects[rng.bounded(std::size(kObjects))];
    const char* place = kPlaces[rng.bounded(std::size(kPlaces))];
    inst.question = std::string("Where is the ") + object + " (" + make_token(rng) + ")?";
    inst.answer = std::string("Near the ") + place + ", by the " + make_token(rng) + ".";

    const std::size_t trace_len =
        config.trace_len_min +
        rng.bounded(config.trace_len_max - config.trace_len_min + 1);
    for (std::size_t t = 0; t < trace_len; ++t)
      inst.trace.steps.push_back("Observation " + std::to_string(t + 1) + ": " +
                                 make_token(rng) + " near the " + place + ".");

    inst.episode.source_id = "ep-" + std::string(id_buf + 6);
    const std::size_t frame_count =
        config.frames_min + rng.bounded(config.frames_max - config.frames_min + 1);
    for (std::size_t f = 0; f < frame_count; ++f)
      inst.episode.frames.push_back(make_frame(config, rng));

    inst.question_type = static_cast<QuestionType>(rng.bounded(kQuestionTypeCount));
    inst.environment = rng.next_double() < config.scannet_fraction
                           ? Environment::ScanNet
                           : Environment::HM3D;

    SyntheticLabeler noisy = labeler;
    noisy.noise_std = config.labeler_noise_std;
    const auto features = featurize_original(inst, config.feature_dim);
    inst.gt_score = synthetic_label(features, noisy, mix_seed(seed, 0x9000 + i));
    inst.validate("synth");
    instances.push_back(std::move(inst));
  }
  return instances;
}

}  // namespace eqarm

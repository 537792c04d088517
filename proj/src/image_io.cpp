#include "eqarm/image_io.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "eqarm/errors.hpp"

namespace eqarm {

std::uint8_t intensity_to_byte(float v) {
  const float clamped = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0f));
}

float byte_to_intensity(std::uint8_t b) {
  return static_cast<float>(b) / 255.0f;
}

namespace {

// Skips whitespace and '#' comments between header tokens.
std::string next_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  return tok;
}

int parse_header_int(std::istream& in, const std::string& path,
                     const char* field) {
  const std::string tok = next_token(in);
  try {
    return std::stoi(tok);
  } catch (const std::exception&) {
    throw ValidationError(path + ": bad netpbm header field " + field);
  }
}

}  // namespace

Frame load_frame_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open image file " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  int channels = 0;
  if (magic[0] == 'P' && magic[1] == '5') channels = 1;
  else if (magic[0] == 'P' && magic[1] == '6') channels = 3;
  else throw ValidationError(path.string() + ": not a binary P5/P6 netpbm file");

  const std::string p = path.string();
  const int width = parse_header_int(in, p, "width");
  const int height = parse_header_int(in, p, "height");
  const int maxval = parse_header_int(in, p, "maxval");
  if (maxval != 255)
    throw ValidationError(p + ": only maxval 255 is supported");
  if (width < 1 || height < 1)
    throw ValidationError(p + ": bad image dimensions");

  Frame frame;
  frame.width = width;
  frame.height = height;
  frame.channels = channels;
  const std::size_t n = frame.pixel_count();
  std::vector<std::uint8_t> bytes(n);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw ValidationError(p + ": truncated pixel data");
  frame.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i) frame.pixels[i] = byte_to_intensity(bytes[i]);
  return frame;
}

void save_frame_image(const Frame& frame, const std::filesystem::path& path) {
  frame.validate("save_frame_image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write image file " + path.string());
  out << (frame.channels == 1 ? "P5" : "P6") << "\n"
      << frame.width << " " << frame.height << "\n255\n";
  std::vector<std::uint8_t> bytes(frame.pixel_count());
  for (std::size_t i = 0; i < bytes.size(); ++i)
    bytes[i] = intensity_to_byte(frame.pixels[i]);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ValidationError("short write to " + path.string());
}

}  // namespace eqarm

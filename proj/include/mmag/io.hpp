#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mmag/core.hpp"

namespace mmag::io {

/// Frames as normalized luminance plus optional YIQ chroma planes, which are
/// carried through processing untouched.
struct FrameSequence {
  VideoClip<double> luma;
  std::vector<std::array<Image<double>, 2>> chroma;
  int bit_depth = 16;

  bool has_chroma() const { return !chroma.empty(); }
};

/// Decoded PGM (P5) or PPM (P6) image.
struct PnmImage {
  Image<double> luma;
  std::optional<std::array<Image<double>, 2>> chroma;
  int bit_depth = 8;
};

PnmImage read_pnm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Image<double>& gray, int bit_depth);
void write_ppm(const std::filesystem::path& path, const Image<double>& luma,
               const std::array<Image<double>, 2>& chroma, int bit_depth);

/// Reads either a directory of numbered .pgm/.ppm frames (sorted by name) or
/// a .mmraw container. `fps` is used for directories; containers carry
/// their own rate unless `fps_override` is set.
FrameSequence read_sequence(const std::filesystem::path& path, double fps,
                            std::optional<double> fps_override = std::nullopt);

/// Writes frame_NNNNNN.pgm/.ppm into a directory, or a .mmraw container when
/// the path has that extension.
void write_sequence(const std::filesystem::path& path, const FrameSequence& seq);

bool is_raw_container(const std::filesystem::path& path);

std::string frame_name(Index index, bool color);

/// Round-trips a [0, 1] value through an integer sample of `bit_depth` bits.
double quantize(double v, int bit_depth);

}  // namespace mmag::io

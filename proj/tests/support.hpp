#pragma once

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mmag/core.hpp"

namespace support {

using mmag::Image;
using mmag::Index;
using mmag::VideoClip;

inline Image<double> random_frame(Index h, Index w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image<double> img(h, w);
  for (Index k = 0; k < img.size(); ++k) img.data()[k] = u(rng);
  return img;
}

/// Periodic grating along x with `cycles` periods across the frame, shifted
/// right by `dx` pixels.
inline Image<double> grating(Index h, Index w, double cycles, double dx, double contrast = 0.25) {
  Image<double> img(h, w);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x)
      img(y, x) = 0.5 + contrast * std::cos(2.0 * std::numbers::pi * cycles * (x - dx) / w);
  return img;
}

/// Shift of a pure x-grating relative to `ref`, read off the phase of its
/// single Fourier coefficient. Independent of the pyramid code.
inline double grating_shift(const Image<double>& ref, const Image<double>& img, double cycles) {
  auto coeff = [&](const Image<double>& f) {
    std::complex<double> acc = 0.0;
    const Index w = f.cols();
    for (Index y = 0; y < f.rows(); ++y)
      for (Index x = 0; x < w; ++x)
        acc += f(y, x) * std::polar(1.0, -2.0 * std::numbers::pi * cycles * x / w);
    return acc;
  };
  const double dphi = std::arg(coeff(img) / coeff(ref));
  return -dphi * static_cast<double>(ref.cols()) / (2.0 * std::numbers::pi * cycles);
}

/// out[t] = sum_j taps[j] * s[t - j], evaluated only where no clamping occurs.
inline std::vector<double> naive_convolve(const std::vector<double>& s, const Eigen::VectorXd& taps,
                                          Index radius) {
  std::vector<double> out;
  const Index n = static_cast<Index>(s.size());
  for (Index t = radius; t < n - radius; ++t) {
    long double acc = 0.0L;
    for (Index j = -radius; j <= radius; ++j)
      acc += static_cast<long double>(taps(j + radius)) * static_cast<long double>(s[static_cast<size_t>(t - j)]);
    out.push_back(static_cast<double>(acc));
  }
  return out;
}

inline VideoClip<double> static_clip(const Image<double>& frame, Index n, double fps = 30.0) {
  VideoClip<double> clip;
  clip.fps = fps;
  clip.frames.assign(static_cast<size_t>(n), frame);
  return clip;
}

inline double max_abs_diff(const VideoClip<double>& a, const VideoClip<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.frames.size(); ++i) m = std::max(m, (a.frames[i] - b.frames[i]).abs().maxCoeff());
  return m;
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mmag_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace support

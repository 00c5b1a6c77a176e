#pragma once

#include <Eigen/Core>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmag {

using Index = Eigen::Index;

/// Single-channel frame, row-major so a frame flattens to one contiguous row.
template <typename Scalar>
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using ComplexImage =
    Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Time-major stack: row t holds frame t flattened, column p is the time
/// series of pixel p.
template <typename Scalar>
using TimeMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Series = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Ordered luminance frames I(x, t) in [0, 1] sampled at `fps`.
template <typename Scalar>
struct VideoClip {
  std::vector<Image<Scalar>> frames;
  double fps = 30.0;

  Index length() const { return static_cast<Index>(frames.size()); }
  Index height() const { return frames.empty() ? 0 : frames.front().rows(); }
  Index width() const { return frames.empty() ? 0 : frames.front().cols(); }
};

enum class Errc {
  dimension_too_small,
  too_many_levels,
  invalid_geometry,
  dimension_mismatch,
  invalid_argument,
  super_nyquist,
  radius_too_small,
  series_too_short,
  invalid_band,
  input_not_found,
  unreadable_input,
  mixed_frame_sizes,
  write_failed,
};

inline const char* errc_name(Errc code) {
  switch (code) {
    case Errc::dimension_too_small: return "dimension-too-small";
    case Errc::too_many_levels: return "too-many-levels-for-resolution";
    case Errc::invalid_geometry: return "invalid-geometry";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::super_nyquist: return "super-nyquist";
    case Errc::radius_too_small: return "radius-too-small";
    case Errc::series_too_short: return "series-too-short";
    case Errc::invalid_band: return "invalid-band";
    case Errc::input_not_found: return "input-not-found";
    case Errc::unreadable_input: return "unreadable-input";
    case Errc::mixed_frame_sizes: return "mixed-frame-sizes";
    case Errc::write_failed: return "write-failed";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

template <typename Derived>
auto flatten(const Eigen::DenseBase<Derived>& img) {
  return Eigen::Map<const Eigen::Matrix<typename Derived::Scalar, 1, Eigen::Dynamic>>(
      img.derived().data(), img.size());
}

}  // namespace mmag

#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "mmag/core.hpp"
#include "mmag/fft2.hpp"
#include "mmag/mode.hpp"
#include "mmag/steerable_pyramid.hpp"
#include "mmag/temporal_filters.hpp"

namespace mmag {

struct MagnificationConfig {
  Mode mode = Mode::jerk;
  double alpha = 10.0;
  double center_hz = 1.0;
  double half_width_hz = 0.1;
  Index levels = 4;
  Index orientations = 4;
  OctaveStep octave_step = OctaveStep::half;
  /// Sigma in pixels of the amplitude-weighted blur applied to the filtered
  /// phase; 0 disables it.
  double phase_smoothing_px = 0.0;

  BandSpec band(double fps) const { return BandSpec{center_hz, half_width_hz, fps}; }

  void validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
      throw Error(Errc::invalid_argument, "alpha must be finite and >= 0");
    if (levels < 1) throw Error(Errc::invalid_argument, "levels must be >= 1");
    if (orientations < 2) throw Error(Errc::invalid_argument, "orientations must be >= 2");
    if (!(phase_smoothing_px >= 0.0))
      throw Error(Errc::invalid_argument, "phase smoothing radius must be >= 0");
  }
};

/// Per-band time-major phase and amplitude stacks.
template <typename Scalar>
struct BandSeries {
  TimeMatrix<Scalar> phase;
  TimeMatrix<Scalar> amplitude;
};

template <typename Scalar>
struct PhaseSeries {
  std::vector<BandSeries<Scalar>> bands;
  Index height = 0;
  Index width = 0;
  double fps = 30.0;

  Index length() const { return bands.empty() ? 0 : bands.front().phase.rows(); }
};

/// The temporal filter selected by a mode: a Gaussian-derivative kernel for
/// accel (order 2) and jerk (order 3), an ideal bandpass for linear.
template <typename Scalar>
class TemporalFilter {
 public:
  TemporalFilter(Mode mode, Index length, const BandSpec& band) : mode_(mode) {
    band.validate();
    if (mode == Mode::linear) {
      bandpass_ = bandpass_operator<Scalar>(length, band);
      return;
    }
    const double sigma = gaussian_sigma(band.fps, band.center_hz);
    kernel_ = make_gaussian_derivative_kernel<Scalar>(sigma, mode == Mode::jerk ? 3 : 2);
    if (length < kernel_->length())
      throw Error(Errc::series_too_short,
                  "clip of " + std::to_string(length) + " frames is shorter than the " +
                      mode_name(mode) + " kernel support (" +
                      std::to_string(kernel_->length()) + " frames)");
  }

  Mode mode() const { return mode_; }
  const std::optional<TemporalKernel<Scalar>>& kernel() const { return kernel_; }

  /// Frames whose output depends on edge replication.
  Index boundary_radius() const { return kernel_ ? kernel_->radius : 0; }

  /// Filters every column of a time-major stack.
  TimeMatrix<Scalar> apply(const TimeMatrix<Scalar>& stack) const {
    if (!kernel_) {
      if (stack.rows() != bandpass_.cols())
        throw Error(Errc::dimension_mismatch, "stack length differs from bandpass operator");
      return bandpass_ * stack;
    }
    const Index n = stack.rows();
    if (n < kernel_->length())
      throw Error(Errc::series_too_short, "stack shorter than kernel support");
    const Index r = kernel_->radius;
    TimeMatrix<Scalar> out = TimeMatrix<Scalar>::Zero(n, stack.cols());
    for (Index t = 0; t < n; ++t)
      for (Index j = -r; j <= r; ++j)
        out.row(t) += kernel_->at(j) * stack.row(std::clamp<Index>(t - j, 0, n - 1));
    return out;
  }

 private:
  Mode mode_;
  std::optional<TemporalKernel<Scalar>> kernel_;
  TimeMatrix<Scalar> bandpass_;
};

/// Makes consecutive differences along time (rows) lie in (-pi, pi].
template <typename Scalar>
void unwrap_rows(TimeMatrix<Scalar>& phase) {
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> prev_raw = phase.row(0);
  for (Index t = 1; t < phase.rows(); ++t) {
    for (Index p = 0; p < phase.cols(); ++p) {
      const Scalar raw = phase(t, p);
      Scalar d = raw - prev_raw(p);
      d -= two_pi * std::round(d / two_pi);
      if (d <= -pi) d += two_pi;
      if (d > pi) d -= two_pi;
      prev_raw(p) = raw;
      phase(t, p) = phase(t - 1, p) + d;
    }
  }
}

template <typename Scalar>
PhaseSeries<Scalar> unwrap_phase_temporal(PhaseSeries<Scalar> raw) {
  for (auto& band : raw.bands)
    if (band.phase.rows() > 1) unwrap_rows(band.phase);
  return raw;
}

namespace detail {

template <typename Scalar>
using ComplexTimeMatrix =
    Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
void check_clip(const VideoClip<Scalar>& clip) {
  if (clip.frames.empty()) throw Error(Errc::invalid_argument, "clip has no frames");
  for (const auto& f : clip.frames)
    if (f.rows() != clip.height() || f.cols() != clip.width())
      throw Error(Errc::mixed_frame_sizes, "frames differ in size");
}

template <typename Scalar>
ComplexTimeMatrix<Scalar> band_stack(const std::vector<ComplexImage<Scalar>>& spectra,
                                     const FilterBank<Scalar>& bank, Index b) {
  const Index n = static_cast<Index>(spectra.size());
  ComplexTimeMatrix<Scalar> stack(n, bank.width * bank.height);
  for (Index t = 0; t < n; ++t)
    stack.row(t) = flatten(band_from_spectrum(spectra[static_cast<size_t>(t)], bank, b));
  return stack;
}

template <typename Scalar>
Image<Scalar> periodic_gaussian_blur(const Image<Scalar>& img, double sigma) {
  const Index r = static_cast<Index>(std::ceil(3.0 * sigma));
  Series<Scalar> k(2 * r + 1);
  for (Index i = -r; i <= r; ++i) k(i + r) = Scalar(std::exp(-0.5 * (i * i) / (sigma * sigma)));
  k /= k.sum();
  const Index h = img.rows(), w = img.cols();
  auto wrap = [](Index i, Index n) { return ((i % n) + n) % n; };
  Image<Scalar> tmp = Image<Scalar>::Zero(h, w);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x)
      for (Index i = -r; i <= r; ++i) tmp(y, x) += k(i + r) * img(y, wrap(x + i, w));
  Image<Scalar> out = Image<Scalar>::Zero(h, w);
  for (Index y = 0; y < h; ++y)
    for (Index i = -r; i <= r; ++i) out.row(y) += k(i + r) * tmp.row(wrap(y + i, h));
  return out;
}

}  // namespace detail

/// Blurs filtered phase with amplitude weights: blur(D A) / blur(A).
template <typename Scalar>
Image<Scalar> amplitude_weighted_blur(const Image<Scalar>& values, const Image<Scalar>& amplitude,
                                      double sigma) {
  const Image<Scalar> num = detail::periodic_gaussian_blur<Scalar>(values * amplitude, sigma);
  const Image<Scalar> den = detail::periodic_gaussian_blur<Scalar>(amplitude, sigma);
  const Scalar eps = Scalar(1e-12) * std::max(den.maxCoeff(), Scalar(1e-300));
  return (den > eps).select(num / den.max(eps), Scalar(0));
}

template <typename Scalar>
PhaseSeries<Scalar> extract_phase_series(const VideoClip<Scalar>& clip,
                                         const FilterBank<Scalar>& bank) {
  detail::check_clip(clip);
  if (!bank.matches(clip.height(), clip.width()))
    throw Error(Errc::dimension_mismatch, "clip frame size does not match filter bank");
  std::vector<ComplexImage<Scalar>> spectra;
  spectra.reserve(clip.frames.size());
  for (const auto& f : clip.frames) spectra.push_back(fft2(f));

  PhaseSeries<Scalar> series;
  series.height = clip.height();
  series.width = clip.width();
  series.fps = clip.fps;
  for (Index b = 0; b < bank.band_count(); ++b) {
    const auto stack = detail::band_stack(spectra, bank, b);
    series.bands.push_back({stack.array().arg().matrix(), stack.array().abs().matrix()});
  }
  return unwrap_phase_temporal(std::move(series));
}

namespace detail {

template <typename Scalar>
void smooth_rows(TimeMatrix<Scalar>& filtered, const TimeMatrix<Scalar>& amplitude, Index height,
                 Index width, double sigma) {
  for (Index t = 0; t < filtered.rows(); ++t) {
    Eigen::Map<Image<Scalar>> d(filtered.row(t).data(), height, width);
    const Eigen::Map<const Image<Scalar>> a(amplitude.row(t).data(), height, width);
    d = amplitude_weighted_blur<Scalar>(d, a, sigma);
  }
}

}  // namespace detail

/// Filtered phase deviations D per band; amplitudes are carried through.
template <typename Scalar>
PhaseSeries<Scalar> filter_phase(const PhaseSeries<Scalar>& series,
                                 const MagnificationConfig& config) {
  config.validate();
  const TemporalFilter<Scalar> filter(config.mode, series.length(), config.band(series.fps));
  PhaseSeries<Scalar> out;
  out.height = series.height;
  out.width = series.width;
  out.fps = series.fps;
  for (const auto& band : series.bands) {
    BandSeries<Scalar> f{filter.apply(band.phase), band.amplitude};
    if (config.phase_smoothing_px > 0.0)
      detail::smooth_rows(f.phase, f.amplitude, series.height, series.width,
                          config.phase_smoothing_px);
    out.bands.push_back(std::move(f));
  }
  return out;
}

/// Frames of a magnified clip affected by temporal edge replication.
inline std::vector<Index> magnification_boundary_frames(const MagnificationConfig& config,
                                                        Index length, double fps) {
  if (config.mode == Mode::linear) return {};
  const double sigma = gaussian_sigma(fps, config.center_hz);
  return boundary_frames(length, default_kernel_radius(sigma));
}

/// Phase-based magnification: every band's phase becomes phi + alpha * D
/// with D the temporally filtered phase; amplitudes and residuals are kept.
/// Bands are processed one at a time so peak memory holds one band stack.
template <typename Scalar>
VideoClip<Scalar> magnify(const VideoClip<Scalar>& clip, const MagnificationConfig& config) {
  using C = std::complex<Scalar>;
  detail::check_clip(clip);
  config.validate();
  const Index n = clip.length();
  const Index h = clip.height();
  const Index w = clip.width();
  const auto bank = build_filter_bank<Scalar>(w, h, config.levels, config.orientations,
                                              config.octave_step);
  const TemporalFilter<Scalar> filter(config.mode, n, config.band(clip.fps));

  std::vector<ComplexImage<Scalar>> spectra;
  std::vector<ComplexImage<Scalar>> output;
  spectra.reserve(static_cast<size_t>(n));
  output.reserve(static_cast<size_t>(n));
  for (const auto& f : clip.frames) {
    spectra.push_back(fft2(f));
    output.push_back(residual_spectrum(spectra.back(), bank));
  }

  const Scalar alpha = static_cast<Scalar>(config.alpha);
  for (Index b = 0; b < bank.band_count(); ++b) {
    auto coeffs = detail::band_stack(spectra, bank, b);
    TimeMatrix<Scalar> phase = coeffs.array().arg().matrix();
    unwrap_rows(phase);
    TimeMatrix<Scalar> filtered = filter.apply(phase);
    if (config.phase_smoothing_px > 0.0) {
      const TimeMatrix<Scalar> amp = coeffs.array().abs().matrix();
      detail::smooth_rows(filtered, amp, h, w, config.phase_smoothing_px);
    }
    // A e^{i(phi + alpha D)} = coefficient * e^{i alpha D}
    coeffs.array() *= (C(0, 1) * alpha * filtered.array().template cast<C>()).exp();
    for (Index t = 0; t < n; ++t) {
      const Eigen::Map<const ComplexImage<Scalar>> band(coeffs.row(t).data(), h, w);
      accumulate_band<Scalar>(output[static_cast<size_t>(t)], band, bank, b);
    }
  }

  VideoClip<Scalar> result;
  result.fps = clip.fps;
  result.frames.reserve(static_cast<size_t>(n));
  for (auto& spec : output)
    result.frames.push_back(ifft2<Scalar>(std::move(spec)).real().max(Scalar(0)).min(Scalar(1)));
  return result;
}

}  // namespace mmag

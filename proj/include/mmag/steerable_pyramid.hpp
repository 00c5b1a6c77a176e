#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "mmag/core.hpp"
#include "mmag/fft2.hpp"

namespace mmag {

/// Octaves between successive radial cutoffs.
enum class OctaveStep { full, half };

inline double octave_step_value(OctaveStep step) { return step == OctaveStep::full ? 1.0 : 0.5; }

/// Frequency-domain masks of a non-decimated complex steerable pyramid.
///
/// Radial frequency is measured as rho = 2|f| with f in cycles/pixel, so
/// rho = 1 at the axis Nyquist frequency. Level k has its upper cutoff at
/// rho = 2^(-k * step) and a raised-cosine transition one octave wide below
/// it. Band masks are built as sqrt(lo_k^2 - lo_{k+1}^2), so the squared
/// masks telescope and the frame is tight by construction.
template <typename Scalar>
struct FilterBank {
  Index width = 0;
  Index height = 0;
  Index levels = 0;
  Index orientations = 0;
  OctaveStep octave_step = OctaveStep::half;
  double transition_octaves = 1.0;

  /// Oriented masks, index level * orientations + orientation. Each is
  /// real-valued and supported on the half-plane facing its orientation.
  std::vector<Image<Scalar>> masks;
  Image<Scalar> hi_mask;
  Image<Scalar> lo_mask;

  Index band_count() const { return levels * orientations; }
  Index band_index(Index level, Index orientation) const {
    return level * orientations + orientation;
  }
  const Image<Scalar>& mask(Index level, Index orientation) const {
    return masks[static_cast<size_t>(band_index(level, orientation))];
  }

  double cutoff(Index level) const {
    return std::exp2(-static_cast<double>(level) * octave_step_value(octave_step));
  }

  /// Peak of the radial window of `level`, in cycles/pixel.
  double band_center_frequency(Index level) const {
    const double step = octave_step_value(octave_step);
    return 0.5 * cutoff(level) * std::exp2(-(transition_octaves + step) / 2.0);
  }

  /// Angle of the orientation's half-plane axis, radians in [0, pi).
  double orientation_angle(Index orientation) const {
    return std::numbers::pi * static_cast<double>(orientation) /
           static_cast<double>(orientations);
  }

  bool matches(Index rows, Index cols) const { return rows == height && cols == width; }
};

namespace detail {

inline double raised_cosine_lowpass(double rho, double cutoff, double transition_octaves) {
  if (rho <= 0.0) return 1.0;
  const double x = (std::log2(rho) - (std::log2(cutoff) - transition_octaves)) / transition_octaves;
  if (x <= 0.0) return 1.0;
  if (x >= 1.0) return 0.0;
  return std::cos(0.5 * std::numbers::pi * x);
}

inline double steering_constant(Index orientations) {
  const double n = static_cast<double>(orientations - 1);
  const double log_sq = 2.0 * n * std::log(2.0) + 2.0 * std::lgamma(n + 1.0) -
                        std::log(static_cast<double>(orientations)) - std::lgamma(2.0 * n + 1.0);
  return std::exp(0.5 * log_sq);
}

inline double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a < 0) a += two_pi;
  return a - std::numbers::pi;
}

}  // namespace detail

template <typename Scalar = double>
FilterBank<Scalar> build_filter_bank(Index width, Index height, Index levels, Index orientations,
                                     OctaveStep octave_step = OctaveStep::half) {
  if (levels < 1) throw Error(Errc::invalid_argument, "levels must be >= 1");
  if (orientations < 2) throw Error(Errc::invalid_argument, "orientations must be >= 2");
  if (width <= 0 || height <= 0) throw Error(Errc::dimension_too_small, "empty frame geometry");

  FilterBank<Scalar> bank;
  bank.width = width;
  bank.height = height;
  bank.levels = levels;
  bank.orientations = orientations;
  bank.octave_step = octave_step;

  // The inner edge of the lowest band has to stay at least one DFT bin
  // away from DC, otherwise that band collapses onto the lowpass residual.
  const double inner_edge = bank.cutoff(levels) * std::exp2(-bank.transition_octaves);
  const double bins_from_dc = inner_edge * static_cast<double>(std::min(width, height)) / 2.0;
  if (bins_from_dc < 1.0)
    throw Error(Errc::too_many_levels,
                std::to_string(levels) + " levels leave the lowest band " +
                    std::to_string(bins_from_dc) + " bins from DC");
  if (width < 16 || height < 16)
    throw Error(Errc::dimension_too_small, "frames must be at least 16x16");

  Image<double> rho(height, width);
  Image<double> theta(height, width);
  for (Index r = 0; r < height; ++r) {
    const double fy = dft_frequency(r, height);
    for (Index c = 0; c < width; ++c) {
      const double fx = dft_frequency(c, width);
      rho(r, c) = 2.0 * std::hypot(fx, fy);
      theta(r, c) = std::atan2(fy, fx);
    }
  }

  auto lowpass = [&](Index level) {
    Image<double> lo(height, width);
    const double cut = bank.cutoff(level);
    for (Index i = 0; i < lo.size(); ++i)
      lo.data()[i] = detail::raised_cosine_lowpass(rho.data()[i], cut, bank.transition_octaves);
    return lo;
  };

  const double steer = detail::steering_constant(orientations);
  const double power = static_cast<double>(orientations - 1);

  Image<double> lo_prev = lowpass(0);
  bank.hi_mask = (1.0 - lo_prev.square()).max(0.0).sqrt().template cast<Scalar>();
  bank.masks.reserve(static_cast<size_t>(bank.band_count()));
  for (Index level = 0; level < levels; ++level) {
    Image<double> lo_next = lowpass(level + 1);
    const Image<double> radial = (lo_prev.square() - lo_next.square()).max(0.0).sqrt();
    for (Index o = 0; o < orientations; ++o) {
      const double axis = bank.orientation_angle(o);
      Image<double> angular(height, width);
      for (Index i = 0; i < angular.size(); ++i) {
        const double d = detail::wrap_angle(theta.data()[i] - axis);
        angular.data()[i] =
            std::abs(d) < std::numbers::pi / 2 ? steer * std::pow(std::cos(d), power) : 0.0;
      }
      bank.masks.push_back((radial * angular).template cast<Scalar>());
    }
    lo_prev = std::move(lo_next);
  }
  bank.lo_mask = lo_prev.template cast<Scalar>();
  return bank;
}

/// Complex sub-bands A e^{i phi} plus real residuals, all at full resolution.
template <typename Scalar>
struct SteerablePyramid {
  std::vector<ComplexImage<Scalar>> bands;
  Image<Scalar> hi_residual;
  Image<Scalar> lo_residual;
  Index levels = 0;
  Index orientations = 0;

  const ComplexImage<Scalar>& band(Index level, Index orientation) const {
    return bands[static_cast<size_t>(level * orientations + orientation)];
  }
  ComplexImage<Scalar>& band(Index level, Index orientation) {
    return bands[static_cast<size_t>(level * orientations + orientation)];
  }
};

/// Sub-band `b` of a frame whose forward transform is `spectrum`.
template <typename Scalar>
ComplexImage<Scalar> band_from_spectrum(const ComplexImage<Scalar>& spectrum,
                                        const FilterBank<Scalar>& bank, Index b) {
  return ifft2<Scalar>(spectrum * bank.masks[static_cast<size_t>(b)].template cast<std::complex<Scalar>>());
}

/// Adds the frequency-domain contribution of complex sub-band `b` to a
/// reconstruction accumulator; the factor 2 restores the conjugate
/// half-plane once the real part of the inverse transform is taken.
template <typename Scalar>
void accumulate_band(ComplexImage<Scalar>& accumulator, const ComplexImage<Scalar>& coefficients,
                     const FilterBank<Scalar>& bank, Index b) {
  accumulator += Scalar(2) * fft2(coefficients) *
                 bank.masks[static_cast<size_t>(b)].template cast<std::complex<Scalar>>();
}

/// Residual part of the reconstruction accumulator for a frame spectrum.
template <typename Scalar>
ComplexImage<Scalar> residual_spectrum(const ComplexImage<Scalar>& spectrum,
                                       const FilterBank<Scalar>& bank) {
  return spectrum * (bank.hi_mask.square() + bank.lo_mask.square()).template cast<std::complex<Scalar>>();
}

template <typename Derived>
SteerablePyramid<typename Derived::Scalar> decompose(
    const Eigen::ArrayBase<Derived>& frame, const FilterBank<typename Derived::Scalar>& bank) {
  using Scalar = typename Derived::Scalar;
  using C = std::complex<Scalar>;
  if (!bank.matches(frame.rows(), frame.cols()))
    throw Error(Errc::dimension_mismatch, "frame " + std::to_string(frame.cols()) + "x" +
                                              std::to_string(frame.rows()) +
                                              " does not match filter bank " +
                                              std::to_string(bank.width) + "x" +
                                              std::to_string(bank.height));
  const ComplexImage<Scalar> spectrum = fft2(frame);

  SteerablePyramid<Scalar> pyr;
  pyr.levels = bank.levels;
  pyr.orientations = bank.orientations;
  pyr.bands.reserve(static_cast<size_t>(bank.band_count()));
  for (Index b = 0; b < bank.band_count(); ++b)
    pyr.bands.push_back(band_from_spectrum(spectrum, bank, b));
  pyr.hi_residual = ifft2<Scalar>(spectrum * bank.hi_mask.template cast<C>()).real();
  pyr.lo_residual = ifft2<Scalar>(spectrum * bank.lo_mask.template cast<C>()).real();
  return pyr;
}

template <typename Scalar>
Image<Scalar> reconstruct(const SteerablePyramid<Scalar>& pyr, const FilterBank<Scalar>& bank) {
  using C = std::complex<Scalar>;
  if (pyr.levels != bank.levels || pyr.orientations != bank.orientations ||
      static_cast<Index>(pyr.bands.size()) != bank.band_count())
    throw Error(Errc::dimension_mismatch, "pyramid band layout does not match filter bank");
  if (!bank.matches(pyr.hi_residual.rows(), pyr.hi_residual.cols()) ||
      !bank.matches(pyr.lo_residual.rows(), pyr.lo_residual.cols()))
    throw Error(Errc::dimension_mismatch, "residual size does not match filter bank");

  ComplexImage<Scalar> acc = fft2(pyr.hi_residual) * bank.hi_mask.template cast<C>() +
                             fft2(pyr.lo_residual) * bank.lo_mask.template cast<C>();
  for (Index b = 0; b < bank.band_count(); ++b) {
    const auto& band = pyr.bands[static_cast<size_t>(b)];
    if (!bank.matches(band.rows(), band.cols()))
      throw Error(Errc::dimension_mismatch, "band size does not match filter bank");
    accumulate_band(acc, band, bank, b);
  }
  return ifft2<Scalar>(std::move(acc)).real();
}

template <typename Scalar>
Image<Scalar> amplitude(const ComplexImage<Scalar>& band) {
  return band.abs();
}

template <typename Scalar>
Image<Scalar> phase(const ComplexImage<Scalar>& band) {
  return band.arg();
}

}  // namespace mmag

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "mmag/core.hpp"
#include "mmag/mode.hpp"

namespace mmag {

/// Synthetic arterial distension-displacement waveform.
///
/// One period is a systolic Gaussian bump, a smaller dicrotic Gaussian bump
/// and an exponentially decaying runoff that switches on with the systolic
/// upstroke (exp(-x / decay) * Phi(x / systolic_width)). Times are seconds.
struct PulseWave {
  double period = 1.0;
  Index samples_per_period = 30;
  double systolic_amp = 1.0;
  double systolic_center = 0.15;
  double systolic_width = 0.05;
  double dicrotic_amp = 0.35;
  double dicrotic_center = 0.45;
  double dicrotic_width = 0.04;
  double runoff_amp = 0.5;
  double runoff_decay = 0.35;

  /// Default shape scaled to `period` seconds.
  static PulseWave with_period(double period);

  void validate() const;
};

/// delta(t) for t >= 0 (any real t is accepted; the wave is periodic).
double pulse_waveform(const PulseWave& model, double t);

/// Analytic d^n delta / dt^n, n in 0..3.
double pulse_derivative(const PulseWave& model, double t, int order);

/// delta sampled at t0 + i / fps for i < count.
Eigen::VectorXd sample_waveform(const PulseWave& model, double fps, Index count, double t0 = 0.0);

/// Central finite differences of the sampled wave (spacing 1 / fps) over one
/// period, in units of s^-order.
Eigen::VectorXd derivative_series(const PulseWave& model, int order, double fps);

/// s + alpha * filter(s) over one interior period, with the temporal filter
/// of `mode` tuned to 1 / period.
Eigen::VectorXd magnify_1d(const PulseWave& model, Mode mode, double alpha, double fps);

struct Peak {
  Index index = 0;
  double value = 0.0;
  double prominence = 0.0;
};

/// Local maxima of a periodic series with their topographic prominence.
std::vector<Peak> find_peaks_circular(const Eigen::VectorXd& series);

/// Peaks whose prominence is at least `min_fraction` of the series range.
Index count_prominent_peaks(const Eigen::VectorXd& series, double min_fraction);

enum class Motif { bump, edge };
enum class Background { flat, texture };

struct SynthSpec {
  Index width = 128;
  Index height = 128;
  double fps = 30.0;
  double duration = 5.0;
  Motif motif = Motif::bump;
  Background background = Background::flat;
  /// Peak pulsatile displacement scale in pixels (displacement = amp * delta(t)).
  double motion_amp = 0.5;
  /// Motif radius parameter in pixels; 0 selects 0.2 * min(width, height).
  double motif_size = 0.0;
  double motif_contrast = 0.6;
  /// Whole-field sinusoidal drift along y.
  double drift_amp = 0.0;
  double drift_hz = 0.2;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;

  Index frame_count() const;
  void validate(const PulseWave& model) const;
};

struct SyntheticClip {
  VideoClip<double> clip;
  /// Per-frame ground-truth displacement of the motif (x) and field (y), px.
  std::vector<Eigen::Vector2d> displacement;
  /// Motif support (four envelope sigmas) dilated by the largest displacement.
  Image<std::uint8_t> mask;
  Eigen::Vector2d motif_center = Eigen::Vector2d::Zero();
  double support_radius = 0.0;
};

SyntheticClip synth_clip(const PulseWave& model, const SynthSpec& spec);

}  // namespace mmag

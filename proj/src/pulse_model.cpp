#include "mmag/pulse_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "mmag/temporal_filters.hpp"

namespace mmag {

namespace {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double hermite(int n, double z) {
  double h0 = 1.0;
  if (n == 0) return h0;
  double h1 = z;
  for (int k = 1; k < n; ++k) {
    const double h2 = z * h1 - k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// n-th derivative of amp * exp(-z^2 / 2), z = x / width.
double gaussian_bump(double x, double amp, double width, int n) {
  const double z = x / width;
  return amp * std::pow(-1.0 / width, n) * hermite(n, z) * std::exp(-0.5 * z * z);
}

// n-th derivative of exp(-x / decay) * Phi(x / width).
double gated_decay(double x, double decay, double width, int n) {
  const double e = std::exp(-x / decay);
  const double z = x / width;
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double e_k = std::pow(-1.0 / decay, n - k) * e;
    const double phi_k = (k == 0) ? normal_cdf(z)
                                  : std::pow(1.0 / width, k) * std::pow(-1.0, k - 1) *
                                        hermite(k - 1, z) * normal_pdf(z);
    sum += binomial(n, k) * e_k * phi_k;
  }
  return sum;
}

double phase_in_period(double t, double period) {
  double u = std::fmod(t, period);
  if (u < 0) u += period;
  return u;
}

// Mid-frequency modulation in (0, 1] carried rigidly by the bump motif, so
// its motion reaches the oriented bands rather than only the lowpass residual.
double motif_pattern(double x, double y) {
  const double two_pi = 2.0 * std::numbers::pi;
  return (1.0 + 0.4 * std::cos(two_pi * 0.17 * x) + 0.3 * std::cos(two_pi * (0.12 * x + 0.09 * y)) +
          0.2 * std::cos(two_pi * (0.21 * x - 0.11 * y))) /
         1.9;
}

}  // namespace

PulseWave PulseWave::with_period(double period) {
  PulseWave w;
  w.period = period;
  w.systolic_center = 0.15 * period;
  w.systolic_width = 0.05 * period;
  w.dicrotic_center = 0.45 * period;
  w.dicrotic_width = 0.04 * period;
  w.runoff_decay = 0.35 * period;
  return w;
}

void PulseWave::validate() const {
  if (!(period > 0.0)) throw Error(Errc::invalid_argument, "pulse period must be positive");
  if (samples_per_period < 4) throw Error(Errc::invalid_argument, "need >= 4 samples per period");
  if (!(systolic_width > 0.0 && dicrotic_width > 0.0 && runoff_decay > 0.0))
    throw Error(Errc::invalid_argument, "pulse widths must be positive");
  if (systolic_amp < 0.0 || dicrotic_amp < 0.0 || runoff_amp < 0.0)
    throw Error(Errc::invalid_argument, "pulse amplitudes must be >= 0");
  const bool degenerate = systolic_amp == 0.0 && dicrotic_amp == 0.0;
  if (!degenerate && !(dicrotic_amp < systolic_amp))
    throw Error(Errc::invalid_argument, "dicrotic amplitude must be below systolic amplitude");
}

double pulse_derivative(const PulseWave& m, double t, int order) {
  if (order < 0 || order > 3) throw Error(Errc::invalid_argument, "derivative order must be 0..3");
  const double u = phase_in_period(t, m.period);
  double value = 0.0;
  for (int k = -2; k <= 2; ++k) {
    const double shift = u + k * m.period;
    value += gaussian_bump(shift - m.systolic_center, m.systolic_amp, m.systolic_width, order);
    value += gaussian_bump(shift - m.dicrotic_center, m.dicrotic_amp, m.dicrotic_width, order);
  }
  // Runoff from the current and neighbouring beats; older beats have a
  // fully open gate and sum as a geometric series.
  constexpr int explicit_beats = 4;
  for (int k = -1; k < explicit_beats; ++k)
    value += m.runoff_amp *
             gated_decay(u + k * m.period - m.systolic_center, m.runoff_decay, m.systolic_width, order);
  const double q = std::exp(-m.period / m.runoff_decay);
  const double tail = std::pow(q, explicit_beats) / (1.0 - q);
  value += m.runoff_amp * tail * std::pow(-1.0 / m.runoff_decay, order) *
           std::exp(-(u - m.systolic_center) / m.runoff_decay);
  return value;
}

double pulse_waveform(const PulseWave& model, double t) { return pulse_derivative(model, t, 0); }

Eigen::VectorXd sample_waveform(const PulseWave& model, double fps, Index count, double t0) {
  model.validate();
  if (!(fps > 0.0)) throw Error(Errc::invalid_argument, "fps must be positive");
  Eigen::VectorXd s(count);
  for (Index i = 0; i < count; ++i) s(i) = pulse_waveform(model, t0 + static_cast<double>(i) / fps);
  return s;
}

namespace {

Index samples_per_period(const PulseWave& model, double fps) {
  return std::max<Index>(1, static_cast<Index>(std::lround(model.period * fps)));
}

}  // namespace

Eigen::VectorXd derivative_series(const PulseWave& model, int order, double fps) {
  model.validate();
  if (!(fps > 0.0)) throw Error(Errc::invalid_argument, "fps must be positive");
  if (order < 1 || order > 3) throw Error(Errc::invalid_argument, "derivative order must be 1..3");
  const double h = 1.0 / fps;
  const Index n = samples_per_period(model, fps);
  Eigen::VectorXd d(n);
  // Start one period in so that every stencil point has t >= 0.
  const double t0 = model.period;
  for (Index i = 0; i < n; ++i) {
    const double t = t0 + static_cast<double>(i) * h;
    auto f = [&](int k) { return pulse_waveform(model, t + k * h); };
    switch (order) {
      case 1: d(i) = (f(1) - f(-1)) / (2 * h); break;
      case 2: d(i) = (f(1) - 2 * f(0) + f(-1)) / (h * h); break;
      default: d(i) = (f(2) - 2 * f(1) + 2 * f(-1) - f(-2)) / (2 * h * h * h); break;
    }
  }
  return d;
}

Eigen::VectorXd magnify_1d(const PulseWave& model, Mode mode, double alpha, double fps) {
  model.validate();
  if (!(fps > 0.0)) throw Error(Errc::invalid_argument, "fps must be positive");
  const double freq = 1.0 / model.period;
  const Index spp = samples_per_period(model, fps);
  const double sigma = gaussian_sigma(fps, freq);
  const Index radius = default_kernel_radius(sigma);
  const Index pad_periods = (radius + spp - 1) / spp + 1;
  const Index total = (2 * pad_periods + 1) * spp;

  const Eigen::VectorXd s = sample_waveform(model, fps, total);
  Eigen::VectorXd filtered;
  switch (mode) {
    case Mode::linear: filtered = ideal_bandpass_time(s, BandSpec{freq, 0.1, fps}); break;
    case Mode::accel: filtered = convolve_time(s, make_gaussian_derivative_kernel<double>(sigma, 2)); break;
    case Mode::jerk: filtered = convolve_time(s, make_gaussian_derivative_kernel<double>(sigma, 3)); break;
  }
  return (s + alpha * filtered).segment(pad_periods * spp, spp);
}

std::vector<Peak> find_peaks_circular(const Eigen::VectorXd& x) {
  const Index n = x.size();
  std::vector<Peak> peaks;
  if (n < 3) return peaks;
  auto at = [&](Index i) { return x(((i % n) + n) % n); };
  for (Index i = 0; i < n; ++i) {
    const double v = x(i);
    if (!(v > at(i - 1) && v >= at(i + 1))) continue;
    // Walk both ways until a strictly higher sample; the peak's base is the
    // higher of the two minima passed on the way.
    double left_min = v, right_min = v;
    for (Index j = 1; j < n; ++j) {
      const double y = at(i - j);
      if (y > v) break;
      left_min = std::min(left_min, y);
    }
    for (Index j = 1; j < n; ++j) {
      const double y = at(i + j);
      if (y > v) break;
      right_min = std::min(right_min, y);
    }
    peaks.push_back({i, v, v - std::max(left_min, right_min)});
  }
  return peaks;
}

Index count_prominent_peaks(const Eigen::VectorXd& series, double min_fraction) {
  if (series.size() == 0) return 0;
  const double range = series.maxCoeff() - series.minCoeff();
  if (range <= 0.0) return 0;
  Index count = 0;
  for (const auto& p : find_peaks_circular(series))
    if (p.prominence >= min_fraction * range) ++count;
  return count;
}

Index SynthSpec::frame_count() const {
  return static_cast<Index>(std::lround(duration * fps));
}

void SynthSpec::validate(const PulseWave& model) const {
  if (width < 16 || height < 16) throw Error(Errc::invalid_geometry, "frames must be >= 16x16");
  if (!(fps > 0.0)) throw Error(Errc::invalid_geometry, "fps must be positive");
  if (!(duration >= 3.0 * model.period - 1e-9))
    throw Error(Errc::invalid_geometry, "duration must cover at least three pulse periods");
  if (!(motion_amp >= 0.0 && motion_amp <= 2.0))
    throw Error(Errc::invalid_geometry, "motion amplitude must lie in [0, 2] px");
  if (!(noise_sd >= 0.0)) throw Error(Errc::invalid_geometry, "noise sd must be >= 0");
  if (!(drift_amp >= 0.0)) throw Error(Errc::invalid_geometry, "drift amplitude must be >= 0");
  if (!(motif_size >= 0.0)) throw Error(Errc::invalid_geometry, "motif size must be >= 0");
  const double size = motif_size > 0.0 ? motif_size : 0.2 * static_cast<double>(std::min(width, height));
  if (2.0 * (size + 2.0) > static_cast<double>(std::min(width, height)))
    throw Error(Errc::invalid_geometry, "motif does not fit in the frame");
}

SyntheticClip synth_clip(const PulseWave& model, const SynthSpec& spec) {
  model.validate();
  spec.validate(model);
  const Index n = spec.frame_count();
  const Index h = spec.height, w = spec.width;
  const double size =
      spec.motif_size > 0.0 ? spec.motif_size : 0.2 * static_cast<double>(std::min(w, h));
  const double motif_sigma = size / 3.0;

  std::mt19937_64 rng(spec.seed);

  // Background: periodic sum of integer-frequency cosines, so whole-field
  // drift stays exact under the periodic pyramid.
  struct Wave {
    double kx, ky, phase, amp;
  };
  std::vector<Wave> texture;
  if (spec.background == Background::texture) {
    std::uniform_int_distribution<int> freq(4, 24);
    std::uniform_int_distribution<int> sign(0, 1);
    std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
    for (int i = 0; i < 6; ++i) {
      const double kx = freq(rng) * (sign(rng) ? 1.0 : -1.0);
      const double ky = freq(rng) * (sign(rng) ? 1.0 : -1.0);
      texture.push_back({kx, ky, ph(rng), 0.025});
    }
  }
  const double base = spec.background == Background::texture ? 0.25 : 0.2;

  SyntheticClip out;
  out.clip.fps = spec.fps;
  out.motif_center = Eigen::Vector2d((w - 1) / 2.0, (h - 1) / 2.0);
  double max_disp = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / spec.fps;
    const double dx = spec.motion_amp * pulse_waveform(model, t);
    const double dy = spec.drift_amp * std::sin(2.0 * std::numbers::pi * spec.drift_hz * t);
    out.displacement.emplace_back(dx, dy);
    max_disp = std::max(max_disp, std::hypot(dx, dy));
  }

  std::normal_distribution<double> noise(0.0, spec.noise_sd);
  for (Index i = 0; i < n; ++i) {
    const double dx = out.displacement[static_cast<size_t>(i)].x();
    const double dy = out.displacement[static_cast<size_t>(i)].y();
    Image<double> frame(h, w);
    for (Index y = 0; y < h; ++y) {
      for (Index x = 0; x < w; ++x) {
        const double fx = static_cast<double>(x);
        const double fy = static_cast<double>(y) - dy;
        double v = base;
        for (const auto& wv : texture)
          v += wv.amp * std::cos(2.0 * std::numbers::pi * (wv.kx * fx / w + wv.ky * fy / h) + wv.phase);
        const double mx = fx - out.motif_center.x() - dx;
        const double my = fy - out.motif_center.y();
        const double envelope = std::exp(-0.5 * (mx * mx + my * my) / (motif_sigma * motif_sigma));
        if (spec.motif == Motif::bump)
          v += spec.motif_contrast * envelope * motif_pattern(mx, my);
        else
          v += spec.motif_contrast * 0.5 * (1.0 + std::tanh(mx)) * envelope;
        frame(y, x) = v;
      }
    }
    if (spec.noise_sd > 0.0)
      for (Index k = 0; k < frame.size(); ++k) frame.data()[k] += noise(rng);
    out.clip.frames.push_back(frame.max(0.0).min(1.0));
  }

  out.support_radius = 4.0 * motif_sigma + max_disp;
  out.mask.resize(h, w);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      const double r = std::hypot(x - out.motif_center.x(), y - out.motif_center.y());
      out.mask(y, x) = r <= out.support_radius ? 1 : 0;
    }
  return out;
}

}  // namespace mmag

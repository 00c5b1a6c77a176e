#include <doctest.h>

#include "mmag/pulse_model.hpp"
#include "support.hpp"

using namespace mmag;

namespace {

Eigen::Vector2d centroid(const Image<double>& frame, double base) {
  const Image<double> w = (frame - base).max(0.0);
  double sx = 0.0, sy = 0.0;
  for (Index y = 0; y < w.rows(); ++y)
    for (Index x = 0; x < w.cols(); ++x) sx += x * w(y, x), sy += y * w(y, x);
  return Eigen::Vector2d(sx, sy) / w.sum();
}

}  // namespace

TEST_SUITE("pulse_model") {
  TEST_CASE("waveform is periodic") {
    const PulseWave pw;
    for (double t : {0.0, 0.13, 0.37, 0.5, 0.81, 2.4})
      CHECK(std::abs(pulse_waveform(pw, t) - pulse_waveform(pw, t + pw.period)) < 1e-12);
    const PulseWave slow = PulseWave::with_period(1.1);
    CHECK(std::abs(pulse_waveform(slow, 0.3) - pulse_waveform(slow, 0.3 + 3 * 1.1)) < 1e-12);
  }

  TEST_CASE("systolic maximum and dicrotic secondary peak") {
    const PulseWave pw;
    const Eigen::VectorXd s = sample_waveform(pw, 300, 300, 0.0);
    Index arg = 0;
    s.maxCoeff(&arg);
    const double t_max = arg / 300.0;
    CHECK(t_max >= pw.systolic_center - pw.systolic_width);
    CHECK(t_max <= pw.systolic_center + 2 * pw.systolic_width);
    const auto peaks = find_peaks_circular(s);
    CHECK(peaks.size() == 2);
    if (peaks.size() == 2) CHECK(std::abs(peaks[1].index / 300.0 - pw.dicrotic_center) < 0.05);
  }

  TEST_CASE("waveform is continuous at fine sampling") {
    const Eigen::VectorXd s = sample_waveform(PulseWave{}, 300, 600, 0.0);
    const double range = s.maxCoeff() - s.minCoeff();
    for (Index i = 1; i < s.size(); ++i) CHECK(std::abs(s(i) - s(i - 1)) < 0.2 * range);
  }

  TEST_CASE("finite differences agree with analytic derivatives") {
    const PulseWave pw;
    for (int order = 1; order <= 3; ++order) {
      const Eigen::VectorXd fd = derivative_series(pw, order, 300);
      Eigen::VectorXd exact(fd.size());
      for (Index i = 0; i < fd.size(); ++i) exact(i) = pulse_derivative(pw, pw.period + i / 300.0, order);
      const double rms_err = std::sqrt((fd - exact).squaredNorm() / fd.size());
      const double rms = std::sqrt(exact.squaredNorm() / fd.size());
      CAPTURE(order);
      CHECK(rms_err < 0.02 * rms);
    }
  }

  TEST_CASE("analytic derivative matches a numeric one") {
    const PulseWave pw;
    const double h = 1e-5;
    for (double t : {0.05, 0.17, 0.44, 0.7, 0.98})
      for (int order = 1; order <= 3; ++order) {
        const double num =
            (pulse_derivative(pw, t + h, order - 1) - pulse_derivative(pw, t - h, order - 1)) / (2 * h);
        CHECK(pulse_derivative(pw, t, order) == doctest::Approx(num).epsilon(1e-5));
      }
  }

  TEST_CASE("degenerate wave has zero derivatives") {
    PulseWave pw;
    pw.systolic_amp = pw.dicrotic_amp = pw.runoff_amp = 0.0;
    CHECK(derivative_series(pw, 1, 30).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("parameter validation") {
    PulseWave pw;
    pw.dicrotic_amp = 1.2;
    CHECK_THROWS_AS(pw.validate(), Error);
    pw = {};
    pw.period = 0;
    CHECK_THROWS_AS(pw.validate(), Error);
    CHECK_THROWS_AS(derivative_series(PulseWave{}, 4, 30), Error);
    CHECK_THROWS_AS(pulse_derivative(PulseWave{}, 0.1, -1), Error);
  }

  TEST_CASE("zero gain returns the sampled wave") {
    const PulseWave pw;
    const Eigen::VectorXd s = sample_waveform(pw, 30, 30, 0.0);
    for (Mode m : {Mode::linear, Mode::accel, Mode::jerk})
      CHECK((magnify_1d(pw, m, 0.0, 30) - s).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("1-D magnification is linear in alpha") {
    const PulseWave pw;
    const Eigen::VectorXd s = sample_waveform(pw, 30, 30, 0.0);
    for (Mode m : {Mode::linear, Mode::accel, Mode::jerk}) {
      const Eigen::VectorXd d1 = magnify_1d(pw, m, 1.0, 30) - s;
      const Eigen::VectorXd d7 = magnify_1d(pw, m, 7.0, 30) - s;
      CHECK((d7 - 7.0 * d1).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  TEST_CASE("jerk output has twin peaks where linear has one") {
    for (double period : {0.9, 1.0, 1.1}) {
      const PulseWave pw = PulseWave::with_period(period);
      CAPTURE(period);
      CHECK(count_prominent_peaks(magnify_1d(pw, Mode::jerk, 10, 30), 0.1) == 2);
    }
    const PulseWave pw;
    const Eigen::VectorXd lin = magnify_1d(pw, Mode::linear, 10, 30);
    const Eigen::VectorXd jerk = magnify_1d(pw, Mode::jerk, 10, 30);
    CHECK(count_prominent_peaks(lin, 0.1) == 1);
    auto second = [](const Eigen::VectorXd& s) {
      auto peaks = find_peaks_circular(s);
      std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.prominence > b.prominence; });
      return peaks.size() > 1 ? peaks[1].prominence / (s.maxCoeff() - s.minCoeff()) : 0.0;
    };
    CHECK(second(lin) < second(jerk));
  }

  TEST_CASE("circular peak prominence") {
    Eigen::VectorXd s(5);
    s << 0, 3, 1, 2, 0;
    const auto peaks = find_peaks_circular(s);
    REQUIRE(peaks.size() == 2);
    CHECK(peaks[0].index == 1);
    CHECK(peaks[0].prominence == 3.0);
    CHECK(peaks[1].index == 3);
    CHECK(peaks[1].prominence == 1.0);
    CHECK(count_prominent_peaks(s, 0.5) == 1);
    CHECK(count_prominent_peaks(Eigen::VectorXd::Constant(6, 1.0), 0.1) == 0);
  }

  TEST_CASE("synthetic clip frame count and ground truth") {
    const PulseWave pw;
    SynthSpec spec;
    const auto synth = synth_clip(pw, spec);
    CHECK(synth.clip.length() == 150);
    CHECK(synth.displacement.size() == 150);
    for (Index i = 0; i < 150; i += 7)
      CHECK(synth.displacement[static_cast<size_t>(i)].x() == doctest::Approx(0.5 * pulse_waveform(pw, i / 30.0)));
  }

  TEST_CASE("zero motion gives identical frames") {
    SynthSpec spec;
    spec.motion_amp = 0.0;
    spec.duration = 3.0;
    spec.background = Background::texture;
    const auto synth = synth_clip(PulseWave{}, spec);
    for (const auto& f : synth.clip.frames) CHECK((f - synth.clip.frames[0]).abs().maxCoeff() == 0.0);
  }

  TEST_CASE("motif centroid tracks the displacement") {
    SynthSpec spec;
    spec.duration = 3.0;
    const auto synth = synth_clip(PulseWave{}, spec);
    const Eigen::Vector2d c0 = centroid(synth.clip.frames[0], 0.2);
    for (size_t t = 0; t < synth.clip.frames.size(); ++t) {
      const Eigen::Vector2d c = centroid(synth.clip.frames[t], 0.2) - c0;
      const double expect = synth.displacement[t].x() - synth.displacement[0].x();
      CHECK(std::abs(c.x() - expect) < 0.05);
      CHECK(std::abs(c.y()) < 0.05);
    }
  }

  TEST_CASE("mask covers every changing pixel") {
    SynthSpec spec;
    spec.duration = 3.0;
    spec.motion_amp = 1.0;
    const auto synth = synth_clip(PulseWave{}, spec);
    for (const auto& f : synth.clip.frames) {
      const Image<double> d = (f - synth.clip.frames[0]).abs();
      for (Index y = 0; y < d.rows(); ++y)
        for (Index x = 0; x < d.cols(); ++x)
          if (d(y, x) > 1e-3) CHECK(synth.mask(y, x) == 1);
    }
    CHECK(synth.mask(static_cast<Index>(synth.motif_center.y()), static_cast<Index>(synth.motif_center.x())) == 1);
    CHECK(synth.mask(0, 0) == 0);
  }

  TEST_CASE("seeded noise is reproducible") {
    SynthSpec spec;
    spec.duration = 3.0;
    spec.noise_sd = 0.01;
    spec.seed = 42;
    const auto a = synth_clip(PulseWave{}, spec);
    const auto b = synth_clip(PulseWave{}, spec);
    CHECK(support::max_abs_diff(a.clip, b.clip) == 0.0);
    spec.seed = 43;
    CHECK(support::max_abs_diff(a.clip, synth_clip(PulseWave{}, spec).clip) > 0.0);
  }

  TEST_CASE("synthetic spec validation") {
    SynthSpec spec;
    spec.duration = 1.0;
    CHECK_THROWS_AS(synth_clip(PulseWave{}, spec), Error);
    spec = {};
    spec.width = 8;
    CHECK_THROWS_AS(synth_clip(PulseWave{}, spec), Error);
    spec = {};
    spec.motif_size = 100;
    CHECK_THROWS_AS(synth_clip(PulseWave{}, spec), Error);
  }
}

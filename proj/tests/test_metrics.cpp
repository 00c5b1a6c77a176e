#include <doctest.h>

#include "mmag/metrics.hpp"
#include "mmag/pulse_model.hpp"
#include "support.hpp"

using namespace mmag;

namespace {

Image<double> checkerboard(Index n) {
  Image<double> img(n, n);
  for (Index y = 0; y < n; ++y)
    for (Index x = 0; x < n; ++x) img(y, x) = (x + y) % 2 ? 1.0 : 0.0;
  return img;
}

/// Smooth test pair; reference values below were computed independently
/// with scikit-image (gaussian_weights, sigma 1.5, population covariance).
std::pair<Image<double>, Image<double>> reference_pair() {
  Image<double> f(40, 48), g(40, 48);
  for (Index y = 0; y < 40; ++y)
    for (Index x = 0; x < 48; ++x) {
      f(y, x) = 0.5 + 0.3 * std::sin(0.3 * x + 0.2 * y) + 0.1 * std::cos(0.05 * x * y / 4.0);
      g(y, x) = f(y, x) + 0.08 * std::cos(0.7 * x - 0.4 * y) - 0.02;
    }
  return {f, g};
}

/// SSIM evaluated window by window with a 2-D Gaussian.
double brute_force_ssim(const Image<double>& a, const Image<double>& b) {
  const double c1 = 1e-4, c2 = 9e-4;
  Eigen::ArrayXXd w(11, 11);
  for (Index i = 0; i < 11; ++i)
    for (Index j = 0; j < 11; ++j) w(i, j) = std::exp(-((i - 5.0) * (i - 5.0) + (j - 5.0) * (j - 5.0)) / (2 * 2.25));
  w /= w.sum();
  double total = 0.0;
  Index count = 0;
  for (Index y = 0; y + 11 <= a.rows(); ++y)
    for (Index x = 0; x + 11 <= a.cols(); ++x) {
      const auto pa = a.block(y, x, 11, 11);
      const auto pb = b.block(y, x, 11, 11);
      const double ma = (w * pa).sum(), mb = (w * pb).sum();
      const double va = (w * (pa - ma).square()).sum(), vb = (w * (pb - mb).square()).sum();
      const double cov = (w * (pa - ma) * (pb - mb)).sum();
      total += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return total / count;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("psnr reference values") {
    const Image<double> zero = Image<double>::Zero(16, 16);
    CHECK(std::isinf(psnr(zero, zero)));
    CHECK(psnr(zero, Image<double>::Constant(16, 16, 0.1)) == doctest::Approx(20.0).epsilon(1e-12));
    const Image<double> cb = checkerboard(16);
    CHECK(psnr(cb, (1.0 - cb).eval()) == doctest::Approx(0.0));
    const auto [f, g] = reference_pair();
    CHECK(psnr(f, g) == doctest::Approx(24.455574731615272).epsilon(1e-10));
  }

  TEST_CASE("ssim matches independent implementations") {
    const auto [f, g] = reference_pair();
    CHECK(ssim(f, g) == doctest::Approx(0.8344279907672673).epsilon(1e-10));
    CHECK(ssim(f, g) == doctest::Approx(brute_force_ssim(f, g)).epsilon(1e-10));
  }

  TEST_CASE("ssim of identical frames is exactly one") {
    const Image<double> f = support::random_frame(32, 32, 5);
    CHECK(ssim(f, f) == 1.0);
  }

  TEST_CASE("ssim of an inverted binary image is negative") {
    const Image<double> f = (support::random_frame(32, 32, 6) > 0.5).cast<double>();
    CHECK(ssim(f, (1.0 - f).eval()) < 0.0);
  }

  TEST_CASE("tiny noise keeps ssim near one") {
    const Image<double> f = support::random_frame(32, 32, 7);
    const Image<double> n = (support::random_frame(32, 32, 8) - 0.5) * 2e-4 * std::sqrt(3.0);
    CHECK(ssim(f, (f + n).eval()) > 0.99);
  }

  TEST_CASE("ssim is symmetric") {
    const auto [f, g] = reference_pair();
    CHECK(ssim(f, g) == doctest::Approx(ssim(g, f)).epsilon(1e-14));
  }

  TEST_CASE("contrast-structure term ignores a common offset") {
    // Luminance depends on absolute means, so only the contrast-structure
    // factor is offset invariant.
    const auto [f, g] = reference_pair();
    const auto a = ssim_stats(f, g);
    const auto b = ssim_stats((f + 0.07).eval(), (g + 0.07).eval());
    CHECK(a.contrast_structure == doctest::Approx(b.contrast_structure).epsilon(1e-9));
  }

  TEST_CASE("psnr falls as noise grows") {
    const Image<double> f = support::random_frame(32, 32, 9);
    const Image<double> n = support::random_frame(32, 32, 10) - 0.5;
    double prev = std::numeric_limits<double>::infinity();
    for (double sd : {0.001, 0.005, 0.02, 0.05, 0.1}) {
      const double p = psnr(f, (f + sd * n).eval());
      CHECK(p < prev);
      prev = p;
    }
  }

  TEST_CASE("size errors") {
    const Image<double> a = Image<double>::Zero(8, 8);
    CHECK_THROWS_AS(ssim(a, a), Error);
    CHECK_THROWS_AS(psnr(a, Image<double>::Zero(8, 9).eval()), Error);
  }

  TEST_CASE("clip evaluation") {
    const auto clip = support::static_clip(support::random_frame(24, 24, 1), 10);
    const auto rep = evaluate_clip(clip, clip, 5);
    CHECK(rep.sample_len == 5);
    CHECK(rep.mean_ssim == 1.0);
    CHECK(std::isinf(rep.mean_psnr_db));
    CHECK_FALSE(rep.boundary_excluded);

    const auto skipped = evaluate_clip(clip, clip, 6, {0, 1, 2, 9});
    CHECK(skipped.frames == std::vector<Index>{3, 4, 5, 6, 7, 8});
    CHECK(skipped.boundary_excluded);

    auto shorter = clip;
    shorter.frames.pop_back();
    CHECK_THROWS_AS(evaluate_clip(clip, shorter, 5), Error);
    CHECK_THROWS_AS(evaluate_clip(clip, clip, 11), Error);
  }

  TEST_CASE("static clip slice has identical rows") {
    const auto clip = support::static_clip(support::random_frame(20, 30, 2), 7);
    const Image<double> sts = extract_sts(clip, SliceLine::row(10, 30));
    CHECK(sts.rows() == 7);
    CHECK(sts.cols() == 30);
    for (Index t = 1; t < 7; ++t) CHECK((sts.row(t) - sts.row(0)).abs().maxCoeff() == 0.0);
    CHECK((sts.row(0) - clip.frames[0].row(10)).abs().maxCoeff() == 0.0);
  }

  TEST_CASE("single frame gives a single row") {
    const auto clip = support::static_clip(support::random_frame(20, 30, 2), 1);
    CHECK(extract_sts(clip, SliceLine::column(4, 20)).rows() == 1);
  }

  TEST_CASE("polyline samples at unit spacing and interpolates") {
    VideoClip<double> clip;
    Image<double> ramp(10, 10);
    for (Index y = 0; y < 10; ++y)
      for (Index x = 0; x < 10; ++x) ramp(y, x) = 0.1 * x + 0.01 * y;
    clip.frames.push_back(ramp);
    SliceLine line;
    line.points = {{0.5, 2.0}, {4.5, 2.0}, {4.5, 5.0}};
    const Image<double> s = extract_sts(clip, line);
    CHECK(s.cols() == 8);
    CHECK(s(0, 0) == doctest::Approx(0.07));
    CHECK(s(0, 4) == doctest::Approx(0.47));
    CHECK(s(0, 7) == doctest::Approx(0.50));
    line.points = {{0, 0}, {10.5, 0}};
    CHECK_THROWS_AS(extract_sts(clip, line), Error);
  }

  TEST_CASE("slice through the moving motif oscillates at the pulse period") {
    SynthSpec spec;
    spec.motif = Motif::edge;
    spec.duration = 6.0;
    spec.motion_amp = 1.0;
    const auto synth = synth_clip(PulseWave{}, spec);
    const Index row = static_cast<Index>(synth.motif_center.y());
    const Image<double> sts = extract_sts(synth.clip, SliceLine::row(row, spec.width));
    // Ridge position: sub-pixel location of the edge's half-height crossing.
    Eigen::VectorXd ridge(sts.rows());
    for (Index t = 0; t < sts.rows(); ++t) {
      const Index c = static_cast<Index>(synth.motif_center.x());
      const double lo = sts(t, c - 6), hi = sts(t, c + 6), mid = 0.5 * (lo + hi);
      Index x = c - 6;
      while (x < c + 6 && sts(t, x + 1) < mid) ++x;
      ridge(t) = x + (mid - sts(t, x)) / (sts(t, x + 1) - sts(t, x));
    }
    ridge.array() -= ridge.mean();
    // First autocorrelation peak above half the zero-lag value.
    auto ac = [&](Index lag) {
      return ridge.head(ridge.size() - lag).dot(ridge.tail(ridge.size() - lag)) / static_cast<double>(ridge.size() - lag);
    };
    Index best_lag = 0;
    for (Index lag = 2; lag < ridge.size() / 2; ++lag)
      if (ac(lag) > ac(lag - 1) && ac(lag) >= ac(lag + 1) && ac(lag) > 0.5 * ac(0)) {
        best_lag = lag;
        break;
      }
    CHECK(best_lag == 30);
  }
}

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "mmag/core.hpp"

namespace mmag {

/// Peak signal-to-noise ratio for intensities in [0, 1]; +inf when the frames
/// are identical.
template <typename DerivedA, typename DerivedB>
double psnr(const Eigen::ArrayBase<DerivedA>& reference, const Eigen::ArrayBase<DerivedB>& test) {
  if (reference.rows() != test.rows() || reference.cols() != test.cols())
    throw Error(Errc::dimension_mismatch, "psnr frames differ in size");
  const double mse = (reference.template cast<double>() - test.template cast<double>()).square().mean();
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

struct SsimParams {
  Index window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Mean SSIM and mean contrast-structure term over the valid window positions.
struct SsimStats {
  double ssim = 0.0;
  double contrast_structure = 0.0;
};

namespace detail {

inline Eigen::ArrayXd ssim_window(const SsimParams& p) {
  Eigen::ArrayXd k(p.window);
  const double c = static_cast<double>(p.window - 1) / 2.0;
  for (Index i = 0; i < p.window; ++i) {
    const double x = static_cast<double>(i) - c;
    k(i) = std::exp(-0.5 * x * x / (p.sigma * p.sigma));
  }
  return k / k.sum();
}

/// Separable 'valid' correlation with a symmetric 1-D kernel.
inline Image<double> filter_valid(const Image<double>& img, const Eigen::ArrayXd& k) {
  const Index n = k.size();
  const Index oh = img.rows() - n + 1;
  const Index ow = img.cols() - n + 1;
  Image<double> tmp = Image<double>::Zero(img.rows(), ow);
  for (Index i = 0; i < n; ++i) tmp += k(i) * img.middleCols(i, ow);
  Image<double> out = Image<double>::Zero(oh, ow);
  for (Index i = 0; i < n; ++i) out += k(i) * tmp.middleRows(i, oh);
  return out;
}

}  // namespace detail

/// Gaussian-windowed SSIM (11x11, sigma 1.5, K1 = 0.01, K2 = 0.03, L = 1 by default).
template <typename DerivedA, typename DerivedB>
SsimStats ssim_stats(const Eigen::ArrayBase<DerivedA>& reference,
                     const Eigen::ArrayBase<DerivedB>& test, const SsimParams& p = {}) {
  if (reference.rows() != test.rows() || reference.cols() != test.cols())
    throw Error(Errc::dimension_mismatch, "ssim frames differ in size");
  if (reference.rows() < p.window || reference.cols() < p.window)
    throw Error(Errc::dimension_too_small, "frame smaller than the ssim window");
  const Image<double> x = reference.template cast<double>();
  const Image<double> y = test.template cast<double>();
  const Eigen::ArrayXd k = detail::ssim_window(p);
  const double c1 = std::pow(p.k1 * p.dynamic_range, 2);
  const double c2 = std::pow(p.k2 * p.dynamic_range, 2);

  const Image<double> mu_x = detail::filter_valid(x, k);
  const Image<double> mu_y = detail::filter_valid(y, k);
  const Image<double> var_x = detail::filter_valid(x * x, k) - mu_x * mu_x;
  const Image<double> var_y = detail::filter_valid(y * y, k) - mu_y * mu_y;
  const Image<double> cov = detail::filter_valid(x * y, k) - mu_x * mu_y;

  const Image<double> cs = (2.0 * cov + c2) / (var_x + var_y + c2);
  const Image<double> lum = (2.0 * mu_x * mu_y + c1) / (mu_x * mu_x + mu_y * mu_y + c1);
  return {(lum * cs).mean(), cs.mean()};
}

template <typename DerivedA, typename DerivedB>
double ssim(const Eigen::ArrayBase<DerivedA>& reference, const Eigen::ArrayBase<DerivedB>& test,
            const SsimParams& p = {}) {
  return ssim_stats(reference, test, p).ssim;
}

struct MetricsReport {
  std::vector<Index> frames;
  std::vector<double> psnr_db;
  std::vector<double> ssim;
  double mean_psnr_db = 0.0;
  double mean_ssim = 0.0;
  Index sample_len = 0;
  bool boundary_excluded = false;
};

/// Per-frame PSNR/SSIM of `magnified` against `source` over the first
/// `sample_len` frames that are not listed in `boundary`.
template <typename Scalar>
MetricsReport evaluate_clip(const VideoClip<Scalar>& source, const VideoClip<Scalar>& magnified,
                            Index sample_len = 100, const std::vector<Index>& boundary = {}) {
  if (source.length() != magnified.length())
    throw Error(Errc::dimension_mismatch, "clips differ in length (" +
                                              std::to_string(source.length()) + " vs " +
                                              std::to_string(magnified.length()) + ")");
  if (source.height() != magnified.height() || source.width() != magnified.width())
    throw Error(Errc::dimension_mismatch, "clips differ in frame size");
  if (sample_len < 1 || sample_len > source.length())
    throw Error(Errc::invalid_argument, "sample length " + std::to_string(sample_len) +
                                            " outside 1.." + std::to_string(source.length()));

  const std::set<Index> skip(boundary.begin(), boundary.end());
  MetricsReport report;
  report.boundary_excluded = !skip.empty();
  for (Index t = 0; t < source.length() && static_cast<Index>(report.frames.size()) < sample_len; ++t) {
    if (skip.count(t)) continue;
    const auto& ref = source.frames[static_cast<size_t>(t)];
    const auto& out = magnified.frames[static_cast<size_t>(t)];
    report.frames.push_back(t);
    report.psnr_db.push_back(psnr(ref, out));
    report.ssim.push_back(ssim(ref, out));
  }
  report.sample_len = static_cast<Index>(report.frames.size());
  if (report.sample_len == 0)
    throw Error(Errc::series_too_short, "no frames left after excluding boundary frames");
  double psum = 0.0, ssum = 0.0;
  for (size_t i = 0; i < report.frames.size(); ++i) {
    psum += report.psnr_db[i];
    ssum += report.ssim[i];
  }
  report.mean_psnr_db = psum / static_cast<double>(report.sample_len);
  report.mean_ssim = ssum / static_cast<double>(report.sample_len);
  return report;
}

/// Polyline in image coordinates (x = column, y = row).
struct SliceLine {
  std::vector<Eigen::Vector2d> points;

  static SliceLine row(Index y, Index width) {
    return {{Eigen::Vector2d(0, static_cast<double>(y)),
             Eigen::Vector2d(static_cast<double>(width - 1), static_cast<double>(y))}};
  }
  static SliceLine column(Index x, Index height) {
    return {{Eigen::Vector2d(static_cast<double>(x), 0),
             Eigen::Vector2d(static_cast<double>(x), static_cast<double>(height - 1))}};
  }
};

/// Time x arc-length image: row t samples frame t along the line at unit
/// spacing with bilinear interpolation.
template <typename Scalar>
Image<Scalar> extract_sts(const VideoClip<Scalar>& clip, const SliceLine& line) {
  if (clip.frames.empty()) throw Error(Errc::invalid_argument, "clip has no frames");
  if (line.points.size() < 2) throw Error(Errc::invalid_argument, "slice line needs two points");
  const double w = static_cast<double>(clip.width());
  const double h = static_cast<double>(clip.height());
  for (const auto& pt : line.points)
    if (!(pt.x() >= 0 && pt.x() <= w - 1 && pt.y() >= 0 && pt.y() <= h - 1))
      throw Error(Errc::invalid_geometry, "slice point (" + std::to_string(pt.x()) + ", " +
                                              std::to_string(pt.y()) + ") outside frame");

  std::vector<Eigen::Vector2d> samples;
  for (size_t s = 0; s + 1 < line.points.size(); ++s) {
    const Eigen::Vector2d a = line.points[s];
    const Eigen::Vector2d b = line.points[s + 1];
    const double len = (b - a).norm();
    const Index steps = std::max<Index>(1, static_cast<Index>(std::round(len)));
    for (Index i = (s == 0 ? 0 : 1); i <= steps; ++i)
      samples.push_back((a * static_cast<double>(steps - i) + b * static_cast<double>(i)) /
                        static_cast<double>(steps));
  }

  Image<Scalar> slice(clip.length(), static_cast<Index>(samples.size()));
  for (Index t = 0; t < clip.length(); ++t) {
    const auto& f = clip.frames[static_cast<size_t>(t)];
    for (size_t i = 0; i < samples.size(); ++i) {
      const double x = samples[i].x(), y = samples[i].y();
      const Index x0 = std::min<Index>(static_cast<Index>(std::floor(x)), f.cols() - 1);
      const Index y0 = std::min<Index>(static_cast<Index>(std::floor(y)), f.rows() - 1);
      const Index x1 = std::min<Index>(x0 + 1, f.cols() - 1);
      const Index y1 = std::min<Index>(y0 + 1, f.rows() - 1);
      const double fx = x - static_cast<double>(x0), fy = y - static_cast<double>(y0);
      const double v = (1 - fy) * ((1 - fx) * f(y0, x0) + fx * f(y0, x1)) +
                       fy * ((1 - fx) * f(y1, x0) + fx * f(y1, x1));
      slice(t, static_cast<Index>(i)) = static_cast<Scalar>(v);
    }
  }
  return slice;
}

}  // namespace mmag

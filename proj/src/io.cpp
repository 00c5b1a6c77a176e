#include "mmag/io.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mmag::io {

namespace fs = std::filesystem;

namespace {

const Eigen::Matrix3d& rgb_to_yiq() {
  static const Eigen::Matrix3d m = (Eigen::Matrix3d() << 0.299, 0.587, 0.114,  //
                                    0.596, -0.274, -0.322,                    //
                                    0.211, -0.523, 0.312)
                                       .finished();
  return m;
}

const Eigen::Matrix3d& yiq_to_rgb() {
  static const Eigen::Matrix3d m = rgb_to_yiq().inverse();
  return m;
}

int max_value(int bit_depth) { return bit_depth == 8 ? 255 : 65535; }

void check_depth(int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16)
    throw Error(Errc::invalid_argument, "bit depth must be 8 or 16");
}

std::uint16_t to_sample(double v, int maxval) {
  return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * maxval));
}

// Next whitespace-delimited PNM header token, skipping comments.
std::string header_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

Index parse_positive(const std::string& tok, const fs::path& path) {
  try {
    size_t used = 0;
    const long long v = std::stoll(tok, &used);
    if (used == tok.size() && v > 0) return static_cast<Index>(v);
  } catch (const std::exception&) {
  }
  throw Error(Errc::unreadable_input, path.string() + ": bad header field '" + tok + "'");
}

void write_samples(std::ostream& out, const std::vector<std::uint16_t>& samples, int bit_depth,
                   bool big_endian) {
  std::vector<char> buf;
  buf.reserve(samples.size() * (bit_depth == 8 ? 1 : 2));
  for (auto s : samples) {
    if (bit_depth == 8) {
      buf.push_back(static_cast<char>(s));
    } else if (big_endian) {
      buf.push_back(static_cast<char>(s >> 8));
      buf.push_back(static_cast<char>(s & 0xff));
    } else {
      buf.push_back(static_cast<char>(s & 0xff));
      buf.push_back(static_cast<char>(s >> 8));
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<std::uint16_t> read_samples(std::istream& in, size_t count, int bit_depth,
                                        bool big_endian, const fs::path& path) {
  const size_t bytes = count * (bit_depth == 8 ? 1 : 2);
  std::vector<unsigned char> buf(bytes);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
  if (static_cast<size_t>(in.gcount()) != bytes)
    throw Error(Errc::unreadable_input, path.string() + ": truncated sample data");
  std::vector<std::uint16_t> out(count);
  for (size_t i = 0; i < count; ++i) {
    if (bit_depth == 8)
      out[i] = buf[i];
    else if (big_endian)
      out[i] = static_cast<std::uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
    else
      out[i] = static_cast<std::uint16_t>(buf[2 * i] | (buf[2 * i + 1] << 8));
  }
  return out;
}

// Splits interleaved or planar RGB samples into luma and I/Q planes.
void rgb_to_planes(const std::vector<std::uint16_t>& rgb, Index h, Index w, int maxval,
                   bool interleaved, Image<double>& luma, std::array<Image<double>, 2>& chroma) {
  luma.resize(h, w);
  chroma[0].resize(h, w);
  chroma[1].resize(h, w);
  const Index plane = h * w;
  for (Index i = 0; i < plane; ++i) {
    Eigen::Vector3d c;
    for (int k = 0; k < 3; ++k)
      c(k) = rgb[static_cast<size_t>(interleaved ? 3 * i + k : k * plane + i)] / double(maxval);
    const Eigen::Vector3d yiq = rgb_to_yiq() * c;
    luma.data()[i] = yiq(0);
    chroma[0].data()[i] = yiq(1);
    chroma[1].data()[i] = yiq(2);
  }
}

std::vector<std::uint16_t> planes_to_rgb(const Image<double>& luma,
                                         const std::array<Image<double>, 2>& chroma, int maxval,
                                         bool interleaved) {
  const Index plane = luma.size();
  std::vector<std::uint16_t> out(static_cast<size_t>(3 * plane));
  for (Index i = 0; i < plane; ++i) {
    const Eigen::Vector3d rgb =
        yiq_to_rgb() * Eigen::Vector3d(luma.data()[i], chroma[0].data()[i], chroma[1].data()[i]);
    for (int k = 0; k < 3; ++k)
      out[static_cast<size_t>(interleaved ? 3 * i + k : k * plane + i)] = to_sample(rgb(k), maxval);
  }
  return out;
}

constexpr const char* kRawMagic = "MMRAW";

}  // namespace

double quantize(double v, int bit_depth) {
  const int maxval = max_value(bit_depth);
  return static_cast<double>(to_sample(v, maxval)) / maxval;
}

std::string frame_name(Index index, bool color) {
  std::ostringstream s;
  s << "frame_" << std::setw(6) << std::setfill('0') << index << (color ? ".ppm" : ".pgm");
  return s.str();
}

bool is_raw_container(const fs::path& path) { return path.extension() == ".mmraw"; }

PnmImage read_pnm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::unreadable_input, "cannot open " + path.string());
  const std::string magic = header_token(in);
  if (magic != "P5" && magic != "P6")
    throw Error(Errc::unreadable_input, path.string() + ": not a binary PGM/PPM file");
  const Index w = parse_positive(header_token(in), path);
  const Index h = parse_positive(header_token(in), path);
  const Index maxval = parse_positive(header_token(in), path);
  if (maxval > 65535) throw Error(Errc::unreadable_input, path.string() + ": maxval > 65535");
  const int depth = maxval < 256 ? 8 : 16;
  const bool color = magic == "P6";
  const auto samples = read_samples(in, static_cast<size_t>(w * h * (color ? 3 : 1)), depth, true, path);

  PnmImage img;
  img.bit_depth = depth;
  if (color) {
    std::array<Image<double>, 2> chroma;
    rgb_to_planes(samples, h, w, static_cast<int>(maxval), true, img.luma, chroma);
    img.chroma = std::move(chroma);
  } else {
    img.luma.resize(h, w);
    for (Index i = 0; i < w * h; ++i)
      img.luma.data()[i] = samples[static_cast<size_t>(i)] / static_cast<double>(maxval);
  }
  return img;
}

void write_pgm(const fs::path& path, const Image<double>& gray, int bit_depth) {
  check_depth(bit_depth);
  const int maxval = max_value(bit_depth);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::write_failed, "cannot write " + path.string());
  out << "P5\n" << gray.cols() << " " << gray.rows() << "\n" << maxval << "\n";
  std::vector<std::uint16_t> samples(static_cast<size_t>(gray.size()));
  for (Index i = 0; i < gray.size(); ++i) samples[static_cast<size_t>(i)] = to_sample(gray.data()[i], maxval);
  write_samples(out, samples, bit_depth, true);
  if (!out) throw Error(Errc::write_failed, "short write to " + path.string());
}

void write_ppm(const fs::path& path, const Image<double>& luma,
               const std::array<Image<double>, 2>& chroma, int bit_depth) {
  check_depth(bit_depth);
  const int maxval = max_value(bit_depth);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::write_failed, "cannot write " + path.string());
  out << "P6\n" << luma.cols() << " " << luma.rows() << "\n" << maxval << "\n";
  write_samples(out, planes_to_rgb(luma, chroma, maxval, true), bit_depth, true);
  if (!out) throw Error(Errc::write_failed, "short write to " + path.string());
}

namespace {

// Container layout: one ASCII header line
//   MMRAW 1 <width> <height> <frames> <channels> <bits> <fps>\n
// followed by frames in order, each frame channel-planar (R, G, B or a single
// gray plane), samples little-endian.
FrameSequence read_raw(const fs::path& path, std::optional<double> fps_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::unreadable_input, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::istringstream hdr(line);
  std::string magic;
  int version = 0, channels = 0, bits = 0;
  Index w = 0, h = 0, n = 0;
  double fps = 0.0;
  hdr >> magic >> version >> w >> h >> n >> channels >> bits >> fps;
  if (!hdr || magic != kRawMagic || version != 1 || w <= 0 || h <= 0 || n <= 0 ||
      (channels != 1 && channels != 3) || (bits != 8 && bits != 16) || !(fps > 0.0))
    throw Error(Errc::unreadable_input, path.string() + ": bad raw container header");

  FrameSequence seq;
  seq.bit_depth = bits;
  seq.luma.fps = fps_override.value_or(fps);
  const int maxval = max_value(bits);
  for (Index t = 0; t < n; ++t) {
    const auto samples = read_samples(in, static_cast<size_t>(w * h * channels), bits, false, path);
    if (channels == 3) {
      Image<double> luma;
      std::array<Image<double>, 2> chroma;
      rgb_to_planes(samples, h, w, maxval, false, luma, chroma);
      seq.luma.frames.push_back(std::move(luma));
      seq.chroma.push_back(std::move(chroma));
    } else {
      Image<double> gray(h, w);
      for (Index i = 0; i < w * h; ++i) gray.data()[i] = samples[static_cast<size_t>(i)] / double(maxval);
      seq.luma.frames.push_back(std::move(gray));
    }
  }
  return seq;
}

void write_raw(const fs::path& path, const FrameSequence& seq) {
  check_depth(seq.bit_depth);
  const int maxval = max_value(seq.bit_depth);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::write_failed, "cannot write " + path.string());
  std::ostringstream hdr;
  hdr << std::setprecision(17) << kRawMagic << " 1 " << seq.luma.width() << " " << seq.luma.height()
      << " " << seq.luma.length() << " " << (seq.has_chroma() ? 3 : 1) << " " << seq.bit_depth
      << " " << seq.luma.fps << "\n";
  out << hdr.str();
  for (Index t = 0; t < seq.luma.length(); ++t) {
    const auto& luma = seq.luma.frames[static_cast<size_t>(t)];
    if (seq.has_chroma()) {
      write_samples(out, planes_to_rgb(luma, seq.chroma[static_cast<size_t>(t)], maxval, false),
                    seq.bit_depth, false);
    } else {
      std::vector<std::uint16_t> samples(static_cast<size_t>(luma.size()));
      for (Index i = 0; i < luma.size(); ++i) samples[static_cast<size_t>(i)] = to_sample(luma.data()[i], maxval);
      write_samples(out, samples, seq.bit_depth, false);
    }
  }
  if (!out) throw Error(Errc::write_failed, "short write to " + path.string());
}

}  // namespace

FrameSequence read_sequence(const fs::path& path, double fps, std::optional<double> fps_override) {
  std::error_code ec;
  if (!fs::exists(path, ec)) throw Error(Errc::input_not_found, path.string());
  if (fs::is_regular_file(path)) {
    if (!is_raw_container(path))
      throw Error(Errc::unreadable_input, path.string() + ": expected a frame directory or .mmraw file");
    return read_raw(path, fps_override);
  }
  if (!fs::is_directory(path)) throw Error(Errc::unreadable_input, path.string());

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    const auto ext = entry.path().extension();
    const auto stem = entry.path().stem().string();
    // Only numbered frames; sidecars such as mask.pgm are skipped.
    const bool numbered = !stem.empty() && std::isdigit(static_cast<unsigned char>(stem.back()));
    if (entry.is_regular_file() && numbered && (ext == ".pgm" || ext == ".ppm"))
      files.push_back(entry.path());
  }
  if (files.empty()) throw Error(Errc::unreadable_input, path.string() + ": no .pgm/.ppm frames");
  std::sort(files.begin(), files.end());

  FrameSequence seq;
  seq.luma.fps = fps_override.value_or(fps);
  seq.bit_depth = 8;
  bool any_color = false, any_gray = false;
  for (const auto& f : files) {
    PnmImage img = read_pnm(f);
    if (!seq.luma.frames.empty() &&
        (img.luma.rows() != seq.luma.height() || img.luma.cols() != seq.luma.width()))
      throw Error(Errc::mixed_frame_sizes, f.string() + " differs in size from " + files.front().string());
    seq.bit_depth = std::max(seq.bit_depth, img.bit_depth);
    if (img.chroma) {
      any_color = true;
      seq.chroma.push_back(std::move(*img.chroma));
    } else {
      any_gray = true;
    }
    seq.luma.frames.push_back(std::move(img.luma));
  }
  if (any_color && any_gray)
    throw Error(Errc::unreadable_input, path.string() + ": mixes gray and color frames");
  return seq;
}

void write_sequence(const fs::path& path, const FrameSequence& seq) {
  check_depth(seq.bit_depth);
  if (is_raw_container(path)) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_raw(path, seq);
    return;
  }
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec || !fs::is_directory(path)) throw Error(Errc::write_failed, "cannot create " + path.string());
  for (const auto& entry : fs::directory_iterator(path)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("frame_", 0) == 0 &&
        (entry.path().extension() == ".pgm" || entry.path().extension() == ".ppm"))
      fs::remove(entry.path());
  }
  for (Index t = 0; t < seq.luma.length(); ++t) {
    const auto& luma = seq.luma.frames[static_cast<size_t>(t)];
    if (seq.has_chroma())
      write_ppm(path / frame_name(t, true), luma, seq.chroma[static_cast<size_t>(t)], seq.bit_depth);
    else
      write_pgm(path / frame_name(t, false), luma, seq.bit_depth);
  }
}

}  // namespace mmag::io

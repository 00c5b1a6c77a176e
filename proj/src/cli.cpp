#include "mmag/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "mmag/io.hpp"

namespace mmag::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const char* status_name(Status s) {
  switch (s) {
    case Status::ok: return "ok";
    case Status::failure: return "failure";
    case Status::usage: return "usage";
    case Status::input_not_found: return "input-not-found";
    case Status::unreadable_input: return "unreadable-input";
    case Status::mixed_frame_sizes: return "mixed-frame-sizes";
    case Status::invalid_config: return "invalid-config";
    case Status::mismatch: return "mismatch";
    case Status::write_failed: return "write-failed";
  }
  return "unknown";
}

Status status_for(Errc code) {
  switch (code) {
    case Errc::input_not_found: return Status::input_not_found;
    case Errc::unreadable_input: return Status::unreadable_input;
    case Errc::mixed_frame_sizes: return Status::mixed_frame_sizes;
    case Errc::dimension_mismatch: return Status::mismatch;
    case Errc::write_failed: return Status::write_failed;
    default: return Status::invalid_config;
  }
}

fs::path manifest_path(const fs::path& output) {
  if (io::is_raw_container(output)) return fs::path(output.string() + ".manifest.json");
  return output / "manifest.json";
}

namespace {

template <typename Fn>
Status guarded(std::ostream& log, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    const Status s = status_for(e.code());
    log << "error: " << e.what() << "\n";
    return s;
  } catch (const json::exception& e) {
    log << "error: unreadable-input: manifest: " << e.what() << "\n";
    return Status::unreadable_input;
  } catch (const fs::filesystem_error& e) {
    log << "error: write-failed: " << e.what() << "\n";
    return Status::write_failed;
  }
}

std::optional<json> load_manifest(const fs::path& sequence) {
  const fs::path p = manifest_path(sequence);
  if (!fs::exists(p)) return std::nullopt;
  std::ifstream in(p);
  return json::parse(in);
}

void save_manifest(const fs::path& output, const json& manifest) {
  std::ofstream out(manifest_path(output));
  if (!out) throw Error(Errc::write_failed, "cannot write " + manifest_path(output).string());
  out << manifest.dump(2) << "\n";
}

/// Frame rate for an input: explicit flag, else the sequence's manifest,
/// else 30 fps. Containers carry their own rate.
io::FrameSequence read_input(const fs::path& path, std::optional<double> fps) {
  if (!fs::exists(path)) throw Error(Errc::input_not_found, path.string());
  double fallback = 30.0;
  if (!io::is_raw_container(path) && fs::is_directory(path))
    if (const auto m = load_manifest(path); m && m->contains("fps")) fallback = m->at("fps").get<double>();
  return io::read_sequence(path, fallback, fps);
}

const char* octave_name(OctaveStep s) { return s == OctaveStep::full ? "full" : "half"; }

json config_json(const MagnificationConfig& c) {
  return json{{"mode", mode_name(c.mode)},
              {"alpha", c.alpha},
              {"freq", c.center_hz},
              {"band_halfwidth", c.half_width_hz},
              {"levels", c.levels},
              {"orientations", c.orientations},
              {"octave", octave_name(c.octave_step)},
              {"phase_smooth", c.phase_smoothing_px}};
}

std::string format_number(double v, int precision) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

std::vector<Index> boundary_from_manifest(const json& m) {
  std::vector<Index> out;
  if (m.contains("boundary_frames"))
    for (const auto& v : m.at("boundary_frames")) out.push_back(v.get<Index>());
  return out;
}

}  // namespace

std::string format_report(const MetricsReport& report, const std::string& source,
                          const std::string& magnified) {
  std::ostringstream s;
  s << "# mmag metrics report v" << kReportVersion << "\n";
  s << "# source\t" << source << "\n";
  s << "# magnified\t" << magnified << "\n";
  s << "frame\tpsnr_db\tssim\n";
  for (size_t i = 0; i < report.frames.size(); ++i)
    s << report.frames[i] << "\t" << format_number(report.psnr_db[i], 4) << "\t"
      << format_number(report.ssim[i], 6) << "\n";
  s << "# summary\n";
  s << "# frames_evaluated\t" << report.sample_len << "\n";
  s << "# boundary_excluded\t" << (report.boundary_excluded ? "true" : "false") << "\n";
  s << "# mean_psnr_db\t" << format_number(report.mean_psnr_db, 4) << "\n";
  s << "# mean_ssim\t" << format_number(report.mean_ssim, 6) << "\n";
  return s.str();
}

Status cmd_magnify(const MagnifyOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    opts.config.validate();
    if (opts.bit_depth && *opts.bit_depth != 8 && *opts.bit_depth != 16)
      throw Error(Errc::invalid_argument, "bit depth must be 8 or 16");
    io::FrameSequence seq = read_input(opts.input, opts.fps);
    const VideoClip<double>& clip = seq.luma;
    opts.config.band(clip.fps).validate();

    io::FrameSequence result;
    result.luma = magnify(clip, opts.config);
    result.chroma = seq.chroma;
    result.bit_depth = opts.bit_depth.value_or(seq.bit_depth);
    io::write_sequence(opts.output, result);

    json manifest{{"format", "mmag-manifest"},
                  {"format_version", kManifestVersion},
                  {"tool", "mmag"},
                  {"tool_version", kToolVersion},
                  {"command", "magnify"},
                  {"input", opts.input.generic_string()},
                  {"fps", clip.fps},
                  {"frames", clip.length()},
                  {"width", clip.width()},
                  {"height", clip.height()},
                  {"bit_depth", result.bit_depth},
                  {"color", seq.has_chroma()},
                  {"config", config_json(opts.config)},
                  {"boundary_frames",
                   magnification_boundary_frames(opts.config, clip.length(), clip.fps)}};
    save_manifest(opts.output, manifest);
    log << "magnified " << clip.length() << " frames (" << mode_name(opts.config.mode)
        << ", alpha " << opts.config.alpha << ") -> " << opts.output.string() << "\n";
    return Status::ok;
  });
}

Status cmd_metrics(const MetricsOptions& opts, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    if (opts.magnified.empty()) throw Error(Errc::invalid_argument, "no magnified input given");
    if (opts.sample_frames < 1) throw Error(Errc::invalid_argument, "sample frames must be >= 1");
    const io::FrameSequence source = read_input(opts.source, opts.fps);

    struct Entry {
      fs::path path;
      io::FrameSequence seq;
      std::optional<json> manifest;
    };
    std::vector<Entry> entries;
    for (const auto& p : opts.magnified) {
      io::FrameSequence seq = read_input(p, opts.fps);
      entries.push_back({p, std::move(seq), load_manifest(p)});
    }

    // Every input is scored on the same frames: the union of their
    // boundary-contaminated frames is excluded.
    std::set<Index> boundary;
    for (const auto& e : entries)
      if (e.manifest)
        for (Index t : boundary_from_manifest(*e.manifest)) boundary.insert(t);
    const std::vector<Index> skip(boundary.begin(), boundary.end());
    const Index sample = std::min(opts.sample_frames, source.luma.length());

    std::string text;
    if (entries.size() == 1) {
      const auto report = evaluate_clip(source.luma, entries[0].seq.luma, sample, skip);
      text = format_report(report, opts.source.generic_string(), entries[0].path.generic_string());
    } else {
      // Table layout: one row pair (PSNR, SSIM) per alpha, one column per mode.
      std::map<double, std::map<Mode, MetricsReport>> grid;
      Index evaluated = 0;
      for (const auto& e : entries) {
        if (!e.manifest || !e.manifest->contains("config"))
          throw Error(Errc::unreadable_input, e.path.string() + " has no magnify manifest");
        const auto& cfg = e.manifest->at("config");
        const auto mode = parse_mode(cfg.at("mode").get<std::string>());
        if (!mode) throw Error(Errc::unreadable_input, e.path.string() + ": unknown mode in manifest");
        const double alpha = cfg.at("alpha").get<double>();
        auto report = evaluate_clip(source.luma, e.seq.luma, sample, skip);
        evaluated = report.sample_len;
        grid[alpha][*mode] = std::move(report);
      }
      std::ostringstream s;
      s << "# mmag comparison v" << kReportVersion << "\n";
      s << "# source\t" << opts.source.generic_string() << "\n";
      s << "# frames_evaluated\t" << evaluated << "\n";
      s << "alpha\tassessment\tlinear\taccel\tjerk\n";
      for (const auto& [alpha, row] : grid) {
        for (const char* metric : {"PSNR", "SSIM"}) {
          s << format_number(alpha, 2) << "\t" << metric;
          for (Mode m : {Mode::linear, Mode::accel, Mode::jerk}) {
            const auto it = row.find(m);
            if (it == row.end())
              s << "\t-";
            else if (metric[0] == 'P')
              s << "\t" << format_number(it->second.mean_psnr_db, 4);
            else
              s << "\t" << format_number(it->second.mean_ssim, 6);
          }
          s << "\n";
        }
      }
      text = s.str();
    }

    if (opts.report) {
      if (opts.report->has_parent_path()) fs::create_directories(opts.report->parent_path());
      std::ofstream f(*opts.report);
      if (!f) throw Error(Errc::write_failed, "cannot write " + opts.report->string());
      f << text;
      if (!f) throw Error(Errc::write_failed, "short write to " + opts.report->string());
    } else {
      out << text;
    }
    return Status::ok;
  });
}

std::optional<SliceLine> parse_line_spec(const std::string& spec, Index width, Index height) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) return std::nullopt;
  const std::string kind = spec.substr(0, colon);
  const std::string body = spec.substr(colon + 1);
  auto parse_number = [](const std::string& s) -> std::optional<double> {
    try {
      size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    return std::nullopt;
  };
  if (kind == "row" || kind == "col") {
    const auto v = parse_number(body);
    if (!v || *v != std::floor(*v)) return std::nullopt;
    const auto i = static_cast<Index>(*v);
    return kind == "row" ? SliceLine::row(i, width) : SliceLine::column(i, height);
  }
  if (kind != "poly") return std::nullopt;
  SliceLine line;
  std::stringstream points(body);
  std::string pt;
  while (std::getline(points, pt, ';')) {
    const auto comma = pt.find(',');
    if (comma == std::string::npos) return std::nullopt;
    const auto x = parse_number(pt.substr(0, comma));
    const auto y = parse_number(pt.substr(comma + 1));
    if (!x || !y) return std::nullopt;
    line.points.emplace_back(*x, *y);
  }
  if (line.points.size() < 2) return std::nullopt;
  return line;
}

Status cmd_slice(const SliceOptions& opts, std::ostream& log) {
  return guarded(log, [&]() -> Status {
    const io::FrameSequence seq = read_input(opts.input, std::nullopt);
    const auto line = parse_line_spec(opts.line, seq.luma.width(), seq.luma.height());
    if (!line) {
      log << "error: malformed line spec '" << opts.line
          << "' (expected row:Y, col:X or poly:x0,y0;x1,y1[;...])\n";
      return Status::usage;
    }
    const Image<double> slice = extract_sts(seq.luma, *line);
    if (opts.output.has_parent_path()) fs::create_directories(opts.output.parent_path());
    io::write_pgm(opts.output, slice, opts.bit_depth);
    log << "slice " << slice.rows() << "x" << slice.cols() << " -> " << opts.output.string() << "\n";
    return Status::ok;
  });
}

Status cmd_synth(const SynthOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    const SyntheticClip synth = synth_clip(opts.pulse, opts.spec);
    io::FrameSequence seq;
    seq.luma = synth.clip;
    seq.bit_depth = opts.bit_depth;
    io::write_sequence(opts.output, seq);

    const bool raw = io::is_raw_container(opts.output);
    const fs::path truth = raw ? fs::path(opts.output.string() + ".ground_truth.tsv")
                               : opts.output / "ground_truth.tsv";
    const fs::path mask = raw ? fs::path(opts.output.string() + ".mask.pgm") : opts.output / "mask.pgm";
    {
      std::ofstream f(truth);
      if (!f) throw Error(Errc::write_failed, "cannot write " + truth.string());
      f << "frame\ttime_s\tdx_px\tdy_px\n" << std::setprecision(17);
      for (size_t i = 0; i < synth.displacement.size(); ++i)
        f << i << "\t" << static_cast<double>(i) / opts.spec.fps << "\t" << synth.displacement[i].x()
          << "\t" << synth.displacement[i].y() << "\n";
    }
    io::write_pgm(mask, synth.mask.cast<double>(), 8);

    const auto& p = opts.pulse;
    const auto& s = opts.spec;
    json manifest{
        {"format", "mmag-manifest"},
        {"format_version", kManifestVersion},
        {"tool", "mmag"},
        {"tool_version", kToolVersion},
        {"command", "synth"},
        {"fps", s.fps},
        {"frames", synth.clip.length()},
        {"width", s.width},
        {"height", s.height},
        {"bit_depth", opts.bit_depth},
        {"pulse",
         {{"period", p.period},
          {"systolic_amp", p.systolic_amp},
          {"systolic_center", p.systolic_center},
          {"systolic_width", p.systolic_width},
          {"dicrotic_amp", p.dicrotic_amp},
          {"dicrotic_center", p.dicrotic_center},
          {"dicrotic_width", p.dicrotic_width},
          {"runoff_amp", p.runoff_amp},
          {"runoff_decay", p.runoff_decay}}},
        {"synth",
         {{"duration", s.duration},
          {"motif", s.motif == Motif::bump ? "bump" : "edge"},
          {"background", s.background == Background::flat ? "flat" : "texture"},
          {"motion_amp", s.motion_amp},
          {"motif_size", s.motif_size},
          {"motif_contrast", s.motif_contrast},
          {"drift_amp", s.drift_amp},
          {"drift_hz", s.drift_hz},
          {"noise_sd", s.noise_sd},
          {"seed", s.seed}}}};
    save_manifest(opts.output, manifest);
    log << "synthesized " << synth.clip.length() << " frames -> " << opts.output.string() << "\n";
    return Status::ok;
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phase-based video motion magnification (linear, acceleration, jerk)", "mmag"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  const std::map<std::string, Mode> modes{{"linear", Mode::linear}, {"accel", Mode::accel}, {"jerk", Mode::jerk}};
  const std::map<std::string, OctaveStep> octaves{{"half", OctaveStep::half}, {"full", OctaveStep::full}};

  MagnifyOptions mag;
  double mag_fps = 0.0;
  int mag_bits = 16;
  auto* magnify_cmd = app.add_subcommand("magnify", "Magnify motion in a frame sequence");
  magnify_cmd->add_option("-i,--input", mag.input, "Frame directory or .mmraw file")->required();
  magnify_cmd->add_option("-o,--output", mag.output, "Output directory or .mmraw file")->required();
  magnify_cmd->add_option("--mode", mag.config.mode, "Temporal filter (default jerk)")
      ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case))
      ->option_text("{linear,accel,jerk}");
  magnify_cmd->add_option("--alpha", mag.config.alpha, "Magnification factor")->capture_default_str();
  magnify_cmd->add_option("--freq", mag.config.center_hz, "Target frequency in Hz")->capture_default_str();
  magnify_cmd->add_option("--band-halfwidth", mag.config.half_width_hz, "Passband half width in Hz")
      ->capture_default_str();
  auto* mag_fps_opt = magnify_cmd->add_option("--fps", mag_fps, "Override the input frame rate");
  magnify_cmd->add_option("--levels", mag.config.levels, "Pyramid levels")->capture_default_str();
  magnify_cmd->add_option("--orientations", mag.config.orientations, "Pyramid orientations")
      ->capture_default_str();
  magnify_cmd->add_option("--octave", mag.config.octave_step, "Level spacing (default half)")
      ->transform(CLI::CheckedTransformer(octaves, CLI::ignore_case))
      ->option_text("{half,full}");
  magnify_cmd->add_option("--phase-smooth", mag.config.phase_smoothing_px,
                          "Amplitude-weighted blur sigma in px for filtered phase (0 = off)")
      ->capture_default_str();
  auto* mag_bits_opt =
      magnify_cmd->add_option("--bit-depth", mag_bits, "Output sample depth (8 or 16)")
          ->check(CLI::IsMember({8, 16}));

  MetricsOptions met;
  double met_fps = 0.0;
  std::string met_report;
  auto* metrics_cmd = app.add_subcommand("metrics", "PSNR/SSIM of magnified sequences against a source");
  metrics_cmd->add_option("-s,--source", met.source, "Source sequence")->required();
  metrics_cmd->add_option("-m,--magnified", met.magnified, "Magnified sequence (repeat for a comparison table)")
      ->required();
  metrics_cmd->add_option("--sample-frames", met.sample_frames, "Frames to evaluate")->capture_default_str();
  metrics_cmd->add_option("-r,--report", met_report, "Report file (default stdout)");
  auto* met_fps_opt = metrics_cmd->add_option("--fps", met_fps, "Override the input frame rate");

  SliceOptions sl;
  auto* slice_cmd = app.add_subcommand("slice", "Spatio-temporal slice along a line");
  slice_cmd->add_option("-i,--input", sl.input, "Frame directory or .mmraw file")->required();
  slice_cmd->add_option("--line", sl.line, "row:Y | col:X | poly:x0,y0;x1,y1[;...]")->required();
  slice_cmd->add_option("-o,--output", sl.output, "Output .pgm image")->required();
  slice_cmd->add_option("--bit-depth", sl.bit_depth, "Output sample depth")->check(CLI::IsMember({8, 16}));

  SynthOptions syn;
  double period = 1.0;
  const std::map<std::string, Motif> motifs{{"bump", Motif::bump}, {"edge", Motif::edge}};
  const std::map<std::string, Background> backgrounds{{"flat", Background::flat}, {"texture", Background::texture}};
  auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic pulsatile clip");
  synth_cmd->add_option("-o,--output", syn.output, "Output directory or .mmraw file")->required();
  synth_cmd->add_option("--width", syn.spec.width)->capture_default_str();
  synth_cmd->add_option("--height", syn.spec.height)->capture_default_str();
  synth_cmd->add_option("--fps", syn.spec.fps)->capture_default_str();
  synth_cmd->add_option("--duration", syn.spec.duration, "Seconds")->capture_default_str();
  synth_cmd->add_option("--period", period, "Pulse period in seconds")->capture_default_str();
  synth_cmd->add_option("--motif", syn.spec.motif, "Motif shape (default bump)")
      ->transform(CLI::CheckedTransformer(motifs, CLI::ignore_case))
      ->option_text("{bump,edge}");
  synth_cmd->add_option("--background", syn.spec.background, "Background (default flat)")
      ->transform(CLI::CheckedTransformer(backgrounds, CLI::ignore_case))
      ->option_text("{flat,texture}");
  synth_cmd->add_option("--motion-amp", syn.spec.motion_amp, "Pulse displacement scale in px")
      ->capture_default_str();
  synth_cmd->add_option("--motif-size", syn.spec.motif_size, "Motif radius in px (0 = auto)")
      ->capture_default_str();
  synth_cmd->add_option("--drift-amp", syn.spec.drift_amp, "Whole-field drift amplitude in px")
      ->capture_default_str();
  synth_cmd->add_option("--drift-hz", syn.spec.drift_hz)->capture_default_str();
  synth_cmd->add_option("--noise-sd", syn.spec.noise_sd)->capture_default_str();
  synth_cmd->add_option("--seed", syn.spec.seed)->capture_default_str();
  synth_cmd->add_option("--bit-depth", syn.bit_depth)->check(CLI::IsMember({8, 16}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(Status::usage);
  }

  Status status = Status::failure;
  if (magnify_cmd->parsed()) {
    if (*mag_fps_opt) mag.fps = mag_fps;
    if (*mag_bits_opt) mag.bit_depth = mag_bits;
    status = cmd_magnify(mag, err);
  } else if (metrics_cmd->parsed()) {
    if (*met_fps_opt) met.fps = met_fps;
    if (!met_report.empty()) met.report = met_report;
    status = cmd_metrics(met, out, err);
  } else if (slice_cmd->parsed()) {
    status = cmd_slice(sl, err);
  } else if (synth_cmd->parsed()) {
    syn.pulse = PulseWave::with_period(period);
    status = cmd_synth(syn, err);
  }
  return static_cast<int>(status);
}

}  // namespace mmag::cli

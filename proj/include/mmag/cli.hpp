#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mmag/magnifier.hpp"
#include "mmag/metrics.hpp"
#include "mmag/pulse_model.hpp"

namespace mmag::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kManifestVersion = 1;
inline constexpr int kReportVersion = 1;

/// Process exit codes; every failure class has its own value.
enum class Status : int {
  ok = 0,
  failure = 1,
  usage = 2,
  input_not_found = 3,
  unreadable_input = 4,
  mixed_frame_sizes = 5,
  invalid_config = 6,
  mismatch = 7,
  write_failed = 8,
};

const char* status_name(Status s);
Status status_for(Errc code);

struct MagnifyOptions {
  std::filesystem::path input;
  std::filesystem::path output;
  MagnificationConfig config;
  std::optional<double> fps;
  std::optional<int> bit_depth;
};

struct MetricsOptions {
  std::filesystem::path source;
  std::vector<std::filesystem::path> magnified;
  Index sample_frames = 100;
  std::optional<std::filesystem::path> report;
  std::optional<double> fps;
};

struct SliceOptions {
  std::filesystem::path input;
  std::filesystem::path output;
  std::string line;
  int bit_depth = 16;
};

struct SynthOptions {
  std::filesystem::path output;
  PulseWave pulse;
  SynthSpec spec;
  int bit_depth = 16;
};

Status cmd_magnify(const MagnifyOptions& opts, std::ostream& log);
Status cmd_metrics(const MetricsOptions& opts, std::ostream& out, std::ostream& log);
Status cmd_slice(const SliceOptions& opts, std::ostream& log);
Status cmd_synth(const SynthOptions& opts, std::ostream& log);

/// Parses `row:Y`, `col:X` or `poly:x0,y0;x1,y1[;...]`; nullopt when malformed.
std::optional<SliceLine> parse_line_spec(const std::string& spec, Index width, Index height);

/// Sidecar manifest written next to an output sequence.
std::filesystem::path manifest_path(const std::filesystem::path& output);

std::string format_report(const MetricsReport& report, const std::string& source,
                          const std::string& magnified);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mmag::cli

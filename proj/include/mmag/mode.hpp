#pragma once

#include <optional>
#include <string>

namespace mmag {

/// Temporal order of the magnified motion.
enum class Mode { linear, accel, jerk };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::linear: return "linear";
    case Mode::accel: return "accel";
    case Mode::jerk: return "jerk";
  }
  return "?";
}

inline std::optional<Mode> parse_mode(const std::string& s) {
  if (s == "linear") return Mode::linear;
  if (s == "accel") return Mode::accel;
  if (s == "jerk") return Mode::jerk;
  return std::nullopt;
}

}  // namespace mmag

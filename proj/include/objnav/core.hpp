#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace objnav {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

// Error hierarchy. Every error the library raises derives from objnav::Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& where, const std::string& what)
      : Error("parse error at " + where + ": " + what), location_(where), detail_(what) {}
  const std::string& location() const { return location_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string location_;
  std::string detail_;
};

class InvariantError : public Error {
 public:
  InvariantError(const std::string& rule, const std::string& detail)
      : Error("invariant violated [" + rule + "]: " + detail), rule_(rule) {}
  const std::string& rule() const { return rule_; }

 private:
  std::string rule_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct Cell {
  int row = 0;
  int col = 0;
  auto operator<=>(const Cell&) const = default;
};

// Inclusive rectangle of cells.
struct Rect {
  int r0 = 0, c0 = 0, r1 = -1, c1 = -1;

  bool empty() const { return r1 < r0 || c1 < c0; }
  bool contains(Cell c) const { return c.row >= r0 && c.row <= r1 && c.col >= c0 && c.col <= c1; }
  int rows() const { return r1 - r0 + 1; }
  int cols() const { return c1 - c0 + 1; }
  auto operator<=>(const Rect&) const = default;
};

enum class Action : std::uint8_t { Forward, TurnLeft, TurnRight, Stop };

inline std::string_view to_string(Action a) {
  switch (a) {
    case Action::Forward: return "forward";
    case Action::TurnLeft: return "left";
    case Action::TurnRight: return "right";
    case Action::Stop: return "stop";
  }
  return "stop";
}

inline Action action_from_string(std::string_view s) {
  if (s == "forward") return Action::Forward;
  if (s == "left") return Action::TurnLeft;
  if (s == "right") return Action::TurnRight;
  if (s == "stop") return Action::Stop;
  throw ParseError("action", "unknown action '" + std::string(s) + "'");
}

// Heading in [0, 360).
inline double normalize_degrees(double deg) {
  double h = std::fmod(deg, 360.0);
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  return h;
}

// Signed difference target - source wrapped into (-180, 180].
inline double angle_difference(double target_deg, double source_deg) {
  double d = std::fmod(target_deg - source_deg, 360.0);
  if (d <= -180.0) d += 360.0;
  if (d > 180.0) d -= 360.0;
  return d;
}

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

// Seeded generator with portable draws (std distributions are not
// bit-stable across standard libraries, the engine is).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace objnav

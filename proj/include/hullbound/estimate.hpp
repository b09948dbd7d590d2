#pragma once

#include <cmath>
#include <cstdint>

#include <json.hpp>

namespace hullbound {

/// A Monte-Carlo (or closed-form) value. std_error == 0 exactly when the value
/// came from a closed form.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t count = 0;
  std::uint64_t seed = 0;

  static constexpr double kZ = 3.0;

  static Estimate exact(double v) { return {v, 0.0, 0, 0}; }

  bool closed_form() const { return std_error == 0.0; }
  double lower(double z = kZ) const { return value - z * std_error; }
  double upper(double z = kZ) const { return value + z * std_error; }
};

inline double combined_stderr(const Estimate& a, const Estimate& b) {
  return std::hypot(a.std_error, b.std_error);
}

/// a <= b up to z combined standard errors.
inline bool leq_within(const Estimate& a, const Estimate& b, double z) {
  return a.value <= b.value + z * combined_stderr(a, b);
}

inline void to_json(nlohmann::json& j, const Estimate& e) {
  j = nlohmann::json{{"value", e.value}, {"stderr", e.std_error}, {"count", e.count}, {"seed", e.seed}};
}

inline void from_json(const nlohmann::json& j, Estimate& e) {
  e.value = j.at("value").get<double>();
  e.std_error = j.at("stderr").get<double>();
  e.count = j.at("count").get<std::uint64_t>();
  e.seed = j.at("seed").get<std::uint64_t>();
}

}  // namespace hullbound

#pragma once

#include <cmath>
#include <string>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "vfsmooth/hull.hpp"

namespace vfsmooth::detail {

// Shortest round-trip representation; "nan" for missing values.
inline std::string num(double v) { return std::isnan(v) ? "nan" : fmt::format("{}", v == 0.0 ? 0.0 : v); }

// Vector cell; coordinates joined by ';'.
inline std::string vec(const Vec& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += num(v(i));
  }
  return out;
}

inline nlohmann::json vec_json(const Vec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline nlohmann::json num_json(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

}  // namespace vfsmooth::detail

#pragma once

#include <cmath>
#include <vector>

#include "personagen/error.hpp"

namespace pgen {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw InvalidInput("embedding dimensions differ");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double na = norm(a);
  double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

inline std::vector<double> normalized(std::vector<double> v) {
  double n = norm(v);
  if (n < 1e-12) throw InvalidInput("cannot normalize a zero vector");
  for (double& x : v) x /= n;
  return v;
}

// Unit-length mean of unit vectors; the usual single-vector summary.
inline std::vector<double> centroid(const std::vector<std::vector<double>>& vs) {
  if (vs.empty()) throw InvalidInput("centroid of zero vectors");
  std::vector<double> acc(vs.front().size(), 0.0);
  for (const auto& v : vs) {
    if (v.size() != acc.size())
      throw InvalidInput("embedding dimensions differ");
    for (size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
  }
  for (double& x : acc) x /= static_cast<double>(vs.size());
  return normalized(std::move(acc));
}

}  // namespace pgen

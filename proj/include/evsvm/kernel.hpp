#pragma once

#include <cmath>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "evsvm/errors.hpp"

namespace evsvm {

/// Kernel family and parameters. Polynomial is (x.y + 1)^degree, RBF is
/// exp(-gamma * |x - y|^2).
struct KernelSpec {
  enum class Kind { linear, polynomial, rbf };

  Kind kind = Kind::linear;
  int degree = 1;      // polynomial only, >= 1
  double gamma = 1.0;  // rbf only, > 0

  static KernelSpec linear() { return {}; }
  static KernelSpec polynomial(int degree) {
    if (degree < 1)
      throw std::invalid_argument("polynomial kernel degree must be >= 1");
    return {Kind::polynomial, degree, 1.0};
  }
  static KernelSpec rbf(double gamma) {
    if (!(gamma > 0.0))
      throw std::invalid_argument("rbf kernel gamma must be positive");
    return {Kind::rbf, 1, gamma};
  }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

inline double kernel_eval(const KernelSpec& k, std::span<const double> x,
                          std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("kernel_eval: dimension mismatch");
  switch (k.kind) {
    case KernelSpec::Kind::linear: {
      double dot = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
      return dot;
    }
    case KernelSpec::Kind::polynomial: {
      double dot = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
      return std::pow(dot + 1.0, k.degree);
    }
    case KernelSpec::Kind::rbf: {
      double sq = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        sq += d * d;
      }
      return std::exp(-k.gamma * sq);
    }
  }
  throw std::logic_error("kernel_eval: unknown kernel kind");
}

/// "linear", "poly:3", "rbf:0.5" (full precision on gamma).
inline std::string to_string(const KernelSpec& k) {
  switch (k.kind) {
    case KernelSpec::Kind::linear:
      return "linear";
    case KernelSpec::Kind::polynomial:
      return "poly:" + std::to_string(k.degree);
    case KernelSpec::Kind::rbf: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "rbf:%.17g", k.gamma);
      return buf;
    }
  }
  return "?";
}

inline KernelSpec parse_kernel(std::string_view text) {
  if (text == "linear") return KernelSpec::linear();
  auto parse_param = [&](std::string_view prefix) -> std::string {
    return std::string(text.substr(prefix.size()));
  };
  try {
    if (text.rfind("poly:", 0) == 0) {
      std::size_t used = 0;
      const std::string p = parse_param("poly:");
      const int degree = std::stoi(p, &used);
      if (used != p.size()) throw std::invalid_argument("trailing characters");
      return KernelSpec::polynomial(degree);
    }
    if (text.rfind("rbf:", 0) == 0) {
      std::size_t used = 0;
      const std::string p = parse_param("rbf:");
      const double gamma = std::stod(p, &used);
      if (used != p.size()) throw std::invalid_argument("trailing characters");
      return KernelSpec::rbf(gamma);
    }
  } catch (const std::exception&) {
    throw data_error("unparseable kernel spec '" + std::string(text) +
                     "' (expected linear, poly:<degree>, rbf:<gamma>)");
  }
  throw data_error("unknown kernel '" + std::string(text) +
                   "' (expected linear, poly:<degree>, rbf:<gamma>)");
}

}  // namespace evsvm

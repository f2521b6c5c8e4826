#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dfr/errors.hpp"

namespace dfr {

enum class Nonlinearity { Identity, Tanh, MackeyGlass, PiecewiseLinear };

// Piecewise-linear table over [domain_lo, domain_hi]. Inputs outside the
// domain are clamped, matching a saturating hardware LUT.
struct PwlTable {
  double domain_lo = -1.0;
  double domain_hi = 1.0;
  std::vector<double> breakpoints;
  std::vector<double> values;

  void validate() const {
    if (breakpoints.size() != values.size() || breakpoints.size() < 2)
      throw invalid_parameter("PwlTable: need >= 2 matching breakpoints/values");
    if (breakpoints.front() != domain_lo || breakpoints.back() != domain_hi)
      throw invalid_parameter("PwlTable: endpoints must equal domain bounds");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
      if (!(breakpoints[i - 1] < breakpoints[i]))
        throw invalid_parameter("PwlTable: breakpoints must be strictly increasing");
  }

  double eval(double z) const {
    if (z <= domain_lo) return values.front();
    if (z >= domain_hi) return values.back();
    // first breakpoint > z; z lies in [bp[i], bp[i+1])
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), z);
    std::size_t seg = static_cast<std::size_t>(it - breakpoints.begin()) - 1;
    double x0 = breakpoints[seg], x1 = breakpoints[seg + 1];
    double v0 = values[seg], v1 = values[seg + 1];
    double t = (z - x0) / (x1 - x0);
    return v0 + t * (v1 - v0);  // t == 0 at a breakpoint: exact
  }
};

struct NonlinearitySpec {
  Nonlinearity variant = Nonlinearity::Tanh;
  double mg_exponent = 1.0;  // MackeyGlass only
  PwlTable pwl;              // PiecewiseLinear only

  static NonlinearitySpec identity() { return {Nonlinearity::Identity, 1.0, {}}; }
  static NonlinearitySpec tanh() { return {Nonlinearity::Tanh, 1.0, {}}; }
  static NonlinearitySpec mackey_glass(double p) {
    if (!(p > 0)) throw invalid_parameter("mg_exponent must be > 0");
    return {Nonlinearity::MackeyGlass, p, {}};
  }
  static NonlinearitySpec piecewise(PwlTable table) {
    table.validate();
    NonlinearitySpec s{Nonlinearity::PiecewiseLinear, 1.0, std::move(table)};
    return s;
  }
};

// Node function. Total: every variant is defined on all of R.
inline double eval(const NonlinearitySpec& spec, double z) {
  switch (spec.variant) {
    case Nonlinearity::Identity:
      return z;
    case Nonlinearity::Tanh:
      return std::tanh(z);
    case Nonlinearity::MackeyGlass:
      // odd extension via |z|^p, so f(-z) == -f(z) exactly
      return z / (1.0 + std::pow(std::abs(z), spec.mg_exponent));
    case Nonlinearity::PiecewiseLinear:
      return spec.pwl.eval(z);
  }
  throw invalid_parameter("eval: unknown nonlinearity variant");
}

// Uniform-knot PWL approximation of `spec` on [lo, hi]; values are exact
// evaluations at the knots. Uniform knots keep hardware address decoding
// trivial.
inline PwlTable build_pwl(const NonlinearitySpec& spec, int segments, double lo, double hi) {
  if (segments < 1) throw invalid_parameter("build_pwl: segments must be >= 1");
  if (!(lo < hi)) throw invalid_parameter("build_pwl: lo must be < hi");
  if (spec.variant == Nonlinearity::PiecewiseLinear)
    throw invalid_parameter("build_pwl: base spec may not itself be piecewise linear");

  PwlTable table;
  table.domain_lo = lo;
  table.domain_hi = hi;
  table.breakpoints.resize(static_cast<std::size_t>(segments) + 1);
  table.values.resize(static_cast<std::size_t>(segments) + 1);
  for (int i = 0; i <= segments; ++i) {
    double x = (i == segments) ? hi : lo + (hi - lo) * (static_cast<double>(i) / segments);
    table.breakpoints[static_cast<std::size_t>(i)] = x;
    table.values[static_cast<std::size_t>(i)] = eval(spec, x);
  }
  table.validate();
  return table;
}

inline const char* to_string(Nonlinearity v) {
  switch (v) {
    case Nonlinearity::Identity: return "identity";
    case Nonlinearity::Tanh: return "tanh";
    case Nonlinearity::MackeyGlass: return "mackey_glass";
    case Nonlinearity::PiecewiseLinear: return "pwl";
  }
  return "?";
}

}  // namespace dfr

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "qbcsim/errors.hpp"

namespace qbc {

using complexd = std::complex<double>;

// Uniform 1-d spatial grid. Point i sits at x_min + i*dx with
// dx = (x_max - x_min) / n_points, so x_max itself is not a sample; that is
// the natural convention for an FFT-periodic domain.
struct Grid {
  double x_min = 0.0;
  double x_max = 0.0;
  std::size_t n_points = 0;

  Grid() = default;
  Grid(double lo, double hi, std::size_t n) : x_min(lo), x_max(hi), n_points(n) {
    if (!(hi > lo)) throw InvalidParams("Grid: x_max must exceed x_min");
    if (n < 2 || (n & (n - 1)) != 0)
      throw InvalidParams("Grid: n_points must be a power of two >= 2");
  }

  double dx() const { return (x_max - x_min) / static_cast<double>(n_points); }
  double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }
  double length() const { return x_max - x_min; }

  // FFT wavenumber for bin j, in standard order: non-negative frequencies
  // first, then the negative half.
  double k(std::size_t j) const {
    const double dk = 2.0 * std::numbers::pi / length();
    const auto n = static_cast<std::ptrdiff_t>(n_points);
    auto sj = static_cast<std::ptrdiff_t>(j);
    if (sj >= n / 2) sj -= n;
    return dk * static_cast<double>(sj);
  }

  bool operator==(const Grid&) const = default;
};

// Complex field sampled on a grid; the workhorse state for wavefunctions.
struct ComplexField {
  Grid grid;
  std::vector<complexd> values;

  ComplexField() = default;
  explicit ComplexField(const Grid& g) : grid(g), values(g.n_points, complexd{0.0, 0.0}) {}

  std::size_t size() const { return values.size(); }

  // Integral of |psi|^2 over the domain (midpoint rule is exact enough at
  // the grid resolutions used here, and it is what the FFT preserves).
  double norm_squared() const {
    double acc = 0.0;
    for (const auto& v : values) acc += std::norm(v);
    return acc * grid.dx();
  }

  double norm() const { return std::sqrt(norm_squared()); }

  void scale(double s) {
    for (auto& v : values) v *= s;
  }

  void normalize() {
    const double n = norm();
    if (!(n > 0.0)) throw DegeneratePattern("ComplexField: cannot normalize a null field");
    scale(1.0 / n);
  }

  // <x> under |psi|^2, assuming a normalized field is not required: the
  // moment is divided by the actual norm.
  double centroid() const {
    double w = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double p = std::norm(values[i]);
      w += p;
      acc += p * grid.x(i);
    }
    if (!(w > 0.0)) throw DegeneratePattern("ComplexField: null field has no centroid");
    return acc / w;
  }

  // Standard deviation of position under |psi|^2.
  double width() const {
    const double mu = centroid();
    double w = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double p = std::norm(values[i]);
      const double d = grid.x(i) - mu;
      w += p;
      acc += p * d * d;
    }
    return std::sqrt(acc / w);
  }
};

// Probability density sampled on a grid (|psi|^2 or an incoherent mixture).
struct RealField {
  Grid grid;
  std::vector<double> values;

  RealField() = default;
  explicit RealField(const Grid& g) : grid(g), values(g.n_points, 0.0) {}

  std::size_t size() const { return values.size(); }

  double total() const {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc * grid.dx();
  }

  void normalize() {
    const double t = total();
    if (!(t > 0.0)) throw DegeneratePattern("RealField: cannot normalize a null density");
    for (auto& v : values) v /= t;
  }
};

inline RealField intensity_of(const ComplexField& f) {
  RealField out(f.grid);
  for (std::size_t i = 0; i < f.size(); ++i) out.values[i] = std::norm(f.values[i]);
  return out;
}

}  // namespace qbc

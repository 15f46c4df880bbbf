#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace thzrel {

/// Uniform time grid t_i = i * step, i = 0 .. size-1.
struct Grid {
  double step = 0.0;
  std::size_t size = 0;

  /// Throws GridError unless step > 0 and size >= 2.
  Grid(double step, std::size_t size);

  double at(std::size_t i) const { return static_cast<double>(i) * step; }
  double horizon() const { return at(size - 1); }
  std::vector<double> points() const;

  bool operator==(const Grid&) const = default;
};

enum class DistKind { pdf, cdf };

/// A distribution sampled on a grid: the common currency of every convolution.
/// PDFs are non-negative densities; CDFs carry an implicit value 0 just left of
/// t = 0, so CDF(0) > 0 encodes an atom at the origin.
struct TabulatedDist {
  Grid grid;
  DistKind kind;
  std::vector<double> values;
  std::string name;

  TabulatedDist(Grid grid, DistKind kind, std::vector<double> values, std::string name = {});

  /// Linear interpolation; 0 left of the grid, last value right of it.
  double at(double t) const;
  /// Trapezoid mass of a PDF, or the final value of a CDF.
  double mass() const;
};

/// Trapezoid rule over equally spaced samples.
double quadrature(std::span<const double> values, double step);

/// Cumulative trapezoid integral; out[0] = 0.
std::vector<double> cumulative_integral(std::span<const double> values, double step);

/// Point mass at t = 0 as a CDF (identity of the CDF convolution algebra).
TabulatedDist unit_step(const Grid& grid);

/// CDF of a tabulated PDF.
TabulatedDist to_cdf(const TabulatedDist& pdf);

/// Distribution of the sum of independent variables, truncated to the grid:
///   pdf * pdf -> pdf   and   pdf * cdf -> cdf   (trapezoid rule, O(h^2))
///   cdf * cdf -> cdf   (trapezoid Riemann-Stieltjes sum; keeps atoms exact)
/// Throws GridError on grid mismatch.
TabulatedDist convolve(const TabulatedDist& a, const TabulatedDist& b);

/// n-fold self-convolution of a CDF; n = 0 is the unit step.
TabulatedDist nfold(const TabulatedDist& cdf, int n);

/// sup_t |A(t) - B(t)| for two CDFs on the same grid.
double ks_distance(const TabulatedDist& a, const TabulatedDist& b);

/// Trapezoid integral of |a - b| for two PDFs on the same grid.
double l1_distance(const TabulatedDist& a, const TabulatedDist& b);

/// Two-column CSV "t_s,<name>" preceded by '#'-prefixed header lines.
void write_csv(std::ostream& out, const TabulatedDist& dist,
               std::span<const std::string> header_lines = {});

namespace detail {

/// First `n_out` terms of the full linear convolution sum_j a_j b_{k-j}.
std::vector<double> linear_convolve(std::span<const double> a, std::span<const double> b,
                                    std::size_t n_out);
std::vector<double> linear_convolve_direct(std::span<const double> a, std::span<const double> b,
                                           std::size_t n_out);
std::vector<double> linear_convolve_fft(std::span<const double> a, std::span<const double> b,
                                        std::size_t n_out);

}  // namespace detail
}  // namespace thzrel

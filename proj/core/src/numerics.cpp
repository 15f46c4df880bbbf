#include "thzrel/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "thzrel/error.hpp"

namespace thzrel {

Grid::Grid(double step_, std::size_t size_) : step(step_), size(size_) {
  if (!(step > 0.0)) throw GridError("grid step must be > 0");
  if (size < 2) throw GridError("grid needs at least 2 points");
}

std::vector<double> Grid::points() const {
  std::vector<double> t(size);
  for (std::size_t i = 0; i < size; ++i) t[i] = at(i);
  return t;
}

TabulatedDist::TabulatedDist(Grid grid_, DistKind kind_, std::vector<double> values_,
                             std::string name_)
    : grid(grid_), kind(kind_), values(std::move(values_)), name(std::move(name_)) {
  if (values.size() != grid.size) throw GridError("value count does not match grid size");
}

double TabulatedDist::at(double t) const {
  if (t < 0.0) return 0.0;
  const double x = t / grid.step;
  if (x >= static_cast<double>(grid.size - 1)) return values.back();
  const auto i = static_cast<std::size_t>(x);
  const double w = x - static_cast<double>(i);
  return values[i] + w * (values[i + 1] - values[i]);
}

double TabulatedDist::mass() const {
  return kind == DistKind::cdf ? values.back() : quadrature(values, grid.step);
}

double quadrature(std::span<const double> values, double step) {
  if (values.size() < 2) return 0.0;
  double sum = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
  return sum * step;
}

std::vector<double> cumulative_integral(std::span<const double> values, double step) {
  std::vector<double> out(values.size(), 0.0);
  for (std::size_t i = 1; i < values.size(); ++i) {
    out[i] = out[i - 1] + 0.5 * step * (values[i - 1] + values[i]);
  }
  return out;
}

TabulatedDist unit_step(const Grid& grid) {
  return {grid, DistKind::cdf, std::vector<double>(grid.size, 1.0), "unit_step"};
}

TabulatedDist to_cdf(const TabulatedDist& pdf) {
  if (pdf.kind != DistKind::pdf) throw GridError("to_cdf expects a pdf");
  return {pdf.grid, DistKind::cdf, cumulative_integral(pdf.values, pdf.grid.step),
          pdf.name + "_cdf"};
}

namespace detail {

std::vector<double> linear_convolve_direct(std::span<const double> a, std::span<const double> b,
                                           std::size_t n_out) {
  std::vector<double> out(n_out, 0.0);
  const std::size_t na = std::min(a.size(), n_out);
  for (std::size_t i = 0; i < na; ++i) {
    if (a[i] == 0.0) continue;
    const std::size_t nb = std::min(b.size(), n_out - i);
    for (std::size_t j = 0; j < nb; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

std::vector<double> linear_convolve(std::span<const double> a, std::span<const double> b,
                                    std::size_t n_out) {
  // Below this size the O(n^2) loop beats transform setup.
  constexpr std::size_t kFftThreshold = 128;
  if (std::min({a.size(), b.size(), n_out}) < kFftThreshold) {
    return linear_convolve_direct(a, b, n_out);
  }
  return linear_convolve_fft(a, b, n_out);
}

}  // namespace detail

namespace {

// h * [sum_j a_j b_{k-j} - (a_0 b_k + a_k b_0) / 2]
std::vector<double> trapezoid_convolution(std::span<const double> a, std::span<const double> b,
                                          double h) {
  const std::size_t n = a.size();
  std::vector<double> c = detail::linear_convolve(a, b, n);
  for (std::size_t k = 0; k < n; ++k) c[k] = h * (c[k] - 0.5 * (a[0] * b[k] + a[k] * b[0]));
  return c;
}

// C(t_k) = A(0) B(t_k) + sum_{j>=1} [A(t_j) - A(t_{j-1})] (B(t_{k-j}) + B(t_{k-j+1})) / 2
std::vector<double> stieltjes_convolution(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  std::vector<double> increments(n - 1);
  for (std::size_t j = 1; j < n; ++j) increments[j - 1] = a[j] - a[j - 1];
  std::vector<double> midpoints(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) midpoints[i] = 0.5 * (b[i] + b[i + 1]);

  const std::vector<double> tail = detail::linear_convolve(increments, midpoints, n - 1);
  std::vector<double> c(n);
  for (std::size_t k = 0; k < n; ++k) c[k] = a[0] * b[k] + (k > 0 ? tail[k - 1] : 0.0);
  return c;
}

std::string joined_name(const TabulatedDist& a, const TabulatedDist& b) {
  return a.name.empty() || b.name.empty() ? std::string{} : a.name + "*" + b.name;
}

}  // namespace

TabulatedDist convolve(const TabulatedDist& a, const TabulatedDist& b) {
  if (!(a.grid == b.grid)) throw GridError("convolve: grid mismatch");
  const double h = a.grid.step;
  if (a.kind == DistKind::pdf && b.kind == DistKind::pdf) {
    return {a.grid, DistKind::pdf, trapezoid_convolution(a.values, b.values, h), joined_name(a, b)};
  }
  if (a.kind == DistKind::cdf && b.kind == DistKind::cdf) {
    return {a.grid, DistKind::cdf, stieltjes_convolution(a.values, b.values), joined_name(a, b)};
  }
  return {a.grid, DistKind::cdf, trapezoid_convolution(a.values, b.values, h), joined_name(a, b)};
}

TabulatedDist nfold(const TabulatedDist& cdf, int n) {
  if (cdf.kind != DistKind::cdf) throw GridError("nfold expects a cdf");
  if (n < 0) throw DomainError("nfold order must be >= 0");
  TabulatedDist out = unit_step(cdf.grid);
  for (int i = 0; i < n; ++i) out = convolve(out, cdf);
  out.name = cdf.name + "^(" + std::to_string(n) + ")";
  return out;
}

double ks_distance(const TabulatedDist& a, const TabulatedDist& b) {
  if (!(a.grid == b.grid)) throw GridError("ks_distance: grid mismatch");
  if (a.kind != DistKind::cdf || b.kind != DistKind::cdf) {
    throw GridError("ks_distance expects two cdfs");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    d = std::max(d, std::abs(a.values[i] - b.values[i]));
  }
  return d;
}

double l1_distance(const TabulatedDist& a, const TabulatedDist& b) {
  if (!(a.grid == b.grid)) throw GridError("l1_distance: grid mismatch");
  if (a.kind != DistKind::pdf || b.kind != DistKind::pdf) {
    throw GridError("l1_distance expects two pdfs");
  }
  std::vector<double> diff(a.values.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = std::abs(a.values[i] - b.values[i]);
  return quadrature(diff, a.grid.step);
}

void write_csv(std::ostream& out, const TabulatedDist& dist,
               std::span<const std::string> header_lines) {
  for (const auto& line : header_lines) out << "# " << line << '\n';
  out << "t_s," << (dist.name.empty() ? (dist.kind == DistKind::pdf ? "pdf" : "cdf") : dist.name)
      << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < dist.values.size(); ++i) {
    out << dist.grid.at(i) << ',' << dist.values[i] << '\n';
  }
}

}  // namespace thzrel

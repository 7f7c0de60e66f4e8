#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cifboot {

/// Right-continuous piecewise-constant function on [0, inf).
///
/// Takes initial_value on [0, jump_times[0]) and values[k] on
/// [jump_times[k], jump_times[k+1]).
class StepFunction {
 public:
  StepFunction() = default;
  explicit StepFunction(double initial_value) : initial_(initial_value) {}
  /// Throws InputError unless jump_times is strictly increasing and both
  /// vectors have the same length.
  StepFunction(double initial_value, std::vector<double> jump_times, std::vector<double> values);

  double operator()(double t) const noexcept;
  double left_limit(double t) const noexcept;

  double initial_value() const noexcept { return initial_; }
  std::span<const double> jump_times() const noexcept { return times_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t jump_count() const noexcept { return times_.size(); }
  double final_value() const noexcept { return values_.empty() ? initial_ : values_.back(); }

  /// Exact integral over [a, b] (a <= b).
  double integrate(double a, double b) const;

 private:
  double initial_ = 0.0;
  std::vector<double> times_;
  std::vector<double> values_;
};

/// Piecewise-constant bivariate function on grid x grid, stored densely.
/// Evaluation at (s1, s2) uses the last grid point <= each coordinate and
/// returns 0 when either coordinate precedes the grid.
class CovarianceSurface {
 public:
  CovarianceSurface() = default;
  CovarianceSurface(std::vector<double> grid, std::vector<double> values);

  std::span<const double> grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return grid_.size(); }

  double at(std::size_t a, std::size_t b) const noexcept { return values_[a * grid_.size() + b]; }
  double operator()(double s1, double s2) const noexcept;

  bool is_symmetric(double tolerance = 0.0) const noexcept;

 private:
  std::vector<double> grid_;
  std::vector<double> values_;
};

}  // namespace cifboot

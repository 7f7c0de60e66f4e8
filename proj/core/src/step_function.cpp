#include "cifboot/step_function.hpp"

#include <algorithm>
#include <cmath>

#include "cifboot/error.hpp"

namespace cifboot {

StepFunction::StepFunction(double initial_value, std::vector<double> jump_times,
                           std::vector<double> values)
    : initial_(initial_value), times_(std::move(jump_times)), values_(std::move(values)) {
  if (times_.size() != values_.size()) {
    throw InputError("step function: jump_times and values differ in length");
  }
  if (std::adjacent_find(times_.begin(), times_.end(), std::greater_equal<>()) != times_.end()) {
    throw InputError("step function: jump times must be strictly increasing");
  }
}

double StepFunction::operator()(double t) const noexcept {
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return initial_;
  return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double StepFunction::left_limit(double t) const noexcept {
  const auto it = std::lower_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return initial_;
  return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double StepFunction::integrate(double a, double b) const {
  if (b < a) throw InputError("step function: integration bounds reversed");
  double total = 0.0;
  double left = a;
  double level = (*this)(a);
  auto it = std::upper_bound(times_.begin(), times_.end(), a);
  for (; it != times_.end() && *it < b; ++it) {
    total += level * (*it - left);
    left = *it;
    level = values_[static_cast<std::size_t>(it - times_.begin())];
  }
  total += level * (b - left);
  return total;
}

CovarianceSurface::CovarianceSurface(std::vector<double> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size() * grid_.size()) {
    throw InputError("covariance surface: value matrix does not match grid");
  }
  if (std::adjacent_find(grid_.begin(), grid_.end(), std::greater_equal<>()) != grid_.end()) {
    throw InputError("covariance surface: grid must be strictly increasing");
  }
}

double CovarianceSurface::operator()(double s1, double s2) const noexcept {
  const auto a = std::upper_bound(grid_.begin(), grid_.end(), s1);
  const auto b = std::upper_bound(grid_.begin(), grid_.end(), s2);
  if (a == grid_.begin() || b == grid_.begin()) return 0.0;
  return at(static_cast<std::size_t>(a - grid_.begin()) - 1,
            static_cast<std::size_t>(b - grid_.begin()) - 1);
}

bool CovarianceSurface::is_symmetric(double tolerance) const noexcept {
  const auto g = grid_.size();
  for (std::size_t a = 0; a < g; ++a) {
    for (std::size_t b = a + 1; b < g; ++b) {
      if (std::abs(at(a, b) - at(b, a)) > tolerance) return false;
    }
  }
  return true;
}

}  // namespace cifboot

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cifboot/data_model.hpp"
#include "cifboot/resampling.hpp"
#include "cifboot/step_function.hpp"

namespace cifboot {

/// Strictly positive piecewise-constant weight over time, integrated exactly.
class RhoFunction {
 public:
  /// rho == 1
  RhoFunction() : fn_(1.0) {}
  /// Value `initial` on [0, breaks[0]) and values[k] on [breaks[k], breaks[k+1]).
  /// Throws InputError if any value is not strictly positive and finite.
  RhoFunction(double initial, std::vector<double> breaks, std::vector<double> values);

  static RhoFunction constant(double value) { return RhoFunction(value, {}, {}); }

  double operator()(double t) const noexcept { return fn_(t); }
  double integral(double a, double b) const { return fn_.integrate(a, b); }
  std::span<const double> breakpoints() const noexcept { return fn_.jump_times(); }
  RhoFunction scaled(double factor) const;

 private:
  StepFunction fn_;
};

struct TestConfig {
  double t1 = 0.0;
  double t2 = 1.5;
  RhoFunction rho;
  double alpha = 0.05;
  std::size_t B = 999;
  /// Efron multinomial weights, or any wild (iid, uncentred) multiplier.
  WeightScheme scheme = WeightScheme::efron();
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  bool keep_replicates = false;
  /// Intersect [t1, t2] with [0, last exit of either group].
  bool clip_to_support = true;

  void validate() const;
};

struct TestInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool truncated = false;
};

/// [t1, t2] intersected with the common positive-risk support. Throws
/// InputError if the result is empty.
TestInterval effective_interval(const CountingProcessPanel& group1,
                                const CountingProcessPanel& group2, const TestConfig& config);

struct TestResult {
  std::string method;
  double statistic = 0.0;    // T_n
  double variance = 0.0;     // V_n^2
  double studentized = 0.0;  // T_n / V_n, 0 when V_n = 0
  double critical_value = 0.0;
  double p_value = 1.0;
  bool reject = false;
  bool degenerate_variance = false;
  TestInterval interval;
  std::size_t B = 0;
  std::size_t degenerate_replicates = 0;
  std::size_t truncated_replicate_variances = 0;
  std::vector<double> replicates;           // studentized bootstrap statistics, by index
  std::vector<double> replicate_variances;  // V*^2 after truncation, by index
  std::vector<std::string> warnings;
};

/// T_n = sqrt(n1 n2 / n) int rho (F1^(1) - F1^(2)) over the effective interval,
/// summed exactly over segments where the integrand is constant.
double integral_statistic(const CountingProcessPanel& group1, const CountingProcessPanel& group2,
                          const TestConfig& config);

/// V_n^2 = double integral of rho(s) zeta_n(s,t) rho(t), zeta_n = (n2/n) zeta^(1) + (n1/n) zeta^(2),
/// summed over grid rectangles on which both surfaces are constant.
double variance_vn(const CountingProcessPanel& group1, const CountingProcessPanel& group2,
                   const TestConfig& config);

/// Asymptotic test: reject when T_n / V_n exceeds the standard normal (1 - alpha) quantile.
TestResult test_phi_n(const CountingProcessPanel& group1, const CountingProcessPanel& group2,
                      const TestConfig& config);

/// Signed, rho-integrated Z entries of both groups, pooled into 2n = 2(n1 + n2)
/// values: group 1's 2 n1 entries (+) followed by group 2's 2 n2 entries (-).
struct PooledZ {
  std::vector<double> integrals;
  std::vector<unsigned char> active;  // entry carries a jump
  std::size_t n1 = 0;
  std::size_t n2 = 0;

  double scale() const noexcept {
    return static_cast<double>(n1) * static_cast<double>(n2) / static_cast<double>(n1 + n2);
  }
};

PooledZ pool_z(const ZArray& group1, const ZArray& group2, const TestInterval& interval,
               const RhoFunction& rho);

/// int_lower^upper rho(s) Z_i(s) ds for every entry of one ZArray.
std::vector<double> integrate_entries(const ZArray& z, const TestInterval& interval,
                                      const RhoFunction& rho);

/// T_n^* = sqrt(n1 n2 / n) sum_i w_i (a_i - abar), or without the centring
/// term when `centred` is false.
double bootstrap_statistic(const PooledZ& z, std::span<const double> weights, bool centred);

struct BootstrapVariance {
  double value = 0.0;
  bool truncated = false;  // negative value replaced by 0
};

/// V_n^{*2} = (n1 n2 / n) sum v a^2 - [xi correction] (n1 n2 / (2 n^2)) (sum v a)^2.
BootstrapVariance bootstrap_variance(const PooledZ& z, std::span<const double> v_weights,
                                     bool xi_correction);

/// Studentized resampling test: Efron weights (w = m - 1, v = m, centred,
/// xi-corrected) or wild weights (w = G, v = G^2, neither).
TestResult test_phi_star(const CountingProcessPanel& group1, const CountingProcessPanel& group2,
                         const TestConfig& config);

/// Order statistic of rank ceil((1 - alpha)(B + 1)); +inf when that exceeds B.
double bootstrap_critical_value(std::vector<double> replicates, double alpha);

}  // namespace cifboot

#include "cifboot/two_sample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "cifboot/error.hpp"
#include "cifboot/estimators.hpp"
#include "cifboot/parallel.hpp"
#include "cifboot/rng.hpp"

namespace cifboot {

RhoFunction::RhoFunction(double initial, std::vector<double> breaks, std::vector<double> values)
    : fn_(initial, std::move(breaks), std::move(values)) {
  auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!ok(initial) || !std::all_of(fn_.values().begin(), fn_.values().end(), ok)) {
    throw InputError("rho must be strictly positive and finite");
  }
}

RhoFunction RhoFunction::scaled(double factor) const {
  std::vector<double> values(fn_.values().begin(), fn_.values().end());
  for (auto& v : values) v *= factor;
  return RhoFunction(fn_.initial_value() * factor,
                     std::vector<double>(fn_.jump_times().begin(), fn_.jump_times().end()),
                     std::move(values));
}

void TestConfig::validate() const {
  if (!(t1 >= 0.0) || !(t1 < t2)) throw InputError("test interval requires 0 <= t1 < t2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (B < 1) throw InputError("B must be at least 1");
}

namespace {

void check_groups(const CountingProcessPanel& g1, const CountingProcessPanel& g2) {
  if (g1.sample_size() < 1 || g2.sample_size() < 1) {
    throw InputError("both groups need at least one observation");
  }
}

double sample_scale(const CountingProcessPanel& g1, const CountingProcessPanel& g2) {
  const auto n1 = static_cast<double>(g1.sample_size());
  const auto n2 = static_cast<double>(g2.sample_size());
  return n1 * n2 / (n1 + n2);
}

// Sorted segment starts: lower, then every breakpoint strictly inside.
std::vector<double> segment_starts(const TestInterval& interval,
                                   std::initializer_list<std::span<const double>> sources) {
  std::vector<double> starts{interval.lower};
  for (const auto src : sources) {
    for (const double t : src) {
      if (t > interval.lower && t < interval.upper) starts.push_back(t);
    }
  }
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
  return starts;
}

// int rho over each segment [starts[j], starts[j+1]) with the last ending at upper.
std::vector<double> segment_masses(std::span<const double> starts, double upper,
                                   const RhoFunction& rho) {
  std::vector<double> mass(starts.size());
  for (std::size_t j = 0; j < starts.size(); ++j) {
    const double end = j + 1 < starts.size() ? starts[j + 1] : upper;
    mass[j] = rho(starts[j]) * (end - starts[j]);
  }
  return mass;
}

std::vector<double> event_times(const CountingProcessPanel& panel) {
  std::vector<double> out;
  const auto times = panel.times();
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (panel.events1()[k] + panel.events2()[k] > 0) out.push_back(times[k]);
  }
  return out;
}

}  // namespace

TestInterval effective_interval(const CountingProcessPanel& group1,
                                const CountingProcessPanel& group2, const TestConfig& config) {
  config.validate();
  TestInterval interval{config.t1, config.t2, false};
  if (config.clip_to_support) {
    const double support = std::min(group1.last_exit(), group2.last_exit());
    if (support < interval.upper) {
      interval.upper = support;
      interval.truncated = true;
    }
  }
  if (!(interval.upper > interval.lower)) {
    throw InputError("degenerate evaluation interval after intersecting with data support");
  }
  return interval;
}

double integral_statistic(const CountingProcessPanel& group1, const CountingProcessPanel& group2,
                          const TestConfig& config) {
  check_groups(group1, group2);
  const auto interval = effective_interval(group1, group2, config);
  const auto f1 = aalen_johansen(group1, 1);
  const auto f2 = aalen_johansen(group2, 1);
  const auto starts =
      segment_starts(interval, {f1.jump_times(), f2.jump_times(), config.rho.breakpoints()});
  const auto mass = segment_masses(starts, interval.upper, config.rho);
  double total = 0.0;
  for (std::size_t j = 0; j < starts.size(); ++j) {
    total += (f1(starts[j]) - f2(starts[j])) * mass[j];
  }
  return std::sqrt(sample_scale(group1, group2)) * total;
}

double variance_vn(const CountingProcessPanel& group1, const CountingProcessPanel& group2,
                   const TestConfig& config) {
  check_groups(group1, group2);
  const auto interval = effective_interval(group1, group2, config);
  const auto e1 = event_times(group1);
  const auto e2 = event_times(group2);
  const auto starts = segment_starts(interval, {e1, e2, config.rho.breakpoints()});
  const auto mass = segment_masses(starts, interval.upper, config.rho);

  const auto zeta1 = zeta_hat(group1, starts);
  const auto zeta2 = zeta_hat(group2, starts);
  const auto n1 = static_cast<double>(group1.sample_size());
  const auto n2 = static_cast<double>(group2.sample_size());
  const double w1 = n2 / (n1 + n2);
  const double w2 = n1 / (n1 + n2);

  double total = 0.0;
  for (std::size_t a = 0; a < starts.size(); ++a) {
    double row = 0.0;
    for (std::size_t b = 0; b < starts.size(); ++b) {
      row += mass[b] * (w1 * zeta1.at(a, b) + w2 * zeta2.at(a, b));
    }
    total += mass[a] * row;
  }
  return total;
}

namespace {

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

TestResult data_statistics(const CountingProcessPanel& group1, const CountingProcessPanel& group2,
                           const TestConfig& config) {
  TestResult result;
  result.interval = effective_interval(group1, group2, config);
  if (result.interval.truncated) {
    result.warnings.push_back("evaluation interval truncated to the common positive-risk support");
  }
  result.statistic = integral_statistic(group1, group2, config);
  result.variance = variance_vn(group1, group2, config);
  if (result.variance > 0.0) {
    result.studentized = result.statistic / std::sqrt(result.variance);
  } else {
    result.studentized = 0.0;
    result.degenerate_variance = true;
    result.warnings.push_back("V_n = 0: studentized statistic set to 0");
  }
  return result;
}

}  // namespace

TestResult test_phi_n(const CountingProcessPanel& group1, const CountingProcessPanel& group2,
                      const TestConfig& config) {
  check_groups(group1, group2);
  auto result = data_statistics(group1, group2, config);
  result.method = "asymptotic";
  result.critical_value = normal_quantile(1.0 - config.alpha);
  result.p_value = normal_upper_tail(result.studentized);
  result.reject = !result.degenerate_variance && result.studentized > result.critical_value;
  return result;
}

std::vector<double> integrate_entries(const ZArray& z, const TestInterval& interval,
                                      const RhoFunction& rho) {
  const auto& cif = z.cif1();
  const auto starts = segment_starts(interval, {cif.jump_times(), rho.breakpoints()});
  const auto g = starts.size();

  // cumulative int rho and int rho F1 from `lower` to each segment start
  std::vector<double> level(g);
  std::vector<double> cif_level(g);
  std::vector<double> cum_rho(g + 1, 0.0);
  std::vector<double> cum_rho_f(g + 1, 0.0);
  for (std::size_t j = 0; j < g; ++j) {
    const double end = j + 1 < g ? starts[j + 1] : interval.upper;
    level[j] = rho(starts[j]);
    cif_level[j] = cif(starts[j]);
    cum_rho[j + 1] = cum_rho[j] + level[j] * (end - starts[j]);
    cum_rho_f[j + 1] = cum_rho_f[j] + level[j] * cif_level[j] * (end - starts[j]);
  }

  std::vector<double> out(z.size(), 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto& e = z.entry(i);
    if (!e.active || e.jump_time >= interval.upper) continue;
    double from_rho = cum_rho[g];
    double from_rho_f = cum_rho_f[g];
    if (e.jump_time > interval.lower) {
      const auto j = static_cast<std::size_t>(
                         std::upper_bound(starts.begin(), starts.end(), e.jump_time) -
                         starts.begin()) - 1;
      const double offset = e.jump_time - starts[j];
      from_rho = cum_rho[g] - cum_rho[j] - level[j] * offset;
      from_rho_f = cum_rho_f[g] - cum_rho_f[j] - level[j] * cif_level[j] * offset;
    }
    out[i] = (e.level * from_rho - from_rho_f) / e.at_risk;
  }
  return out;
}

PooledZ pool_z(const ZArray& group1, const ZArray& group2, const TestInterval& interval,
               const RhoFunction& rho) {
  PooledZ pooled;
  pooled.n1 = group1.subject_count();
  pooled.n2 = group2.subject_count();
  pooled.integrals = integrate_entries(group1, interval, rho);
  auto second = integrate_entries(group2, interval, rho);
  for (auto& a : second) a = -a;
  pooled.integrals.insert(pooled.integrals.end(), second.begin(), second.end());
  pooled.active.reserve(pooled.integrals.size());
  for (const auto& e : group1.entries()) pooled.active.push_back(e.active ? 1 : 0);
  for (const auto& e : group2.entries()) pooled.active.push_back(e.active ? 1 : 0);
  return pooled;
}

double bootstrap_statistic(const PooledZ& z, std::span<const double> weights, bool centred) {
  const auto m = z.integrals.size();
  if (weights.size() != m) {
    throw InputError("bootstrap_statistic: weight vector length must equal 2n = " +
                     std::to_string(m));
  }
  double weighted = 0.0;
  for (std::size_t i = 0; i < m; ++i) weighted += weights[i] * z.integrals[i];
  if (centred) {
    const double mean =
        std::accumulate(z.integrals.begin(), z.integrals.end(), 0.0) / static_cast<double>(m);
    const double weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    weighted -= weight_sum * mean;
  }
  return std::sqrt(z.scale()) * weighted;
}

BootstrapVariance bootstrap_variance(const PooledZ& z, std::span<const double> v_weights,
                                     bool xi_correction) {
  const auto m = z.integrals.size();
  if (v_weights.size() != m) {
    throw InputError("bootstrap_variance: weight vector length must equal 2n = " +
                     std::to_string(m));
  }
  double first = 0.0;
  double second = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double va = v_weights[i] * z.integrals[i];
    first += va * z.integrals[i];
    second += va;
  }
  const double n = static_cast<double>(z.n1 + z.n2);
  double value = z.scale() * first;
  if (xi_correction) value -= z.scale() / (2.0 * n) * second * second;
  if (value < 0.0) return {0.0, true};
  return {value, false};
}

double bootstrap_critical_value(std::vector<double> replicates, double alpha) {
  const auto b = replicates.size();
  const double exact = (1.0 - alpha) * static_cast<double>(b + 1);
  const auto rank = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  if (rank < 1) return -std::numeric_limits<double>::infinity();
  if (rank > b) return std::numeric_limits<double>::infinity();
  std::nth_element(replicates.begin(), replicates.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   replicates.end());
  return replicates[rank - 1];
}

TestResult test_phi_star(const CountingProcessPanel& group1, const CountingProcessPanel& group2,
                         const TestConfig& config) {
  check_groups(group1, group2);
  const auto& scheme = config.scheme;
  const bool efron = scheme.kind == WeightKind::EfronMultinomial;
  if (!efron && !scheme.is_wild()) {
    throw InputError("resampling test supports Efron or wild (iid) weights, not '" + scheme.name +
                     "'");
  }

  auto result = data_statistics(group1, group2, config);
  result.method = efron ? "efron" : "wild";
  result.B = config.B;

  const auto pooled = pool_z(build_z(group1), build_z(group2), result.interval, config.rho);
  const auto m = pooled.integrals.size();
  std::vector<std::size_t> active_index;
  for (std::size_t i = 0; i < m; ++i) {
    if (pooled.active[i]) active_index.push_back(i);
  }

  const auto role = role_id(efron ? StreamRole::EfronWeights : StreamRole::WildWeights);
  std::vector<double> studentized(config.B, 0.0);
  std::vector<double> variances(config.B, 0.0);
  std::vector<unsigned char> truncated(config.B, 0);

  parallel_for(config.B, config.workers, [&](std::size_t b) {
    Rng rng(derive_seed(config.seed, {role, b}));
    std::vector<double> w(m, 0.0);
    std::vector<double> v(m, 0.0);
    double stat = 0.0;
    BootstrapVariance var;
    if (efron) {
      fill_weights(scheme, rng, w);
      for (std::size_t i = 0; i < m; ++i) v[i] = w[i] + 1.0;
      stat = bootstrap_statistic(pooled, w, true);
      var = bootstrap_variance(pooled, v, true);
    } else {
      // inactive entries are identically 0 and need no multiplier
      std::vector<double> draws(active_index.size());
      if (!draws.empty()) fill_weights(scheme, rng, draws);
      for (std::size_t k = 0; k < draws.size(); ++k) {
        w[active_index[k]] = draws[k];
        v[active_index[k]] = draws[k] * draws[k];
      }
      stat = bootstrap_statistic(pooled, w, false);
      var = bootstrap_variance(pooled, v, false);
    }
    variances[b] = var.value;
    truncated[b] = var.truncated ? 1 : 0;
    studentized[b] = var.value > 0.0 ? stat / std::sqrt(var.value) : 0.0;
  });

  for (std::size_t b = 0; b < config.B; ++b) {
    if (!(variances[b] > 0.0)) ++result.degenerate_replicates;
    if (truncated[b]) ++result.truncated_replicate_variances;
  }
  if (result.degenerate_replicates == config.B) {
    throw NumericalError("all " + std::to_string(config.B) +
                         " bootstrap replicates have V* = 0 (no events in the test interval?)");
  }
  if (result.truncated_replicate_variances > 0) {
    result.warnings.push_back(std::to_string(result.truncated_replicate_variances) +
                              " replicate variances were negative and set to 0");
  }

  result.critical_value = bootstrap_critical_value(studentized, config.alpha);
  const auto exceed = std::count_if(studentized.begin(), studentized.end(),
                                    [&](double t) { return t >= result.studentized; });
  result.p_value = (1.0 + static_cast<double>(exceed)) / (static_cast<double>(config.B) + 1.0);
  result.reject = result.studentized > result.critical_value;
  if (config.keep_replicates) {
    result.replicates = std::move(studentized);
    result.replicate_variances = std::move(variances);
  }
  return result;
}

}  // namespace cifboot

#include "cifboot/estimators.hpp"

#include <algorithm>

#include "cifboot/error.hpp"

namespace cifboot {

namespace {

void check_cause(int cause) {
  if (cause != 1 && cause != 2) throw InputError("cause must be 1 or 2");
}

// Step function from per-grid values, jumping only where the value changes.
StepFunction from_trace(std::span<const double> times, std::span<const double> values,
                        double initial) {
  std::vector<double> jt;
  std::vector<double> jv;
  double current = initial;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (values[k] != current) {
      jt.push_back(times[k]);
      jv.push_back(values[k]);
      current = values[k];
    }
  }
  return StepFunction(initial, std::move(jt), std::move(jv));
}

}  // namespace

EstimatorTrace trace_estimators(const CountingProcessPanel& panel) {
  const auto g = panel.grid_size();
  const auto risk = panel.at_risk();
  const auto d1 = panel.events1();
  const auto d2 = panel.events2();

  EstimatorTrace tr;
  for (auto* v : {&tr.survival_before, &tr.survival, &tr.cif1_before, &tr.cif1, &tr.cif2_before,
                  &tr.cif2, &tr.hazard1_before, &tr.hazard1, &tr.hazard2_before, &tr.hazard2}) {
    v->resize(g);
  }

  double surv = 1.0;
  double f1 = 0.0;
  double f2 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  for (std::size_t k = 0; k < g; ++k) {
    tr.survival_before[k] = surv;
    tr.cif1_before[k] = f1;
    tr.cif2_before[k] = f2;
    tr.hazard1_before[k] = a1;
    tr.hazard2_before[k] = a2;

    const auto y = static_cast<double>(risk[k]);
    const auto d = d1[k] + d2[k];
    if (risk[k] > 0 && d > 0) {
      a1 += static_cast<double>(d1[k]) / y;
      a2 += static_cast<double>(d2[k]) / y;
      if (surv > 0.0) {
        f1 += surv * static_cast<double>(d1[k]) / y;
        f2 += surv * static_cast<double>(d2[k]) / y;
        surv = (d == risk[k]) ? 0.0 : surv * (1.0 - static_cast<double>(d) / y);
      }
    }

    tr.survival[k] = surv;
    tr.cif1[k] = f1;
    tr.cif2[k] = f2;
    tr.hazard1[k] = a1;
    tr.hazard2[k] = a2;
  }
  return tr;
}

StepFunction kaplan_meier(const CountingProcessPanel& panel) {
  const auto tr = trace_estimators(panel);
  return from_trace(panel.times(), tr.survival, 1.0);
}

StepFunction nelson_aalen(const CountingProcessPanel& panel, int cause) {
  check_cause(cause);
  const auto tr = trace_estimators(panel);
  return from_trace(panel.times(), cause == 1 ? tr.hazard1 : tr.hazard2, 0.0);
}

StepFunction aalen_johansen(const CountingProcessPanel& panel, int cause) {
  check_cause(cause);
  const auto tr = trace_estimators(panel);
  return from_trace(panel.times(), cause == 1 ? tr.cif1 : tr.cif2, 0.0);
}

StepFunction sigma_hat(const CountingProcessPanel& panel, int cause) {
  check_cause(cause);
  const auto risk = panel.at_risk();
  const auto d = panel.events(cause);
  std::vector<double> values(panel.grid_size());
  double acc = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (risk[k] > 0 && d[k] > 0) {
      const auto y = static_cast<double>(risk[k]);
      acc += static_cast<double>(d[k]) / (y * y);
    }
    values[k] = acc;
  }
  return from_trace(panel.times(), values, 0.0);
}

CovarianceSurface zeta_hat(const CountingProcessPanel& panel, std::span<const double> grid) {
  if (std::adjacent_find(grid.begin(), grid.end(), std::greater_equal<>()) != grid.end()) {
    throw InputError("zeta_hat: grid must be strictly increasing");
  }
  const auto tr = trace_estimators(panel);
  const auto times = panel.times();
  const auto risk = panel.at_risk();
  const auto d1 = panel.events1();
  const auto d2 = panel.events2();
  const auto n = static_cast<double>(panel.sample_size());

  // Event terms: weight n d_j / Y^2 and integrand level S2(u-) or F1(u-).
  struct Term {
    double time;
    double weight;
    double level;
  };
  std::vector<Term> terms;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (risk[k] == 0) continue;
    const auto y = static_cast<double>(risk[k]);
    if (d1[k] > 0) terms.push_back({times[k], n * static_cast<double>(d1[k]) / (y * y),
                                    1.0 - tr.cif2_before[k]});
    if (d2[k] > 0) terms.push_back({times[k], n * static_cast<double>(d2[k]) / (y * y),
                                    tr.cif1_before[k]});
  }

  const auto cif1 = from_trace(times, tr.cif1, 0.0);
  const auto g = grid.size();
  std::vector<double> f(g);
  for (std::size_t a = 0; a < g; ++a) f[a] = cif1(grid[a]);

  std::vector<double> values(g * g, 0.0);
  for (std::size_t a = 0; a < g; ++a) {
    // Row a covers s1 = grid[a] <= s2 = grid[b]:
    //   sum w (l - F(s1))(l - F(s2)) = sum w (l - F(s1)) l - F(s2) sum w (l - F(s1)).
    double q0 = 0.0;
    double q1 = 0.0;
    double diag = 0.0;
    for (const auto& term : terms) {
      if (term.time > grid[a]) break;
      const double centred = term.level - f[a];
      q0 += term.weight * centred;
      q1 += term.weight * centred * term.level;
      diag += term.weight * centred * centred;
    }
    values[a * g + a] = diag;
    for (std::size_t b = a + 1; b < g; ++b) {
      const double v = q1 - f[b] * q0;
      values[a * g + b] = v;
      values[b * g + a] = v;
    }
  }
  return CovarianceSurface(std::vector<double>(grid.begin(), grid.end()), std::move(values));
}

StepFunction xi_hat(const CountingProcessPanel& panel) {
  const auto tr = trace_estimators(panel);
  std::vector<double> values(panel.grid_size());
  double acc = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double df1 = tr.cif1[k] - tr.cif1_before[k];
    acc += (1.0 - tr.hazard1_before[k] - tr.hazard2_before[k]) * df1;
    values[k] = acc;
  }
  return from_trace(panel.times(), values, 0.0);
}

}  // namespace cifboot

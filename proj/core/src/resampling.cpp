#include "cifboot/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cifboot/error.hpp"
#include "cifboot/estimators.hpp"

namespace cifboot {

WeightScheme WeightScheme::efron() { return {WeightKind::EfronMultinomial, "efron", {}, 1.0, 1.0}; }

WeightScheme WeightScheme::wild_normal() { return {WeightKind::WildNormal, "normal", {}, 1.0, 1.0}; }

WeightScheme WeightScheme::wild_poisson() {
  return {WeightKind::WildPoisson, "poisson", {}, 1.0, 1.0};
}

WeightScheme WeightScheme::wild_custom(std::string name, Sampler sampler) {
  if (!sampler) throw InputError("custom weight scheme needs a sampler");
  return {WeightKind::WildCustomIID, std::move(name), std::move(sampler), 1.0, 1.0};
}

WeightScheme WeightScheme::iid_weighted(std::string name, Sampler eta, double eta_mean,
                                        double eta_sd) {
  if (!eta) throw InputError("iid weighted scheme needs an eta sampler");
  if (!(eta_mean > 0.0)) throw InputError("iid weighted scheme: eta must have positive mean");
  if (!(eta_sd > 0.0)) throw InputError("iid weighted scheme: eta must have positive variance");
  return {WeightKind::IIDWeighted, std::move(name), std::move(eta), eta_mean, eta_sd};
}

WeightScheme WeightScheme::bayesian() { return {WeightKind::Bayesian, "bayesian", {}, 1.0, 1.0}; }

WeightScheme WeightScheme::rademacher() {
  return wild_custom("rademacher", [](Rng& rng) { return (rng() >> 63) ? 1.0 : -1.0; });
}

WeightScheme WeightScheme::from_name(std::string_view name) {
  if (name == "efron") return efron();
  if (name == "normal" || name == "wild") return wild_normal();
  if (name == "poisson") return wild_poisson();
  if (name == "rademacher") return rademacher();
  if (name == "bayesian") return bayesian();
  throw InputError("unknown weight scheme '" + std::string(name) + "'");
}

namespace {

void fill_eta_weights(std::span<double> out, double scale) {
  const double mean = std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(out.size());
  for (auto& w : out) w = (w / mean - 1.0) / scale;
}

}  // namespace

void fill_weights(const WeightScheme& scheme, Rng& rng, std::span<double> out) {
  const auto m = out.size();
  if (m == 0) throw InputError("weight vector length must be at least 1");
  switch (scheme.kind) {
    case WeightKind::EfronMultinomial: {
      std::fill(out.begin(), out.end(), -1.0);
      for (std::size_t k = 0; k < m; ++k) out[rng.below(m)] += 1.0;
      return;
    }
    case WeightKind::WildNormal: {
      std::normal_distribution<double> normal;
      for (auto& w : out) w = normal(rng);
      return;
    }
    case WeightKind::WildPoisson: {
      std::poisson_distribution<int> poisson(1.0);
      for (auto& w : out) w = static_cast<double>(poisson(rng)) - 1.0;
      return;
    }
    case WeightKind::WildCustomIID: {
      for (auto& w : out) w = scheme.sampler(rng);
      return;
    }
    case WeightKind::IIDWeighted: {
      for (auto& w : out) {
        w = scheme.sampler(rng);
        if (!(w > 0.0)) throw InputError("iid weighted scheme: eta draws must be positive");
      }
      fill_eta_weights(out, scheme.eta_sd / scheme.eta_mean);
      return;
    }
    case WeightKind::Bayesian: {
      std::exponential_distribution<double> exponential(1.0);
      for (auto& w : out) w = exponential(rng);
      fill_eta_weights(out, 1.0);
      return;
    }
  }
}

std::vector<double> gen_weights(const WeightScheme& scheme, std::size_t m, Rng& rng) {
  std::vector<double> w(m);
  fill_weights(scheme, rng, w);
  return w;
}

ZArray::ZArray(const CountingProcessPanel& panel) {
  const auto tr = trace_estimators(panel);
  const auto n = panel.sample_size();
  const auto times = panel.times();
  const auto risk = panel.at_risk();
  entries_.resize(2 * n);
  const auto jumps = panel.subject_jumps();
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = jumps[i].time_index;
    const auto y = static_cast<double>(risk[k]);
    if (jumps[i].status == Status::Cause1) {
      entries_[i] = {true, times[k], y, 1.0 - tr.cif2_before[k]};
    } else if (jumps[i].status == Status::Cause2) {
      entries_[n + i] = {true, times[k], y, tr.cif1_before[k]};
    }
  }
  cif1_ = aalen_johansen(panel, 1);
}

double ZArray::value(std::size_t i, double s) const noexcept {
  const auto& e = entries_[i];
  if (!e.active || e.jump_time > s) return 0.0;
  return (e.level - cif1_(s)) / e.at_risk;
}

void ZArray::values_at(double s, std::span<double> out) const {
  if (out.size() != entries_.size()) throw InputError("ZArray::values_at: output size mismatch");
  const double f = cif1_(s);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    out[i] = (e.active && e.jump_time <= s) ? (e.level - f) / e.at_risk : 0.0;
  }
}

double ZArray::mean_at(double s) const {
  const double f = cif1_(s);
  double total = 0.0;
  for (const auto& e : entries_) {
    if (e.active && e.jump_time <= s) total += (e.level - f) / e.at_risk;
  }
  return total / static_cast<double>(entries_.size());
}

ZArray build_z(const CountingProcessPanel& panel) { return ZArray(panel); }

BootstrapDraw wild_process(const ZArray& z, std::span<const double> multipliers,
                           std::span<const double> grid) {
  const auto n = z.subject_count();
  if (multipliers.size() != n) {
    throw InputError("wild_process: expected one multiplier per subject");
  }
  BootstrapDraw draw;
  draw.weights.assign(multipliers.begin(), multipliers.end());
  draw.process_values.reserve(grid.size());
  const double root_n = std::sqrt(static_cast<double>(n));
  for (const double s : grid) {
    const double f = z.cif1()(s);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      // at most one of the two entries of subject i is active
      const auto& e1 = z.entry(i);
      const auto& e2 = z.entry(n + i);
      const auto& e = e1.active ? e1 : e2;
      if (e.active && e.jump_time <= s) total += multipliers[i] * (e.level - f) / e.at_risk;
    }
    draw.process_values.push_back(root_n * total);
  }
  return draw;
}

BootstrapDraw wild_process(const CountingProcessPanel& panel, std::span<const double> multipliers,
                           std::span<const double> grid) {
  return wild_process(build_z(panel), multipliers, grid);
}

BootstrapDraw weighted_process(const ZArray& z, std::span<const double> weights,
                               std::span<const double> grid) {
  const auto m = z.size();
  if (weights.size() != m) {
    throw InputError("weighted_process: weight vector length must equal 2n = " + std::to_string(m));
  }
  BootstrapDraw draw;
  draw.weights.assign(weights.begin(), weights.end());
  draw.process_values.reserve(grid.size());
  const double root_m = std::sqrt(static_cast<double>(m));
  std::vector<double> values(m);
  for (const double s : grid) {
    z.values_at(s, values);
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(m);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) total += weights[i] * (values[i] - mean);
    draw.process_values.push_back(root_m * total);
  }
  return draw;
}

namespace {

// Running mean and variance of per-draw statistics.
class Accumulator {
 public:
  void add(double x) noexcept {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }
  MomentEstimate estimate(std::optional<double> target = std::nullopt) const noexcept {
    const double var = count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
    return {mean_, std::sqrt(var / static_cast<double>(count_)), target};
  }

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace

WeightMomentReport validate_weight_conditions(const WeightScheme& scheme, std::size_t m,
                                              std::size_t draws, Rng& rng) {
  if (m < 1) throw InputError("validate_weight_conditions: m must be at least 1");
  if (draws < 10000) throw InputError("validate_weight_conditions: draws must be at least 10000");

  const bool efron = scheme.kind == WeightKind::EfronMultinomial;
  const double half = static_cast<double>(m) / 2.0;
  Accumulator g2, g3, g5, g6, g7, pair, quad;

  std::vector<double> w(m);
  std::vector<double> c(m);
  for (std::size_t d = 0; d < draws; ++d) {
    fill_weights(scheme, rng, w);
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(m);
    double max_abs = 0.0;
    double sum2 = 0.0;
    double sum4 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      c[i] = w[i] - mean;
      const double c2 = c[i] * c[i];
      max_abs = std::max(max_abs, std::abs(c[i]));
      sum2 += c2;
      sum4 += c2 * c2;
    }
    g2.add(max_abs / std::sqrt(static_cast<double>(m)));
    g3.add(sum2 / static_cast<double>(m));
    g5.add(sum4 / static_cast<double>(m));

    // disjoint index groups are exchangeable copies; average them per draw
    if (m >= 3) {
      double acc = 0.0;
      const auto groups = m / 3;
      for (std::size_t g = 0; g < groups; ++g) {
        acc += c[3 * g] * c[3 * g] * c[3 * g + 1] * c[3 * g + 2];
      }
      g6.add(half * acc / static_cast<double>(groups));
    }
    if (m >= 4) {
      double acc = 0.0;
      const auto groups = m / 4;
      for (std::size_t g = 0; g < groups; ++g) {
        acc += c[4 * g] * c[4 * g + 1] * c[4 * g + 2] * c[4 * g + 3];
      }
      g7.add(half * half * acc / static_cast<double>(groups));
    }
    if (efron && m >= 2) {
      double acc = 0.0;
      const auto groups = m / 2;
      for (std::size_t g = 0; g < groups; ++g) acc += (w[2 * g] + 1.0) * (w[2 * g + 1] + 1.0);
      pair.add(acc / static_cast<double>(groups));
    }
    if (efron && m >= 4) {
      double acc = 0.0;
      const auto groups = m / 4;
      for (std::size_t g = 0; g < groups; ++g) {
        acc += w[4 * g] * w[4 * g + 1] * w[4 * g + 2] * w[4 * g + 3];
      }
      quad.add(acc / static_cast<double>(groups));
    }
  }

  WeightMomentReport report;
  report.scheme = scheme.name;
  report.m = m;
  report.draws = draws;
  report.max_centered = g2.estimate();
  report.centered_variance = g3.estimate(1.0);
  report.fourth_moment = g5.estimate();
  if (m >= 3) report.cross_211 = g6.estimate();
  if (m >= 4) report.cross_1111 = g7.estimate();
  if (efron && m >= 2) report.multinomial_pair = pair.estimate(1.0 - 1.0 / static_cast<double>(m));
  if (efron && m >= 4) {
    const double n = half;
    report.multinomial_quad = quad.estimate(3.0 / (4.0 * n * n) - 3.0 / (4.0 * n * n * n));
  }
  return report;
}

}  // namespace cifboot

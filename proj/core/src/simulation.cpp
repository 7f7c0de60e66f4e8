#include "cifboot/simulation.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "cifboot/error.hpp"
#include "cifboot/parallel.hpp"
#include "cifboot/two_sample.hpp"

namespace cifboot {

HazardModel HazardModel::group1_exp() { return HazardModel{}; }

HazardModel HazardModel::constant_pair(double c) {
  if (!(c >= 0.0 && c <= 1.0)) throw InputError("constant hazard pair requires 0 <= c <= 1");
  HazardModel m;
  m.kind = Kind::ConstantPair;
  m.c = c;
  return m;
}

HazardModel HazardModel::piecewise(std::vector<double> breaks, std::vector<double> hazard1,
                                   std::vector<double> hazard2) {
  if (breaks.empty() || breaks.front() != 0.0) {
    throw InputError("piecewise hazards: first segment must start at 0");
  }
  if (hazard1.size() != breaks.size() || hazard2.size() != breaks.size()) {
    throw InputError("piecewise hazards: one rate per segment and cause");
  }
  if (std::adjacent_find(breaks.begin(), breaks.end(), std::greater_equal<>()) != breaks.end()) {
    throw InputError("piecewise hazards: segment starts must increase");
  }
  auto bad = [](double h) { return !(h >= 0.0) || !std::isfinite(h); };
  if (std::any_of(hazard1.begin(), hazard1.end(), bad) ||
      std::any_of(hazard2.begin(), hazard2.end(), bad)) {
    throw InputError("piecewise hazards must be finite and nonnegative");
  }
  HazardModel m;
  m.kind = Kind::PiecewiseConstant;
  m.breaks = std::move(breaks);
  m.hazard1 = std::move(hazard1);
  m.hazard2 = std::move(hazard2);
  return m;
}

double HazardModel::hazard(int cause, double t) const {
  switch (kind) {
    case Kind::Group1Exp:
      return cause == 1 ? std::exp(-t) : 1.0 - std::exp(-t);
    case Kind::ConstantPair:
      return cause == 1 ? c : 2.0 - c;
    case Kind::PiecewiseConstant: {
      const auto j = static_cast<std::size_t>(
                         std::upper_bound(breaks.begin(), breaks.end(), t) - breaks.begin()) - 1;
      return cause == 1 ? hazard1[j] : hazard2[j];
    }
  }
  return 0.0;
}

std::string HazardModel::describe() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::Group1Exp:
      out << "group1_exp";
      break;
    case Kind::ConstantPair:
      out << "constant_pair(c=" << c << ")";
      break;
    case Kind::PiecewiseConstant:
      out << "piecewise(" << breaks.size() << " segments)";
      break;
  }
  return out.str();
}

namespace {

double draw_event_time(const HazardModel& model, Rng& rng) {
  std::exponential_distribution<double> unit(1.0);
  switch (model.kind) {
    case HazardModel::Kind::Group1Exp:
      return unit(rng);  // all-cause hazard is 1
    case HazardModel::Kind::ConstantPair:
      return unit(rng) / 2.0;  // all-cause hazard is 2
    case HazardModel::Kind::PiecewiseConstant: {
      double target = unit(rng);
      for (std::size_t j = 0; j < model.breaks.size(); ++j) {
        const double rate = model.hazard1[j] + model.hazard2[j];
        const bool last = j + 1 == model.breaks.size();
        const double length = last ? std::numeric_limits<double>::infinity()
                                   : model.breaks[j + 1] - model.breaks[j];
        if (rate > 0.0 && target <= rate * length) return model.breaks[j] + target / rate;
        if (!last) target -= rate * length;
      }
      return std::numeric_limits<double>::infinity();
    }
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace

Observation draw_subject(const HazardModel& model, double censor_rate, Rng& rng) {
  if (!(censor_rate >= 0.0)) throw InputError("censoring rate must be nonnegative");
  const double t = draw_event_time(model, rng);
  Status cause = Status::Censored;
  if (std::isfinite(t)) {
    const double h1 = model.hazard(1, t);
    const double h2 = model.hazard(2, t);
    cause = rng.uniform() * (h1 + h2) < h1 ? Status::Cause1 : Status::Cause2;
  }
  double c = std::numeric_limits<double>::infinity();
  if (censor_rate > 0.0) c = std::exponential_distribution<double>(censor_rate)(rng);
  if (!std::isfinite(t) && !std::isfinite(c)) {
    throw InputError("hazard model has zero total hazard in its last segment and no censoring");
  }
  if (c < t) return Observation{0.0, c, Status::Censored};
  return Observation{0.0, t, cause};
}

Sample simulate_sample(const HazardModel& model, std::size_t n, double censor_rate, Rng& rng) {
  Sample sample;
  sample.observations.reserve(n);
  for (std::size_t i = 0; i < n; ++i) sample.observations.push_back(draw_subject(model, censor_rate, rng));
  return sample;
}

void ScenarioConfig::validate() const {
  if (n1 < 2 || n2 < 2) throw InputError("scenario sample sizes must be at least 2");
  if (n_sim < 1) throw InputError("scenario needs at least one simulation run");
  if (B < 1) throw InputError("scenario needs at least one bootstrap replicate");
  if (!(censor1 >= 0.0) || !(censor2 >= 0.0)) throw InputError("censoring rates must be nonnegative");
  if (!(t1 >= 0.0 && t1 < t2)) throw InputError("scenario interval requires 0 <= t1 < t2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
}

namespace {

std::uint64_t suite_key(std::string_view suite) {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
  for (const char ch : suite) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

MonteCarloReport run_scenario(const ScenarioConfig& config, std::size_t workers) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto key = suite_key(config.suite);

  struct Outcome {
    std::array<unsigned char, 3> reject{};
    std::array<unsigned char, 3> error{};
    unsigned char truncated = 0;
  };
  std::vector<Outcome> outcomes(config.n_sim);

  parallel_for(config.n_sim, workers, [&](std::size_t d) {
    Rng data_rng(derive_seed(config.seed, {key, config.cell, d, role_id(StreamRole::Data)}));
    const auto panel1 = compile_panel(simulate_sample(config.model1, config.n1, config.censor1, data_rng));
    const auto panel2 = compile_panel(simulate_sample(config.model2, config.n2, config.censor2, data_rng));

    TestConfig test;
    test.t1 = config.t1;
    test.t2 = config.t2;
    test.alpha = config.alpha;
    test.B = config.B;
    test.seed = derive_seed(config.seed, {key, config.cell, d, role_id(StreamRole::Weights)});
    test.clip_to_support = config.clip_to_support;

    auto& out = outcomes[d];
    auto run = [&](std::size_t slot, auto&& fn) {
      try {
        const auto result = fn();
        out.reject[slot] = result.reject ? 1 : 0;
        if (slot == 0 && result.interval.truncated) out.truncated = 1;
      } catch (const InputError&) {
        out.error[slot] = 1;
      } catch (const NumericalError&) {
        out.error[slot] = 1;
      }
    };
    run(0, [&] { return test_phi_n(panel1, panel2, test); });
    test.scheme = WeightScheme::wild_normal();
    run(1, [&] { return test_phi_star(panel1, panel2, test); });
    test.scheme = WeightScheme::efron();
    run(2, [&] { return test_phi_star(panel1, panel2, test); });
  });

  MonteCarloReport report;
  report.config = config;
  const std::array<const char*, 3> names{"phi_n", "phi_W", "phi_E"};
  for (std::size_t k = 0; k < 3; ++k) {
    auto& tally = report.methods[k];
    tally.method = names[k];
    for (const auto& o : outcomes) {
      tally.rejections += o.reject[k];
      tally.errors += o.error[k];
    }
    tally.rate = static_cast<double>(tally.rejections) / static_cast<double>(config.n_sim);
    tally.standard_error =
        std::sqrt(tally.rate * (1.0 - tally.rate) / static_cast<double>(config.n_sim));
  }
  for (const auto& o : outcomes) report.truncated_intervals += o.truncated;
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

Suite parse_suite(std::string_view name) {
  if (name == "table1") return Suite::Table1;
  if (name == "table2") return Suite::Table2;
  throw InputError("unknown suite '" + std::string(name) + "' (expected table1 or table2)");
}

std::string_view suite_name(Suite suite) { return suite == Suite::Table1 ? "table1" : "table2"; }

namespace {

bool near(double a, double b) { return std::abs(a - b) <= 1e-9; }

bool clause_matches(const ScenarioConfig& cell, std::string_view clause) {
  const auto trimmed = [](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
  };
  clause = trimmed(clause);
  if (clause.empty()) return true;
  const auto eq = clause.find('=');
  if (eq == std::string_view::npos) throw InputError("cell filter '" + std::string(clause) + "' lacks '='");
  const auto key = trimmed(clause.substr(0, eq));
  const auto text = trimmed(clause.substr(eq + 1));
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw InputError("cell filter value '" + std::string(text) + "' is not a number");
  }
  const auto n1 = static_cast<double>(cell.n1);
  const auto n2 = static_cast<double>(cell.n2);
  if (key == "c") return cell.model2.kind == HazardModel::Kind::ConstantPair && near(cell.model2.c, value);
  if (key == "n") return near(n1, value) && near(n2, value);
  if (key == "n1") return near(n1, value);
  if (key == "n2") return near(n2, value);
  if (key == "l") return near(cell.censor1, value) && near(cell.censor2, value);
  if (key == "l1") return near(cell.censor1, value);
  if (key == "l2") return near(cell.censor2, value);
  throw InputError("unknown cell filter key '" + std::string(key) + "'");
}

}  // namespace

bool cell_matches(const ScenarioConfig& cell, std::string_view filter) {
  if (filter.find_first_not_of(' ') == std::string_view::npos) return true;
  std::size_t start = 0;
  while (start <= filter.size()) {
    const auto stop = std::min(filter.find(';', start), filter.size());
    const auto alternative = filter.substr(start, stop - start);
    bool all = true;
    std::size_t a = 0;
    while (a <= alternative.size()) {
      const auto b = std::min(alternative.find(',', a), alternative.size());
      if (!clause_matches(cell, alternative.substr(a, b - a))) all = false;
      a = b + 1;
    }
    if (all) return true;
    start = stop + 1;
  }
  return false;
}

std::vector<ScenarioConfig> suite_scenarios(Suite suite, const SuiteOverrides& overrides) {
  std::vector<ScenarioConfig> cells;
  auto add = [&](double c, std::size_t n1, std::size_t n2, double l1, double l2) {
    ScenarioConfig cfg;
    cfg.suite = std::string(suite_name(suite));
    cfg.cell = cells.size();
    cfg.model1 = HazardModel::group1_exp();
    cfg.model2 = HazardModel::constant_pair(c);
    cfg.n1 = n1;
    cfg.n2 = n2;
    cfg.censor1 = l1;
    cfg.censor2 = l2;
    if (overrides.n_sim) cfg.n_sim = *overrides.n_sim;
    if (overrides.B) cfg.B = *overrides.B;
    if (overrides.seed) cfg.seed = *overrides.seed;
    if (overrides.alpha) cfg.alpha = *overrides.alpha;
    if (overrides.clip_to_support) cfg.clip_to_support = *overrides.clip_to_support;
    cells.push_back(std::move(cfg));
  };

  using Sizes = std::pair<std::size_t, std::size_t>;
  using Rates = std::pair<double, double>;
  if (suite == Suite::Table1) {
    const std::array<Rates, 5> censoring{{{0, 0}, {0.5, 0.5}, {0.5, 1}, {1, 0.5}, {1, 1}}};
    const std::array<Sizes, 3> sizes{{{50, 50}, {50, 100}, {100, 100}}};
    for (const auto& [l1, l2] : censoring) {
      for (const auto& [n1, n2] : sizes) add(1.0, n1, n2, l1, l2);
    }
  } else {
    const std::array<Sizes, 2> sizes{{{50, 50}, {100, 100}}};
    const std::array<Rates, 2> censoring{{{0, 0}, {1, 1}}};
    for (int tenth = 9; tenth >= 1; --tenth) {
      for (const auto& [n1, n2] : sizes) {
        for (const auto& [l1, l2] : censoring) add(tenth / 10.0, n1, n2, l1, l2);
      }
    }
  }

  std::vector<ScenarioConfig> selected;
  for (auto& cell : cells) {
    if (cell_matches(cell, overrides.cells)) selected.push_back(std::move(cell));
  }
  return selected;
}

std::vector<MonteCarloReport> table_suite(Suite suite, const SuiteOverrides& overrides,
                                          std::size_t workers) {
  std::vector<MonteCarloReport> reports;
  for (const auto& cell : suite_scenarios(suite, overrides)) {
    reports.push_back(run_scenario(cell, workers));
  }
  return reports;
}

}  // namespace cifboot

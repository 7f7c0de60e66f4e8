#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cifboot/data_model.hpp"
#include "cifboot/rng.hpp"

namespace cifboot {

/// Cause-specific hazard pair (alpha_1, alpha_2) of one group.
struct HazardModel {
  enum class Kind {
    Group1Exp,          // alpha_1 = exp(-u), alpha_2 = 1 - exp(-u)
    ConstantPair,       // alpha_1 = c, alpha_2 = 2 - c
    PiecewiseConstant,  // per-segment rates, last segment open-ended
  };

  Kind kind = Kind::Group1Exp;
  double c = 1.0;
  std::vector<double> breaks;  // segment starts, breaks[0] == 0
  std::vector<double> hazard1;
  std::vector<double> hazard2;

  static HazardModel group1_exp();
  /// Requires 0 <= c <= 1.
  static HazardModel constant_pair(double c);
  static HazardModel piecewise(std::vector<double> breaks, std::vector<double> hazard1,
                               std::vector<double> hazard2);

  double hazard(int cause, double t) const;
  std::string describe() const;
};

/// Event time by inverting the all-cause cumulative hazard, cause by
/// alpha_1(T) / (alpha_1 + alpha_2)(T), independent Exp(censor_rate)
/// censoring (none when censor_rate == 0). Entry is 0.
Observation draw_subject(const HazardModel& model, double censor_rate, Rng& rng);
Sample simulate_sample(const HazardModel& model, std::size_t n, double censor_rate, Rng& rng);

struct ScenarioConfig {
  std::string suite;      // "table1", "table2" or free text
  std::size_t cell = 0;   // position in the suite's full grid; part of the seed path
  HazardModel model1 = HazardModel::group1_exp();
  HazardModel model2 = HazardModel::constant_pair(1.0);
  std::size_t n1 = 50;
  std::size_t n2 = 50;
  double censor1 = 0.0;
  double censor2 = 0.0;
  double t1 = 0.0;
  double t2 = 1.5;
  double alpha = 0.05;
  std::size_t n_sim = 1000;
  std::size_t B = 999;
  std::uint64_t seed = 1;
  bool clip_to_support = true;

  void validate() const;
};

struct MethodTally {
  std::string method;
  std::size_t rejections = 0;
  std::size_t errors = 0;  // datasets where the test threw; counted as retained
  double rate = 0.0;
  double standard_error = 0.0;
};

/// Rejection frequencies of phi_n, phi_n^W, phi_n^E (in that order).
struct MonteCarloReport {
  ScenarioConfig config;
  std::array<MethodTally, 3> methods;
  std::size_t truncated_intervals = 0;
  double runtime_seconds = 0.0;
};

/// Seeds depend only on (seed, suite, cell, dataset index), so the report is
/// identical for every worker count.
MonteCarloReport run_scenario(const ScenarioConfig& config, std::size_t workers = 1);

enum class Suite { Table1, Table2 };

Suite parse_suite(std::string_view name);
std::string_view suite_name(Suite suite);

struct SuiteOverrides {
  std::optional<std::size_t> n_sim;
  std::optional<std::size_t> B;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::optional<bool> clip_to_support;
  /// Conjunctions of key=value (keys c, n, n1, n2, l, l1, l2) joined by ',';
  /// alternatives separated by ';'. Empty selects every cell.
  std::string cells;
};

bool cell_matches(const ScenarioConfig& cell, std::string_view filter);

/// Table 1: (n1,n2) x censoring at c = 1 (15 cells). Table 2: c = 0.9..0.1 x
/// (n1,n2) x censoring (36 cells).
std::vector<ScenarioConfig> suite_scenarios(Suite suite, const SuiteOverrides& overrides = {});
std::vector<MonteCarloReport> table_suite(Suite suite, const SuiteOverrides& overrides = {},
                                          std::size_t workers = 1);

}  // namespace cifboot

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cifboot/data_model.hpp"
#include "cifboot/rng.hpp"
#include "cifboot/step_function.hpp"

namespace cifboot {

enum class WeightKind {
  EfronMultinomial,  // m_i - 1, (m_1..m_m) ~ Mult(m, 1/m)
  WildNormal,        // iid N(0, 1)
  WildPoisson,       // iid Poisson(1) - 1
  WildCustomIID,     // iid draws from a user sampler (mean 0, variance 1)
  IIDWeighted,       // (eta_i / mean(eta) - 1) / C, C = sd(eta) / E(eta)
  Bayesian,          // IIDWeighted with eta ~ Exp(1), C = 1
};

using Sampler = std::function<double(Rng&)>;

struct WeightScheme {
  WeightKind kind = WeightKind::EfronMultinomial;
  std::string name = "efron";
  Sampler sampler;  // multiplier for WildCustomIID, eta for IIDWeighted
  double eta_mean = 1.0;
  double eta_sd = 1.0;

  static WeightScheme efron();
  static WeightScheme wild_normal();
  static WeightScheme wild_poisson();
  static WeightScheme wild_custom(std::string name, Sampler sampler);
  /// Throws InputError unless eta_mean > 0 and eta_sd > 0.
  static WeightScheme iid_weighted(std::string name, Sampler eta, double eta_mean, double eta_sd);
  static WeightScheme bayesian();
  static WeightScheme rademacher();

  /// efron | normal | poisson | rademacher | bayesian
  static WeightScheme from_name(std::string_view name);

  /// Row-wise iid multipliers that need no centering.
  bool is_wild() const noexcept {
    return kind == WeightKind::WildNormal || kind == WeightKind::WildPoisson ||
           kind == WeightKind::WildCustomIID;
  }
};

/// Writes one weight vector of length out.size() drawn from `scheme`.
void fill_weights(const WeightScheme& scheme, Rng& rng, std::span<double> out);
std::vector<double> gen_weights(const WeightScheme& scheme, std::size_t m, Rng& rng);

/// Per-subject integrands of the Aalen-Johansen process.
///
/// Entries [0, n) hold the cause-1 processes of subjects 0..n-1, entries
/// [n, 2n) the cause-2 processes. An active entry with jump at u, at-risk
/// count Y(u) and level l (S2_hat(u-) for cause 1, F1_hat(u-) for cause 2)
/// evaluates to 1(u <= s) (l - F1_hat(s)) / Y(u). Inactive entries are 0.
class ZArray {
 public:
  struct Entry {
    bool active = false;
    double jump_time = 0.0;
    double at_risk = 1.0;
    double level = 0.0;
  };

  explicit ZArray(const CountingProcessPanel& panel);

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t subject_count() const noexcept { return entries_.size() / 2; }
  const Entry& entry(std::size_t i) const noexcept { return entries_[i]; }
  std::span<const Entry> entries() const noexcept { return entries_; }
  const StepFunction& cif1() const noexcept { return cif1_; }

  double value(std::size_t i, double s) const noexcept;
  /// All 2n entries at time s.
  void values_at(double s, std::span<double> out) const;
  double mean_at(double s) const;

 private:
  std::vector<Entry> entries_;
  StepFunction cif1_;
};

ZArray build_z(const CountingProcessPanel& panel);

struct BootstrapDraw {
  std::vector<double> weights;
  std::vector<double> process_values;
};

/// sqrt(n) sum_i G_i Z_i(s) with one multiplier per subject, used for that
/// subject's single jump.
BootstrapDraw wild_process(const ZArray& z, std::span<const double> multipliers,
                           std::span<const double> grid);
BootstrapDraw wild_process(const CountingProcessPanel& panel, std::span<const double> multipliers,
                           std::span<const double> grid);

/// sqrt(2n) sum_{i <= 2n} w_i (Z_i(s) - Zbar(s)).
BootstrapDraw weighted_process(const ZArray& z, std::span<const double> weights,
                               std::span<const double> grid);

struct MomentEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::optional<double> target;
};

/// Monte Carlo diagnostics for the weight regularity conditions.
struct WeightMomentReport {
  std::string scheme;
  std::size_t m = 0;
  std::size_t draws = 0;
  MomentEstimate max_centered;       // m^{-1/2} max_i |w_i - wbar|
  MomentEstimate centered_variance;  // (1/m) sum (w_i - wbar)^2, limit 1
  MomentEstimate fourth_moment;      // E (w_1 - wbar)^4
  std::optional<MomentEstimate> cross_211;   // (m/2) E (w1-wbar)^2 (w2-wbar)(w3-wbar)
  std::optional<MomentEstimate> cross_1111;  // (m/2)^2 E prod_{i<=4} (wi-wbar)
  // Efron only: exact multinomial identities with n = m/2.
  std::optional<MomentEstimate> multinomial_pair;  // E m1 m2 = 1 - 1/(2n)
  std::optional<MomentEstimate> multinomial_quad;  // E prod (mi-1) = 3/(4n^2) - 3/(4n^3)
};

/// Requires draws >= 10^4.
WeightMomentReport validate_weight_conditions(const WeightScheme& scheme, std::size_t m,
                                              std::size_t draws, Rng& rng);

}  // namespace cifboot

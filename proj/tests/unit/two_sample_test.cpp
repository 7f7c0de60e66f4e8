#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "cifboot/error.hpp"
#include "cifboot/estimators.hpp"
#include "cifboot/simulation.hpp"
#include "cifboot/two_sample.hpp"
#include "support/fixtures.hpp"
#include "support/oracle.hpp"

using namespace cifboot;

namespace {

TestConfig interval(double t1, double t2) {
  TestConfig c;
  c.t1 = t1;
  c.t2 = t2;
  return c;
}

/// Midpoint rule on a lattice containing every breakpoint: exact for step
/// functions, and independent of the segment bookkeeping under test.
double midpoint_statistic(const Sample& a, const Sample& b, double t1, double t2, double h,
                          const std::function<double(double)>& rho) {
  double total = 0.0;
  for (double s = t1 + h / 2; s < t2; s += h) {
    const double d = oracle::naive_estimates(a.observations, s).cif1 -
                     oracle::naive_estimates(b.observations, s).cif1;
    total += rho(s) * d * h;
  }
  const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());
  return std::sqrt(n1 * n2 / (n1 + n2)) * total;
}

std::pair<CountingProcessPanel, CountingProcessPanel> null_pair(std::size_t n1, std::size_t n2,
                                                               double lambda, std::uint64_t seed) {
  Rng rng(seed);
  auto s1 = simulate_sample(HazardModel::group1_exp(), n1, lambda, rng);
  auto s2 = simulate_sample(HazardModel::constant_pair(1.0), n2, lambda, rng);
  return {compile_panel(s1), compile_panel(s2)};
}

}  // namespace

TEST_SUITE("two_sample") {
  TEST_CASE("integral statistic: identical samples give 0") {
    const auto p = compile_panel(fixtures::simulated(HazardModel::group1_exp(), 30, 0.5, 2));
    CHECK(integral_statistic(p, p, interval(0, 1.5)) == 0.0);
    const auto r = test_phi_n(p, p, interval(0, 1.5));
    CHECK(r.statistic == 0.0);
    CHECK_FALSE(r.reject);
  }

  TEST_CASE("integral statistic: regression value against the midpoint oracle") {
    const auto a = fixtures::three_subjects();
    const auto b = fixtures::sample({{10, 0}});
    const double t = integral_statistic(compile_panel(a), compile_panel(b), interval(0, 3));
    const double oracle_value = midpoint_statistic(a, b, 0, 3, 1.0 / 64, [](double) { return 1.0; });
    CHECK(t == doctest::Approx(oracle_value).epsilon(1e-13));
    CHECK(t == doctest::Approx(std::sqrt(0.75) * 2.0 / 3.0).epsilon(1e-14));
  }

  TEST_CASE("integral statistic with a piecewise rho and a sign check") {
    const auto a = fixtures::simulated(HazardModel::group1_exp(), 25, 0.0, 5);
    const auto b = fixtures::simulated(HazardModel::constant_pair(0.4), 35, 0.0, 6);
    auto cfg = interval(0.25, 1.25);
    cfg.rho = RhoFunction(1.0, {0.5, 1.0}, {3.0, 0.5});
    cfg.clip_to_support = false;
    const auto t = integral_statistic(compile_panel(a), compile_panel(b), cfg);
    // midpoint rule with a fine step; breakpoints of the data are not on the lattice
    const double approx = midpoint_statistic(a, b, 0.25, 1.25, 1e-5, [](double s) {
      return s < 0.5 ? 1.0 : (s < 1.0 ? 3.0 : 0.5);
    });
    CHECK(t == doctest::Approx(approx).epsilon(1e-3));

    // F1 of group 1 dominates group 2's when group 2 has no cause-1 events
    const auto none = fixtures::sample({{0.3, 2}, {0.7, 0}, {2.0, 2}});
    CHECK(integral_statistic(compile_panel(a), compile_panel(none), interval(0, 1.5)) >= 0.0);
  }

  TEST_CASE("variance: double-sum and pooled-Z routes agree, nonnegative") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto [p1, p2] = null_pair(15 + seed, 20, seed % 2 ? 0.5 : 0.0, seed);
      auto cfg = interval(0.1, 1.5);
      cfg.clip_to_support = false;
      const double v = variance_vn(p1, p2, cfg);
      CHECK(v >= 0.0);
      const auto pooled = pool_z(build_z(p1), build_z(p2), TestInterval{0.1, 1.5, false}, cfg.rho);
      double sq = 0.0;
      for (const double a : pooled.integrals) sq += a * a;
      CHECK(v == doctest::Approx(pooled.scale() * sq).epsilon(1e-10));
    }
  }

  TEST_CASE("variance: midpoint double sum of the surface for the hand panel") {
    const auto p1 = compile_panel(fixtures::three_subjects());
    const auto p2 = compile_panel(fixtures::sample({{10, 0}}));
    const double h = 1.0 / 16;
    std::vector<double> mids;
    for (double s = h / 2; s < 3; s += h) mids.push_back(s);
    const auto z1 = zeta_hat(p1, mids);
    double total = 0.0;
    for (std::size_t a = 0; a < mids.size(); ++a) {
      for (std::size_t b = 0; b < mids.size(); ++b) total += z1.at(a, b) * h * h;
    }
    CHECK(variance_vn(p1, p2, interval(0, 3)) == doctest::Approx(0.25 * total).epsilon(1e-12));
  }

  TEST_CASE("eventless data: V = 0, studentized 0, retain, bootstrap error") {
    const auto p1 = compile_panel(fixtures::sample({{1, 0}, {2, 0}}));
    const auto p2 = compile_panel(fixtures::sample({{1.5, 0}, {3, 0}}));
    CHECK(variance_vn(p1, p2, interval(0, 1.5)) == 0.0);
    const auto r = test_phi_n(p1, p2, interval(0, 1.5));
    CHECK(r.degenerate_variance);
    CHECK(r.studentized == 0.0);
    CHECK_FALSE(r.reject);
    CHECK_FALSE(r.warnings.empty());
    CHECK_THROWS_AS(test_phi_star(p1, p2, interval(0, 1.5)), NumericalError);
  }

  TEST_CASE("effective interval clipping") {
    const auto p1 = compile_panel(fixtures::sample({{0.4, 1}, {1.0, 2}}));
    const auto p2 = compile_panel(fixtures::sample({{0.5, 1}, {3.0, 0}}));
    const auto iv = effective_interval(p1, p2, interval(0, 1.5));
    CHECK(iv.truncated);
    CHECK(iv.upper == 1.0);
    CHECK_THROWS_AS(effective_interval(p1, p2, interval(1.2, 1.5)), InputError);
    auto keep = interval(0, 1.5);
    keep.clip_to_support = false;
    CHECK_FALSE(effective_interval(p1, p2, keep).truncated);
    const auto r = test_phi_n(p1, p2, interval(0, 1.5));
    CHECK(r.interval.truncated);
    CHECK_FALSE(r.warnings.empty());
  }

  TEST_CASE("config validation") {
    const auto p = compile_panel(fixtures::three_subjects());
    CHECK_THROWS_AS(test_phi_n(p, p, interval(1, 1)), InputError);
    auto bad_alpha = interval(0, 1);
    bad_alpha.alpha = 1.0;
    CHECK_THROWS_AS(test_phi_n(p, p, bad_alpha), InputError);
    auto bad_b = interval(0, 1);
    bad_b.B = 0;
    CHECK_THROWS_AS(test_phi_star(p, p, bad_b), InputError);
    CHECK_THROWS_AS(RhoFunction(1.0, {1.0}, {0.0}), InputError);
    auto bayes = interval(0, 1);
    bayes.scheme = WeightScheme::bayesian();
    CHECK_THROWS_AS(test_phi_star(p, p, bayes), InputError);
  }

  TEST_CASE("bootstrap statistic and variance: closed forms") {
    const auto [p1, p2] = null_pair(20, 30, 0.0, 44);
    const auto pooled = pool_z(build_z(p1), build_z(p2), TestInterval{0, 1.5, false}, RhoFunction{});
    const auto m = pooled.integrals.size();
    REQUIRE(m == 100);
    CHECK(std::abs(bootstrap_statistic(pooled, std::vector<double>(m, 3.0), true)) <= 1e-12);
    CHECK(bootstrap_statistic(pooled, std::vector<double>(m, 0.0), true) == 0.0);
    CHECK(bootstrap_variance(pooled, std::vector<double>(m, 0.0), true).value == 0.0);
    CHECK_THROWS_AS(bootstrap_statistic(pooled, std::vector<double>(m - 1, 1.0), true), InputError);
    CHECK_THROWS_AS(bootstrap_variance(pooled, std::vector<double>(m + 1, 1.0), true), InputError);

    PooledZ single;
    single.n1 = 3;
    single.n2 = 2;
    single.integrals.assign(10, 0.0);
    single.active.assign(10, 0);
    single.integrals[4] = 0.7;
    single.active[4] = 1;
    const double n = 5.0;
    const double expected = (6.0 / n) * (1.0 - 1.0 / (2 * n)) * 0.49;
    CHECK(bootstrap_variance(single, std::vector<double>(10, 1.0), true).value ==
          doctest::Approx(expected).epsilon(1e-14));
  }

  TEST_CASE("critical value rank") {
    std::vector<double> reps(999);
    std::iota(reps.begin(), reps.end(), 1.0);
    std::reverse(reps.begin(), reps.end());
    CHECK(bootstrap_critical_value(reps, 0.05) == 950.0);
    CHECK(std::isinf(bootstrap_critical_value(std::vector<double>(10, 1.0), 0.05)));
    CHECK(bootstrap_critical_value({3.0, 1.0, 2.0}, 0.5) == 2.0);
  }

  TEST_CASE("result invariants, antisymmetry and rho scaling") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      Rng rng(seed);
      const auto s1 = simulate_sample(HazardModel::group1_exp(), 40, 0.5, rng);
      const auto s2 = simulate_sample(HazardModel::constant_pair(0.6), 35, 0.5, rng);
      const auto p1 = compile_panel(s1), p2 = compile_panel(s2);
      auto cfg = interval(0, 1.5);
      cfg.B = 199;
      cfg.seed = seed;
      cfg.keep_replicates = true;

      CHECK(integral_statistic(p2, p1, cfg) == -integral_statistic(p1, p2, cfg));
      CHECK(variance_vn(p2, p1, cfg) == variance_vn(p1, p2, cfg));

      for (const bool efron : {true, false}) {
        cfg.scheme = efron ? WeightScheme::efron() : WeightScheme::wild_normal();
        cfg.rho = RhoFunction{};
        const auto base = test_phi_star(p1, p2, cfg);
        CHECK(base.p_value > 0.0);
        CHECK(base.p_value <= 1.0);
        CHECK(base.reject == (base.studentized > base.critical_value));
        CHECK(base.replicates.size() == cfg.B);

        cfg.rho = RhoFunction::constant(4.0);
        const auto scaled = test_phi_star(p1, p2, cfg);
        CHECK(scaled.statistic == 4.0 * base.statistic);
        CHECK(scaled.studentized == base.studentized);
        CHECK(scaled.replicates == base.replicates);
        CHECK(scaled.reject == base.reject);

        cfg.rho = RhoFunction::constant(0.37);
        const auto odd = test_phi_star(p1, p2, cfg);
        CHECK(odd.studentized == doctest::Approx(base.studentized).epsilon(1e-12));
        CHECK(odd.reject == base.reject);
      }
      cfg.rho = RhoFunction{};
      const auto asym = test_phi_n(p1, p2, cfg);
      CHECK(asym.reject == (asym.studentized > asym.critical_value));
      CHECK(std::abs(asym.p_value - (1.0 - oracle::normal_cdf(asym.studentized))) <= 1e-12);
      cfg.rho = RhoFunction(1.0, {0.5}, {2.0});
      const auto a1 = test_phi_n(p1, p2, cfg);
      cfg.rho = RhoFunction(4.0, {0.5}, {8.0});
      const auto a4 = test_phi_n(p1, p2, cfg);
      CHECK(a4.studentized == a1.studentized);
      CHECK(a4.reject == a1.reject);
    }
  }

  TEST_CASE("bootstrap results do not depend on the worker count") {
    const auto [p1, p2] = null_pair(50, 60, 0.5, 71);
    auto cfg = interval(0, 1.5);
    cfg.B = 499;
    cfg.seed = 2;
    cfg.keep_replicates = true;
    for (const auto& scheme : {WeightScheme::efron(), WeightScheme::wild_normal(), WeightScheme::wild_poisson()}) {
      cfg.scheme = scheme;
      cfg.workers = 1;
      const auto a = test_phi_star(p1, p2, cfg);
      cfg.workers = 3;
      const auto b = test_phi_star(p1, p2, cfg);
      CHECK(a.replicates == b.replicates);
      CHECK(a.critical_value == b.critical_value);
      CHECK(a.p_value == b.p_value);
    }
  }

  TEST_CASE("large-sample variances against the quadrature oracle (n = 2000 per group)") {
    const auto g1 = oracle::Group::exponential();
    const auto g2 = oracle::Group::constant(1.0);
    const auto [p1, p2] = null_pair(2000, 2000, 0.0, 808);
    const auto cfg = interval(0, 1.5);

    const double sigma2 = oracle::sigma_zeta2(g1, g2, 0.5, 0.5, 0, 1.5);
    CHECK(std::abs(variance_vn(p1, p2, cfg) / sigma2 - 1.0) <= 0.10);

    const double tilde2 = oracle::sigma_tilde2(g1, g2, 0.5, 0.5, 0, 1.5);
    const auto pooled = pool_z(build_z(p1), build_z(p2), effective_interval(p1, p2, cfg), cfg.rho);
    const int B = 5000;
    Rng rng(derive_seed(12345, {701}));
    std::vector<double> w(pooled.integrals.size()), v(w.size());
    double sum = 0, sum2 = 0, var_sum = 0;
    for (int b = 0; b < B; ++b) {
      fill_weights(WeightScheme::efron(), rng, w);
      for (std::size_t i = 0; i < w.size(); ++i) v[i] = w[i] + 1.0;
      const double t = bootstrap_statistic(pooled, w, true);
      sum += t;
      sum2 += t * t;
      var_sum += bootstrap_variance(pooled, v, true).value;
    }
    const double mean = sum / B;
    const double var = (sum2 - B * mean * mean) / (B - 1);
    CHECK(std::abs(var / tilde2 - 1.0) <= 0.10);
    CHECK(std::abs(var_sum / B / tilde2 - 1.0) <= 0.10);
    MESSAGE("sigma_zeta^2 = " << sigma2 << ", sigma_tilde^2 = " << tilde2);
  }

  TEST_CASE("consistency surrogate at c = 0.1, (100, 100)") {
    ScenarioConfig cfg;
    cfg.suite = "consistency";
    cfg.model2 = HazardModel::constant_pair(0.1);
    cfg.n1 = cfg.n2 = 100;
    cfg.n_sim = 200;
    cfg.B = 499;
    cfg.seed = 12345;
    const auto report = run_scenario(cfg);
    for (const auto& m : report.methods) CHECK(m.rate >= 0.99);
  }
}

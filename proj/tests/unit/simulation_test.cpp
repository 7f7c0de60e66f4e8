#include <doctest.h>

#include <cmath>

#include "cifboot/error.hpp"
#include "cifboot/estimators.hpp"
#include "cifboot/simulation.hpp"
#include "support/fixtures.hpp"
#include "support/oracle.hpp"

using namespace cifboot;

TEST_SUITE("simulation") {
  TEST_CASE("hazard models") {
    const auto pair = HazardModel::constant_pair(1.0);
    for (const double t : {0.1, 1.0, 5.0}) {
      CHECK(pair.hazard(1, t) / (pair.hazard(1, t) + pair.hazard(2, t)) == 0.5);
    }
    const auto g = HazardModel::group1_exp();
    CHECK(g.hazard(1, 0.7) + g.hazard(2, 0.7) == doctest::Approx(1.0));
    CHECK_THROWS_AS(HazardModel::constant_pair(1.2), InputError);
    CHECK_THROWS_AS(HazardModel::constant_pair(-0.1), InputError);
    CHECK_THROWS_AS(HazardModel::piecewise({0.0, 1.0}, {1.0, -1.0}, {0.0, 0.0}), InputError);
    CHECK_THROWS_AS(HazardModel::piecewise({0.5}, {1.0}, {1.0}), InputError);
  }

  TEST_CASE("cause split for c = 1 is one half") {
    Rng rng(derive_seed(12345, {801}));
    const int n = 200000;
    int cause1 = 0;
    for (int i = 0; i < n; ++i) {
      if (draw_subject(HazardModel::constant_pair(1.0), 0.0, rng).status == Status::Cause1) ++cause1;
    }
    CHECK(std::abs(static_cast<double>(cause1) / n - 0.5) <= 4 * std::sqrt(0.25 / n));
  }

  TEST_CASE("group-1 event times: mean and cause-1 incidence at 1.5") {
    Rng rng(derive_seed(12345, {802}));
    const int n = 1000000;
    double sum = 0.0;
    int early_cause1 = 0;
    for (int i = 0; i < n; ++i) {
      const auto o = draw_subject(HazardModel::group1_exp(), 0.0, rng);
      sum += o.exit;
      if (o.status == Status::Cause1 && o.exit <= 1.5) ++early_cause1;
    }
    CHECK(std::abs(sum / n - 1.0) <= 0.01);
    CHECK(std::abs(static_cast<double>(early_cause1) / n - 0.5 * (1 - std::exp(-3.0))) <= 0.005);
  }

  TEST_CASE("all-cause event time laws (Kolmogorov distance)") {
    for (const bool exp_group : {true, false}) {
      Rng rng(derive_seed(12345, {803, exp_group ? 1u : 2u}));
      const auto model = exp_group ? HazardModel::group1_exp() : HazardModel::constant_pair(0.3);
      const double rate = exp_group ? 1.0 : 2.0;
      std::vector<double> t(100000);
      for (auto& x : t) x = draw_subject(model, 0.0, rng).exit;
      const double d = oracle::kolmogorov_distance(t, [&](double x) { return 1 - std::exp(-rate * x); });
      CHECK(d <= 0.01);
    }
  }

  TEST_CASE("censoring fraction for lambda = 1") {
    Rng rng(derive_seed(12345, {804}));
    const int n = 100000;
    int censored = 0;
    for (int i = 0; i < n; ++i) {
      if (draw_subject(HazardModel::group1_exp(), 1.0, rng).status == Status::Censored) ++censored;
    }
    CHECK(std::abs(static_cast<double>(censored) / n - 0.5) <= 0.01);
  }

  TEST_CASE("null groups share F1: estimates at n = 5000") {
    const auto a = aalen_johansen(compile_panel(fixtures::simulated(HazardModel::group1_exp(), 5000, 0.0, 805)), 1);
    const auto b =
        aalen_johansen(compile_panel(fixtures::simulated(HazardModel::constant_pair(1.0), 5000, 0.0, 806)), 1);
    double sup = 0.0;
    for (int k = 0; k <= 300; ++k) sup = std::max(sup, std::abs(a(0.005 * k) - b(0.005 * k)));
    CHECK(sup <= 0.03);
  }

  TEST_CASE("piecewise-constant inversion") {
    // one open-ended segment reproduces the constant pair draw for draw
    const auto pw = HazardModel::piecewise({0.0}, {0.7}, {1.3});
    Rng a(5), b(5);
    for (int i = 0; i < 1000; ++i) {
      CHECK(draw_subject(pw, 0.4, a) == draw_subject(HazardModel::constant_pair(0.7), 0.4, b));
    }

    // rate 1 on [0, 1), rate 3 afterwards: P(T > t) = exp(-t) then exp(-1 - 3(t - 1))
    const auto two = HazardModel::piecewise({0.0, 1.0}, {1.0, 0.0}, {0.0, 3.0});
    Rng rng(derive_seed(12345, {807}));
    std::vector<double> t(100000);
    int cause_ok = 0;
    for (auto& x : t) {
      const auto o = draw_subject(two, 0.0, rng);
      x = o.exit;
      if ((o.exit < 1.0) == (o.status == Status::Cause1)) ++cause_ok;
    }
    CHECK(cause_ok == 100000);
    const double d = oracle::kolmogorov_distance(t, [](double x) {
      return x < 1.0 ? 1 - std::exp(-x) : 1 - std::exp(-1 - 3 * (x - 1));
    });
    CHECK(d <= 0.01);

    const auto dead_end = HazardModel::piecewise({0.0, 1.0}, {1.0, 0.0}, {0.0, 0.0});
    Rng r(1);
    bool threw = false;
    for (int i = 0; i < 100 && !threw; ++i) {
      try {
        draw_subject(dead_end, 0.0, r);
      } catch (const InputError&) {
        threw = true;
      }
    }
    CHECK(threw);
    for (int i = 0; i < 100; ++i) CHECK(std::isfinite(draw_subject(dead_end, 0.5, r).exit));
  }

  TEST_CASE("scenario validation") {
    ScenarioConfig cfg;
    cfg.n1 = 1;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg.n1 = 10;
    cfg.B = 0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg.B = 10;
    cfg.n_sim = 0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
  }

  TEST_CASE("suite grids and filters") {
    const auto t1 = suite_scenarios(Suite::Table1);
    CHECK(t1.size() == 15);
    for (const auto& c : t1) CHECK(c.model2.c == 1.0);
    CHECK(suite_scenarios(Suite::Table2).size() == 36);

    SuiteOverrides o;
    o.cells = "c=0.5,n=100";
    const auto sel = suite_scenarios(Suite::Table2, o);
    REQUIRE(sel.size() == 2);
    CHECK(sel[0].censor1 == 0.0);
    CHECK(sel[1].censor1 == 1.0);
    // cell ids come from the full grid, so filtering never changes seeds
    const auto all = suite_scenarios(Suite::Table2);
    CHECK(all[sel[0].cell].n1 == 100);
    CHECK(all[sel[0].cell].model2.c == 0.5);

    o.cells = "n1=50,n2=100;l1=1,l2=0.5";
    CHECK(suite_scenarios(Suite::Table1, o).size() == 5 + 3 - 1);
    o.cells = "q=1";
    CHECK_THROWS_AS(suite_scenarios(Suite::Table1, o), InputError);
    o.cells = "c=abc";
    CHECK_THROWS_AS(suite_scenarios(Suite::Table1, o), InputError);
    CHECK_THROWS_AS(parse_suite("table3"), InputError);
  }

  TEST_CASE("reports echo overrides and are independent of the worker count") {
    SuiteOverrides o;
    o.n_sim = 100;
    o.B = 49;
    o.seed = 9;
    o.cells = "n=50,l=1";
    const auto one = table_suite(Suite::Table1, o, 1);
    const auto three = table_suite(Suite::Table1, o, 3);
    REQUIRE(one.size() == 1);
    CHECK(one[0].config.n_sim == 100);
    CHECK(one[0].config.B == 49);
    for (std::size_t k = 0; k < 3; ++k) {
      const auto& m = one[0].methods[k];
      CHECK(m.rejections == three[0].methods[k].rejections);
      CHECK(m.errors == three[0].methods[k].errors);
      CHECK(m.rate == static_cast<double>(m.rejections) / 100.0);
      CHECK(m.standard_error == doctest::Approx(std::sqrt(m.rate * (1 - m.rate) / 100)));
    }
    CHECK(one[0].truncated_intervals == three[0].truncated_intervals);
  }
}

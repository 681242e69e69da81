#include <cmath>

#include "cogmac/errors.hpp"
#include "cogmac/random.hpp"
#include "cogmac/whittle.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cogmac;

TEST_SUITE("whittle") {
  TEST_CASE("zero discount gives the immediate reward") {
    WhittleConfig cfg;
    cfg.discount = 0.0;
    for (auto p : {TransitionEstimate{0.2, 0.8}, TransitionEstimate{0.7, 0.1}}) {
      CHECK(whittle_index(0.7, p, cfg) == doctest::Approx(0.7).epsilon(1e-5));
    }
  }

  TEST_CASE("i.i.d. arms have W = omega") {
    WhittleConfig cfg;
    cfg.discount = 0.999;
    for (double p : {0.2, 0.5, 0.8}) {
      for (double w : {0.1, 0.45, 0.9}) {
        CHECK(std::abs(whittle_index(w, {p, p}, cfg) - w) < 1e-3);
      }
    }
  }

  TEST_CASE("monotone in belief for positively correlated arms") {
    WhittleConfig cfg;
    cfg.discount = 0.9;
    const TransitionEstimate p{0.2, 0.7};
    double prev = -1.0;
    for (int k = 0; k <= 100; ++k) {
      const double w = whittle_index(k / 100.0, p, cfg);
      CHECK(w >= prev - 1e-6);
      prev = w;
    }
  }

  TEST_CASE("policy iteration, value iteration and the threshold form agree") {
    Rng rng(21);
    for (int k = 0; k < 8; ++k) {
      const double om = rng.uniform();
      const TransitionEstimate p{rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
      WhittleConfig pi;
      pi.discount = 0.9;
      WhittleConfig vi = pi;
      vi.solver = WhittleSolver::value_iteration;
      vi.value_tol = 1e-6;  // reachable within the iteration cap at this discount
      const double a = whittle_index(om, p, pi);
      const double b = whittle_index(om, p, vi);
      const double c = threshold_whittle_index(om, p, 0.9);
      CHECK(std::abs(a - b) < 1e-4);
      CHECK(std::abs(a - c) < 1e-4);
    }
  }

  TEST_CASE("grid oracle brackets the index") {
    Rng rng(4);
    for (int k = 0; k < 5; ++k) {
      const double om = rng.uniform();
      const double p01 = rng.uniform(0.05, 0.95);
      const double p11 = rng.uniform(0.05, 0.95);
      WhittleConfig cfg;
      cfg.discount = 0.95;
      const double w = whittle_index(om, {p01, p11}, cfg);
      CHECK(oracle::whittle_gap(om, p01, p11, 0.95, w - 1e-3, 4001, 1e-10) < 0.0);
      CHECK(oracle::whittle_gap(om, p01, p11, 0.95, w + 1e-3, 4001, 1e-10) > 0.0);
    }
  }

  TEST_CASE("index stays in the subsidy window") {
    WhittleConfig cfg;
    cfg.discount = 0.99;
    for (double w : {0.0, 0.3, 1.0}) {
      const double x = whittle_index(w, {0.1, 0.95}, cfg);
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
    }
  }

  TEST_CASE("config validation and non-convergence") {
    WhittleConfig bad;
    bad.discount = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.discount = 0.9;
    bad.grid_points = 50;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    WhittleConfig cfg;
    cfg.discount = 0.999;
    CHECK(cfg.iteration_cap() == 10000);
    // a multichain subsidy problem under value iteration exhausts its cap
    cfg.solver = WhittleSolver::value_iteration;
    cfg.value_tol = 1e-14;
    CHECK_THROWS_AS(whittle_index(0.5, {0.05, 0.97}, cfg), ConvergenceError);
  }
}

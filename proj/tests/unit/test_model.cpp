#include <cmath>
#include <vector>

#include "cogmac/errors.hpp"
#include "cogmac/model.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cogmac;

TEST_SUITE("model") {
  TEST_CASE("inverse normal matches the bisection oracle") {
    for (double p : {1e-9, 1e-6, 0.001, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999999}) {
      CHECK(std::abs(inverse_q(p) - static_cast<double>(oracle::inverse_q(p))) < 1e-9);
      CHECK(std::abs(normal_quantile(p) + static_cast<double>(oracle::inverse_q(p))) < 1e-9);
    }
    CHECK(std::abs(inverse_q(0.1) - 1.2815515655446004) < 1e-12);
  }

  TEST_CASE("sensing time examples") {
    CHECK(compute_sensing_time(0.5, 0.5, 0.3, 1e6) == doctest::Approx(0.0).epsilon(1e-15));
    const double qa = static_cast<double>(oracle::inverse_q(0.1));
    const double qb = static_cast<double>(oracle::inverse_q(0.9));
    const double expect = 2.0 / 1e6 * std::pow(qa - qb * std::sqrt(1.2), 2) / 0.01;
    const double ts = compute_sensing_time(0.1, 0.1, 0.1, 1e6);
    CHECK(ts == doctest::Approx(expect).epsilon(1e-10));
    CHECK(ts == doctest::Approx(1.4425e-3).epsilon(1e-4));
    CHECK(compute_sensing_time(0.1, 0.1, 0.1, 5e5) / ts == doctest::Approx(2.0).epsilon(1e-14));
  }

  TEST_CASE("sensing time decreases in snr") {
    double prev = compute_sensing_time(0.05, 0.1, 0.01, 1e6);
    for (int k = 1; k <= 100; ++k) {
      const double snr = 0.01 + 0.05 * k;
      const double ts = compute_sensing_time(0.05, 0.1, snr, 1e6);
      CHECK(ts < prev);
      prev = ts;
    }
  }

  TEST_CASE("sensing time rejects degenerate inputs") {
    CHECK_THROWS_AS(compute_sensing_time(0.0, 0.1, 1.0, 1e6), DomainError);
    CHECK_THROWS_AS(compute_sensing_time(0.1, 1.0, 1.0, 1e6), DomainError);
    CHECK_THROWS_AS(compute_sensing_time(0.1, 0.1, 0.0, 1e6), DomainError);
    CHECK_THROWS_AS(compute_sensing_time(0.1, 0.1, 1.0, 0.0), DomainError);
  }

  TEST_CASE("db conversion") {
    CHECK(db_to_linear(-10.0) == doctest::Approx(0.1));
    CHECK(db_to_linear(0.0) == 1.0);
  }

  TEST_CASE("utilization") {
    CHECK(utilization({0.2, 1.0}) == doctest::Approx(1.0 / 6.0));
    CHECK(utilization({0.7, 0.7}) == 0.5);
    CHECK(utilization({1e-12, 1.0}) < 1e-11);
  }

  TEST_CASE("transition probabilities") {
    const UnslottedChannelParams p{0.2, 1.0};
    CHECK(transition_prob(p, ChannelState::free, 0.0) == 1.0);
    CHECK(transition_prob(p, ChannelState::busy, 0.0) == 0.0);
    CHECK(transition_prob(p, ChannelState::busy, 1.0) == doctest::Approx(5.0 / 6.0 * (1.0 - std::exp(-1.2))));
    CHECK(transition_prob(p, ChannelState::busy, 1.0) == doctest::Approx(0.58234).epsilon(1e-5));
    CHECK(transition_prob(p, ChannelState::free, 1e6) == doctest::Approx(5.0 / 6.0));
    CHECK(transition_prob(p, ChannelState::busy, 1e6) == doctest::Approx(5.0 / 6.0));
    double prev1 = 1.0;
    double prev0 = 0.0;
    for (int k = 1; k < 200; ++k) {
      const double t = 0.05 * k;
      const double a = transition_prob(p, ChannelState::free, t);
      const double b = transition_prob(p, ChannelState::busy, t);
      CHECK(a <= prev1);
      CHECK(b >= prev0);
      CHECK(a >= 0.0);
      CHECK(b <= 1.0);
      prev1 = a;
      prev0 = b;
    }
    CHECK_THROWS_AS(transition_prob(p, ChannelState::free, -1.0), DomainError);
  }

  TEST_CASE("stationary free probability") {
    CHECK(steady_state_free_prob({0.3, 0.3, 1.0}) == doctest::Approx(0.3));
    CHECK(steady_state_free_prob({0.2, 0.8, 1.0}) == doctest::Approx(0.5));
    CHECK(steady_state_free_prob({0.0, 0.5, 1.0}) == 0.0);
    CHECK_THROWS_AS(steady_state_free_prob({0.0, 1.0, 1.0}), DomainError);
    for (double p01 : {0.05, 0.3, 0.9}) {
      for (double p11 : {0.1, 0.5, 0.99}) {
        const double pi = steady_state_free_prob({p01, p11, 1.0});
        CHECK(std::abs(pi - (pi * p11 + (1.0 - pi) * p01)) < 1e-12);
      }
    }
  }

  TEST_CASE("parameter validation") {
    CHECK_THROWS_AS((SlottedChannelParams{0.0, 1.0, 1.0}).validate(), ConfigError);
    CHECK_THROWS_AS((SlottedChannelParams{1.2, 0.5, 1.0}).validate(), ConfigError);
    CHECK_THROWS_AS((SlottedChannelParams{0.2, 0.5, -1.0}).validate(), ConfigError);
    CHECK_THROWS_AS((UnslottedChannelParams{0.0, 1.0}).validate(), ConfigError);
    SensingModel s;
    s.p_fa = 1.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }

  TEST_CASE("total opportunity of the reference rates") {
    const std::vector<UnslottedChannelParams> ch{{0.2, 1.0}, {0.17, 0.9}, {0.15, 0.8}, {0.13, 0.7}, {0.11, 0.6}};
    CHECK(total_opportunity(ch) == doctest::Approx(4.205).epsilon(1e-3 / 4.205));
  }
}

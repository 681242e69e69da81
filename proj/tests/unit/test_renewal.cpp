#include <cmath>
#include <vector>

#include "cogmac/errors.hpp"
#include "cogmac/random.hpp"
#include "cogmac/renewal.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cogmac;

namespace {

const std::vector<UnslottedChannelParams> kRef{{0.2, 1.0}, {0.17, 0.9}, {0.15, 0.8}, {0.13, 0.7}, {0.11, 0.6}};

}  // namespace

TEST_SUITE("renewal") {
  TEST_CASE("delta examples") {
    const UnslottedChannelParams p{0.2, 1.0};
    CHECK(delta(p, ChannelState::free, 0.0) == 0.0);
    CHECK(delta(p, ChannelState::busy, 0.0) == 0.0);
    CHECK(delta(p, ChannelState::busy, 1.0) == doctest::Approx(5.0 / 6.0 * (1.0 + (std::exp(-1.2) - 1.0) / 1.2)));
    CHECK(delta(p, ChannelState::busy, 1.0) == doctest::Approx(0.34805).epsilon(1e-5));
    CHECK(delta(p, ChannelState::free, 1e7) / 1e7 == doctest::Approx(5.0 / 6.0));
    CHECK(delta(p, ChannelState::busy, 1e7) / 1e7 == doctest::Approx(5.0 / 6.0));
    CHECK_THROWS_AS(delta(p, ChannelState::busy, -1.0), DomainError);
  }

  TEST_CASE("delta equals the integral of the transition probability") {
    Rng rng(2);
    for (int k = 0; k < 30; ++k) {
      const UnslottedChannelParams p{rng.uniform(0.05, 3.0), rng.uniform(0.05, 3.0)};
      const double t = rng.uniform(1e-4, 20.0);
      for (bool from_free : {true, false}) {
        const double q = oracle::free_time_quadrature(p.lambda_free, p.lambda_busy, from_free, t);
        CHECK(std::abs(delta(p, from_free ? ChannelState::free : ChannelState::busy, t) - q) < 1e-9 * (1.0 + t));
      }
    }
  }

  TEST_CASE("delta ordering and monotonicity on a grid") {
    const UnslottedChannelParams p{0.4, 0.9};
    double prev1 = 0.0;
    double prev0 = 0.0;
    for (int k = 1; k <= 300; ++k) {
      const double t = 0.05 * k;
      const double d1 = delta(p, ChannelState::free, t);
      const double d0 = delta(p, ChannelState::busy, t);
      CHECK(d1 - d0 >= 0.0);
      CHECK(d1 - d0 <= t);
      CHECK(d0 >= 0.0);
      CHECK(d1 <= t);
      CHECK(d1 >= prev1);
      CHECK(d0 >= prev0);
      prev1 = d1;
      prev0 = d0;
    }
  }

  TEST_CASE("renewal-equation solver matches the closed form") {
    const UnslottedChannelParams p{0.2, 1.0};
    const auto f1 = Density::exponential(p.lambda_free);
    const auto f0 = Density::exponential(p.lambda_busy);
    for (double t : {0.3, 1.0, 4.0}) {
      CHECK(std::abs(delta_numeric(f1, f0, ChannelState::free, t) - delta(p, ChannelState::free, t)) < 1e-6);
      CHECK(std::abs(delta_numeric(f1, f0, ChannelState::busy, t) - delta(p, ChannelState::busy, t)) < 1e-6);
    }
    CHECK(delta_numeric(f1, f0, ChannelState::free, 0.0) == 0.0);
    // nearly never busy
    const auto rare = Density::exponential(1e-6);
    CHECK(delta_numeric(rare, f0, ChannelState::free, 2.0) == doctest::Approx(2.0).epsilon(1e-4));
  }

  TEST_CASE("renewal-equation solver input checks") {
    const auto f = Density::exponential(1.0);
    Density half{[](double x) { return x < 0 ? 0.0 : 0.5 * std::exp(-x); }, 60.0};
    CHECK_THROWS_AS(delta_numeric(half, f, ChannelState::free, 1.0), ConfigError);
    CHECK_THROWS_AS(delta_numeric(f, f, ChannelState::free, 1.0, 50), DomainError);
  }

  TEST_CASE("sensing-chain steady state") {
    const UnslottedChannelParams p{0.2, 1.0};
    const double pss = steady_state_sense_free(p, {0.6133, 0.3001});
    const double a = transition_prob(p, ChannelState::busy, 0.3001);
    const double b = transition_prob(p, ChannelState::free, 0.6133);
    CHECK(pss == doctest::Approx(a / (1.0 - b + a)));
    CHECK(steady_state_sense_free(p, {1e4, 1e4}) == doctest::Approx(5.0 / 6.0));
    CHECK(steady_state_sense_free(p, {1.0, 0.0}) == 0.0);
  }

  TEST_CASE("mean sensing interval") {
    const UnslottedChannelParams p{0.3, 0.8};
    const PeriodPair pp{0.9, 0.4};
    const double pss = steady_state_sense_free(p, pp);
    CHECK(mean_sense_interval(p, pp, SensingModel{}) == doctest::Approx(pss * 0.9 + (1 - pss) * 0.4));
    SensingModel s;
    s.p_fa = 0.2;
    s.p_md = 0.3;
    CHECK(mean_sense_interval(p, {0.7, 0.7}, s) == doctest::Approx(0.7));
    s.p_fa = s.p_md = 0.5;
    CHECK(mean_sense_interval(p, pp, s) == doctest::Approx(0.65));
    const double mu = mean_sense_interval(p, pp, SensingModel{});
    CHECK(mu >= 0.4);
    CHECK(mu <= 0.9);
  }

  TEST_CASE("metrics: ranges, identities and limits") {
    Rng rng(8);
    for (int k = 0; k < 50; ++k) {
      std::vector<UnslottedChannelParams> ch(3);
      std::vector<PeriodPair> per(3);
      for (int i = 0; i < 3; ++i) {
        ch[i] = {rng.uniform(0.05, 2.0), rng.uniform(0.05, 2.0)};
        per[i] = {rng.uniform(0.05, 5.0), rng.uniform(0.0, 5.0)};
      }
      const SensingModel perfect;
      const auto m = network_metrics(ch, per, perfect, 0.01);
      double rate = 0.0;
      for (int i = 0; i < 3; ++i) {
        const auto& x = m[i];
        for (double f : {x.secondary_utilization, x.unexplored, x.interference, x.overhead}) {
          CHECK(f >= 0.0);
          CHECK(f <= 1.0);
        }
        CHECK(x.secondary_utilization >= x.interference);
        const double u = utilization(ch[i]);
        CHECK(x.secondary_utilization - x.interference + x.unexplored == doctest::Approx(1.0 - u).epsilon(1e-9));
        CHECK(x.interference == doctest::Approx(x.p_ss * (per[i].t_free - delta(ch[i], ChannelState::free, per[i].t_free)) /
                                                x.mean_interval));
        rate += x.throughput();
      }
      CHECK(network_throughput(ch, per, perfect, 0.01) == doctest::Approx(rate));
      CHECK(rate <= total_opportunity(ch) + 1e-12);

      SensingModel noisy;
      noisy.p_fa = 0.1;
      noisy.p_md = 0.05;
      for (const auto& x : network_metrics(ch, per, noisy, 0.01)) {
        for (double f : {x.secondary_utilization, x.unexplored, x.interference, x.overhead}) {
          CHECK(f >= 0.0);
          CHECK(f <= 1.0);
        }
      }
    }
    const UnslottedChannelParams p{0.2, 1.0};
    const std::vector<UnslottedChannelParams> one{p};
    const std::vector<PeriodPair> long_busy{{0.5, 1e6}};
    CHECK(network_metrics(one, long_busy, SensingModel{}, 0.0)[0].unexplored == doctest::Approx(5.0 / 6.0).epsilon(1e-4));
    const std::vector<PeriodPair> any{{0.5, 0.3}};
    CHECK(network_metrics(one, any, SensingModel{}, 0.0)[0].overhead == 0.0);
    CHECK(network_throughput(std::vector<UnslottedChannelParams>{}, std::vector<PeriodPair>{}, SensingModel{}, 0.01) == 0.0);
  }

  TEST_CASE("overhead readings") {
    const std::vector<PeriodPair> per{{0.6, 0.3}, {0.7, 0.3}, {0.8, 0.35}, {0.9, 0.35}, {1.0, 0.4}};
    const auto cross = network_metrics(kRef, per, SensingModel{}, 0.01, OverheadReading::cross_channel);
    const auto lit = network_metrics(kRef, per, SensingModel{}, 0.01, OverheadReading::literal);
    double sum_rate = 0.0;
    for (const auto& m : cross) sum_rate += 0.01 / m.mean_interval;
    for (std::size_t i = 0; i < per.size(); ++i) {
      const double useful = cross[i].secondary_utilization - cross[i].interference;
      CHECK(cross[i].overhead == doctest::Approx(useful * sum_rate));
      CHECK(lit[i].overhead == doctest::Approx(useful * 5 * 0.01 / cross[i].mean_interval));
    }
  }

  TEST_CASE("metrics are continuous in the periods") {
    const UnslottedChannelParams p{0.3, 0.7};
    const std::vector<UnslottedChannelParams> one{p};
    double max_step = 0.0;
    std::vector<double> jumps;
    for (int a = 1; a < 60; ++a) {
      for (int b = 1; b < 60; ++b) {
        const std::vector<PeriodPair> x{{0.05 * a, 0.05 * b}};
        const std::vector<PeriodPair> y{{0.05 * a + 0.05, 0.05 * b}};
        const double j = std::abs(network_throughput(one, x, SensingModel{}, 0.01) -
                                  network_throughput(one, y, SensingModel{}, 0.01));
        jumps.push_back(j);
        max_step = std::max(max_step, j);
      }
    }
    // a finer step must shrink the change roughly proportionally
    const std::vector<PeriodPair> x{{1.0, 0.5}};
    const std::vector<PeriodPair> y{{1.0 + 1e-6, 0.5}};
    CHECK(std::abs(network_throughput(one, x, SensingModel{}, 0.01) - network_throughput(one, y, SensingModel{}, 0.01)) <
          10.0 * max_step / 0.05 * 1e-6);
    CHECK(max_step < 0.1);
  }

  TEST_CASE("period validation") {
    CHECK_THROWS_AS((PeriodPair{0.0, 1.0}).validate(), ConfigError);
    CHECK_THROWS_AS((PeriodPair{1.0, -1.0}).validate(), ConfigError);
    CHECK_NOTHROW((PeriodPair{1.0, 0.0}).validate());
  }
}

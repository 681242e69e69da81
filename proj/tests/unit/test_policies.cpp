#include <cmath>
#include <vector>

#include "cogmac/errors.hpp"
#include "cogmac/policies.hpp"
#include "cogmac/random.hpp"
#include "doctest.h"

using namespace cogmac;

TEST_SUITE("policies") {
  TEST_CASE("greedy access") {
    CHECK(greedy_access(std::vector<double>{0.9, 0.5}, std::vector<double>{1, 1}) == 0);
    CHECK(greedy_access(std::vector<double>{0.5, 0.9}, std::vector<double>{2, 1}) == 0);
    CHECK(greedy_access(std::vector<double>{0.5, 0.5}, std::vector<double>{1, 1}) == 0);
    CHECK(greedy_access(std::vector<double>{0.1, 0.5, 0.5}, std::vector<double>{1, 1, 1}) == 1);
    CHECK_THROWS(greedy_access(std::vector<double>{}, std::vector<double>{}));
  }

  TEST_CASE("sense set selection") {
    const std::vector<double> w{0.9, 0.8, 0.7};
    const std::vector<double> b{0.9, 0.5, 0.1};
    const std::vector<double> bw{1, 1, 1};
    const auto d = select_sense_set(w, b, bw, 2);
    CHECK(d.access_channel == 0);
    CHECK(d.sense_set == std::vector<std::size_t>{0, 2});
    CHECK(whittle_slot_reward(d, w, b) == doctest::Approx(1.5));

    const auto all = select_sense_set(w, b, bw, 3);
    CHECK(all.sense_set == std::vector<std::size_t>{0, 1, 2});
    const auto single = select_sense_set(w, b, bw, 1);
    CHECK(single.sense_set == std::vector<std::size_t>{0});
    CHECK(whittle_slot_reward(single, w, b) == doctest::Approx(0.9));

    const auto flat = select_sense_set(b, b, bw, 2);
    CHECK(whittle_slot_reward(flat, b, b) == doctest::Approx(b[flat.access_channel]));
  }

  TEST_CASE("argmax invariance under bandwidth scaling") {
    Rng rng(3);
    for (int k = 0; k < 200; ++k) {
      std::vector<double> w(6), om(6), bw(6), bw2(6);
      for (int i = 0; i < 6; ++i) {
        w[i] = rng.uniform();
        om[i] = rng.uniform();
        bw[i] = rng.uniform(0.5, 2.0);
        bw2[i] = 3.7 * bw[i];
      }
      CHECK(greedy_access(om, bw) == greedy_access(om, bw2));
      const std::size_t l = 1 + rng.next() % 6;
      CHECK(select_sense_set(w, om, bw, l) == select_sense_set(w, om, bw2, l));
      CHECK(select_sense_set(w, om, bw, l) == select_sense_set(w, om, bw, l));
    }
  }

  TEST_CASE("ucb index") {
    UcbState s(2);
    s.successes = {5, 0};
    s.attempts = {10, 0};
    s.slot = 0;
    CHECK_THROWS_AS(ucb_index(s, 0), DomainError);
    s.slot = 7;  // any j >= 1
    CHECK_THROWS_AS(ucb_index(s, 1), DomainError);
    UcbState e(1);
    e.successes = {5};
    e.attempts = {10};
    e.slot = 1;
    CHECK(ucb_index(e, 0) == doctest::Approx(0.5));
    e.successes = {10};
    CHECK(ucb_index(e, 0) == doctest::Approx(1.0));
    // j = e^2 is not an integer slot; evaluate the formula at the two neighbours
    e.successes = {5};
    e.slot = 7;
    const double at7 = ucb_index(e, 0);
    e.slot = 8;
    const double at8 = ucb_index(e, 0);
    CHECK(at7 < 0.5 + std::sqrt(4.0 / 10.0));
    CHECK(at8 > 0.5 + std::sqrt(4.0 / 10.0));
    CHECK(at8 > at7);
    CHECK(at7 == doctest::Approx(0.5 + std::sqrt(2.0 * std::log(7.0) / 10.0)));
  }

  TEST_CASE("ucb seeding is round robin") {
    UcbState s(3);
    const std::vector<double> bw{1, 1, 1};
    for (std::size_t k = 0; k < 3; ++k) {
      const auto c = ucb_access(s, bw);
      CHECK(c == k);
      s.record(c, true);
    }
    for (std::size_t i = 0; i < 3; ++i) CHECK(s.attempts[i] == 1);
  }

  TEST_CASE("learning schedule") {
    auto a = learning_schedule(5, 5, 20);
    CHECK(a.size() == 1);
    CHECK(a[0].length == 20);
    CHECK(a[0].channels.size() == 5);
    auto b = learning_schedule(5, 1, 20);
    CHECK(b.size() == 5);
    CHECK(b.back().first_slot + b.back().length == 100);
    auto c = learning_schedule(5, 2, 10);
    REQUIRE(c.size() == 3);
    CHECK(c[0].channels.size() == 2);
    CHECK(c[1].channels.size() == 2);
    CHECK(c[2].channels.size() == 1);
    CHECK(c[2].first_slot + c[2].length == 30);
  }

  TEST_CASE("fixed baseline") {
    CHECK(fixed_sequence_baseline(std::vector<SlottedChannelParams>{{0.3, 0.5, 1.0}}) == 0);
    CHECK(fixed_sequence_baseline(std::vector<SlottedChannelParams>{{0.5, 0.5, 1.0}, {0.9, 0.9, 1.0}}) == 1);
    CHECK(fixed_sequence_baseline(std::vector<SlottedChannelParams>{{0.9, 0.9, 1.0}, {0.9, 0.9, 1.0}}) == 0);
  }
}

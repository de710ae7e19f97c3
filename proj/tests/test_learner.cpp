#include "marlshape/learner.hpp"

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "marlshape/rng.hpp"

using namespace marlshape;
using namespace marlshape::learner;

namespace {
const std::vector<int> kLegal{0, 1, 2, 3, 4};
}

TEST_CASE("full exploration is uniform over the legal actions") {
  QTable q(1, 1, 5);
  q.set(0, 0, 2, 100.0);  // must be ignored when exploring
  auto rng = make_stream(50, 0);
  int counts[5] = {0};
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[select_action(q, 0, 0, kLegal, 1.0, rng)];
  // chi-square against uniform; 4 dof, alpha = 0.01
  double chi2 = 0.0;
  for (int k = 0; k < 5; ++k) {
    const double d = counts[k] - n / 5.0;
    chi2 += d * d / (n / 5.0);
  }
  CHECK(chi2 < 13.277);
}

TEST_CASE("greedy selection returns the strict maximum") {
  QTable q(1, 1, 5);
  q.set(0, 0, 3, 0.5);
  auto rng = make_stream(51, 0);
  for (int i = 0; i < 100; ++i) CHECK(select_action(q, 0, 0, kLegal, 0.0, rng) == 3);
}

TEST_CASE("greedy ties break toward the lowest action index") {
  QTable q(1, 1, 5);
  auto rng = make_stream(52, 0);
  CHECK(select_action(q, 0, 0, kLegal, 0.0, rng) == 0);
  const std::vector<int> legal{4, 2, 3};
  CHECK(select_action(q, 0, 0, legal, 0.0, rng) == 4);  // first in the given order
}

TEST_CASE("selection requires a non-empty legal set") {
  QTable q(1, 1, 5);
  auto rng = make_stream(53, 0);
  CHECK_THROWS_AS(select_action(q, 0, 0, {}, 0.0, rng), std::invalid_argument);
}

TEST_CASE("greedy choice is invariant to a constant shift") {
  auto rng = make_stream(54, 0);
  QTable q(1, 1, 5);
  for (int a = 0; a < 5; ++a) q.set(0, 0, a, uniform_unit(rng));
  const int before = select_action(q, 0, 0, kLegal, 0.0, rng);
  for (int a = 0; a < 5; ++a) q.set(0, 0, a, q.get(0, 0, a) + 17.5);
  CHECK(select_action(q, 0, 0, kLegal, 0.0, rng) == before);
}

TEST_CASE("update arithmetic") {
  QTable q(2, 1, 5);
  q_update(q, 0, 0, 1, 0.01, 0.99, 1, 0, kLegal, 1.0, false);
  CHECK(q.get(0, 0, 1) == doctest::Approx(0.01));

  QTable zero(2, 1, 5);
  q_update(zero, 0, 0, 1, 0.0, 0.999, 1, 0, kLegal, 0.5, false);
  CHECK(zero.get(0, 0, 1) == 0.0);
}

TEST_CASE("terminal transitions bootstrap with zero") {
  QTable q(2, 1, 5);
  q.set(1, 0, 0, 1000.0);
  q_update(q, 0, 0, 2, 1.0, 0.99, 1, 0, kLegal, 1.0, true);
  CHECK(q.get(0, 0, 2) == doctest::Approx(1.0));
}

TEST_CASE("always-accepting self-loop drives the value to one") {
  // fixed point of Q <- Q + a((1-gb) + gb Q - Q) is exactly 1
  const double gamma_b = 0.99;
  QTable q(1, 1, 1);
  const std::vector<int> self{0};
  int iters = 0;
  while (std::abs(q.get(0, 0, 0) - 1.0) > 1e-6 && iters < 100000) {
    q_update(q, 0, 0, 0, 1.0 - gamma_b, gamma_b, 0, 0, self, 0.5, false);
    ++iters;
  }
  CHECK(std::abs(q.get(0, 0, 0) - 1.0) <= 1e-6);
  CHECK(iters < 100000);
}

TEST_CASE("schedule endpoints and midpoint") {
  const Schedule explore{1.0, 0.01, 100000, ScheduleKind::Linear};
  CHECK(schedule_value(explore, 0) == 1.0);
  CHECK(schedule_value(explore, 100000) == 0.01);
  CHECK(schedule_value(explore, 250000) == 0.01);
  CHECK(schedule_value(explore, 50000) == doctest::Approx((1.0 + 0.01) / 2.0));

  const Schedule lr{1.0, 0.001, 10, ScheduleKind::Exponential};
  CHECK(schedule_value(lr, 0) == doctest::Approx(1.0));
  CHECK(schedule_value(lr, 10) == doctest::Approx(0.001));
  CHECK(schedule_value(lr, 5) == doctest::Approx(std::sqrt(0.001)));
}

TEST_CASE("q-values stay within the reward-implied bounds") {
  auto rng = make_stream(55, 0);
  QTable q(4, 3, 6);
  const double gamma = 0.999, gamma_b = 0.99, trap = -1.0;
  const std::vector<int> all{0, 1, 2, 3, 4, 5};
  for (int step = 0; step < 200000; ++step) {
    const int c = static_cast<int>(rng() % 4), s = static_cast<int>(rng() % 3);
    const int c2 = static_cast<int>(rng() % 4), s2 = static_cast<int>(rng() % 3);
    const int a = static_cast<int>(rng() % 6);
    const int kind = static_cast<int>(rng() % 3);
    const double r = kind == 0 ? trap : (kind == 1 ? 0.0 : 1.0 - gamma_b);
    const double g = kind == 2 ? gamma_b : gamma;
    q_update(q, c, s, a, r, g, c2, s2, all, 0.1 + 0.9 * uniform_unit(rng), kind == 0);
  }
  for (int c = 0; c < 4; ++c)
    for (int s = 0; s < 3; ++s)
      for (int a = 0; a < 6; ++a) {
        CHECK(q.get(c, s, a) >= trap / (1.0 - gamma));
        CHECK(q.get(c, s, a) <= 1.0 + 1e-9);
      }
}

TEST_CASE("checkpoint dump and load round-trip") {
  auto rng = make_stream(56, 0);
  QTable q(5, 3, 7);
  for (int i = 0; i < 40; ++i)
    q.set(static_cast<int>(rng() % 5), static_cast<int>(rng() % 3),
          static_cast<int>(rng() % 7), uniform_unit(rng) * 2.0 - 1.0);
  std::ostringstream out;
  q.dump(out);
  std::istringstream in(out.str());
  const QTable q2 = QTable::load(in, 5, 3, 7);
  CHECK(q == q2);
}

TEST_CASE("identical seeds give bitwise-identical selection sequences") {
  QTable q(3, 2, 5);
  auto r1 = make_stream(77, 4);
  auto r2 = make_stream(77, 4);
  for (int i = 0; i < 10000; ++i) {
    const int a1 = select_action(q, i % 3, i % 2, kLegal, 0.3, r1);
    const int a2 = select_action(q, i % 3, i % 2, kLegal, 0.3, r2);
    CHECK(a1 == a2);
  }
}

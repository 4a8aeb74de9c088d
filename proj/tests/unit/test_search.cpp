#include "doctest.h"

#include <algorithm>
#include <cstdint>
#include <numeric>

#include "simbias/errors.hpp"
#include "simbias/search.hpp"
#include "simbias/stats.hpp"

using namespace simbias;

namespace {

// Brute-force nearest differently classified string by scanning all 2^n strings.
int brute_force_distance(const DeepNet& net, const BitString& x) {
  const int n = x.size();
  const int s0 = classify(net, x);
  int best = n + 1;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const int h = std::popcount(mask);
    if (h >= best) continue;
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    if (classify(net, x.flipped(idx)) != s0) best = h;
  }
  return best;
}

// phi(x) = x_0 + x_1 + c: with c = 0.5 and x = (+,+,...), phi = 2.5; one flip gives 0.5,
// two flips give -1.5.
DeepNet two_bit_net(int n, double c) {
  NetworkConfig cfg;
  cfg.input_dim = n;
  cfg.hidden_widths = {4};
  Eigen::MatrixXd w1 = Eigen::MatrixXd::Zero(4, n);
  w1(0, 0) = 1;
  w1(1, 0) = -1;
  w1(2, 1) = 1;
  w1(3, 1) = -1;
  Eigen::MatrixXd w2(1, 4);
  w2 << 1, -1, 1, -1;
  Eigen::VectorXd b2(1);
  b2 << c;
  return DeepNet(cfg, {w1, w2}, {Eigen::VectorXd::Zero(4), b2});
}

}  // namespace

TEST_CASE("pass-through net flips at the first bit") {
  const auto net = passthrough_network(8);
  const auto x = BitString::parse("+-+-+-+-");
  const auto g = greedy_search(net, x, 8);
  REQUIRE(g.distance);
  CHECK(*g.distance == 1);
  CHECK(g.path == std::vector<int>{0});
  CHECK(g.method == SearchMethod::Greedy);
  CHECK(g.start_phi == 1.0);
  CHECK(g.start_digest == x.digest());
  CHECK(g.evaluations == 8);

  const auto e = exact_search(net, x, 8);
  REQUIRE(e.distance);
  CHECK(*e.distance == 1);
  CHECK(e.path == std::vector<int>{0});
}

TEST_CASE("constant-sign net never changes") {
  const auto net = constant_network(6, 1.0);
  const auto x = BitString::ones(6);
  const auto g = greedy_search(net, x, 4);
  CHECK_FALSE(g.distance);
  CHECK(g.path.size() == 4);
  CHECK(g.evaluations == 6 + 5 + 4 + 3);
  const auto w = random_flip_walk(net, x, std::uint64_t{0});
  REQUIRE(w.distance);
  CHECK(*w.distance == 6);
  CHECK(w.capped);
  CHECK_FALSE(exact_search(net, x, 6).distance);
}

TEST_CASE("exact search finds a two-flip boundary") {
  const auto net = two_bit_net(5, 0.5);
  const auto x = BitString::ones(5);
  CHECK(forward(net, x) == 2.5);
  CHECK(brute_force_distance(net, x) == 2);
  const auto e = exact_search(net, x, 5);
  REQUIRE(e.distance);
  CHECK(*e.distance == 2);
  CHECK(e.path == std::vector<int>{0, 1});
  CHECK(e.evaluations == 5 + 10);  // all of h = 1, then the single block holding every pair
}

TEST_CASE("greedy ties go to the lowest index") {
  const auto net = two_bit_net(5, 0.5);
  const auto g = greedy_search(net, BitString::ones(5), 5);
  REQUIRE(g.distance);
  CHECK(g.path == std::vector<int>{0, 1});
}

TEST_CASE("argument validation") {
  const auto net = passthrough_network(4);
  const auto x = BitString::ones(4);
  CHECK_THROWS_AS(greedy_search(net, x, 0), ConfigError);
  CHECK_THROWS_AS(greedy_search(net, x, 5), ConfigError);
  CHECK_THROWS_AS(exact_search(net, x, 0), ConfigError);
  CHECK_THROWS_AS(greedy_search(net, BitString::ones(5), 2), DimensionMismatch);
  CHECK_THROWS_AS(random_flip_walk(net, x, std::vector<int>{0, 1}), DimensionMismatch);
}

TEST_CASE("exact search budget") {
  const auto net = constant_network(20, 1.0);
  const auto x = BitString::ones(20);
  // 20 + 190 = 210 evaluations fit; the 1140 of h = 3 do not.
  try {
    exact_search(net, x, 5, 500);
    FAIL("expected BudgetExceeded");
  } catch (const BudgetExceeded& e) {
    CHECK(e.largest_searched_h() == 2);
  }
  CHECK_NOTHROW(exact_search(net, x, 2, 210));
}

TEST_CASE("exact search is minimal against full enumeration") {
  for (int n = 4; n <= 10; ++n) {
    for (std::uint64_t trial = 0; trial < 12; ++trial) {
      const auto net = sample_network(NetworkConfig::defaults(n, 17), trial);
      Engine rng(trial * 31 + static_cast<std::uint64_t>(n));
      const auto x = BitString::random(n, rng);
      const int brute = brute_force_distance(net, x);
      const auto e = exact_search(net, x, n);
      if (brute > n) {
        CHECK_FALSE(e.distance);
        continue;
      }
      REQUIRE(e.distance);
      CHECK(*e.distance == brute);
      CHECK(classify(net, x.flipped(e.path)) != classify(net, x));
    }
  }
}

TEST_CASE("greedy and walk never beat exact search") {
  for (int n : {8, 12}) {
    for (std::uint64_t trial = 0; trial < 60; ++trial) {
      const auto net = sample_network(NetworkConfig::defaults(n, 23), trial);
      Engine rng(trial);
      const auto x = BitString::random(n, rng);
      const auto e = exact_search(net, x, n);
      const auto g = greedy_search(net, x, n);
      const auto w = random_flip_walk(net, x, trial);
      if (!e.distance) continue;
      if (g.distance) {
        CHECK(*g.distance >= *e.distance);
        CHECK(g.path.size() == static_cast<std::size_t>(*g.distance));
        CHECK(classify(net, x.flipped(g.path)) != classify(net, x));
      }
      REQUIRE(w.distance);
      CHECK(*w.distance >= *e.distance);
      CHECK(g.evaluations <= static_cast<std::int64_t>(n) * static_cast<std::int64_t>(g.path.size()));
    }
  }
}

TEST_CASE("greedy matches a direct re-implementation") {
  const int n = 16;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const auto net = sample_network(NetworkConfig::defaults(n, 5), trial);
    Engine rng(trial + 100);
    const auto x = BitString::random(n, rng);
    const int s0 = classify(net, x);
    BitString cur = x;
    std::vector<bool> used(n, false);
    std::vector<int> path;
    int found = 0;
    for (int step = 1; step <= n && !found; ++step) {
      int best = -1;
      double best_v = 0.0;
      for (int i = 0; i < n; ++i) {
        if (used[static_cast<std::size_t>(i)]) continue;
        const double v = s0 * forward(net, cur.flipped(i));
        if (best < 0 || v < best_v) {
          best = i;
          best_v = v;
        }
      }
      used[static_cast<std::size_t>(best)] = true;
      cur.flip(best);
      path.push_back(best);
      if (classify(s0 * best_v) != s0) found = step;
    }
    const auto g = greedy_search(net, x, n);
    CHECK(g.path == path);
    if (found) CHECK(g.distance == found);
  }
}

TEST_CASE("walk follows its permutation") {
  const int n = 10;
  const auto net = passthrough_network(n);
  const auto x = BitString::ones(n);
  const std::vector<int> order{3, 7, 0, 1, 2, 4, 5, 6, 8, 9};
  const auto w = random_flip_walk(net, x, order);
  REQUIRE(w.distance);
  CHECK(*w.distance == 3);
  CHECK(w.path == std::vector<int>{3, 7, 0});
  CHECK_FALSE(w.capped);
  CHECK(random_flip_walk(net, x, order).path == w.path);
}

TEST_CASE("walk orders are permutations and reproducible") {
  const auto a = walk_order(9, 50, 4);
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> iota(50);
  std::iota(iota.begin(), iota.end(), 0);
  CHECK(sorted == iota);
  CHECK(walk_order(9, 50, 4) == a);
  CHECK(walk_order(9, 50, 5) != a);
}

TEST_CASE("pass-through walk length is uniform on 1..n") {
  const int n = 20;
  const auto net = passthrough_network(n);
  const auto x = BitString::ones(n);
  std::vector<double> steps;
  for (std::uint64_t t = 0; t < 10000; ++t) steps.push_back(*random_flip_walk(net, x, walk_order(3, n, t)).distance);
  const auto ms = stats::mean_stderr(steps);
  CHECK(std::abs(ms.mean - (n + 1) / 2.0) <= 5.0 * ms.std_error);
  CHECK(*std::min_element(steps.begin(), steps.end()) == 1.0);
  CHECK(*std::max_element(steps.begin(), steps.end()) == n);
}

TEST_CASE("walk evaluations across block boundaries") {
  const int n = 150;
  const auto net = sample_network(NetworkConfig::defaults(n, 3), 0);
  Engine rng(8);
  const auto x = BitString::random(n, rng);
  const auto order = walk_order(1, n, 0);
  const auto w = random_flip_walk(net, x, order);
  REQUIRE(w.distance);
  // reference: step by step
  BitString cur = x;
  int expected = n;
  for (int i = 0; i < n; ++i) {
    cur.flip(order[static_cast<std::size_t>(i)]);
    if (classify(net, cur) != classify(net, x)) {
      expected = i + 1;
      break;
    }
  }
  CHECK(*w.distance == expected);
}

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "btsbm/errors.hpp"
#include "btsbm/numerics.hpp"
#include "btsbm/postprocess.hpp"
#include "doctest.h"

using namespace btsbm;
using doctest::Approx;

namespace {

Draw make_draw(std::vector<int> labels, std::vector<double> strengths) {
  Draw d;
  d.labels = std::move(labels);
  d.strengths = std::move(strengths);
  return d;
}

Trace make_trace(std::vector<Draw> draws) {
  Trace t;
  t.n_items = draws.empty() ? 0 : static_cast<int>(draws[0].labels.size());
  for (std::size_t i = 0; i < draws.size(); ++i) draws[i].iteration = i + 1;
  t.draws = std::move(draws);
  return t;
}

RelabeledTrace make_relabeled(std::vector<Draw> draws) { return relabel(make_trace(std::move(draws))); }

Partition random_partition(int n, RngStream& rng) {
  std::vector<int> labels(n);
  const int k = 1 + static_cast<int>(rng.uniform() * n);
  for (int& x : labels) x = static_cast<int>(rng.uniform() * k);
  return Partition::canonical(labels);
}

}  // namespace

TEST_CASE("relabel sorts blocks by decreasing strength") {
  const auto r = make_relabeled({make_draw({0, 1, 2}, {0.5, 2.0, 1.0})});
  CHECK(r.draws[0].strengths == std::vector<double>{2.0, 1.0, 0.5});
  CHECK(r.draws[0].labels == std::vector<int>{2, 0, 1});

  const auto same = make_relabeled({make_draw({0, 1, 1}, {3.0, 1.0})});
  CHECK(same.draws[0].labels == std::vector<int>{0, 1, 1});

  const auto tie = make_relabeled({make_draw({1, 0, 2}, {1.0, 1.0, 2.0})});
  CHECK(tie.draws[0].labels == std::vector<int>{2, 1, 0});
}

TEST_CASE("relabel preserves every partition") {
  RngStream rng(4);
  std::vector<Draw> draws;
  for (int t = 0; t < 50; ++t) {
    const Partition p = random_partition(12, rng);
    std::vector<double> s(p.num_blocks());
    for (double& x : s) x = sample_gamma(2.0, 1.0, rng);
    draws.push_back(make_draw(std::vector<int>(p.labels().begin(), p.labels().end()), s));
  }
  const Trace t = make_trace(draws);
  const RelabeledTrace r = relabel(t);
  for (std::size_t i = 0; i < draws.size(); ++i) {
    CHECK(vi_distance(t.draws[i].labels, r.draws[i].labels) == 0.0);
    CHECK(std::is_sorted(r.draws[i].strengths.rbegin(), r.draws[i].strengths.rend()));
  }
}

TEST_CASE("variation of information") {
  const Partition one = Partition::one_block(4);
  const Partition single = Partition::singletons(4);
  CHECK(vi_distance(one, one) == 0.0);
  CHECK(vi_distance(one, single) == Approx(std::log(4.0)));
  RngStream rng(9);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 19);
    const auto a = random_partition(n, rng);
    const auto b = random_partition(n, rng);
    const auto c = random_partition(n, rng);
    const double ab = vi_distance(a, b);
    CHECK(ab == vi_distance(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= vi_distance(a, c) + vi_distance(c, b) + 1e-12);
    std::vector<int> perm(a.labels().begin(), a.labels().end());
    for (int& x : perm) x = a.num_blocks() - 1 - x;
    CHECK(std::abs(vi_distance(Partition(perm), b) - ab) < 1e-12);
  }
}

TEST_CASE("adjusted Rand index") {
  const Partition p(std::vector<int>{0, 0, 1, 1, 2});
  CHECK(adjusted_rand_index(p, p) == Approx(1.0));
  CHECK(adjusted_rand_index(p, Partition(std::vector<int>{2, 2, 0, 0, 1})) == Approx(1.0));
  CHECK(adjusted_rand_index(Partition::one_block(6), Partition::singletons(6)) == Approx(0.0));
  // Hubert-Arabie value for a small contingency table, computed by hand:
  // index 2, expected 6*3/15 = 1.2, max (6+3)/2 = 4.5.
  const Partition a(std::vector<int>{0, 0, 0, 1, 1, 1});
  const Partition b(std::vector<int>{0, 0, 1, 1, 2, 2});
  CHECK(adjusted_rand_index(a, b) == Approx((2 - 1.2) / (4.5 - 1.2)));
}

TEST_CASE("consensus partition") {
  const std::vector<int> pa{0, 0, 1, 1};
  const std::vector<int> pb{0, 1, 1, 1};
  std::vector<Draw> draws;
  for (int t = 0; t < 9; ++t) draws.push_back(make_draw(pa, {2.0, 0.5}));
  draws.push_back(make_draw(pb, {2.0, 0.5}));
  const auto c = consensus_partition(make_relabeled(draws));
  CHECK(c.point_partition.same_clustering(Partition(pa)));
  CHECK(c.k_point == 2);
  CHECK(c.expected_vi == Approx(0.1 * vi_distance(Partition(pa), Partition(pb))));

  const auto single = consensus_partition(make_relabeled({make_draw(pb, {1.0, 1.0})}));
  CHECK(single.point_partition.same_clustering(Partition(pb)));
  CHECK(single.expected_vi == 0.0);
}

TEST_CASE("consensus expected VI is minimal over sampled candidates") {
  RngStream rng(12);
  std::vector<Draw> draws;
  for (int t = 0; t < 60; ++t) {
    const Partition p = random_partition(7, rng);
    draws.push_back(make_draw(std::vector<int>(p.labels().begin(), p.labels().end()),
                              std::vector<double>(p.num_blocks(), 1.0)));
  }
  const auto r = make_relabeled(draws);
  const auto c = consensus_partition(r);
  const auto sample = distinct_partitions(r.draws);
  CHECK(c.expected_vi == Approx(expected_vi(c.point_partition, sample)).epsilon(1e-12));
  for (const auto& p : sample.partitions) CHECK(c.expected_vi <= expected_vi(p, sample) + 1e-12);
}

TEST_CASE("credible ball") {
  const std::vector<int> base{0, 0, 1, 1};
  std::vector<Draw> same(5, make_draw(base, {2.0, 1.0}));
  const auto b0 = credible_ball(make_relabeled(same), Partition(base), 0.05);
  CHECK(b0.epsilon_star == 0.0);
  CHECK(b0.vertical_upper.same_clustering(Partition(base)));
  CHECK(b0.horizontal.same_clustering(Partition(base)));

  // Three equally weighted partitions at increasing distance.
  const Partition near(std::vector<int>{0, 0, 1, 2});
  const Partition far = Partition::singletons(4);
  const auto r = make_relabeled({make_draw(base, {2.0, 1.0}), make_draw({0, 0, 1, 2}, {3.0, 2.0, 1.0}),
                                 make_draw({0, 1, 2, 3}, {4.0, 3.0, 2.0, 1.0})});
  const auto ball = credible_ball(r, Partition(base), 0.05);
  CHECK(ball.epsilon_star == Approx(vi_distance(Partition(base), far)));
  CHECK(ball.horizontal.same_clustering(far));
  CHECK(ball.vertical_upper.same_clustering(Partition(base)));
  CHECK(ball.vertical_lower.same_clustering(far));
  CHECK(ball.k_bounds.first <= ball.k_bounds.second);
  CHECK(ball.coverage >= 0.95);

  const auto half = credible_ball(r, Partition(base), 0.5);
  CHECK(half.epsilon_star == Approx(vi_distance(Partition(base), near)));
  CHECK(half.coverage == Approx(2.0 / 3.0));
  CHECK_THROWS_AS(credible_ball(r, Partition(base), 0.0), DomainError);
}

TEST_CASE("credible ball coverage is minimal among thresholds") {
  RngStream rng(5);
  std::vector<Draw> draws;
  for (int t = 0; t < 200; ++t) {
    const Partition p = random_partition(6, rng);
    draws.push_back(make_draw(std::vector<int>(p.labels().begin(), p.labels().end()),
                              std::vector<double>(p.num_blocks(), 1.0)));
  }
  const auto r = make_relabeled(draws);
  const auto point = consensus_partition(r).point_partition;
  const auto ball = credible_ball(r, point, 0.1);
  std::vector<double> dist;
  for (const auto& d : r.draws) dist.push_back(vi_distance(point, d.partition()));
  const auto cover = [&](double eps) {
    return std::count_if(dist.begin(), dist.end(), [&](double x) { return x <= eps; }) / double(dist.size());
  };
  CHECK(cover(ball.epsilon_star) >= 0.9);
  CHECK(cover(ball.epsilon_star) == Approx(ball.coverage));
  for (double x : dist) {
    if (x < ball.epsilon_star) CHECK(cover(x) < 0.9);
  }
  for (const Partition* b : {&ball.vertical_upper, &ball.vertical_lower, &ball.horizontal}) {
    CHECK(vi_distance(point, *b) <= ball.epsilon_star + 1e-12);
  }
}

TEST_CASE("K posterior") {
  std::vector<Draw> draws(7, make_draw({0, 1, 2}, {3.0, 1.0, 0.5}));
  auto kp = k_posterior(make_trace(draws));
  CHECK(kp.mode == 3);
  CHECK(kp.probabilities.at(3) == 1.0);
  CHECK(kp.ci95 == std::pair<int, int>{3, 3});

  std::vector<Draw> mixed;
  const int counts[] = {259, 315, 216, 110, 56, 25, 19};
  for (int k = 3; k <= 9; ++k) {
    std::vector<int> labels(10);
    for (int i = 0; i < 10; ++i) labels[i] = i % k;
    for (int c = 0; c < counts[k - 3]; ++c) mixed.push_back(make_draw(labels, std::vector<double>(k, 1.0)));
  }
  kp = k_posterior(make_trace(mixed));
  CHECK(kp.mode == 4);
  double total = 0;
  for (const auto& [k, p] : kp.probabilities) total += p;
  CHECK(total == Approx(1.0).epsilon(1e-12));

  std::vector<Draw> bimodal;
  for (int c = 0; c < 5; ++c) {
    bimodal.push_back(make_draw({0, 1, 2, 0}, {1, 1, 1}));
    bimodal.push_back(make_draw({0, 1, 2, 3}, {1, 1, 1, 1}));
  }
  CHECK(k_posterior(make_trace(bimodal)).mode == 3);
}

TEST_CASE("membership probabilities") {
  const auto one = make_relabeled({make_draw({0, 1, 1}, {1.0, 2.0})});
  const auto m = membership_probs(one);
  CHECK(m.rows == 3);
  CHECK(m.cols == 2);
  CHECK(m(0, 1) == 1.0);
  CHECK(m(1, 0) == 1.0);

  const auto two = make_relabeled({make_draw({0, 1, 1}, {2.0, 1.0}), make_draw({1, 0, 0}, {2.0, 1.0})});
  const auto m2 = membership_probs(two);
  CHECK(m2(0, 0) == 0.5);
  CHECK(m2(0, 1) == 0.5);
  for (int i = 0; i < m2.rows; ++i) {
    double s = 0;
    for (int k = 0; k < m2.cols; ++k) s += m2(i, k);
    CHECK(s == Approx(1.0));
  }
  const auto cond = membership_probs(
      make_relabeled({make_draw({0, 1, 1}, {2.0, 1.0}), make_draw({0, 1, 2}, {3.0, 2.0, 1.0})}), 3);
  CHECK(cond.cols == 3);
  CHECK(cond(2, 2) == 1.0);
  CHECK_THROWS_AS(membership_probs(one, 5), DomainError);
}

TEST_CASE("player strengths and HPD") {
  const auto constant = make_relabeled(std::vector<Draw>(4, make_draw({0, 1}, {2.0, 0.5})));
  const auto s = player_strengths(constant, std::nullopt, 0.95);
  CHECK(s[0].mean == Approx(2.0));
  CHECK(s[0].hpd_lo == s[0].hpd_hi);

  const auto [lo, hi] = hpd_interval({1.0, 2.0, 1.0, 2.0}, 0.95);
  CHECK(lo == 1.0);
  CHECK(hi == 2.0);
  const auto [l2, h2] = hpd_interval({0.0, 5.0, 5.1, 5.2, 5.3, 5.4, 5.5, 5.6, 5.7, 5.8}, 0.9);
  CHECK(l2 == 5.0);
  CHECK(h2 == 5.8);

  std::vector<Draw> draws{make_draw({0, 0, 1}, {2.0, 0.5}), make_draw({0, 1, 1}, {3.0, 1.0 / 3.0}),
                          make_draw({0, 0, 0}, {1.0})};
  auto fwd = player_strengths(make_relabeled(draws), std::nullopt, 0.9);
  std::reverse(draws.begin(), draws.end());
  auto rev = player_strengths(make_relabeled(draws), std::nullopt, 0.9);
  for (std::size_t i = 0; i < fwd.size(); ++i) CHECK(fwd[i].mean == rev[i].mean);
}

TEST_CASE("balance entropy") {
  const std::vector<int> even{3, 3, 3};
  CHECK(normalized_block_entropy(even) == 1.0);
  const std::vector<int> single{5};
  CHECK(normalized_block_entropy(single) == 0.0);
  const std::vector<int> skew{2, 103};
  CHECK(std::abs(normalized_block_entropy(skew) - 0.13605928623877508) < 1e-12);

  const auto t = make_trace({make_draw({0, 0, 1, 1}, {1, 1}), make_draw({0, 0, 0, 0}, {1}),
                             make_draw({0, 0, 0, 1}, {1, 1})});
  const auto b = balance_entropy(t);
  REQUIRE(b.per_draw_normalized.size() == 3);
  CHECK(b.per_draw_normalized[0] == 1.0);
  CHECK(b.per_draw_normalized[1] == 0.0);
  for (double h : b.per_draw_normalized) {
    CHECK(h >= 0.0);
    CHECK(h <= 1.0);
  }
  CHECK(b.per_draw_entropy[0] == Approx(std::log(2.0)));
}

TEST_CASE("quantile type 7") {
  CHECK(quantile({1, 2, 3, 4}, 0.5) == Approx(2.5));
  CHECK(quantile({5}, 0.9) == 5.0);
  CHECK(quantile({1, 2, 3, 4, 5}, 0.0) == 1.0);
  CHECK(quantile({1, 2, 3, 4, 5}, 1.0) == 5.0);
}

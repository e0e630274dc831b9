#include "btsbm/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <unordered_map>

#include "btsbm/errors.hpp"

namespace btsbm {

namespace {

constexpr double kTieTolerance = 1e-12;

struct LabelHash {
  std::size_t operator()(const std::vector<int>& v) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (int x : v) {
      h ^= static_cast<std::uint64_t>(x) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

// m·ln m in fixed point (2^-52 units). Integer sums are exact and order
// independent, so VI is exactly symmetric and exactly 0 on equal partitions.
using Fixed = __int128;
constexpr double kFixedScale = 4503599627370496.0;  // 2^52

Fixed x_log_x(int m) {
  if (m <= 1) return 0;
  const double v = m * std::log(static_cast<double>(m));
  const double whole = std::floor(v);
  return (static_cast<Fixed>(whole) << 52) + static_cast<Fixed>(std::llround((v - whole) * kFixedScale));
}

double to_double(Fixed f) {
  const bool neg = f < 0;
  if (neg) f = -f;
  const double whole = static_cast<double>(static_cast<std::int64_t>(f >> 52));
  const double frac = static_cast<double>(static_cast<std::int64_t>(f & ((Fixed(1) << 52) - 1))) / kFixedScale;
  return neg ? -(whole + frac) : whole + frac;
}

int max_label(std::span<const int> labels) {
  int k = -1;
  for (int x : labels) {
    if (x < 0) throw DomainError("labels must be non-negative");
    k = std::max(k, x);
  }
  return k + 1;
}

std::vector<int> block_sizes(std::span<const int> labels, int k_blocks) {
  std::vector<int> sizes(k_blocks, 0);
  for (int x : labels) ++sizes[x];
  return sizes;
}

Fixed sum_x_log_x(std::span<const int> sizes) {
  Fixed s = 0;
  for (int m : sizes) s += x_log_x(m);
  return s;
}

// Reusable scorer: VI from one candidate to many partitions without
// reallocating the contingency table.
class ViScorer {
 public:
  explicit ViScorer(std::size_t n) : n_(n) {}

  double distance(std::span<const int> a, int ka, Fixed a_term, std::span<const int> b, int kb, Fixed b_term) {
    counts_.assign(static_cast<std::size_t>(ka) * kb, 0);
    for (std::size_t i = 0; i < n_; ++i) ++counts_[static_cast<std::size_t>(a[i]) * kb + b[i]];
    Fixed joint = 0;
    for (int c : counts_) joint += x_log_x(c);
    const double vi = to_double(a_term + b_term - 2 * joint) / static_cast<double>(n_);
    return vi < 0.0 ? 0.0 : vi;
  }

 private:
  std::size_t n_;
  std::vector<int> counts_;
};

struct PreparedSample {
  const PartitionSample* sample;
  std::vector<Fixed> terms;
};

PreparedSample prepare(const PartitionSample& sample) {
  PreparedSample p{&sample, {}};
  p.terms.reserve(sample.partitions.size());
  for (const auto& part : sample.partitions) p.terms.push_back(sum_x_log_x(part.sizes()));
  return p;
}

double expected_vi_prepared(const Partition& candidate, const PreparedSample& prepared, ViScorer& scorer) {
  const Fixed a_term = sum_x_log_x(candidate.sizes());
  double total = 0.0;
  const auto& parts = prepared.sample->partitions;
  for (std::size_t s = 0; s < parts.size(); ++s) {
    total += prepared.sample->weights[s] * scorer.distance(candidate.labels(), candidate.num_blocks(), a_term,
                                                            parts[s].labels(), parts[s].num_blocks(),
                                                            prepared.terms[s]);
  }
  return total;
}

std::vector<double> draw_distances(const Partition& point, const PartitionSample& sample) {
  ViScorer scorer(point.size());
  const Fixed a_term = sum_x_log_x(point.sizes());
  std::vector<double> d;
  d.reserve(sample.partitions.size());
  for (const auto& p : sample.partitions) {
    d.push_back(scorer.distance(point.labels(), point.num_blocks(), a_term, p.labels(), p.num_blocks(),
                                sum_x_log_x(p.sizes())));
  }
  return d;
}

std::vector<const Draw*> filter_draws(const RelabeledTrace& trace, std::optional<int> condition_K) {
  std::vector<const Draw*> used;
  for (const auto& d : trace.draws) {
    if (!condition_K || d.num_blocks() == *condition_K) used.push_back(&d);
  }
  if (used.empty()) throw DomainError("no draws match the requested number of blocks");
  return used;
}

}  // namespace

RelabeledTrace relabel(const Trace& trace) {
  RelabeledTrace out;
  out.n_items = trace.n_items;
  out.draws.reserve(trace.draws.size());
  std::vector<int> order;
  std::vector<int> rank;
  for (const auto& d : trace.draws) {
    const int k_blocks = d.num_blocks();
    order.resize(k_blocks);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return d.strengths[x] > d.strengths[y]; });
    rank.assign(k_blocks, 0);
    Draw r;
    r.iteration = d.iteration;
    r.chain = d.chain;
    r.strengths.resize(k_blocks);
    for (int pos = 0; pos < k_blocks; ++pos) {
      rank[order[pos]] = pos;
      r.strengths[pos] = d.strengths[order[pos]];
    }
    r.labels.resize(d.labels.size());
    for (std::size_t i = 0; i < d.labels.size(); ++i) r.labels[i] = rank[d.labels[i]];
    out.draws.push_back(std::move(r));
  }
  return out;
}

double vi_distance(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw DomainError("vi_distance: partitions cover different item counts");
  if (a.empty()) return 0.0;
  const int ka = max_label(a);
  const int kb = max_label(b);
  ViScorer scorer(a.size());
  return scorer.distance(a, ka, sum_x_log_x(block_sizes(a, ka)), b, kb, sum_x_log_x(block_sizes(b, kb)));
}

double vi_distance(const Partition& a, const Partition& b) { return vi_distance(a.labels(), b.labels()); }

double adjusted_rand_index(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) throw DomainError("adjusted_rand_index: partitions cover different item counts");
  const std::size_t n = a.size();
  auto choose2 = [](double m) { return m * (m - 1.0) / 2.0; };
  const int ka = a.num_blocks();
  const int kb = b.num_blocks();
  std::vector<int> table(static_cast<std::size_t>(ka) * kb, 0);
  for (std::size_t i = 0; i < n; ++i) ++table[static_cast<std::size_t>(a.label(i)) * kb + b.label(i)];
  double index = 0.0;
  for (int c : table) index += choose2(c);
  double sum_a = 0.0;
  for (int m : a.sizes()) sum_a += choose2(m);
  double sum_b = 0.0;
  for (int m : b.sizes()) sum_b += choose2(m);
  const double total = choose2(static_cast<double>(n));
  if (total == 0.0) return 1.0;
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return a.same_clustering(b) ? 1.0 : 0.0;
  return (index - expected) / (max_index - expected);
}

PartitionSample distinct_partitions(std::span<const Draw> draws) {
  PartitionSample out;
  std::unordered_map<std::vector<int>, std::size_t, LabelHash> seen;
  auto& counts = out.counts;
  for (std::size_t t = 0; t < draws.size(); ++t) {
    auto canon = Partition::canonical(draws[t].labels);
    auto key = std::vector<int>(canon.labels().begin(), canon.labels().end());
    auto [it, inserted] = seen.try_emplace(std::move(key), out.partitions.size());
    if (inserted) {
      out.partitions.push_back(std::move(canon));
      out.first.push_back(t);
      counts.push_back(0);
    }
    ++counts[it->second];
  }
  const double total = static_cast<double>(draws.size());
  out.weights.reserve(counts.size());
  for (std::size_t c : counts) out.weights.push_back(static_cast<double>(c) / total);
  return out;
}

double expected_vi(const Partition& candidate, const PartitionSample& sample) {
  ViScorer scorer(candidate.size());
  return expected_vi_prepared(candidate, prepare(sample), scorer);
}

ConsensusSummary consensus_partition(const RelabeledTrace& trace, const ConsensusOptions& options) {
  if (trace.draws.empty()) throw DomainError("consensus_partition: empty trace");
  const PartitionSample sample = distinct_partitions(trace.draws);
  const PreparedSample prepared = prepare(sample);
  ViScorer scorer(static_cast<std::size_t>(trace.n_items));

  std::vector<std::size_t> order(sample.partitions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sample.weights[x] > sample.weights[y]; });
  if (order.size() > options.max_candidates) order.resize(std::max<std::size_t>(options.max_candidates, 1));

  // Ties: fewer blocks, then earlier first appearance.
  std::size_t best = order.front();
  double best_vi = expected_vi_prepared(sample.partitions[best], prepared, scorer);
  for (std::size_t c = 1; c < order.size(); ++c) {
    const std::size_t idx = order[c];
    const double v = expected_vi_prepared(sample.partitions[idx], prepared, scorer);
    const bool better = v < best_vi - kTieTolerance;
    const bool tie = std::abs(v - best_vi) <= kTieTolerance;
    const auto& cand = sample.partitions[idx];
    const auto& inc = sample.partitions[best];
    if (better || (tie && (cand.num_blocks() < inc.num_blocks() ||
                           (cand.num_blocks() == inc.num_blocks() && sample.first[idx] < sample.first[best])))) {
      best = idx;
      best_vi = v;
    }
  }

  Partition incumbent = sample.partitions[best];
  if (options.greedy_merge) {
    for (;;) {
      const int k_blocks = incumbent.num_blocks();
      double step_vi = best_vi;
      std::optional<Partition> step;
      for (int p = 0; p < k_blocks; ++p) {
        for (int q = p + 1; q < k_blocks; ++q) {
          std::vector<int> merged(incumbent.labels().begin(), incumbent.labels().end());
          for (int& x : merged) {
            if (x == q) x = p;
          }
          Partition cand = Partition::canonical(merged);
          const double v = expected_vi_prepared(cand, prepared, scorer);
          if (v < step_vi - kTieTolerance) {
            step_vi = v;
            step = std::move(cand);
          }
        }
      }
      if (!step) break;
      incumbent = std::move(*step);
      best_vi = step_vi;
    }
  }
  ConsensusSummary out;
  out.k_point = incumbent.num_blocks();
  out.point_partition = std::move(incumbent);
  out.expected_vi = best_vi;
  return out;
}

CredibleBall credible_ball(const RelabeledTrace& trace, const Partition& point, double alpha) {
  if (trace.draws.empty()) throw DomainError("credible_ball: empty trace");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("credible_ball: alpha must lie in (0, 1)");
  const PartitionSample sample = distinct_partitions(trace.draws);
  const std::vector<double> dist = draw_distances(point, sample);

  std::vector<std::size_t> by_distance(dist.size());
  std::iota(by_distance.begin(), by_distance.end(), 0);
  std::stable_sort(by_distance.begin(), by_distance.end(), [&](std::size_t x, std::size_t y) { return dist[x] < dist[y]; });
  CredibleBall ball;
  const double total = static_cast<double>(trace.draws.size());
  std::size_t covered = 0;
  for (std::size_t pos = 0; pos < by_distance.size(); ++pos) {
    covered += sample.counts[by_distance[pos]];
    const double mass = static_cast<double>(covered) / total;
    const bool last_at_this_distance =
        pos + 1 == by_distance.size() || dist[by_distance[pos + 1]] > dist[by_distance[pos]];
    if (last_at_this_distance && mass >= 1.0 - alpha - kTieTolerance) {
      ball.epsilon_star = dist[by_distance[pos]];
      ball.coverage = mass;
      break;
    }
  }

  // Candidates inside the ball, scanned in order of first appearance.
  std::vector<std::size_t> inside;
  for (std::size_t s = 0; s < dist.size(); ++s) {
    if (dist[s] <= ball.epsilon_star) inside.push_back(s);
  }
  std::sort(inside.begin(), inside.end(), [&](std::size_t x, std::size_t y) { return sample.first[x] < sample.first[y]; });
  std::size_t upper = inside.front();
  std::size_t lower = inside.front();
  std::size_t horizontal = inside.front();
  for (std::size_t s : inside) {
    const int k = sample.partitions[s].num_blocks();
    const int ku = sample.partitions[upper].num_blocks();
    const int kl = sample.partitions[lower].num_blocks();
    if (k < ku || (k == ku && dist[s] > dist[upper])) upper = s;
    if (k > kl || (k == kl && dist[s] > dist[lower])) lower = s;
    if (dist[s] > dist[horizontal]) horizontal = s;
  }
  ball.vertical_upper = sample.partitions[upper];
  ball.vertical_lower = sample.partitions[lower];
  ball.horizontal = sample.partitions[horizontal];
  ball.k_bounds = {ball.vertical_upper.num_blocks(), ball.vertical_lower.num_blocks()};
  return ball;
}

KPosterior k_posterior(std::span<const Draw> draws) {
  if (draws.empty()) throw DomainError("k_posterior: empty trace");
  KPosterior out;
  for (const auto& d : draws) out.probabilities[d.num_blocks()] += 1.0;
  const double total = static_cast<double>(draws.size());
  double best = -1.0;
  for (auto& [k, p] : out.probabilities) {
    p /= total;
    if (p > best) {  // strict: ties keep the smaller K
      best = p;
      out.mode = k;
    }
  }
  double cdf = 0.0;
  bool lo_set = false;
  for (const auto& [k, p] : out.probabilities) {
    cdf += p;
    if (!lo_set && cdf >= 0.025 - kTieTolerance) {
      out.ci95.first = k;
      lo_set = true;
    }
    if (cdf >= 0.975 - kTieTolerance) {
      out.ci95.second = k;
      break;
    }
  }
  if (out.ci95.second == 0) out.ci95.second = out.probabilities.rbegin()->first;
  return out;
}

KPosterior k_posterior(const Trace& trace) { return k_posterior(trace.draws); }

MembershipMatrix membership_probs(const RelabeledTrace& trace, std::optional<int> condition_K) {
  const auto used = filter_draws(trace, condition_K);
  MembershipMatrix m;
  m.rows = trace.n_items;
  m.cols = 0;
  for (const Draw* d : used) m.cols = std::max(m.cols, d->num_blocks());
  m.values.assign(static_cast<std::size_t>(m.rows) * m.cols, 0.0);
  const double w = 1.0 / static_cast<double>(used.size());
  for (const Draw* d : used) {
    for (int i = 0; i < m.rows; ++i) m.values[static_cast<std::size_t>(i) * m.cols + d->labels[i]] += w;
  }
  return m;
}

std::pair<double, double> hpd_interval(std::vector<double> values, double mass) {
  if (values.empty()) throw DomainError("hpd_interval: no values");
  if (!(mass > 0.0 && mass <= 1.0)) throw DomainError("hpd_interval: mass must lie in (0, 1]");
  std::sort(values.begin(), values.end());
  const std::size_t s = values.size();
  const auto keep = std::min(s, static_cast<std::size_t>(std::ceil(mass * static_cast<double>(s) - 1e-9)));
  const std::size_t span = std::max<std::size_t>(keep, 1) - 1;
  std::size_t best = 0;
  for (std::size_t lo = 1; lo + span < s; ++lo) {
    if (values[lo + span] - values[lo] < values[best + span] - values[best]) best = lo;
  }
  return {values[best], values[best + span]};
}

std::vector<StrengthSummary> player_strengths(const RelabeledTrace& trace, std::optional<int> condition_K,
                                              double hpd_mass) {
  const auto used = filter_draws(trace, condition_K);
  std::vector<StrengthSummary> out(trace.n_items);
  std::vector<double> values(used.size());
  for (int i = 0; i < trace.n_items; ++i) {
    for (std::size_t t = 0; t < used.size(); ++t) values[t] = used[t]->strengths[used[t]->labels[i]];
    // Sorted before summing so the mean does not depend on draw order.
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    out[i].mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    std::tie(out[i].hpd_lo, out[i].hpd_hi) = hpd_interval(std::move(sorted), hpd_mass);
  }
  return out;
}

double block_entropy(std::span<const int> sizes) {
  double n = 0.0;
  for (int m : sizes) n += m;
  double h = 0.0;
  for (int m : sizes) {
    if (m > 0) {
      const double p = m / n;
      h -= p * std::log(p);
    }
  }
  return h;
}

double normalized_block_entropy(std::span<const int> sizes) {
  if (sizes.size() <= 1) return 0.0;
  if (std::adjacent_find(sizes.begin(), sizes.end(), std::not_equal_to<>()) == sizes.end()) return 1.0;
  return std::clamp(block_entropy(sizes) / std::log(static_cast<double>(sizes.size())), 0.0, 1.0);
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (values.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - lo) * (values[hi] - values[lo]);
}

BalanceSeries balance_entropy(const Trace& trace) {
  if (trace.draws.empty()) throw DomainError("balance_entropy: empty trace");
  BalanceSeries out;
  out.per_draw_entropy.reserve(trace.draws.size());
  out.per_draw_normalized.reserve(trace.draws.size());
  for (const auto& d : trace.draws) {
    const auto sizes = block_sizes(d.labels, d.num_blocks());
    out.per_draw_entropy.push_back(block_entropy(sizes));
    out.per_draw_normalized.push_back(normalized_block_entropy(sizes));
  }
  out.mean = std::accumulate(out.per_draw_normalized.begin(), out.per_draw_normalized.end(), 0.0) /
             static_cast<double>(out.per_draw_normalized.size());
  out.ci95 = {quantile(out.per_draw_normalized, 0.025), quantile(out.per_draw_normalized, 0.975)};
  return out;
}

}  // namespace btsbm

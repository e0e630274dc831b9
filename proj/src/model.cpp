#include "btsbm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "btsbm/errors.hpp"
#include "btsbm/numerics.hpp"

namespace btsbm {

ComparisonData::ComparisonData(int n_items, std::span<const WinRecord> records, std::vector<std::string> names)
    : n_items_(n_items), names_(std::move(names)) {
  if (n_items < 0) throw DataError("item count must be non-negative");
  if (!names_.empty() && static_cast<int>(names_.size()) != n_items) {
    throw DataError("name table size does not match item count");
  }
  if (names_.empty()) {
    names_.reserve(n_items);
    for (int i = 0; i < n_items; ++i) names_.push_back("item" + std::to_string(i));
  }
  for (const auto& r : records) {
    if (r.winner < 0 || r.winner >= n_items || r.loser < 0 || r.loser >= n_items) {
      throw DataError("item index out of range");
    }
    if (r.winner == r.loser) throw DataError("self-comparison for item " + names_[r.winner]);
    if (r.count < 0) throw DataError("negative win count");
    if (r.count == 0) continue;
    const int i = std::min(r.winner, r.loser);
    const int j = std::max(r.winner, r.loser);
    auto [it, inserted] = index_.try_emplace(key(i, j), edges_.size());
    if (inserted) edges_.push_back(Edge{i, j, 0, 0});
    Edge& e = edges_[it->second];
    (r.winner == i ? e.wins_ij : e.wins_ji) += r.count;
  }
}

std::uint64_t ComparisonData::key(int i, int j) noexcept {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) | static_cast<std::uint32_t>(j);
}

std::ptrdiff_t ComparisonData::edge_index(int i, int j) const {
  if (i == j) return -1;
  auto it = index_.find(key(std::min(i, j), std::max(i, j)));
  return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

int ComparisonData::wins(int i, int j) const {
  const auto e = edge_index(i, j);
  if (e < 0) return 0;
  const Edge& edge = edges_[e];
  return edge.i == i ? edge.wins_ij : edge.wins_ji;
}

int ComparisonData::matches(int i, int j) const {
  const auto e = edge_index(i, j);
  return e < 0 ? 0 : edges_[e].matches();
}

ComparisonData ComparisonData::with_wins(std::span<const int> new_wins_ij) const {
  if (new_wins_ij.size() != edges_.size()) throw DataError("win vector does not match edge count");
  ComparisonData out = *this;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const int n = edges_[e].matches();
    if (new_wins_ij[e] < 0 || new_wins_ij[e] > n) throw DataError("wins exceed matches on edge");
    out.edges_[e].wins_ij = new_wins_ij[e];
    out.edges_[e].wins_ji = n - new_wins_ij[e];
  }
  return out;
}

ComparisonData ComparisonData::without_edge(std::size_t edge) const {
  if (edge >= edges_.size()) throw DataError("edge index out of range");
  std::vector<WinRecord> records;
  records.reserve(2 * edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (e == edge) continue;
    records.push_back({edges_[e].i, edges_[e].j, edges_[e].wins_ij});
    records.push_back({edges_[e].j, edges_[e].i, edges_[e].wins_ji});
  }
  return ComparisonData(n_items_, records, names_);
}

std::vector<std::string> ComparisonData::warnings() const {
  std::vector<std::string> out;
  if (edges_.empty()) {
    out.push_back("dataset has no comparisons");
    return out;
  }
  std::vector<int> parent(n_items_);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::vector<int> degree(n_items_, 0);
  for (const auto& e : edges_) {
    ++degree[e.i];
    ++degree[e.j];
    parent[find(e.i)] = find(e.j);
  }
  std::vector<std::string> idle;
  for (int i = 0; i < n_items_; ++i) {
    if (degree[i] == 0) idle.push_back(names_[i]);
  }
  if (!idle.empty()) {
    std::ostringstream msg;
    msg << idle.size() << " item(s) without matches (assignment driven by the prior):";
    for (const auto& name : idle) msg << ' ' << name;
    out.push_back(msg.str());
  }
  std::vector<std::vector<int>> components;
  std::vector<int> component_of(n_items_, -1);
  for (int i = 0; i < n_items_; ++i) {
    if (degree[i] == 0) continue;
    const int root = find(i);
    if (component_of[root] < 0) {
      component_of[root] = static_cast<int>(components.size());
      components.emplace_back();
    }
    components[component_of[root]].push_back(i);
  }
  if (components.size() > 1) {
    std::ostringstream msg;
    msg << "comparison graph has " << components.size() << " connected components:";
    for (const auto& c : components) {
      msg << " {";
      for (std::size_t k = 0; k < c.size(); ++k) msg << (k ? "," : "") << names_[c[k]];
      msg << '}';
    }
    out.push_back(msg.str());
  }
  return out;
}

Partition::Partition(std::vector<int> labels) : labels_(std::move(labels)) {
  for (int x : labels_) {
    if (x < 0) throw DomainError("partition labels must be non-negative");
    if (x >= static_cast<int>(sizes_.size())) sizes_.resize(x + 1, 0);
    ++sizes_[x];
  }
  for (int m : sizes_) {
    if (m == 0) throw DomainError("partition labels must be contiguous");
  }
}

Partition Partition::canonical(std::span<const int> labels) {
  std::unordered_map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int x : labels) {
    auto [it, inserted] = remap.try_emplace(x, static_cast<int>(remap.size()));
    out.push_back(it->second);
  }
  return Partition(std::move(out));
}

Partition Partition::singletons(int n) {
  std::vector<int> labels(n);
  std::iota(labels.begin(), labels.end(), 0);
  return Partition(std::move(labels));
}

Partition Partition::one_block(int n) { return Partition(std::vector<int>(n, 0)); }

std::vector<int> Partition::canonical_labels() const {
  std::vector<int> remap(sizes_.size(), -1);
  std::vector<int> out(labels_.size());
  int next = 0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    int& r = remap[labels_[i]];
    if (r < 0) r = next++;
    out[i] = r;
  }
  return out;
}

bool Partition::same_clustering(const Partition& other) const {
  return size() == other.size() && num_blocks() == other.num_blocks() &&
         canonical_labels() == other.canonical_labels();
}

BlockStrengths::BlockStrengths(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("block strengths must be positive and finite");
  }
}

Hyperparameters Hyperparameters::validated() const {
  Hyperparameters h = *this;
  if (!(h.a > 0.0) || !std::isfinite(h.a)) throw ConfigError("Gamma shape a must be positive");
  if (h.b == 0.0) h.b = aligned_rate(h.a);
  if (!(h.b > 0.0) || !std::isfinite(h.b)) throw ConfigError("Gamma rate b must be positive");
  if (!(h.gamma > 0.0 && h.gamma < 1.0)) throw ConfigError("gamma must lie strictly inside (0, 1)");
  return h;
}

double bt_win_prob(double lambda_i, double lambda_j) {
  if (!(lambda_i > 0.0) || !(lambda_j > 0.0)) throw DomainError("strengths must be positive");
  return lambda_i / (lambda_i + lambda_j);
}

double binomial_log_pmf(int wins, int trials, double p) {
  const double log_choose =
      log_gamma(trials + 1.0) - log_gamma(wins + 1.0) - log_gamma(trials - wins + 1.0);
  double out = log_choose;
  if (wins > 0) out += wins * std::log(p);
  if (trials - wins > 0) out += (trials - wins) * std::log1p(-p);
  return out;
}

namespace {

void check_consistent(const ComparisonData& data, const Partition& partition, const BlockStrengths& strengths) {
  if (static_cast<int>(partition.size()) != data.n_items()) throw DomainError("partition size != item count");
  if (static_cast<int>(strengths.size()) != partition.num_blocks()) {
    throw DomainError("strength vector length != number of blocks");
  }
}

}  // namespace

double log_likelihood(const ComparisonData& data, const Partition& partition, const BlockStrengths& strengths) {
  check_consistent(data, partition, strengths);
  double total = 0.0;
  for (const auto& e : data.edges()) {
    const double p = bt_win_prob(strengths[partition.label(e.i)], strengths[partition.label(e.j)]);
    total += binomial_log_pmf(e.wins_ij, e.matches(), p);
  }
  return total;
}

double log_augmented_likelihood(const ComparisonData& data, const Partition& partition,
                                const BlockStrengths& strengths, const AugmentedLatents& latents) {
  check_consistent(data, partition, strengths);
  if (latents.z.size() != data.num_edges()) throw DomainError("latents not keyed by the edge set");
  double total = 0.0;
  const auto edges = data.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& edge = edges[e];
    const double li = strengths[partition.label(edge.i)];
    const double lj = strengths[partition.label(edge.j)];
    const int n = edge.matches();
    const double z = latents.z[e];
    // Joint density of (w_ij, Z_ij); integrating Z out leaves the binomial pmf.
    total += log_gamma(n + 1.0) - log_gamma(edge.wins_ij + 1.0) - log_gamma(edge.wins_ji + 1.0) +
             edge.wins_ij * std::log(li) + edge.wins_ji * std::log(lj) + (n - 1) * std::log(z) - log_gamma(n) -
             (li + lj) * z;
  }
  return total;
}

double aligned_rate(double a) {
  if (!(a > 0.0)) throw DomainError("aligned_rate requires a > 0");
  return std::exp(digamma(a));
}

double log_sd_tau(double a) {
  if (!(a > 0.0)) throw DomainError("log_sd_tau requires a > 0");
  return std::sqrt(trigamma(a));
}

std::vector<int> total_wins(const ComparisonData& data) {
  std::vector<int> w(data.n_items(), 0);
  for (const auto& e : data.edges()) {
    w[e.i] += e.wins_ij;
    w[e.j] += e.wins_ji;
  }
  return w;
}

SufficientStats compute_sufficient_stats(const ComparisonData& data, const AugmentedLatents& latents) {
  if (latents.z.size() != data.num_edges()) throw DomainError("latents not keyed by the edge set");
  SufficientStats stats{total_wins(data), std::vector<double>(data.n_items(), 0.0)};
  const auto edges = data.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    stats.total_z[edges[e].i] += latents.z[e];
    stats.total_z[edges[e].j] += latents.z[e];
  }
  return stats;
}

double new_cluster_bias(double a, int w_i, double z_i, double delta) {
  if (!(a > 0.0)) throw DomainError("new_cluster_bias requires a > 0");
  if (!(z_i >= 0.0)) throw DomainError("new_cluster_bias requires Z_i >= 0");
  const double psi = digamma(a);
  return -a * delta - (a + w_i) * (std::log(std::exp(psi - delta) + z_i) - std::log(std::exp(psi) + z_i));
}

}  // namespace btsbm

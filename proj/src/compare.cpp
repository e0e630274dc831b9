#include "btsbm/compare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "btsbm/errors.hpp"
#include "btsbm/numerics.hpp"

namespace btsbm {

namespace {

double log_choose(int n, int k) { return log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0); }

double sample_sd_times_sqrt_n(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(static_cast<double>(n) * ss / static_cast<double>(n - 1));
}

void check_trace_model(const Trace& trace, ModelKind model) {
  if (model != ModelKind::kBt) return;
  for (const auto& d : trace.draws) {
    if (d.num_blocks() != trace.n_items) throw DomainError("BT pointwise likelihood needs singleton draws");
  }
}

void accumulate(ElpdReport& report, std::size_t e, const PsisColumn& col) {
  report.per_edge_lpd[e] = col.lpd;
  report.pareto_k[e] = col.pareto_k;
  if (col.pareto_k > kParetoKThreshold) {
    ++report.n_bad_k;
    report.bad_edges.push_back(e);
  }
}

void finish(ElpdReport& report) {
  report.elpd = std::accumulate(report.per_edge_lpd.begin(), report.per_edge_lpd.end(), 0.0);
  report.se = sample_sd_times_sqrt_n(report.per_edge_lpd);
}

}  // namespace

Trace fit_standard_bt(const ComparisonData& data, const SamplerConfig& config) {
  return run_chain(data, config, ModelKind::kBt);
}

PointwiseLogLik::PointwiseLogLik(std::size_t draws, std::size_t edges)
    : draws_(draws), edges_(edges), values_(draws * edges, 0.0) {}

void edge_loglik_column(const Trace& trace, const Edge& edge, std::span<double> out) {
  const double base = log_choose(edge.matches(), edge.wins_ij);
  const double tied = base - edge.matches() * std::log(2.0);
  for (std::size_t t = 0; t < trace.draws.size(); ++t) {
    const Draw& d = trace.draws[t];
    if (d.labels[edge.i] == d.labels[edge.j]) {
      out[t] = tied;
      continue;
    }
    const double li = d.strengths[d.labels[edge.i]];
    const double lj = d.strengths[d.labels[edge.j]];
    // log p = log λ_i - log(λ_i + λ_j), stable for any scale.
    const double log_sum = std::log(li + lj);
    out[t] = base + edge.wins_ij * (std::log(li) - log_sum) + edge.wins_ji * (std::log(lj) - log_sum);
  }
}

PointwiseLogLik pointwise_loglik(const Trace& trace, const ComparisonData& data, ModelKind model) {
  check_trace_model(trace, model);
  PointwiseLogLik out(trace.draws.size(), data.num_edges());
  const auto edges = data.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) edge_loglik_column(trace, edges[e], out.column(e));
  return out;
}

PsisColumn psis_column(std::span<const double> loglik) {
  const std::size_t s = loglik.size();
  if (s == 0) throw DomainError("psis: no draws");
  PsisColumn out;
  out.log_weights.resize(s);
  const auto [lo_it, hi_it] = std::minmax_element(loglik.begin(), loglik.end());
  if (*lo_it == *hi_it) {
    out.lpd = *lo_it;
    std::fill(out.log_weights.begin(), out.log_weights.end(), -std::log(static_cast<double>(s)));
    return out;
  }

  // Raw log ratios for leaving this edge out, shifted so the largest is 0.
  std::vector<double> lw(s);
  for (std::size_t t = 0; t < s; ++t) lw[t] = -loglik[t];
  const double top = *std::max_element(lw.begin(), lw.end());
  for (double& x : lw) x -= top;

  auto tail_len = static_cast<std::size_t>(
      std::ceil(std::min(0.2 * static_cast<double>(s), 3.0 * std::sqrt(static_cast<double>(s)))));
  if (tail_len >= 5 && tail_len < s) {
    std::vector<std::size_t> order(s);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lw[a] < lw[b]; });
    const double cutoff = lw[order[s - tail_len - 1]];
    // Draws tied with the cutoff (e.g. both items in one block, so the edge
    // likelihood is constant) are not tail values; the tail shrinks to what
    // lies strictly above.
    std::size_t above = 0;
    const double tie_tol = 1e-12 * std::max(1.0, std::abs(cutoff));
    while (above < tail_len && lw[order[s - 1 - above]] > cutoff + tie_tol) ++above;
    tail_len = above;
    const double exp_cutoff = std::exp(cutoff);
    std::vector<double> exceed(tail_len);
    for (std::size_t m = 0; m < tail_len; ++m) exceed[m] = std::exp(lw[order[s - tail_len + m]]) - exp_cutoff;
    if (tail_len >= 5 && exceed.front() != exceed.back()) {
      try {
        const GpdFit fit = fit_generalized_pareto(exceed);
        out.pareto_k = fit.k_hat;
        for (std::size_t m = 0; m < tail_len; ++m) {
          const double p = (m + 0.5) / static_cast<double>(tail_len);
          // Truncated at the largest raw weight (log 0 after the shift).
          lw[order[s - tail_len + m]] =
              std::min(0.0, std::log(gpd_quantile(p, fit.k_hat, fit.sigma_hat) + exp_cutoff));
        }
        out.smoothed = true;
      } catch (const NumericError&) {
        out.pareto_k = std::numeric_limits<double>::infinity();
      }
    }
  }

  const double norm = log_sum_exp(lw);
  std::vector<double> terms(s);
  for (std::size_t t = 0; t < s; ++t) {
    out.log_weights[t] = lw[t] - norm;
    terms[t] = out.log_weights[t] + loglik[t];
  }
  out.lpd = std::clamp(log_sum_exp(terms), *lo_it, *hi_it);
  return out;
}

ElpdReport psis_loo(const PointwiseLogLik& loglik) {
  if (loglik.draws() == 0) throw DomainError("psis_loo: empty input");
  ElpdReport report;
  report.n_draws = loglik.draws();
  report.per_edge_lpd.resize(loglik.edges());
  report.pareto_k.resize(loglik.edges());
  for (std::size_t e = 0; e < loglik.edges(); ++e) accumulate(report, e, psis_column(loglik.column(e)));
  finish(report);
  return report;
}

ElpdReport psis_loo(const Trace& trace, const ComparisonData& data, ModelKind model) {
  if (trace.draws.empty()) throw DomainError("psis_loo: empty trace");
  check_trace_model(trace, model);
  ElpdReport report;
  report.n_draws = trace.draws.size();
  report.per_edge_lpd.resize(data.num_edges());
  report.pareto_k.resize(data.num_edges());
  std::vector<double> column(trace.draws.size());
  const auto edges = data.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    edge_loglik_column(trace, edges[e], column);
    accumulate(report, e, psis_column(column));
  }
  finish(report);
  return report;
}

DeltaElpd delta_elpd(const ElpdReport& m1, const ElpdReport& m2, DeltaSeMode mode) {
  if (m1.per_edge_lpd.size() != m2.per_edge_lpd.size()) throw DomainError("delta_elpd: edge sets differ");
  DeltaElpd out;
  out.delta = m1.elpd - m2.elpd;
  switch (mode) {
    case DeltaSeMode::kHalved:
      out.se_delta = std::sqrt(m1.se * m1.se + m2.se * m2.se) / 2.0;
      break;
    case DeltaSeMode::kConventional:
      out.se_delta = std::sqrt(m1.se * m1.se + m2.se * m2.se);
      break;
    case DeltaSeMode::kPaired: {
      std::vector<double> diff(m1.per_edge_lpd.size());
      for (std::size_t e = 0; e < diff.size(); ++e) diff[e] = m1.per_edge_lpd[e] - m2.per_edge_lpd[e];
      out.se_delta = sample_sd_times_sqrt_n(diff);
      break;
    }
  }
  return out;
}

}  // namespace btsbm

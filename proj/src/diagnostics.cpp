#include "dset/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dset/errors.hpp"

namespace dset::diag {

namespace {

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Biased autocovariance at one lag.
double autocovariance(std::span<const double> x, double mean, std::size_t lag) {
  const std::size_t n = x.size();
  double s = 0.0;
  for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - mean) * (x[i + lag] - mean);
  return s / static_cast<double>(n);
}

void check_grid(int dims, const std::array<int, 2>& cells, const std::array<double, 2>& lower,
                const std::array<double, 2>& upper) {
  if (dims != 1 && dims != 2) throw InputError("grid: only 1-D and 2-D lattices are supported");
  for (int k = 0; k < dims; ++k) {
    if (cells[static_cast<std::size_t>(k)] < 1) throw InputError("grid: cell counts must be positive");
    if (!(upper[static_cast<std::size_t>(k)] > lower[static_cast<std::size_t>(k)])) {
      throw InputError("grid: upper bound must exceed lower bound");
    }
  }
}

void normalise(GridDensity& g) {
  const double peak = *std::max_element(g.log_values.begin(), g.log_values.end());
  if (!std::isfinite(peak)) throw InputError("grid: density vanishes on every cell");
  g.probabilities.resize(g.log_values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < g.log_values.size(); ++i) {
    g.probabilities[i] = std::exp(g.log_values[i] - peak);
    total += g.probabilities[i];
  }
  for (auto& p : g.probabilities) p /= total;
}

GridDensity empty_grid(int dims, std::array<double, 2> lower, std::array<double, 2> upper, std::array<int, 2> cells) {
  check_grid(dims, cells, lower, upper);
  GridDensity g;
  g.dims = dims;
  g.lower = lower;
  g.upper = upper;
  g.cells = cells;
  if (dims == 1) g.cells[1] = 1;
  g.log_values.resize(g.size());
  return g;
}

}  // namespace

std::vector<double> autocorrelation(std::span<const double> x, int max_lag) {
  if (x.empty()) throw InputError("autocorrelation: empty series");
  const double m = mean_of(x);
  const double c0 = autocovariance(x, m, 0);
  const auto lags = static_cast<std::size_t>(std::min<long>(max_lag, static_cast<long>(x.size()) - 1));
  std::vector<double> out(lags + 1, 0.0);
  out[0] = 1.0;
  if (c0 == 0.0) return out;
  for (std::size_t k = 1; k <= lags; ++k) out[k] = autocovariance(x, m, k) / c0;
  return out;
}

double effective_sample_size(const std::vector<std::vector<double>>& chains, bool* degenerate) {
  if (chains.empty() || chains.front().size() < 2) throw InputError("ess: need at least two draws");
  const std::size_t n = chains.front().size();
  for (const auto& c : chains) {
    if (c.size() != n) throw InputError("ess: chains must have equal length");
  }
  const auto m = chains.size();
  const double total = static_cast<double>(n * m);

  std::vector<double> means(m);
  std::vector<double> var0(m);
  for (std::size_t c = 0; c < m; ++c) {
    means[c] = mean_of(chains[c]);
    var0[c] = autocovariance(chains[c], means[c], 0);
  }
  const double nn = static_cast<double>(n);
  double within = 0.0;
  for (double v : var0) within += v * nn / (nn - 1.0);
  within /= static_cast<double>(m);
  double between_over_n = 0.0;
  if (m > 1) {
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(m);
    for (double mu : means) between_over_n += (mu - grand) * (mu - grand);
    between_over_n /= static_cast<double>(m - 1);
  }
  const double var_plus = within * (nn - 1.0) / nn + between_over_n;

  if (degenerate) *degenerate = false;
  if (!(var_plus > 0.0)) {
    if (degenerate) *degenerate = true;
    return total;
  }

  auto rho = [&](std::size_t lag) {
    double acov = 0.0;
    for (std::size_t c = 0; c < m; ++c) acov += autocovariance(chains[c], means[c], lag);
    acov /= static_cast<double>(m);
    return 1.0 - (within - acov) / var_plus;
  };

  // Geyer's initial positive and monotone sequence over pairs (2k, 2k+1).
  double tau = -1.0;
  double previous_pair = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = rho(2 * k) + rho(2 * k + 1);
    if (!(pair > 0.0)) break;
    pair = std::min(pair, previous_pair);
    tau += 2.0 * pair;
    previous_pair = pair;
  }
  if (!(tau > 0.0)) return total;
  return std::min(total, total / tau);
}

double effective_sample_size(std::span<const double> chain, bool* degenerate) {
  return effective_sample_size(std::vector<std::vector<double>>{std::vector<double>(chain.begin(), chain.end())},
                               degenerate);
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw InputError("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ChainSummary summarize(const std::vector<hmc::SampleChain>& chains) {
  if (chains.empty()) throw InputError("summarize: no chains");
  const auto n = chains.front().draws.size();
  if (n < 100) throw InputError("summarize: need at least 100 draws per chain");
  ChainSummary out;
  out.num_draws = static_cast<int>(n);
  out.num_chains = static_cast<int>(chains.size());
  const int dim = chains.front().dim();
  double accepted = 0.0;
  for (const auto& c : chains) {
    if (c.draws.size() != n) throw InputError("summarize: chains must have equal length");
    accepted += c.acceptance_rate;
    out.divergences += c.divergences;
  }
  out.acceptance_rate = accepted / static_cast<double>(chains.size());

  for (int k = 0; k < dim; ++k) {
    std::vector<std::vector<double>> per_chain;
    std::vector<double> pooled;
    for (const auto& c : chains) {
      per_chain.push_back(c.coordinate(k));
      pooled.insert(pooled.end(), per_chain.back().begin(), per_chain.back().end());
    }
    CoordinateSummary s;
    s.mean = mean_of(pooled);
    double ss = 0.0;
    for (double v : pooled) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(pooled.size() - 1));
    s.q025 = quantile(pooled, 0.025);
    s.q50 = quantile(pooled, 0.5);
    s.q975 = quantile(pooled, 0.975);
    s.ess = effective_sample_size(per_chain, &s.degenerate);
    s.acf.assign(static_cast<std::size_t>(kMaxAcfLag) + 1, 0.0);
    for (const auto& c : per_chain) {
      const auto a = autocorrelation(c, kMaxAcfLag);
      for (std::size_t lag = 0; lag < a.size(); ++lag) s.acf[lag] += a[lag] / static_cast<double>(per_chain.size());
    }
    out.degenerate = out.degenerate || s.degenerate;
    out.coords.push_back(std::move(s));
  }
  return out;
}

ChainSummary summarize(const hmc::SampleChain& chain) { return summarize(std::vector<hmc::SampleChain>{chain}); }

Vector GridDensity::center(std::size_t index) const {
  Vector x(dims);
  const auto n0 = static_cast<std::size_t>(cells[0]);
  const std::size_t i0 = index % n0;
  x(0) = lower[0] + (static_cast<double>(i0) + 0.5) * (upper[0] - lower[0]) / cells[0];
  if (dims == 2) {
    const std::size_t i1 = index / n0;
    x(1) = lower[1] + (static_cast<double>(i1) + 0.5) * (upper[1] - lower[1]) / cells[1];
  }
  return x;
}

double GridDensity::cell_volume() const {
  double v = (upper[0] - lower[0]) / cells[0];
  if (dims == 2) v *= (upper[1] - lower[1]) / cells[1];
  return v;
}

GridDensity make_grid_density(const LogDensityFn& log_density, int dims, std::array<double, 2> lower,
                              std::array<double, 2> upper, std::array<int, 2> cells) {
  GridDensity g = empty_grid(dims, lower, upper, cells);
  const auto n = static_cast<long>(g.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    g.log_values[static_cast<std::size_t>(i)] = log_density(g.center(static_cast<std::size_t>(i)));
  }
  normalise(g);
  return g;
}

GridDensity make_grid_density_serial(const LogDensityFn& log_density, int dims, std::array<double, 2> lower,
                                     std::array<double, 2> upper, std::array<int, 2> cells) {
  GridDensity g = empty_grid(dims, lower, upper, cells);
  for (std::size_t i = 0; i < g.size(); ++i) g.log_values[i] = log_density(g.center(i));
  normalise(g);
  return g;
}

double boundary_mass(const GridDensity& g) {
  const auto n0 = static_cast<std::size_t>(g.cells[0]);
  const auto n1 = static_cast<std::size_t>(g.dims == 2 ? g.cells[1] : 1);
  double mass = 0.0;
  for (std::size_t i1 = 0; i1 < n1; ++i1) {
    for (std::size_t i0 = 0; i0 < n0; ++i0) {
      const bool edge = i0 == 0 || i0 + 1 == n0 || (g.dims == 2 && (i1 == 0 || i1 + 1 == n1));
      if (edge) mass += g.probabilities[i1 * n0 + i0];
    }
  }
  return mass;
}

double tv_distance_grid(const GridDensity& p, const GridDensity& q) {
  if (p.dims != q.dims || p.cells != q.cells || p.lower != q.lower || p.upper != q.upper ||
      p.probabilities.size() != q.probabilities.size()) {
    throw InputError("tv_distance_grid: grids differ");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < p.probabilities.size(); ++i) s += std::abs(p.probabilities[i] - q.probabilities[i]);
  return 0.5 * s;
}

}  // namespace dset::diag

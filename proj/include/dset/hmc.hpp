#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "dset/posterior.hpp"

namespace dset::hmc {

struct HmcConfig {
  double step_size = 0.1;
  int num_steps = 32;
  /// Diagonal of M. Empty means the identity.
  Vector mass;
  int num_warmup = 1000;
  int num_samples = 1000;
  int num_chains = 2;
  std::uint64_t seed = 1;
  bool step_size_adapt = true;
  double target_accept = 0.8;
  /// When positive, the number of leapfrog steps is ceil(integration_time / eps),
  /// capped at max_steps, instead of num_steps.
  double integration_time = 0.0;
  int max_steps = 1024;
  /// Each iteration draws eps uniformly from [(1 - j) eps, (1 + j) eps].
  double step_jitter = 0.0;
  /// Starting point; drawn from the base target and projected when unset.
  std::optional<Vector> init;

  void validate() const;
};

struct SampleChain {
  std::vector<Vector> draws;
  std::vector<bool> accept_flags;
  std::vector<double> energies;        // H at the proposal
  std::vector<double> penalty_values;  // dist(theta, set)^2 at the retained draw
  std::vector<double> logp_values;     // relaxed log density at the retained draw
  double acceptance_rate = 0.0;
  /// Mean Metropolis acceptance probability over post-warmup iterations.
  double mean_accept_prob = 0.0;
  int divergences = 0;
  int off_support_aborts = 0;
  double step_size = 0.0;  // after adaptation
  int steps_per_iteration = 0;
  int chain_index = 0;

  int dim() const { return draws.empty() ? 0 : static_cast<int>(draws.front().size()); }
  /// Draws of coordinate k.
  std::vector<double> coordinate(int k) const;
};

struct LeapfrogResult {
  Vector theta;
  Vector momentum;
  bool off_support = false;
  bool divergent = false;
  int steps_taken = 0;
};

/// Position-Verlet leapfrog under dtheta/dt = M^{-1} p, dp/dt = grad log pi.
/// Stops early when a position leaves the base target's support or the
/// gradient stops being finite.
LeapfrogResult leapfrog(const RelaxedPosterior& post, const Vector& theta, const Vector& momentum, double eps,
                        int steps, const Vector& inverse_mass = {});

/// H(theta, p) = -log pi(theta) + p' M^{-1} p / 2.
double hamiltonian(const RelaxedPosterior& post, const Vector& theta, const Vector& momentum,
                   const Vector& inverse_mass = {});

/// Energy error beyond which a transition counts as divergent.
inline constexpr double kDivergenceThreshold = 1000.0;

/// One chain with its own RNG stream derived from (config.seed, chain_index).
SampleChain sample(const RelaxedPosterior& post, const HmcConfig& config, int chain_index = 0);

/// All chains, run in parallel with OpenMP.
std::vector<SampleChain> sample_chains(const RelaxedPosterior& post, const HmcConfig& config);

/// Serial reference for sample_chains; results are bit-identical.
std::vector<SampleChain> sample_chains_serial(const RelaxedPosterior& post, const HmcConfig& config);

/// Stream for a chain: a seed_seq over the seed halves and the chain index.
std::mt19937_64 chain_rng(std::uint64_t seed, int chain_index);

/// Draws from the base target, projects onto the set and retries up to 100
/// times until the point is in the support with finite relaxed log density.
Vector default_initial_point(const RelaxedPosterior& post, std::mt19937_64& rng);

}  // namespace dset::hmc

#include "dset/hmc.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "dset/errors.hpp"

namespace dset::hmc {

namespace {

Vector resolve_inverse_mass(const Vector& inverse_mass, int dim) {
  if (inverse_mass.size() == 0) return Vector::Ones(dim);
  if (inverse_mass.size() != dim) throw InputError("hmc: mass matrix diagonal has the wrong length");
  return inverse_mass;
}

double kinetic(const Vector& p, const Vector& inverse_mass) {
  return 0.5 * p.cwiseProduct(inverse_mass).dot(p);
}

struct Trajectory {
  Vector theta;
  Vector momentum;
  Evaluation end;  // evaluation (with gradient) at the final position
  bool off_support = false;
  bool divergent = false;
  int steps_taken = 0;
};

// Leapfrog starting from a point whose gradient is already known. The
// momentum update uses +grad log pi, which is -grad U for U = -log pi.
Trajectory integrate(const RelaxedPosterior& post, const Vector& theta, const Vector& momentum,
                     const Vector& start_grad, double eps, int steps, const Vector& inverse_mass) {
  Trajectory t;
  t.theta = theta;
  t.momentum = momentum;
  Vector grad = start_grad;
  for (int l = 0; l < steps; ++l) {
    t.momentum += 0.5 * eps * grad;
    t.theta += eps * inverse_mass.cwiseProduct(t.momentum);
    t.end = post.evaluate(t.theta, true);
    ++t.steps_taken;
    if (!t.end.in_support) {
      t.off_support = true;
      return t;
    }
    if (!t.end.grad.allFinite() || !std::isfinite(t.end.logp)) {
      // Sharp flavour: -inf off the set is an ordinary rejection, not a divergence.
      if (t.end.grad.allFinite() && std::holds_alternative<Sharp>(post.flavor())) {
        grad = t.end.grad;
        t.momentum += 0.5 * eps * grad;
        continue;
      }
      t.divergent = true;
      return t;
    }
    grad = t.end.grad;
    t.momentum += 0.5 * eps * grad;
  }
  return t;
}

// Metropolis acceptance probability of one leapfrog step from (theta, p).
double one_step_accept(const RelaxedPosterior& post, const Vector& theta, const Evaluation& here, double eps,
                       const Vector& inverse_mass, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vector p(theta.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) p(k) = normal(rng) / std::sqrt(inverse_mass(k));
  const double h0 = -here.logp + kinetic(p, inverse_mass);
  const auto t = integrate(post, theta, p, here.grad, eps, 1, inverse_mass);
  if (t.off_support || t.divergent) return 0.0;
  const double h1 = -t.end.logp + kinetic(t.momentum, inverse_mass);
  if (!std::isfinite(h1)) return 0.0;
  return std::min(1.0, std::exp(h0 - h1));
}

// Doubles or halves eps until a single step crosses acceptance 1/2.
double find_reasonable_step(const RelaxedPosterior& post, const Vector& theta, const Evaluation& here, double eps,
                            const Vector& inverse_mass, std::mt19937_64& rng) {
  double prob = one_step_accept(post, theta, here, eps, inverse_mass, rng);
  const double direction = prob > 0.5 ? 1.0 : -1.0;
  for (int k = 0; k < 100; ++k) {
    if (direction > 0 ? !(prob > 0.5) : !(prob <= 0.5)) break;
    const double next = eps * std::pow(2.0, direction);
    if (!(next > 1e-12) || !(next < 1e6)) break;
    eps = next;
    prob = one_step_accept(post, theta, here, eps, inverse_mass, rng);
  }
  return eps;
}

// Nesterov dual averaging on log eps toward the target acceptance.
class DualAveraging {
 public:
  DualAveraging(double eps, double target) : mu_(std::log(10.0 * eps)), target_(target) {}

  double update(double accept_prob) {
    ++t_;
    const double w = 1.0 / (t_ + kT0);
    h_bar_ = (1.0 - w) * h_bar_ + w * (target_ - accept_prob);
    const double log_eps = mu_ - std::sqrt(t_) / kGamma * h_bar_;
    const double eta = std::pow(t_, -kKappa);
    log_eps_bar_ = eta * log_eps + (1.0 - eta) * log_eps_bar_;
    return std::exp(log_eps);
  }
  double final_step() const { return std::exp(log_eps_bar_); }

 private:
  static constexpr double kGamma = 0.05;
  static constexpr double kT0 = 10.0;
  static constexpr double kKappa = 0.75;
  double mu_;
  double target_;
  double h_bar_ = 0.0;
  double log_eps_bar_ = 0.0;
  double t_ = 0.0;
};

int steps_for(const HmcConfig& c, double eps) {
  if (c.integration_time > 0.0) {
    const double n = std::ceil(c.integration_time / eps);
    return static_cast<int>(std::clamp(n, 1.0, static_cast<double>(c.max_steps)));
  }
  return c.num_steps;
}

}  // namespace

void HmcConfig::validate() const {
  if (!(step_size > 0.0)) throw InputError("hmc: step_size must be positive");
  if (num_steps < 1) throw InputError("hmc: num_steps must be at least 1");
  if (mass.size() > 0 && !(mass.array() > 0.0).all()) throw InputError("hmc: mass entries must be positive");
  if (num_warmup < 0 || num_samples < 1 || num_chains < 1) throw InputError("hmc: invalid warmup/sample/chain counts");
  if (!(target_accept > 0.0 && target_accept < 1.0)) throw InputError("hmc: target_accept must lie in (0, 1)");
  if (max_steps < 1) throw InputError("hmc: max_steps must be at least 1");
  if (!(step_jitter >= 0.0 && step_jitter < 1.0)) throw InputError("hmc: step_jitter must lie in [0, 1)");
}

std::vector<double> SampleChain::coordinate(int k) const {
  std::vector<double> out;
  out.reserve(draws.size());
  for (const auto& d : draws) out.push_back(d(k));
  return out;
}

std::mt19937_64 chain_rng(std::uint64_t seed, int chain_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chain_index), 0x5eedu};
  return std::mt19937_64(seq);
}

double hamiltonian(const RelaxedPosterior& post, const Vector& theta, const Vector& momentum,
                   const Vector& inverse_mass) {
  return -post.logp(theta) + kinetic(momentum, resolve_inverse_mass(inverse_mass, post.dim()));
}

LeapfrogResult leapfrog(const RelaxedPosterior& post, const Vector& theta, const Vector& momentum, double eps,
                        int steps, const Vector& inverse_mass) {
  const Vector inv = resolve_inverse_mass(inverse_mass, post.dim());
  const auto start = post.evaluate(theta, true);
  LeapfrogResult out;
  if (!start.in_support) {
    out.theta = theta;
    out.momentum = momentum;
    out.off_support = true;
    return out;
  }
  auto t = integrate(post, theta, momentum, start.grad, eps, steps, inv);
  out.theta = std::move(t.theta);
  out.momentum = std::move(t.momentum);
  out.off_support = t.off_support;
  out.divergent = t.divergent;
  out.steps_taken = t.steps_taken;
  return out;
}

Vector default_initial_point(const RelaxedPosterior& post, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    const Vector raw = post.base().initial_point(rng);
    const Vector projected = project(post.set(), raw).point;
    for (const Vector* candidate : {&projected, &raw}) {
      if (post.base().in_support(*candidate) && std::isfinite(post.logp(*candidate))) return *candidate;
    }
  }
  throw InitializationError("hmc: could not find an initial point with finite log density for model '" +
                            post.base().name() + "' after 100 attempts");
}

SampleChain sample(const RelaxedPosterior& post, const HmcConfig& config, int chain_index) {
  config.validate();
  const int dim = post.dim();
  const Vector inverse_mass =
      config.mass.size() == 0 ? Vector::Ones(dim) : resolve_inverse_mass(config.mass.cwiseInverse(), dim);
  const Vector momentum_scale = inverse_mass.cwiseInverse().cwiseSqrt();

  auto rng = chain_rng(config.seed, chain_index);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;

  Vector theta;
  if (config.init) {
    theta = *config.init;
    if (theta.size() != dim) throw InputError("hmc: init has the wrong dimension");
  } else {
    theta = default_initial_point(post, rng);
  }
  Evaluation here = post.evaluate(theta, true);
  if (!here.in_support || !std::isfinite(here.logp)) {
    throw InitializationError("hmc: initial point has no finite log density for model '" + post.base().name() + "'");
  }

  double eps = config.step_size;
  if (config.step_size_adapt && config.num_warmup > 0) {
    eps = find_reasonable_step(post, theta, here, eps, inverse_mass, rng);
  }
  DualAveraging adapt(eps, config.target_accept);

  SampleChain chain;
  chain.chain_index = chain_index;
  chain.draws.reserve(static_cast<std::size_t>(config.num_samples));
  double accept_prob_sum = 0.0;
  int accepted = 0;

  const int total = config.num_warmup + config.num_samples;
  for (int it = 0; it < total; ++it) {
    const bool warmup = it < config.num_warmup;
    double eps_it = eps;
    if (config.step_jitter > 0.0) eps_it *= 1.0 + config.step_jitter * (2.0 * uniform(rng) - 1.0);
    const int steps = steps_for(config, eps_it);

    Vector p(dim);
    for (int k = 0; k < dim; ++k) p(k) = momentum_scale(k) * normal(rng);
    const double h0 = -here.logp + kinetic(p, inverse_mass);

    auto traj = integrate(post, theta, p, here.grad, eps_it, steps, inverse_mass);
    double accept_prob = 0.0;
    double h1 = std::numeric_limits<double>::infinity();
    if (traj.off_support) {
      ++chain.off_support_aborts;
    } else if (traj.divergent) {
      ++chain.divergences;
    } else {
      h1 = -traj.end.logp + kinetic(traj.momentum, inverse_mass);
      const double delta = h1 - h0;
      if (std::isfinite(delta) && std::abs(delta) > kDivergenceThreshold) {
        ++chain.divergences;
      } else if (std::isfinite(delta)) {
        accept_prob = std::min(1.0, std::exp(-delta));
      }
    }

    const bool accept = uniform(rng) < accept_prob;
    if (accept) {
      theta = std::move(traj.theta);
      here = std::move(traj.end);
    }

    if (warmup) {
      if (config.step_size_adapt) {
        eps = adapt.update(accept_prob);
        if (it + 1 == config.num_warmup) eps = adapt.final_step();
      }
      if (it + 1 == config.num_warmup) {
        // Counters report post-warmup behaviour only.
        chain.divergences = 0;
        chain.off_support_aborts = 0;
      }
      continue;
    }

    chain.draws.push_back(theta);
    chain.accept_flags.push_back(accept);
    chain.energies.push_back(h1);
    chain.penalty_values.push_back(here.dist_sq);
    chain.logp_values.push_back(here.logp);
    accept_prob_sum += accept_prob;
    accepted += accept ? 1 : 0;
  }

  chain.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(config.num_samples);
  chain.mean_accept_prob = accept_prob_sum / static_cast<double>(config.num_samples);
  chain.step_size = eps;
  chain.steps_per_iteration = steps_for(config, eps);
  return chain;
}

std::vector<SampleChain> sample_chains(const RelaxedPosterior& post, const HmcConfig& config) {
  config.validate();
  const int n = config.num_chains;
  std::vector<SampleChain> chains(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 1)
  for (int c = 0; c < n; ++c) {
    try {
      chains[static_cast<std::size_t>(c)] = sample(post, config, c);
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return chains;
}

std::vector<SampleChain> sample_chains_serial(const RelaxedPosterior& post, const HmcConfig& config) {
  config.validate();
  std::vector<SampleChain> chains;
  for (int c = 0; c < config.num_chains; ++c) chains.push_back(sample(post, config, c));
  return chains;
}

}  // namespace dset::hmc

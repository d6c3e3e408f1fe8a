#pragma once

#include <cmath>

#include "qbcsim/constants.hpp"
#include "qbcsim/errors.hpp"
#include "qbcsim/rng.hpp"

namespace qbc {

// Exponential decay of the committed particles. A decay is pure loss: the
// particle is gone and whatever measurement was scheduled records nothing.
struct DecayParams {
  double tau = constants::neutron_lifetime;  // s
};

inline double survival_probability(double t, const DecayParams& params) {
  if (!(params.tau > 0.0)) throw InvalidParams("decay: tau must be positive");
  if (t < 0.0) throw InvalidParams("decay: t must be nonnegative");
  return std::exp(-t / params.tau);
}

inline double sample_decay_time(RandomStream& rng, const DecayParams& params) {
  if (!(params.tau > 0.0)) throw InvalidParams("decay: tau must be positive");
  return rng.exponential(params.tau);
}

// Expected number of usable particles out of N at unveil time T, given
// per-trial transmission alpha: alpha * N * exp(-T/tau).
inline double surviving_count(double N, double alpha, double T, const DecayParams& params) {
  if (N < 0.0) throw InvalidParams("surviving_count: N must be nonnegative");
  if (alpha < 0.0 || alpha > 1.0)
    throw InvalidParams("surviving_count: alpha must lie in [0,1]");
  return alpha * N * survival_probability(T, params);
}

}  // namespace qbc

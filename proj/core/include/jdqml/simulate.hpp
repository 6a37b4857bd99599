#pragma once

#include "jdqml/model.hpp"
#include "jdqml/params.hpp"
#include "jdqml/path.hpp"

namespace jdqml {

/// Exact event-driven simulation of the Levy-OU model: between jump epochs
/// the OU transition is sampled from its exact conditional Gaussian, jump
/// epochs arrive as a Poisson(lambda) process and each adds an N(mu, sigma2)
/// mark. Observations are recorded on the grid t_i = i*h; jump_marks holds
/// the per-interval epoch counts. Deterministic for a fixed seed.
Path simulate_levy_ou(const ParamVector& params, const PathConfig& cfg);

/// Euler-Maruyama on the refined grid h/substeps with compound-Poisson jumps
/// applied at the end of their containing substep.
Path simulate_generic(const ModelSpec& model, const ParamVector& params,
                      const PathConfig& cfg);

/// Terminal state of a Levy-OU burn-in run of length burn_in_time started at
/// zero, on a stream derived from cfg.seed. Default burn-in is 50/beta.
double stationary_start(const ParamVector& params, const PathConfig& cfg);

}  // namespace jdqml

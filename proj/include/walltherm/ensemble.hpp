#pragma once

#include <vector>

#include "walltherm/heat_model.hpp"
#include "walltherm/priors.hpp"

namespace walltherm {

/// J particles in latent and pushed-forward form, index-aligned. The samples
/// are always the push-forward of the latents.
struct Ensemble {
  std::vector<LatentSample> latents;
  std::vector<ThermalSample> samples;

  int size() const { return static_cast<int>(latents.size()); }
};

/// Draw J independent prior members; member j consumes the stream
/// "prior/member/j" derived from the master seed.
Ensemble generate_prior_ensemble(const PriorConfig& config, const PriorBases& bases,
                                 const std::vector<double>& t0_mean, const Mesh& mesh,
                                 int ensemble_size, std::uint64_t master_seed);

}  // namespace walltherm

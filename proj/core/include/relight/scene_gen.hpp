#pragma once

// Seeded random scenes and perturbations for campaign runners. The generator
// keeps scenes well inside the convergent-transport regime: patch centers
// are separated (bounding the kernel away from the cap) and patch edges are
// shrunk until the largest kernel row sum falls below max_row_sum, which
// leaves headroom for affine warps up to condition number ~1.2.

#include "relight/geometry.hpp"
#include "relight/rng.hpp"

namespace relight {

struct SceneGenParams {
    int min_patches = 6;
    int max_patches = 40;
    int min_luminaires = 1;
    int max_luminaires = 4;
    double albedo_min = 0.1;
    double albedo_max = 0.85;
    double dirichlet_alpha = 1.0;
    double max_row_sum = 0.35;
    double kernel_cap = kDefaultKernelCap;
};

Scene random_scene(Rng& rng, const SceneGenParams& params = {});

Eigen::Matrix3d random_rotation(Rng& rng);

// Random affine map with condition number at most max_cond (singular values
// drawn log-uniform in a ratio-bounded band), an overall scale jitter, and a
// bounded translation.
AffinePerturbation random_perturbation(Rng& rng, double max_cond, double scale_jitter = 0.05,
                                       double max_offset = 0.2);

// Per-patch deltas with |delta_i| <= max_eps_rho and perturbed albedos
// clamped into [0.02, 0.95].
Eigen::VectorXd random_albedo_deltas(Rng& rng, const Scene& scene, double max_eps_rho);

// Dirichlet mix of the scene's luminaire basis (all-ones if the scene has no
// luminaires).
Eigen::VectorXd random_emittance(Rng& rng, const Scene& scene);

// Non-negative field e' with |e - e'| / |e| <= max_eps_e in area-weighted L2.
Eigen::VectorXd perturbed_emittance(Rng& rng, const Scene& scene, const Eigen::VectorXd& e,
                                    double max_eps_e);

}  // namespace relight

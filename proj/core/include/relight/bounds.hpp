#pragma once

// Stability of the radiosity solution under scene perturbations. A perturbed
// scene differs from the reference by an affine warp of the geometry (with
// condition number c), an albedo shift (sup-norm eps_rho, new albedo bound
// p'), and a relative luminaire change (area-weighted L2 ratio eps_E). The
// combined bound on |B - B'| in the reference scene's area-weighted L2 norm:
//
//   [ eps_E/(1-p) + eps_rho (1+eps_E)/((1-p)(1-p'))
//     + (c^4-1)(1+eps_E)/(1-p')^2 ] * |E|
//
// The three single-factor bounds use, respectively, 1/(1-p),
// 1/((1-p)(1-p')), and (c^4-1)/(1-p)^2 times |E|.

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "relight/geometry.hpp"
#include "relight/scene_gen.hpp"

namespace relight {

double perturbation_bound(double eps_e, double eps_rho, double p, double p_prime, double cond_c,
                          double norm_e);

struct FactorBounds {
    double luminaire = 0.0;
    double albedo = 0.0;
    double geometry = 0.0;
};
FactorBounds factor_bounds(double eps_e, double eps_rho, double p, double p_prime, double cond_c,
                           double norm_e);

struct PerturbationReport {
    double eps_e = 0.0;
    double eps_rho = 0.0;
    double p = 0.0;
    double p_prime = 0.0;
    double cond_c = 1.0;
    double actual_diff = 0.0;
    double bound = 0.0;
    bool holds = false;  // actual_diff <= bound + 1e-9
};

// Builds the perturbed scene (affine warp plus albedo deltas), solves both
// transport systems with the given emittances, and measures everything in
// the reference scene's area-weighted L2 norm.
PerturbationReport verify_perturbation(const Scene& scene, const AffinePerturbation& t,
                                       const Eigen::VectorXd& albedo_deltas,
                                       const Eigen::VectorXd& e, const Eigen::VectorXd& e_prime);

// Checks c^-4 (K f) <= (K' f) <= c^4 (K f) componentwise for f >= 0, where
// K' is the kernel of the warped scene, with 1e-9 relative slack.
bool kernel_sandwich_check(const Scene& scene, const AffinePerturbation& t,
                           const Eigen::VectorXd& f);

struct RankOneGapReport {
    double delta = 0.0;   // |b - c|
    double radius = 0.0;  // |b|
    double gap_sq = 0.0;  // Frobenius-squared |b b^T - c c^T|_F^2
    double statement_bound = 0.0;  // 3 d^2 r^2 + 4 d^3 r + d^4
    double proof_bound = 0.0;      // 4 d r^3 + 3 d^2 r^2 + 2 d^3 r + d^4
    bool statement_holds = false;
    bool proof_holds = false;
};
RankOneGapReport rank_one_gap_check(const Eigen::VectorXd& b, const Eigen::VectorXd& c);

// brdf(omega_in, omega_out) on upper-hemisphere unit directions.
using Brdf = std::function<double(const Eigen::Vector3d&, const Eigen::Vector3d&)>;

struct GlossCheckStats {
    int evaluated = 0;
    int skipped = 0;  // direction pairs with a non-positive dot product
    int violations = 0;
};

// Samples direction quadruples and checks
//   (w'.w * wb'.wb)^alpha <= brdf(w',wb') / brdf(w,wb) <= (w'.w * wb'.wb)^-alpha.
// Non-positive BRDF values are an error.
bool gloss_property_check(const Brdf& brdf, double alpha, int n_samples, std::uint64_t seed,
                          GlossCheckStats* stats = nullptr);

enum class PerturbationMode { Full, LuminaireOnly, AlbedoOnly, GeometryOnly };

struct PerturbationCampaignConfig {
    int trials = 100;
    std::uint64_t seed = 0;
    PerturbationMode mode = PerturbationMode::Full;
    double max_cond = 1.2;
    double max_eps_e = 0.2;
    double max_eps_rho = 0.2;
    int threads = 1;
};

// One report per trial, written to slot `trial`; byte-identical output for
// any thread count. In restricted modes the combined bound degenerates to
// the matching single-factor bound. The first overload perturbs the given
// scene; the second draws a fresh random scene per trial.
std::vector<PerturbationReport> run_perturbation_campaign(const Scene& scene,
                                                          const PerturbationCampaignConfig& config);
std::vector<PerturbationReport> run_perturbation_campaign(const PerturbationCampaignConfig& config,
                                                          const SceneGenParams& gen);

void write_perturbation_csv(const std::string& path, const std::vector<PerturbationReport>& rows);

}  // namespace relight

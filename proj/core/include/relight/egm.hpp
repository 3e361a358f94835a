#pragma once

// Effective generator matrices. Radiosity solutions for a scene's luminaire
// basis, embedded as coefficient vectors in the area-weighted indicator
// basis (phi_i = e_i / sqrt(A_i), so a field B has coefficients
// sqrt(A_i) B_i), span the lighting variations the scene can produce. With
// Dirichlet-distributed mixing weights theta the coefficient vector
// b = B_coeff theta has second moment C = B_coeff E[theta theta^T]
// B_coeff^T. An orthonormal N_o x r generator matrix G approximates that
// span; its loss is the expected squared residual
// Tr[C] - Tr[G^T C G], minimized by the top-r eigenvectors of C, with
// minimum equal to the eigenvalue tail sum.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "relight/geometry.hpp"
#include "relight/radiosity.hpp"
#include "relight/scene_gen.hpp"

namespace relight {

struct RadiosityBasis {
    // One column per luminaire: sqrt(A_i) * B_i in row i.
    Eigen::MatrixXd coefficients;
};

RadiosityBasis radiosity_basis(const Scene& scene, const KernelMatrix& kernel);

// E[theta theta^T] for theta ~ Dirichlet(alpha, ..., alpha) on n components:
// diagonal alpha (alpha+1) / (n alpha (n alpha + 1)), off-diagonal
// alpha^2 / (n alpha (n alpha + 1)).
Eigen::MatrixXd dirichlet_second_moment(int n, double alpha);

struct SecondMoment {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd eigenvalues;   // nonincreasing, clamped at zero
    Eigen::MatrixXd eigenvectors;  // columns aligned with eigenvalues
};

// Validates symmetry (to 1e-12 relative), positive semidefiniteness (to
// -1e-10 relative), and the eigendecomposition's reconstruction error
// (1e-9 relative).
SecondMoment make_second_moment(const Eigen::MatrixXd& m);

SecondMoment second_moment(const RadiosityBasis& basis, const Eigen::MatrixXd& theta_moment);

// (1/k) sum_s b_s b_s^T over the columns of samples.
SecondMoment empirical_second_moment(const Eigen::MatrixXd& samples);

struct Egm {
    Eigen::MatrixXd generators;  // orthonormal columns
};

// Rejects non-orthonormal generators (G^T G must match I to 1e-10).
double egm_loss(const Egm& egm, const SecondMoment& moment);

// Top-r eigenvectors. Requires a spectral gap: lambda_r - lambda_{r+1} must
// exceed 1e-10 or the optimum is not unique and fitting errors out.
Egm egm_fit(const SecondMoment& moment, int r);

// egm_loss(egm_fit(c_estimate), c_true) - egm_loss(egm_fit(c_true), c_true).
double estimation_regret(const SecondMoment& c_true, const SecondMoment& c_estimate, int r);

// Eigenvalue sum minus the bottom-r sum; always dominates the regret.
double loose_bound(const SecondMoment& c_true, int r);

// Euclidean projection onto nonincreasing sequences (pool adjacent
// violators). Already-sorted input is returned bitwise unchanged.
Eigen::VectorXd isotonic_decreasing_fit(const Eigen::VectorXd& v);
double isotonic_distance_sq(const Eigen::VectorXd& v);

// Sharper regret bound: over all rearrangements of the (nonincreasing)
// eigenvalues whose isotonic projection distance squared stays within
// budget, find the least top-r mass v the rearrangement can carry; the bound
// is top_r_sum - v. Within a fixed top-r index set the distance is minimized
// by sorting both blocks in descending order, so only subsets need
// enumeration. Capped at 12 eigenvalues.
double lp_regret_bound(const Eigen::VectorXd& eigenvalues, int r, double budget);

// Frobenius bound on the second-moment shift caused by perturbing the scene:
// n_o^2 (4 d r^3 + 3 d^2 r^2 + 2 d^3 r + d^4) with
// d = (eps_rho + (c^4 - 1)) / (1-p)^2 and r = 1 / (1-p).
double moment_perturbation_bound(int n_o, double eps_rho, double cond_c, double p);

struct RegretCampaignConfig {
    int trials = 100;
    std::uint64_t seed = 0;
    int rank = 0;  // 0 picks the best-gap admissible rank per trial
    int min_scenes = 8;
    int max_scenes = 32;
    double max_cond = 1.1;
    double max_eps_rho = 0.05;
    int threads = 1;
};

struct RegretTrial {
    int k_scenes = 0;
    int rank = 0;
    double frob_err_sq = 0.0;
    double regret = 0.0;
    double loose = 0.0;
    double lp = 0.0;
    bool loose_holds = false;
    bool lp_holds = false;
    double moment_gap = 0.0;  // moment_perturbation_bound at the trial's worst perturbation
};

// Estimates the scene's generator matrix from k similar scenes (small random
// warps and albedo jitter) per trial and compares the incurred regret
// against the loose and budgeted bounds, with budget = |C - C_hat|_F^2.
// Deterministic for any thread count.
std::vector<RegretTrial> run_regret_campaign(const Scene& base, const RegretCampaignConfig& config);
std::vector<RegretTrial> run_regret_campaign(const RegretCampaignConfig& config,
                                             const SceneGenParams& gen);

void write_regret_csv(const std::string& path, const std::vector<RegretTrial>& rows);

}  // namespace relight

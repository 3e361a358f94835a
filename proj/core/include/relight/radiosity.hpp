#pragma once

// Discrete interreflection transport. The kernel matrix entry K_ij couples
// radiosity at patch j to incoming light at patch i:
//
//   K_ij = V_ij * max(cos_i, 0) * max(cos_j, 0) / (pi * |d_ij|^2) * area_j
//
// with d_ij the center-to-center offset, cos_i / cos_j the angles against
// the patch normals, V_ij center-to-center visibility, and zero diagonal.
// Radiosity solves B = E + D_rho K B; the albedo bound p = max_i rho_i < 1
// together with operator-norm checks on D_rho K guarantees both a convergent
// bounce series and an invertible direct system.

#include <string>

#include <Eigen/Core>

#include "relight/geometry.hpp"

namespace relight {

enum class Norm { L1, L2, LInf };

// Area-weighted norms: areas act as quadrature weights, so values approximate
// the continuous norms of the underlying field.
double weighted_norm(const Eigen::VectorXd& f, const Eigen::VectorXd& areas, Norm kind);
double weighted_norm(const Eigen::VectorXd& f, const Scene& scene, Norm kind);

struct KernelMatrix {
    Eigen::MatrixXd entries;
    // Operator norms of D_rho K in the area-weighted spaces: norm1 bounds the
    // weighted L1 operator norm, norm_inf the sup-norm one, and
    // norm_l2_bound = sqrt(norm1 * norm_inf) bounds the weighted L2 norm by
    // interpolation.
    double norm1 = 0.0;
    double norm_inf = 0.0;
    double norm_l2_bound = 0.0;
};

// Assembles the kernel and verifies the transport invariants: every kernel
// value stays below the scene cap (error names the offending pair), and the
// D_rho K norm estimates satisfy norm1 < 1, norm_inf < 1 and
// norm_l2_bound <= p. Deterministic for any thread count.
KernelMatrix assemble_kernel(const Scene& scene, int n_threads = 1);

// Entries alone, cap-checked but without the norm gate. Scene generators use
// this to size patches before committing to a scene.
Eigen::MatrixXd kernel_entries(const Scene& scene, int n_threads = 1);

struct NeumannResult {
    Eigen::VectorXd values;
    int bounces = 0;           // index of the last bounce term added
    double final_increment = 0.0;  // area-weighted L2 norm of that term
    bool converged = false;
};

// Partial sums of sum_n (D_rho K)^n e, stopping at the first term whose
// area-weighted L2 norm drops below tol (that term is included). Requires
// e >= 0. Reports non-convergence after max_bounces instead of throwing.
NeumannResult solve_neumann(const Scene& scene, const KernelMatrix& kernel,
                            const Eigen::VectorXd& emittance, double tol = 1e-10,
                            int max_bounces = 10000);

// Dense LU solve of (I - D_rho K) B = e with a condition estimate; refuses
// near-singular systems and verifies the Euclidean residual against
// 1e-8 * |e|_2. Sized for scenes up to 2000 patches.
Eigen::VectorXd solve_direct(const Scene& scene, const KernelMatrix& kernel,
                             const Eigen::VectorXd& emittance);

// Field CSV layout: header "patch_index,value", one row per patch.
void write_field_csv(const std::string& path, const Eigen::VectorXd& field);
Eigen::VectorXd read_field_csv(const std::string& path);

}  // namespace relight

#pragma once

// Scene representation for patch-based interreflection studies. A patch is a
// planar parallelogram carrying a constant diffuse albedo; its normal and
// area derive from the edge vectors. Luminaires are per-patch emittance
// fields; a scene stores a basis of them plus the Dirichlet concentration
// used when sampling mixing weights.

#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace relight {

inline constexpr double kDefaultKernelCap = 1e6;

struct Patch {
    Eigen::Vector3d center;
    Eigen::Vector3d edge_u;
    Eigen::Vector3d edge_v;
    double albedo = 0.5;

    Eigen::Vector3d normal() const {
        const Eigen::Vector3d c = edge_u.cross(edge_v);
        return c / c.norm();
    }
    double area() const { return edge_u.cross(edge_v).norm(); }
    Eigen::Vector3d corner() const { return center - 0.5 * (edge_u + edge_v); }
    // (a, b) in [0,1]^2 parameterize the parallelogram.
    Eigen::Vector3d point(double a, double b) const { return corner() + a * edge_u + b * edge_v; }
};

struct LuminaireModel {
    // One column per luminaire, one row per patch. Canonical scenes carry
    // columns with unit area-weighted L2 norm; scenes produced by
    // apply_affine keep the original coefficients instead.
    Eigen::MatrixXd basis;
    double dirichlet_alpha = 1.0;
};

class Scene {
  public:
    Scene(std::vector<Patch> patches, LuminaireModel luminaires,
          double kernel_cap = kDefaultKernelCap);

    const std::vector<Patch>& patches() const { return patches_; }
    const LuminaireModel& luminaires() const { return luminaires_; }
    double kernel_cap() const { return kernel_cap_; }

    int patch_count() const { return static_cast<int>(patches_.size()); }
    int luminaire_count() const { return static_cast<int>(luminaires_.basis.cols()); }
    const Eigen::VectorXd& areas() const { return areas_; }
    const Eigen::VectorXd& albedos() const { return albedos_; }
    double max_albedo() const { return max_albedo_; }

    // Emittance field for mixing weights theta (one weight per luminaire).
    Eigen::VectorXd luminaire_field(const Eigen::VectorXd& theta) const;

  private:
    std::vector<Patch> patches_;
    LuminaireModel luminaires_;
    double kernel_cap_;
    Eigen::VectorXd areas_;
    Eigen::VectorXd albedos_;
    double max_albedo_;
};

class AffinePerturbation {
  public:
    // Requires det(matrix) >= 0 and smallest singular value > 0, which keeps
    // patch orientations intact.
    AffinePerturbation(const Eigen::Matrix3d& matrix, const Eigen::Vector3d& offset);

    static AffinePerturbation identity();

    const Eigen::Matrix3d& matrix() const { return matrix_; }
    const Eigen::Vector3d& offset() const { return offset_; }
    double sigma_max() const { return sigma_max_; }
    double sigma_min() const { return sigma_min_; }
    // Ratio of extreme singular values.
    double condition_number() const { return sigma_max_ / sigma_min_; }

    Eigen::Vector3d operator()(const Eigen::Vector3d& x) const { return matrix_ * x + offset_; }

    // this after inner: (this o inner)(x) = this(inner(x)).
    AffinePerturbation composed_with(const AffinePerturbation& inner) const;

  private:
    Eigen::Matrix3d matrix_;
    Eigen::Vector3d offset_;
    double sigma_max_;
    double sigma_min_;
};

// Transformed copy of the scene: centers map through the full affine map,
// edges through the linear part. Albedos, luminaire coefficients, Dirichlet
// concentration and the kernel cap carry over unchanged.
Scene apply_affine(const Scene& scene, const AffinePerturbation& t);

// Copy with albedo_j + delta_j; every perturbed albedo must stay in (0,1).
Scene perturb_albedos(const Scene& scene, const Eigen::VectorXd& deltas);

// Center-to-center mutual visibility. The open segment between the two patch
// centers is tested against every other patch; hits within 1e-9 of either
// endpoint (in segment parameter) do not count as occlusion. Symmetric in
// (i, j) by construction.
bool visibility(const Scene& scene, int i, int j);

double condition_number(const Eigen::Matrix3d& m);

// Area-weighted L2 norms of each luminaire basis column.
Eigen::VectorXd luminaire_norms(const Scene& scene);

}  // namespace relight

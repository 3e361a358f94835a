#include "relight/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace relight {

namespace {

void validate_patch(const Patch& p, int index) {
    const auto bad = [&](const std::string& what) {
        throw std::invalid_argument("patch " + std::to_string(index) + ": " + what);
    };
    if (!p.center.allFinite() || !p.edge_u.allFinite() || !p.edge_v.allFinite() ||
        !std::isfinite(p.albedo))
        bad("non-finite component");
    if (p.edge_u.cross(p.edge_v).norm() <= 0.0) bad("degenerate edges, area is zero");
    if (!(p.albedo > 0.0) || !(p.albedo < 1.0)) bad("albedo must lie in (0,1)");
}

}  // namespace

Scene::Scene(std::vector<Patch> patches, LuminaireModel luminaires, double kernel_cap)
    : patches_(std::move(patches)), luminaires_(std::move(luminaires)), kernel_cap_(kernel_cap) {
    if (patches_.empty()) throw std::invalid_argument("scene needs at least one patch");
    if (!(kernel_cap_ > 0.0)) throw std::invalid_argument("kernel cap must be positive");
    const int n = patch_count();
    areas_.resize(n);
    albedos_.resize(n);
    max_albedo_ = 0.0;
    for (int i = 0; i < n; ++i) {
        validate_patch(patches_[static_cast<std::size_t>(i)], i);
        areas_[i] = patches_[static_cast<std::size_t>(i)].area();
        albedos_[i] = patches_[static_cast<std::size_t>(i)].albedo;
        max_albedo_ = std::max(max_albedo_, albedos_[i]);
    }
    if (luminaires_.basis.size() > 0 && luminaires_.basis.rows() != n)
        throw std::invalid_argument("luminaire basis rows must match patch count");
    if (luminaires_.basis.size() == 0) luminaires_.basis.resize(n, 0);
    if ((luminaires_.basis.array() < 0.0).any())
        throw std::invalid_argument("luminaire coefficients must be non-negative");
    if (!luminaires_.basis.allFinite())
        throw std::invalid_argument("luminaire coefficients must be finite");
    if (!(luminaires_.dirichlet_alpha > 0.0))
        throw std::invalid_argument("dirichlet_alpha must be positive");
}

Eigen::VectorXd Scene::luminaire_field(const Eigen::VectorXd& theta) const {
    if (theta.size() != luminaires_.basis.cols())
        throw std::invalid_argument("theta size must match luminaire count");
    return luminaires_.basis * theta;
}

AffinePerturbation::AffinePerturbation(const Eigen::Matrix3d& matrix, const Eigen::Vector3d& offset)
    : matrix_(matrix), offset_(offset) {
    if (!matrix.allFinite() || !offset.allFinite())
        throw std::invalid_argument("affine map has non-finite entries");
    if (matrix.determinant() < 0.0)
        throw std::invalid_argument("affine map must preserve orientation");
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(matrix);
    sigma_max_ = svd.singularValues()[0];
    sigma_min_ = svd.singularValues()[2];
    if (!(sigma_min_ > 0.0)) throw std::invalid_argument("affine map must be nonsingular");
}

AffinePerturbation AffinePerturbation::identity() {
    return AffinePerturbation(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero());
}

AffinePerturbation AffinePerturbation::composed_with(const AffinePerturbation& inner) const {
    return AffinePerturbation(matrix_ * inner.matrix_, matrix_ * inner.offset_ + offset_);
}

Scene apply_affine(const Scene& scene, const AffinePerturbation& t) {
    std::vector<Patch> out;
    out.reserve(scene.patches().size());
    for (const Patch& p : scene.patches()) {
        Patch q;
        q.center = t(p.center);
        q.edge_u = t.matrix() * p.edge_u;
        q.edge_v = t.matrix() * p.edge_v;
        q.albedo = p.albedo;
        out.push_back(q);
    }
    return Scene(std::move(out), scene.luminaires(), scene.kernel_cap());
}

Scene perturb_albedos(const Scene& scene, const Eigen::VectorXd& deltas) {
    if (deltas.size() != scene.patch_count())
        throw std::invalid_argument("albedo delta size must match patch count");
    std::vector<Patch> out = scene.patches();
    for (int i = 0; i < scene.patch_count(); ++i)
        out[static_cast<std::size_t>(i)].albedo += deltas[i];
    return Scene(std::move(out), scene.luminaires(), scene.kernel_cap());
}

namespace {

double triple(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
    return a.dot(b.cross(c));
}

}  // namespace

bool visibility(const Scene& scene, int i, int j) {
    const int n = scene.patch_count();
    if (i < 0 || j < 0 || i >= n || j >= n) throw std::invalid_argument("visibility: patch index out of range");
    if (i == j) throw std::invalid_argument("visibility: indices must differ");
    // Orient the segment from the lower index so (i, j) and (j, i) run the
    // exact same arithmetic.
    const int lo = std::min(i, j), hi = std::max(i, j);
    const Eigen::Vector3d p = scene.patches()[static_cast<std::size_t>(lo)].center;
    const Eigen::Vector3d d = scene.patches()[static_cast<std::size_t>(hi)].center - p;
    constexpr double t_tol = 1e-9;

    for (int k = 0; k < n; ++k) {
        if (k == lo || k == hi) continue;
        const Patch& occ = scene.patches()[static_cast<std::size_t>(k)];
        const Eigen::Vector3d u = occ.edge_u;
        const Eigen::Vector3d v = occ.edge_v;
        // Solve p + t d = corner + a u + b v by Cramer's rule on [d, -u, -v].
        const double det = triple(d, -u, -v);
        const double scale = d.norm() * u.norm() * v.norm();
        if (std::abs(det) <= 1e-14 * scale) continue;  // segment parallel to the patch plane
        const Eigen::Vector3d rhs = occ.corner() - p;
        const double t = triple(rhs, -u, -v) / det;
        if (t <= t_tol || t >= 1.0 - t_tol) continue;
        const double a = triple(d, rhs, -v) / det;
        if (a < 0.0 || a > 1.0) continue;
        const double b = triple(d, -u, rhs) / det;
        if (b < 0.0 || b > 1.0) continue;
        return false;
    }
    return true;
}

double condition_number(const Eigen::Matrix3d& m) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m);
    const double s_min = svd.singularValues()[2];
    if (!(s_min > 0.0)) throw std::invalid_argument("condition_number: singular matrix");
    return svd.singularValues()[0] / s_min;
}

Eigen::VectorXd luminaire_norms(const Scene& scene) {
    const Eigen::MatrixXd& basis = scene.luminaires().basis;
    Eigen::VectorXd norms(basis.cols());
    for (Eigen::Index c = 0; c < basis.cols(); ++c)
        norms[c] = std::sqrt((basis.col(c).array().square() * scene.areas().array()).sum());
    return norms;
}

}  // namespace relight

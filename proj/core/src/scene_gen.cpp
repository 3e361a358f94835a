#include "relight/scene_gen.hpp"

#include <cmath>
#include <stdexcept>

#include "relight/radiosity.hpp"

namespace relight {

Eigen::Matrix3d random_rotation(Rng& rng) {
    double q[4];
    double norm_sq = 0.0;
    do {
        norm_sq = 0.0;
        for (double& qi : q) {
            qi = rng.normal();
            norm_sq += qi * qi;
        }
    } while (norm_sq < 1e-12);
    const double s = 1.0 / std::sqrt(norm_sq);
    const double w = q[0] * s, x = q[1] * s, y = q[2] * s, z = q[3] * s;
    Eigen::Matrix3d r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

AffinePerturbation random_perturbation(Rng& rng, double max_cond, double scale_jitter,
                                       double max_offset) {
    if (!(max_cond >= 1.0)) throw std::invalid_argument("max_cond must be at least 1");
    const double half_log = 0.5 * std::log(max_cond);
    Eigen::Vector3d s;
    for (int i = 0; i < 3; ++i) s[i] = std::exp(rng.uniform(-half_log, half_log));
    const double global = 1.0 + rng.uniform(-scale_jitter, scale_jitter);
    const Eigen::Matrix3d a = random_rotation(rng) * (global * s).asDiagonal() * random_rotation(rng).transpose();
    Eigen::Vector3d b;
    for (int i = 0; i < 3; ++i) b[i] = rng.uniform(-max_offset, max_offset);
    return AffinePerturbation(a, b);
}

namespace {

// Orthonormal tangent pair completing n to a right-handed frame.
void tangent_frame(const Eigen::Vector3d& n, Eigen::Vector3d& t1, Eigen::Vector3d& t2) {
    const Eigen::Vector3d helper =
        std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
    t1 = helper.cross(n).normalized();
    t2 = n.cross(t1);
}

}  // namespace

Scene random_scene(Rng& rng, const SceneGenParams& params) {
    if (params.min_patches < 1 || params.max_patches < params.min_patches)
        throw std::invalid_argument("random_scene: bad patch count range");
    const int n = rng.uniform_int(params.min_patches, params.max_patches);

    // Separated centers keep kernel values far below the cap.
    constexpr double min_sep = 0.12;
    std::vector<Eigen::Vector3d> centers;
    centers.reserve(static_cast<std::size_t>(n));
    while (static_cast<int>(centers.size()) < n) {
        Eigen::Vector3d c;
        for (;;) {
            c = Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
            if (c.norm() <= 1.0) break;
        }
        bool ok = true;
        for (const auto& prev : centers)
            if ((c - prev).norm() < min_sep) {
                ok = false;
                break;
            }
        if (ok) centers.push_back(c);
    }

    std::vector<Eigen::Vector3d> normals(static_cast<std::size_t>(n));
    std::vector<double> albedos(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        normals[static_cast<std::size_t>(i)] = rng.unit_vector();
        albedos[static_cast<std::size_t>(i)] = rng.uniform(params.albedo_min, params.albedo_max);
    }

    const auto build = [&](double edge) {
        std::vector<Patch> patches;
        patches.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            Eigen::Vector3d t1, t2;
            tangent_frame(normals[static_cast<std::size_t>(i)], t1, t2);
            Patch p;
            p.center = centers[static_cast<std::size_t>(i)];
            p.edge_u = edge * t1;
            p.edge_v = edge * t2;
            p.albedo = albedos[static_cast<std::size_t>(i)];
            patches.push_back(p);
        }
        return patches;
    };

    const int n_lum = rng.uniform_int(params.min_luminaires, params.max_luminaires);
    LuminaireModel lum;
    lum.dirichlet_alpha = params.dirichlet_alpha;
    lum.basis.setZero(n, n_lum);
    // Round-robin supports keep the luminaires linearly independent.
    if (n_lum > 0)
        for (int i = 0; i < n; ++i) lum.basis(i, i % n_lum) = rng.uniform(0.5, 1.5);

    double edge = 0.1;
    for (int attempt = 0; attempt < 80; ++attempt) {
        Scene scene(build(edge), lum, params.kernel_cap);
        const Eigen::MatrixXd k = kernel_entries(scene);
        const double worst = k.rows() ? k.rowwise().sum().maxCoeff() : 0.0;
        if (worst <= params.max_row_sum) {
            // Luminaire columns become unit area-weighted L2 norm only now
            // that areas are final.
            Eigen::MatrixXd basis = lum.basis;
            for (Eigen::Index c = 0; c < basis.cols(); ++c) {
                const double nrm =
                    std::sqrt((basis.col(c).array().square() * scene.areas().array()).sum());
                if (!(nrm > 0.0)) basis(rng.uniform_int(0, n - 1), c) = 1.0;
            }
            for (Eigen::Index c = 0; c < basis.cols(); ++c) {
                const double nrm =
                    std::sqrt((basis.col(c).array().square() * scene.areas().array()).sum());
                basis.col(c) /= nrm;
            }
            LuminaireModel final_lum{basis, params.dirichlet_alpha};
            return Scene(build(edge), std::move(final_lum), params.kernel_cap);
        }
        edge *= 0.75;
    }
    throw std::logic_error("random_scene: could not reach the kernel row-sum target");
}

Eigen::VectorXd random_albedo_deltas(Rng& rng, const Scene& scene, double max_eps_rho) {
    Eigen::VectorXd deltas(scene.patch_count());
    for (int i = 0; i < scene.patch_count(); ++i) {
        const double rho = scene.albedos()[i];
        const double raw = rng.uniform(-max_eps_rho, max_eps_rho);
        const double target = std::min(std::max(rho + raw, 0.02), 0.95);
        deltas[i] = target - rho;
    }
    return deltas;
}

Eigen::VectorXd random_emittance(Rng& rng, const Scene& scene) {
    if (scene.luminaire_count() == 0) return Eigen::VectorXd::Ones(scene.patch_count());
    const Eigen::VectorXd theta =
        rng.dirichlet(scene.luminaire_count(), scene.luminaires().dirichlet_alpha);
    return scene.luminaire_field(theta);
}

Eigen::VectorXd perturbed_emittance(Rng& rng, const Scene& scene, const Eigen::VectorXd& e,
                                    double max_eps_e) {
    const double base = weighted_norm(e, scene, Norm::L2);
    if (!(base > 0.0)) throw std::invalid_argument("perturbed_emittance: zero reference field");
    Eigen::VectorXd noise(e.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) noise[i] = rng.normal();
    const double noise_norm = weighted_norm(noise, scene, Norm::L2);
    const double target = rng.uniform(0.0, max_eps_e) * base;
    if (noise_norm > 0.0) noise *= target / noise_norm;
    // Clipping to >= 0 only shrinks per-entry deviations, so the relative
    // change stays within max_eps_e.
    return (e + noise).cwiseMax(0.0);
}

}  // namespace relight

#include "relight/bounds.hpp"

#include <cmath>
#include <stdexcept>

#include "relight/parallel.hpp"
#include "relight/radiosity.hpp"
#include "relight/rng.hpp"
#include "relight/textio.hpp"

namespace relight {

namespace {

void check_bound_inputs(double eps_e, double eps_rho, double p, double p_prime, double cond_c,
                        double norm_e) {
    if (!(eps_e >= 0.0) || !(eps_rho >= 0.0))
        throw std::invalid_argument("perturbation magnitudes must be non-negative");
    if (!(p >= 0.0) || !(p < 1.0) || !(p_prime >= 0.0) || !(p_prime < 1.0))
        throw std::invalid_argument("albedo bounds must lie in [0,1)");
    if (!(cond_c >= 1.0)) throw std::invalid_argument("condition number must be at least 1");
    if (!(norm_e >= 0.0)) throw std::invalid_argument("emittance norm must be non-negative");
}

double pow4(double x) { return (x * x) * (x * x); }

}  // namespace

double perturbation_bound(double eps_e, double eps_rho, double p, double p_prime, double cond_c,
                          double norm_e) {
    check_bound_inputs(eps_e, eps_rho, p, p_prime, cond_c, norm_e);
    const double luminaire = eps_e / (1.0 - p);
    const double albedo = eps_rho * (1.0 + eps_e) / ((1.0 - p) * (1.0 - p_prime));
    const double geometry = (pow4(cond_c) - 1.0) * (1.0 + eps_e) / ((1.0 - p_prime) * (1.0 - p_prime));
    return (luminaire + albedo + geometry) * norm_e;
}

FactorBounds factor_bounds(double eps_e, double eps_rho, double p, double p_prime, double cond_c,
                           double norm_e) {
    check_bound_inputs(eps_e, eps_rho, p, p_prime, cond_c, norm_e);
    FactorBounds out;
    out.luminaire = eps_e * norm_e / (1.0 - p);
    out.albedo = eps_rho * norm_e / ((1.0 - p) * (1.0 - p_prime));
    // The single-factor geometry bound carries 1/(1-p)^2; the combined bound
    // above uses 1/(1-p')^2 instead. With untouched albedos they coincide.
    out.geometry = (pow4(cond_c) - 1.0) * norm_e / ((1.0 - p) * (1.0 - p));
    return out;
}

PerturbationReport verify_perturbation(const Scene& scene, const AffinePerturbation& t,
                                       const Eigen::VectorXd& albedo_deltas,
                                       const Eigen::VectorXd& e, const Eigen::VectorXd& e_prime) {
    if (e.size() != scene.patch_count() || e_prime.size() != scene.patch_count())
        throw std::invalid_argument("emittance size must match patch count");
    if ((e.array() < 0.0).any() || (e_prime.array() < 0.0).any())
        throw std::invalid_argument("emittances must be non-negative");

    const Eigen::VectorXd& areas = scene.areas();
    const double norm_e = weighted_norm(e, areas, Norm::L2);
    if (!(norm_e > 0.0)) throw std::invalid_argument("reference emittance must be nonzero");

    const Scene warped = perturb_albedos(apply_affine(scene, t), albedo_deltas);

    const KernelMatrix k = assemble_kernel(scene);
    const KernelMatrix k_prime = assemble_kernel(warped);
    const Eigen::VectorXd b = solve_direct(scene, k, e);
    const Eigen::VectorXd b_prime = solve_direct(warped, k_prime, e_prime);

    PerturbationReport rep;
    rep.eps_e = weighted_norm(e - e_prime, areas, Norm::L2) / norm_e;
    rep.eps_rho = albedo_deltas.size() ? albedo_deltas.array().abs().maxCoeff() : 0.0;
    rep.p = scene.max_albedo();
    rep.p_prime = warped.max_albedo();
    rep.cond_c = t.condition_number();
    // Fields on both scenes share the patch indexing; all norms use the
    // reference areas as quadrature weights.
    rep.actual_diff = weighted_norm(b - b_prime, areas, Norm::L2);
    rep.bound = perturbation_bound(rep.eps_e, rep.eps_rho, rep.p, rep.p_prime, rep.cond_c, norm_e);
    rep.holds = rep.actual_diff <= rep.bound + 1e-9;
    return rep;
}

bool kernel_sandwich_check(const Scene& scene, const AffinePerturbation& t,
                           const Eigen::VectorXd& f) {
    if (f.size() != scene.patch_count())
        throw std::invalid_argument("field size must match patch count");
    if ((f.array() < 0.0).any())
        throw std::invalid_argument("sandwich check needs a non-negative field");
    const Eigen::VectorXd x = kernel_entries(scene) * f;
    const Eigen::VectorXd y = kernel_entries(apply_affine(scene, t)) * f;
    const double c4 = pow4(t.condition_number());
    const double scale = std::max(x.size() ? x.array().abs().maxCoeff() : 0.0,
                                  y.size() ? y.array().abs().maxCoeff() : 0.0);
    const double slack = 1e-9 * scale;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (y[i] < x[i] / c4 - slack) return false;
        if (y[i] > x[i] * c4 + slack) return false;
    }
    return true;
}

RankOneGapReport rank_one_gap_check(const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
    if (b.size() != c.size()) throw std::invalid_argument("rank_one_gap_check: size mismatch");
    if (b.size() == 0) throw std::invalid_argument("rank_one_gap_check: empty vectors");
    RankOneGapReport rep;
    const Eigen::VectorXd w = b - c;
    rep.delta = w.norm();
    rep.radius = b.norm();
    // b b^T - c c^T = b w^T + w b^T - w w^T; forming it through w avoids the
    // cancellation the direct difference suffers when b is close to c.
    const Eigen::MatrixXd m =
        b * w.transpose() + w * b.transpose() - w * w.transpose();
    rep.gap_sq = m.squaredNorm();
    const double d = rep.delta, r = rep.radius;
    rep.statement_bound = 3 * d * d * r * r + 4 * d * d * d * r + d * d * d * d;
    rep.proof_bound = 4 * d * r * r * r + 3 * d * d * r * r + 2 * d * d * d * r + d * d * d * d;
    const double slack = 1e-9 * std::max(1.0, rep.gap_sq);
    rep.statement_holds = rep.gap_sq <= rep.statement_bound + slack;
    rep.proof_holds = rep.gap_sq <= rep.proof_bound + slack;
    return rep;
}

bool gloss_property_check(const Brdf& brdf, double alpha, int n_samples, std::uint64_t seed,
                          GlossCheckStats* stats) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("gloss exponent must be non-negative");
    if (n_samples < 1) throw std::invalid_argument("need at least one sample");
    Rng rng(seed);
    const auto hemisphere = [&rng]() {
        const double z = rng.uniform();
        const double r = std::sqrt(std::max(1.0 - z * z, 0.0));
        const double phi = rng.uniform(0.0, 6.283185307179586477);
        return Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), z);
    };
    GlossCheckStats local;
    for (int s = 0; s < n_samples; ++s) {
        const Eigen::Vector3d w = hemisphere(), wb = hemisphere();
        const Eigen::Vector3d wp = hemisphere(), wbp = hemisphere();
        const double t1 = wp.dot(w), t2 = wbp.dot(wb);
        if (t1 <= 0.0 || t2 <= 0.0) {
            ++local.skipped;
            continue;
        }
        const double v0 = brdf(w, wb), v1 = brdf(wp, wbp);
        if (!(v0 > 0.0) || !(v1 > 0.0))
            throw std::runtime_error("gloss check requires a positive BRDF");
        const double ratio = v1 / v0;
        const double base = t1 * t2;
        const double lower = std::pow(base, alpha);
        const double upper = std::pow(base, -alpha);
        ++local.evaluated;
        if (ratio < lower * (1.0 - 1e-12) || ratio > upper * (1.0 + 1e-12)) ++local.violations;
    }
    if (stats) *stats = local;
    return local.violations == 0;
}

namespace {

PerturbationReport run_trial(const Scene& scene, const PerturbationCampaignConfig& config,
                             Rng& rng) {
    const bool warp = config.mode == PerturbationMode::Full ||
                      config.mode == PerturbationMode::GeometryOnly;
    const bool jitter_albedo = config.mode == PerturbationMode::Full ||
                               config.mode == PerturbationMode::AlbedoOnly;
    const bool jitter_light = config.mode == PerturbationMode::Full ||
                              config.mode == PerturbationMode::LuminaireOnly;

    const AffinePerturbation t =
        warp ? random_perturbation(rng, config.max_cond) : AffinePerturbation::identity();
    const Eigen::VectorXd deltas = jitter_albedo
                                       ? random_albedo_deltas(rng, scene, config.max_eps_rho)
                                       : Eigen::VectorXd::Zero(scene.patch_count());
    const Eigen::VectorXd e = random_emittance(rng, scene);
    const Eigen::VectorXd e_prime =
        jitter_light ? perturbed_emittance(rng, scene, e, config.max_eps_e) : e;
    return verify_perturbation(scene, t, deltas, e, e_prime);
}

}  // namespace

std::vector<PerturbationReport> run_perturbation_campaign(const Scene& scene,
                                                          const PerturbationCampaignConfig& config) {
    if (config.trials < 1) throw std::invalid_argument("campaign needs at least one trial");
    std::vector<PerturbationReport> rows(static_cast<std::size_t>(config.trials));
    parallel_for(config.trials, config.threads, [&](int trial) {
        Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(trial));
        rows[static_cast<std::size_t>(trial)] = run_trial(scene, config, rng);
    });
    return rows;
}

std::vector<PerturbationReport> run_perturbation_campaign(const PerturbationCampaignConfig& config,
                                                          const SceneGenParams& gen) {
    if (config.trials < 1) throw std::invalid_argument("campaign needs at least one trial");
    std::vector<PerturbationReport> rows(static_cast<std::size_t>(config.trials));
    parallel_for(config.trials, config.threads, [&](int trial) {
        Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(trial));
        const Scene scene = random_scene(rng, gen);
        rows[static_cast<std::size_t>(trial)] = run_trial(scene, config, rng);
    });
    return rows;
}

void write_perturbation_csv(const std::string& path, const std::vector<PerturbationReport>& rows) {
    std::vector<std::vector<std::string>> cells;
    cells.reserve(rows.size());
    int trial = 0;
    for (const auto& r : rows) {
        cells.push_back({std::to_string(trial++), textio::format_double(r.eps_e),
                         textio::format_double(r.eps_rho), textio::format_double(r.p),
                         textio::format_double(r.p_prime), textio::format_double(r.cond_c),
                         textio::format_double(r.actual_diff), textio::format_double(r.bound),
                         r.holds ? "1" : "0"});
    }
    textio::write_csv(path,
                      {"trial", "eps_E", "eps_rho", "p", "p_prime", "cond_c", "actual", "bound", "holds"},
                      cells);
}

}  // namespace relight

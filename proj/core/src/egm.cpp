#include "relight/egm.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "relight/parallel.hpp"
#include "relight/rng.hpp"
#include "relight/textio.hpp"

namespace relight {

RadiosityBasis radiosity_basis(const Scene& scene, const KernelMatrix& kernel) {
    const int n_lum = scene.luminaire_count();
    if (n_lum < 1) throw std::invalid_argument("radiosity_basis: scene has no luminaires");
    RadiosityBasis out;
    out.coefficients.resize(scene.patch_count(), n_lum);
    const Eigen::ArrayXd root_areas = scene.areas().array().sqrt();
    for (int l = 0; l < n_lum; ++l) {
        const Eigen::VectorXd b = solve_direct(scene, kernel, scene.luminaires().basis.col(l));
        out.coefficients.col(l) = (root_areas * b.array()).matrix();
    }
    return out;
}

Eigen::MatrixXd dirichlet_second_moment(int n, double alpha) {
    if (n < 1) throw std::invalid_argument("dirichlet_second_moment: need at least one component");
    if (!(alpha > 0.0)) throw std::invalid_argument("dirichlet_second_moment: alpha must be positive");
    const double denom = n * alpha * (n * alpha + 1.0);
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, alpha * alpha / denom);
    m.diagonal().setConstant(alpha * (alpha + 1.0) / denom);
    return m;
}

SecondMoment make_second_moment(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw std::invalid_argument("second moment must be square and non-empty");
    const double scale = std::max(1.0, m.array().abs().maxCoeff());
    if ((m - m.transpose()).array().abs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("second moment must be symmetric");

    SecondMoment out;
    out.matrix = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.matrix);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("second moment eigendecomposition failed");
    const Eigen::Index n = m.rows();
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.eigenvalues[i] = eig.eigenvalues()[n - 1 - i];
        out.eigenvectors.col(i) = eig.eigenvectors().col(n - 1 - i);
    }
    const double top = std::max(out.eigenvalues[0], 0.0);
    if (out.eigenvalues[n - 1] < -1e-10 * std::max(1.0, top))
        throw std::invalid_argument("second moment must be positive semidefinite");
    const double recon_err =
        (out.eigenvectors * out.eigenvalues.asDiagonal() * out.eigenvectors.transpose() -
         out.matrix)
            .norm();
    if (recon_err > 1e-9 * std::max(1.0, out.matrix.norm()))
        throw std::runtime_error("second moment eigendecomposition lost accuracy");
    out.eigenvalues = out.eigenvalues.cwiseMax(0.0);
    return out;
}

SecondMoment second_moment(const RadiosityBasis& basis, const Eigen::MatrixXd& theta_moment) {
    if (theta_moment.rows() != basis.coefficients.cols() ||
        theta_moment.cols() != basis.coefficients.cols())
        throw std::invalid_argument("theta moment size must match the luminaire count");
    const double scale = std::max(1.0, theta_moment.array().abs().maxCoeff());
    if ((theta_moment - theta_moment.transpose()).array().abs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("theta moment must be symmetric");
    return make_second_moment(basis.coefficients * theta_moment * basis.coefficients.transpose());
}

SecondMoment empirical_second_moment(const Eigen::MatrixXd& samples) {
    if (samples.cols() < 1) throw std::invalid_argument("need at least one sample");
    return make_second_moment((samples * samples.transpose()) / static_cast<double>(samples.cols()));
}

double egm_loss(const Egm& egm, const SecondMoment& moment) {
    const Eigen::MatrixXd& g = egm.generators;
    if (g.rows() != moment.matrix.rows())
        throw std::invalid_argument("generator rows must match the moment dimension");
    if (g.cols() < 1 || g.cols() > g.rows())
        throw std::invalid_argument("generator count must lie in [1, dimension]");
    const Eigen::MatrixXd gram = g.transpose() * g;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(g.cols(), g.cols());
    if ((gram - id).array().abs().maxCoeff() > 1e-10)
        throw std::invalid_argument("generators must be orthonormal");
    return moment.matrix.trace() - (g.transpose() * moment.matrix * g).trace();
}

Egm egm_fit(const SecondMoment& moment, int r) {
    const Eigen::Index n = moment.matrix.rows();
    if (r < 1 || r > n) throw std::invalid_argument("rank must lie in [1, dimension]");
    if (r < n) {
        const double gap = moment.eigenvalues[r - 1] - moment.eigenvalues[r];
        if (gap <= 1e-10)
            throw std::runtime_error(
                "eigenvalue tie at the rank cut (gap " + textio::format_double(gap) +
                "); perturb the moment or change the rank");
    }
    return Egm{moment.eigenvectors.leftCols(r)};
}

double estimation_regret(const SecondMoment& c_true, const SecondMoment& c_estimate, int r) {
    if (c_true.matrix.rows() != c_estimate.matrix.rows())
        throw std::invalid_argument("moment dimensions must match");
    const Egm best = egm_fit(c_true, r);
    const Egm est = egm_fit(c_estimate, r);
    return egm_loss(est, c_true) - egm_loss(best, c_true);
}

double loose_bound(const SecondMoment& c_true, int r) {
    const Eigen::Index n = c_true.eigenvalues.size();
    if (r < 1 || r > n) throw std::invalid_argument("rank must lie in [1, dimension]");
    return c_true.eigenvalues.sum() - c_true.eigenvalues.tail(r).sum();
}

Eigen::VectorXd isotonic_decreasing_fit(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    std::vector<double> sums;
    std::vector<Eigen::Index> counts;
    sums.reserve(static_cast<std::size_t>(n));
    counts.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        sums.push_back(v[i]);
        counts.push_back(1);
        // Pool while the last block mean exceeds its predecessor's.
        while (sums.size() > 1) {
            const std::size_t last = sums.size() - 1;
            if (sums[last] * static_cast<double>(counts[last - 1]) <=
                sums[last - 1] * static_cast<double>(counts[last]))
                break;
            sums[last - 1] += sums[last];
            counts[last - 1] += counts[last];
            sums.pop_back();
            counts.pop_back();
        }
    }
    Eigen::VectorXd out(n);
    Eigen::Index pos = 0;
    for (std::size_t blk = 0; blk < sums.size(); ++blk) {
        const double mean = sums[blk] / static_cast<double>(counts[blk]);
        for (Eigen::Index k = 0; k < counts[blk]; ++k) out[pos++] = mean;
    }
    return out;
}

double isotonic_distance_sq(const Eigen::VectorXd& v) {
    return (v - isotonic_decreasing_fit(v)).squaredNorm();
}

namespace {

void check_sorted_desc(const Eigen::VectorXd& lam) {
    for (Eigen::Index i = 0; i + 1 < lam.size(); ++i)
        if (lam[i + 1] > lam[i])
            throw std::invalid_argument("eigenvalues must be sorted in nonincreasing order");
}

}  // namespace

double lp_regret_bound(const Eigen::VectorXd& eigenvalues, int r, double budget) {
    const int n = static_cast<int>(eigenvalues.size());
    if (n < 2) throw std::invalid_argument("need at least two eigenvalues");
    if (n > 12) throw std::invalid_argument("rearrangement search supports at most 12 eigenvalues");
    if (r < 1 || r >= n) throw std::invalid_argument("rank must lie in [1, dimension)");
    if (!(budget >= 0.0)) throw std::invalid_argument("budget must be non-negative");
    check_sorted_desc(eigenvalues);

    const double feas_limit = budget * (1.0 + 1e-12) + 1e-12;
    Eigen::VectorXd arrangement(n);
    double v_min = eigenvalues.head(r).sum();

    const unsigned full = 1u << n;
    for (unsigned mask = 0; mask < full; ++mask) {
        if (__builtin_popcount(mask) != r) continue;
        // Both blocks keep descending order; that minimizes the isotonic
        // distance among arrangements sharing this top-r index set.
        Eigen::Index pos = 0;
        double captured = 0.0;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                arrangement[pos++] = eigenvalues[i];
                captured += eigenvalues[i];
            }
        for (int i = 0; i < n; ++i)
            if (!(mask & (1u << i))) arrangement[pos++] = eigenvalues[i];
        if (isotonic_distance_sq(arrangement) <= feas_limit) v_min = std::min(v_min, captured);
    }
    return eigenvalues.head(r).sum() - v_min;
}

double moment_perturbation_bound(int n_o, double eps_rho, double cond_c, double p) {
    if (n_o < 1) throw std::invalid_argument("dimension must be positive");
    if (!(eps_rho >= 0.0)) throw std::invalid_argument("eps_rho must be non-negative");
    if (!(cond_c >= 1.0)) throw std::invalid_argument("condition number must be at least 1");
    if (!(p >= 0.0) || !(p < 1.0)) throw std::invalid_argument("albedo bound must lie in [0,1)");
    const double c2 = cond_c * cond_c;
    const double d = (eps_rho + (c2 * c2 - 1.0)) / ((1.0 - p) * (1.0 - p));
    const double rr = 1.0 / (1.0 - p);
    const double poly = 4 * d * rr * rr * rr + 3 * d * d * rr * rr + 2 * d * d * d * rr + d * d * d * d;
    return static_cast<double>(n_o) * static_cast<double>(n_o) * poly;
}

namespace {

RegretTrial run_regret_trial(const Scene& base, const RegretCampaignConfig& config, Rng& rng) {
    const KernelMatrix kernel = assemble_kernel(base);
    const RadiosityBasis basis = radiosity_basis(base, kernel);
    const int n_e = base.luminaire_count();
    const double alpha = base.luminaires().dirichlet_alpha;
    const SecondMoment c_true = second_moment(basis, dirichlet_second_moment(n_e, alpha));

    const int n_o = base.patch_count();
    const int max_rank = std::min(n_e, n_o) - 1;
    if (max_rank < 1) throw std::invalid_argument("regret campaign needs at least two luminaires");

    int rank = config.rank;
    if (rank == 0) {
        // Widest admissible spectral gap; ranks whose cut would tie are useless.
        double best_gap = -1.0;
        for (int cand = 1; cand <= max_rank; ++cand) {
            const double gap = c_true.eigenvalues[cand - 1] - c_true.eigenvalues[cand];
            if (gap > best_gap) {
                best_gap = gap;
                rank = cand;
            }
        }
    }
    if (rank < 1 || rank > max_rank) throw std::invalid_argument("rank out of range for this scene");

    const int k = rng.uniform_int(config.min_scenes, config.max_scenes);
    Eigen::MatrixXd samples(n_o, k);
    double worst_cond = 1.0, worst_eps_rho = 0.0;
    for (int s = 0; s < k; ++s) {
        const AffinePerturbation t = random_perturbation(rng, config.max_cond, 0.02, 0.1);
        const Eigen::VectorXd deltas = random_albedo_deltas(rng, base, config.max_eps_rho);
        const Scene similar = perturb_albedos(apply_affine(base, t), deltas);
        const Eigen::VectorXd theta = rng.dirichlet(n_e, alpha);
        const Eigen::VectorXd b =
            solve_direct(similar, assemble_kernel(similar), base.luminaire_field(theta));
        samples.col(s) = (base.areas().array().sqrt() * b.array()).matrix();
        worst_cond = std::max(worst_cond, t.condition_number());
        worst_eps_rho = std::max(worst_eps_rho, deltas.array().abs().maxCoeff());
    }

    const SecondMoment c_hat = empirical_second_moment(samples);

    RegretTrial trial;
    trial.k_scenes = k;
    trial.rank = rank;
    trial.frob_err_sq = (c_true.matrix - c_hat.matrix).squaredNorm();
    trial.regret = estimation_regret(c_true, c_hat, rank);
    trial.loose = loose_bound(c_true, rank);
    trial.lp = lp_regret_bound(c_true.eigenvalues, rank, trial.frob_err_sq);
    trial.loose_holds = trial.regret <= trial.loose + 1e-9;
    trial.lp_holds = trial.regret <= trial.lp + 1e-9;
    trial.moment_gap = moment_perturbation_bound(n_o, worst_eps_rho, worst_cond, base.max_albedo());
    return trial;
}

}  // namespace

std::vector<RegretTrial> run_regret_campaign(const Scene& base, const RegretCampaignConfig& config) {
    if (config.trials < 1) throw std::invalid_argument("campaign needs at least one trial");
    std::vector<RegretTrial> rows(static_cast<std::size_t>(config.trials));
    parallel_for(config.trials, config.threads, [&](int trial) {
        Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(trial));
        rows[static_cast<std::size_t>(trial)] = run_regret_trial(base, config, rng);
    });
    return rows;
}

std::vector<RegretTrial> run_regret_campaign(const RegretCampaignConfig& config,
                                             const SceneGenParams& gen) {
    if (config.trials < 1) throw std::invalid_argument("campaign needs at least one trial");
    std::vector<RegretTrial> rows(static_cast<std::size_t>(config.trials));
    parallel_for(config.trials, config.threads, [&](int trial) {
        Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(trial));
        const Scene base = random_scene(rng, gen);
        rows[static_cast<std::size_t>(trial)] = run_regret_trial(base, config, rng);
    });
    return rows;
}

void write_regret_csv(const std::string& path, const std::vector<RegretTrial>& rows) {
    std::vector<std::vector<std::string>> cells;
    cells.reserve(rows.size());
    int trial = 0;
    for (const auto& r : rows) {
        cells.push_back({std::to_string(trial++), std::to_string(r.k_scenes),
                         textio::format_double(r.frob_err_sq), textio::format_double(r.regret),
                         textio::format_double(r.loose), textio::format_double(r.lp),
                         r.loose_holds ? "1" : "0", r.lp_holds ? "1" : "0"});
    }
    textio::write_csv(path,
                      {"trial", "k_scenes", "frob_err_sq", "regret", "loose_bound", "lp_bound",
                       "loose_holds", "lp_holds"},
                      cells);
}

}  // namespace relight

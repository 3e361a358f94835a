#include "relight/cli.hpp"

#include <algorithm>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include <json.hpp>

#include "relight/conefit.hpp"
#include "relight/egm.hpp"
#include "relight/metrics.hpp"
#include "relight/parallel.hpp"
#include "relight/radiosity.hpp"
#include "relight/rng.hpp"
#include "relight/scene_gen.hpp"
#include "relight/scene_io.hpp"
#include "relight/textio.hpp"

namespace relight::cli {
namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw std::runtime_error(message);
}

double tol_or(const CampaignConfig& config, const std::string& name, double fallback) {
    const auto it = config.tolerances.find(name);
    return it == config.tolerances.end() ? fallback : it->second;
}

void check_tolerance_names(const CampaignConfig& config) {
    static const std::set<std::string> known = {"neumann_tol", "max_cond", "max_eps_e",
                                                "max_eps_rho", "noise_sigma"};
    for (const auto& [name, value] : config.tolerances) {
        (void)value;
        require(known.count(name) > 0, "unknown tolerance override: " + name);
    }
}

EmbeddingSet load_embedding_file(const CampaignConfig& config, int which) {
    require(static_cast<int>(config.embedding_paths.size()) > which,
            "command needs " + std::to_string(which + 1) + " embedding file(s)");
    const auto format = config.binary_embeddings ? EmbeddingFormat::Binary : EmbeddingFormat::Csv;
    return load_embeddings(config.embedding_paths[static_cast<std::size_t>(which)], format);
}

int run_render(const CampaignConfig& config) {
    require(!config.scene_path.empty(), "render needs --scene");
    require(!config.output_path.empty(), "render needs --out");
    const Scene scene = load_scene(config.scene_path);
    const int n = scene.patch_count();
    Eigen::VectorXd e;
    if (scene.luminaire_count() > 0) {
        Rng rng = Rng::substream(config.seed, 0);
        const double alpha =
            config.alpha >= 0.0 ? config.alpha : scene.luminaires().dirichlet_alpha;
        const Eigen::VectorXd theta = rng.dirichlet(scene.luminaire_count(), alpha);
        e = scene.luminaire_field(theta);
    } else {
        e = Eigen::VectorXd::Ones(n);
    }
    const KernelMatrix kernel = assemble_kernel(scene, config.threads);
    Eigen::VectorXd b;
    if (n <= 2000) {
        b = solve_direct(scene, kernel, e);
    } else {
        const double tol = tol_or(config, "neumann_tol", 1e-10);
        const NeumannResult r = solve_neumann(scene, kernel, e, tol);
        require(r.converged, "bounce series did not converge");
        b = r.values;
    }
    write_field_csv(config.output_path, b);
    std::cout << "render: patches=" << n << " luminaires=" << scene.luminaire_count()
              << " l1=" << textio::format_double(weighted_norm(b, scene, Norm::L1))
              << " linf=" << textio::format_double(weighted_norm(b, scene, Norm::LInf)) << "\n";
    return 0;
}

int run_perturb(const CampaignConfig& config) {
    require(!config.scene_path.empty(), "perturb needs --scene");
    require(!config.output_path.empty(), "perturb needs --out");
    const Scene scene = load_scene(config.scene_path);
    Rng rng = Rng::substream(config.seed, 0);
    const AffinePerturbation t =
        random_perturbation(rng, tol_or(config, "max_cond", 1.2));
    const Eigen::VectorXd deltas =
        random_albedo_deltas(rng, scene, tol_or(config, "max_eps_rho", 0.2));
    const Scene warped = perturb_albedos(apply_affine(scene, t), deltas);
    save_scene_json(config.output_path, warped);
    std::cout << "perturb: patches=" << warped.patch_count()
              << " cond=" << textio::format_double(t.condition_number())
              << " eps_rho=" << textio::format_double(deltas.cwiseAbs().maxCoeff()) << "\n";
    return 0;
}

int run_verify_bounds(const CampaignConfig& config) {
    require(!config.scene_path.empty(), "verify-bounds needs --scene");
    require(!config.output_path.empty(), "verify-bounds needs --out");
    require(config.trials >= 1, "verify-bounds needs --trials >= 1");
    const Scene scene = load_scene(config.scene_path);
    PerturbationCampaignConfig campaign;
    campaign.trials = config.trials;
    campaign.seed = config.seed;
    campaign.mode = config.mode;
    campaign.max_cond = tol_or(config, "max_cond", 1.2);
    campaign.max_eps_e = tol_or(config, "max_eps_e", 0.2);
    campaign.max_eps_rho = tol_or(config, "max_eps_rho", 0.2);
    campaign.threads = config.threads;
    const std::vector<PerturbationReport> rows = run_perturbation_campaign(scene, campaign);
    write_perturbation_csv(config.output_path, rows);
    int violations = 0;
    double max_ratio = 0.0;
    for (const auto& row : rows) {
        if (!row.holds) ++violations;
        if (row.bound > 0.0) max_ratio = std::max(max_ratio, row.actual_diff / row.bound);
    }
    std::cout << "verify-bounds: trials=" << rows.size() << " violations=" << violations
              << " max_ratio=" << textio::format_double(max_ratio) << "\n";
    return violations > 0 ? 1 : 0;
}

int run_egm(const CampaignConfig& config) {
    require(!config.scene_path.empty(), "egm needs --scene");
    require(!config.output_path.empty(), "egm needs --out");
    require(config.trials >= 1, "egm needs --trials >= 1");
    Scene scene = load_scene(config.scene_path);
    if (config.alpha >= 0.0) {
        LuminaireModel lum = scene.luminaires();
        lum.dirichlet_alpha = config.alpha;
        scene = Scene(scene.patches(), std::move(lum), scene.kernel_cap());
    }
    RegretCampaignConfig campaign;
    campaign.trials = config.trials;
    campaign.seed = config.seed;
    campaign.rank = config.rank;
    campaign.max_cond = tol_or(config, "max_cond", campaign.max_cond);
    campaign.max_eps_rho = tol_or(config, "max_eps_rho", campaign.max_eps_rho);
    campaign.threads = config.threads;
    const std::vector<RegretTrial> rows = run_regret_campaign(scene, campaign);
    write_regret_csv(config.output_path, rows);
    int violations = 0;
    double max_gap = 0.0;
    for (const auto& row : rows) {
        if (!row.loose_holds || !row.lp_holds || row.regret < -1e-10) ++violations;
        max_gap = std::max(max_gap, row.moment_gap);
    }
    std::cout << "egm: trials=" << rows.size() << " violations=" << violations
              << " max_moment_gap=" << textio::format_double(max_gap) << "\n";
    return violations > 0 ? 1 : 0;
}

int run_conefit(const CampaignConfig& config) {
    require(!config.scene_path.empty(), "conefit needs --scene");
    require(!config.output_path.empty(), "conefit needs --out");
    require(config.trials >= 1, "conefit needs --trials >= 1");
    require(config.n_gd >= 0, "conefit needs --ngd >= 0");
    const Scene scene = load_scene(config.scene_path);
    require(scene.luminaire_count() > 0, "conefit needs a scene with luminaires");
    const KernelMatrix kernel = assemble_kernel(scene, config.threads);
    Eigen::MatrixXd fields(scene.patch_count(), scene.luminaire_count());
    for (int j = 0; j < scene.luminaire_count(); ++j)
        fields.col(j) = solve_direct(scene, kernel, scene.luminaires().basis.col(j));
    const GeneratorSet gens(fields);
    const double alpha = config.alpha >= 0.0 ? config.alpha : scene.luminaires().dirichlet_alpha;
    const double sigma = tol_or(config, "noise_sigma", 0.05);

    std::vector<Eigen::VectorXd> targets(static_cast<std::size_t>(config.trials));
    for (int t = 0; t < config.trials; ++t) {
        Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(t));
        const Eigen::VectorXd theta = rng.dirichlet(gens.count(), alpha);
        Eigen::VectorXd raw = fields * theta;
        const double level = raw.mean();
        for (int i = 0; i < raw.size(); ++i) raw[i] += sigma * level * rng.normal();
        targets[static_cast<std::size_t>(t)] = normalize_shading(raw.cwiseMax(0.0));
    }
    std::vector<FitResult> exact(targets.size());
    std::vector<FitResult> approx(targets.size());
    parallel_for(config.trials, config.threads, [&](int t) {
        const auto& target = targets[static_cast<std::size_t>(t)];
        exact[static_cast<std::size_t>(t)] = fit_exact(target, gens);
        approx[static_cast<std::size_t>(t)] = fit_approx(target, gens, config.n_gd);
    });
    const double nearby = nearby_loss(targets, gens, config.n_gd, config.threads);

    nlohmann::json doc;
    doc["generator_count"] = gens.count();
    doc["nearby_loss"] = nearby;
    doc["trials"] = nlohmann::json::array();
    double max_exact = 0.0;
    double max_gap = 0.0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        nlohmann::json row;
        row["exact"] = nlohmann::json::parse(fit_result_to_json(exact[t]));
        row["approx"] = nlohmann::json::parse(fit_result_to_json(approx[t]));
        doc["trials"].push_back(row);
        max_exact = std::max(max_exact, exact[t].residual_sq);
        max_gap = std::max(max_gap, approx[t].residual_sq - exact[t].residual_sq);
    }
    textio::write_text_file(config.output_path, doc.dump(2) + "\n");
    std::cout << "conefit: trials=" << config.trials << " generators=" << gens.count()
              << " nearby_loss=" << textio::format_double(nearby)
              << " max_exact_residual=" << textio::format_double(max_exact)
              << " max_fit_gap=" << textio::format_double(max_gap) << "\n";
    return 0;
}

int run_fid(const CampaignConfig& config) {
    require(config.embedding_paths.size() == 2, "fid needs two --embeddings files");
    const EmbeddingSet a = load_embedding_file(config, 0);
    const EmbeddingSet b = load_embedding_file(config, 1);
    const double plain = fid(a, b);
    const int n_sizes = std::clamp(config.trials, 3, 100);
    const FidInfinity fit = fid_infinity_fit(a, b, n_sizes, config.seed, config.threads);
    if (!config.output_path.empty()) {
        std::vector<std::vector<std::string>> rows;
        rows.reserve(fit.sizes.size());
        for (std::size_t i = 0; i < fit.sizes.size(); ++i)
            rows.push_back({std::to_string(fit.sizes[i]), textio::format_double(fit.fids[i])});
        textio::write_csv(config.output_path, {"subsample_size", "fid"}, rows);
    }
    std::cout << "fid: n_a=" << a.size() << " n_b=" << b.size()
              << " fid=" << textio::format_double(plain)
              << " fid_inf=" << textio::format_double(fit.intercept)
              << " se=" << textio::format_double(fit.std_error) << "\n";
    return 0;
}

int run_lfid(const CampaignConfig& config) {
    require(config.embedding_paths.size() == 2, "lfid needs two --embeddings files");
    require(!config.output_path.empty(), "lfid needs --out");
    const EmbeddingSet base = load_embedding_file(config, 0);
    const EmbeddingSet cand = load_embedding_file(config, 1);
    require(cand.dim() == base.dim(), "lfid candidate dimension mismatch");
    require(cand.size() <= base.size(),
            "lfid needs at most one candidate per base point (row i replaces base point i)");
    std::vector<std::pair<int, Eigen::VectorXd>> candidates;
    candidates.reserve(static_cast<std::size_t>(cand.size()));
    for (int i = 0; i < cand.size(); ++i)
        candidates.emplace_back(i, cand.points().row(i).transpose());
    const auto ranking =
        local_fid_ranking(base, candidates, config.eig_floor, config.threads);
    write_ranking_csv(config.output_path, ranking);
    std::cout << "lfid: candidates=" << ranking.size() << " best_index=" << ranking.front().index
              << " best=" << textio::format_double(ranking.front().lfid)
              << " worst=" << textio::format_double(ranking.back().lfid) << "\n";
    return 0;
}

int run_msd(const CampaignConfig& config) {
    require(config.embedding_paths.size() == 2, "msd needs two --embeddings files");
    const EmbeddingSet originals = load_embedding_file(config, 0);
    const EmbeddingSet relights = load_embedding_file(config, 1);
    std::vector<Eigen::VectorXd> i_rows;
    std::vector<Eigen::VectorXd> r_rows;
    for (int i = 0; i < originals.size(); ++i)
        i_rows.push_back(originals.points().row(i).transpose());
    for (int i = 0; i < relights.size(); ++i)
        r_rows.push_back(relights.points().row(i).transpose());
    const double value = msd(i_rows, r_rows);
    if (!config.output_path.empty())
        textio::write_csv(config.output_path, {"msd"}, {{textio::format_double(value)}});
    std::cout << "msd: images=" << originals.size() << " msd=" << textio::format_double(value)
              << "\n";
    return 0;
}

}  // namespace

int run(const CampaignConfig& config) {
    try {
        check_tolerance_names(config);
        require(config.threads >= 1, "--threads must be at least 1");
        switch (config.command) {
            case Command::Render: return run_render(config);
            case Command::Perturb: return run_perturb(config);
            case Command::VerifyBounds: return run_verify_bounds(config);
            case Command::Egm: return run_egm(config);
            case Command::Conefit: return run_conefit(config);
            case Command::Fid: return run_fid(config);
            case Command::Lfid: return run_lfid(config);
            case Command::Msd: return run_msd(config);
        }
        throw std::logic_error("unreachable command");
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
}

}  // namespace relight::cli

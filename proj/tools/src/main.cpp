#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relight/cli.hpp"

namespace {

// NAME=VALUE pairs from repeated --tol flags.
bool parse_tolerances(const std::vector<std::string>& raw,
                      std::map<std::string, double>& out) {
    for (const auto& item : raw) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) return false;
        char* end = nullptr;
        const double value = std::strtod(item.c_str() + eq + 1, &end);
        if (end == item.c_str() + eq + 1 || *end != '\0') return false;
        out[item.substr(0, eq)] = value;
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Patch-based radiosity, perturbation bounds, generator fitting and "
                 "Frechet metrics"};
    app.require_subcommand(1);

    relight::cli::CampaignConfig config;
    std::vector<std::string> tol_raw;
    std::string mode = "full";

    const std::map<std::string, relight::cli::Command> commands = {
        {"render", relight::cli::Command::Render},
        {"perturb", relight::cli::Command::Perturb},
        {"verify-bounds", relight::cli::Command::VerifyBounds},
        {"egm", relight::cli::Command::Egm},
        {"conefit", relight::cli::Command::Conefit},
        {"fid", relight::cli::Command::Fid},
        {"lfid", relight::cli::Command::Lfid},
        {"msd", relight::cli::Command::Msd},
    };
    const std::map<std::string, std::string> descriptions = {
        {"render", "Solve one seeded lighting of a scene and write the field CSV"},
        {"perturb", "Write a seeded random affine/albedo perturbation of a scene"},
        {"verify-bounds", "Run the perturbation-bound campaign on a scene"},
        {"egm", "Run the similar-scene generator-matrix regret campaign"},
        {"conefit", "Fit sampled shading fields to the scene's generator cone"},
        {"fid", "Frechet distance and its 1/N extrapolation between two embedding sets"},
        {"lfid", "Rank candidate points by local Frechet score against a base set"},
        {"msd", "Mean-matched diversity score between originals and relights"},
    };

    for (const auto& [name, command] : commands) {
        (void)command;
        CLI::App* sub = app.add_subcommand(name, descriptions.at(name));
        sub->add_option("--scene", config.scene_path, "Scene JSON file");
        sub->add_option("--embeddings", config.embedding_paths,
                        "Embedding matrix file (give twice: reference, candidates)");
        sub->add_option("--trials", config.trials, "Trial or subsample count");
        sub->add_option("--seed", config.seed, "RNG seed");
        sub->add_option("--out", config.output_path, "Output report file");
        sub->add_option("--rank", config.rank, "Generator rank (0 = per-trial auto)");
        sub->add_option("--alpha", config.alpha, "Dirichlet concentration override");
        sub->add_option("--ngd", config.n_gd, "Projected-gradient step count");
        sub->add_option("--eig-floor", config.eig_floor, "Relative covariance eigenvalue floor");
        sub->add_option("--threads", config.threads, "Worker thread count");
        sub->add_flag("--binary", config.binary_embeddings,
                      "Embedding files use the binary matrix layout");
        sub->add_option("--tol", tol_raw, "Tolerance override NAME=VALUE (repeatable)");
        if (name == "verify-bounds")
            sub->add_option("--mode", mode, "Perturbation mode: full, luminaire, albedo, geometry");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err) == 0 ? 0 : 2;
    }

    if (!parse_tolerances(tol_raw, config.tolerances)) {
        std::cerr << "error: --tol expects NAME=VALUE with a numeric value\n";
        return 2;
    }
    if (mode == "full") {
        config.mode = relight::PerturbationMode::Full;
    } else if (mode == "luminaire") {
        config.mode = relight::PerturbationMode::LuminaireOnly;
    } else if (mode == "albedo") {
        config.mode = relight::PerturbationMode::AlbedoOnly;
    } else if (mode == "geometry") {
        config.mode = relight::PerturbationMode::GeometryOnly;
    } else {
        std::cerr << "error: unknown mode: " << mode << "\n";
        return 2;
    }
    config.command = commands.at(app.get_subcommands().front()->get_name());
    return relight::cli::run(config);
}

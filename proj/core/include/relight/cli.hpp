#pragma once

// Campaign harness behind the command-line tool. Each command loads its
// inputs, dispatches to the owning module, writes that module's CSV/JSON
// schema, and prints a one-line summary to stdout. All randomness flows
// from the seed through per-trial substreams, so identical configs produce
// byte-identical output files at any thread count.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "relight/bounds.hpp"

namespace relight::cli {

enum class Command { Render, Perturb, VerifyBounds, Egm, Conefit, Fid, Lfid, Msd };

struct CampaignConfig {
    Command command = Command::Render;
    std::uint64_t seed = 0;
    int trials = 100;
    std::string scene_path;
    // fid/lfid/msd take two files: reference first, candidates second.
    std::vector<std::string> embedding_paths;
    std::string output_path;
    int rank = 0;    // 0 lets the regret campaign pick per trial
    double alpha = -1.0;  // < 0 keeps the scene's Dirichlet concentration
    int n_gd = 100;
    double eig_floor = 1e-10;
    int threads = 1;
    bool binary_embeddings = false;
    PerturbationMode mode = PerturbationMode::Full;
    // Named scalar overrides: neumann_tol, max_cond, max_eps_e, max_eps_rho,
    // noise_sigma. Unknown names are an error.
    std::map<std::string, double> tolerances;
};

// 0: success. 1: some trial violated its bound (all rows, violating ones
// included, are preserved in the output file). 2: input parse or validation
// failure, diagnostic on stderr.
int run(const CampaignConfig& config);

}  // namespace relight::cli

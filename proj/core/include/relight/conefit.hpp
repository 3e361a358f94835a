#pragma once

// Fitting shading fields as non-negative combinations of generator fields.
// fit_approx is the cheap pipeline (least squares, clip to the positive
// orthant, a few projected-gradient steps); fit_exact solves the same
// non-negative least-squares program with an active-set method and serves as
// the oracle. The scalar losses score relit fields: distance to the cone,
// a log barrier against reproducing the input, and one-sided range
// penalties.

#include <string>
#include <vector>

#include <Eigen/Core>

namespace relight {

class GeneratorSet {
  public:
    // Columns are generator fields: all entries >= 0, no column identically
    // zero, at least one column.
    explicit GeneratorSet(Eigen::MatrixXd generators);

    const Eigen::MatrixXd& matrix() const { return generators_; }
    int dim() const { return static_cast<int>(generators_.rows()); }
    int count() const { return static_cast<int>(generators_.cols()); }

  private:
    Eigen::MatrixXd generators_;
};

struct FitResult {
    Eigen::VectorXd weights;  // >= 0 exactly
    double residual_sq = 0.0;
    int steps_taken = 0;
};

// Rescales to mean exactly 0.7; rejects fields with non-positive mean or
// negative entries.
Eigen::VectorXd normalize_shading(const Eigen::VectorXd& field);

// Least squares (minimum-norm when the Gram matrix is singular), clipped to
// w >= 0, then n_gd projected-gradient steps with step size 1/L where L is
// the largest Gram eigenvalue. The residual is nonincreasing in the step
// index.
FitResult fit_approx(const Eigen::VectorXd& target, const GeneratorSet& gens, int n_gd);

// Active-set non-negative least squares. KKT conditions are verified on
// exit: gradient >= -1e-8 on active coordinates, |gradient| <= 1e-8 on
// inactive ones. Errors out if 10 * N_g outer iterations do not suffice.
FitResult fit_exact(const Eigen::VectorXd& target, const GeneratorSet& gens);

// Sum of fit_approx residuals over the targets; every target must already be
// normalized (mean 0.7 within 1e-9).
double nearby_loss(const std::vector<Eigen::VectorXd>& targets, const GeneratorSet& gens, int n_gd,
                   int n_threads = 1);

// Mean of -log(|P/mean(P) - Q/mean(Q)| + epsilon).
double barrier_loss(const Eigen::VectorXd& relit_intensity, const Eigen::VectorXd& orig_intensity,
                    double epsilon = 1e-6);

struct RangeLosses {
    double under = 0.0;  // mean(max(-relit, 0)^2)
    double over = 0.0;   // mean(max(relit - 1, 0)^2)
};
RangeLosses range_losses(const Eigen::VectorXd& relit);

// Mean of [-min(0.95 - relit_max, 0) + max(shading_min - 0.05, 0)].
double pixel_uniformity_loss(const Eigen::VectorXd& relit_max, const Eigen::VectorXd& shading_min);

std::string fit_result_to_json(const FitResult& fit);

}  // namespace relight

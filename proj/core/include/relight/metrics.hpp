#pragma once

// Frechet-style realism and diversity metrics over embedding sets, plus the
// local FID: a second-order series for the FID change caused by replacing a
// single point, computed through a diagonal Sylvester solve in the base
// covariance eigenbasis.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace relight {

class EmbeddingSet {
  public:
    // One row per point; at least two points. Covariance uses the 1/N
    // normalization so single-point replacement has exact rank-one algebra.
    explicit EmbeddingSet(Eigen::MatrixXd points);

    const Eigen::MatrixXd& points() const { return points_; }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& cov() const { return cov_; }
    int size() const { return static_cast<int>(points_.rows()); }
    int dim() const { return static_cast<int>(points_.cols()); }

    EmbeddingSet subsample(const std::vector<int>& indices) const;
    EmbeddingSet with_point_replaced(int k, const Eigen::VectorXd& p) const;

  private:
    Eigen::MatrixXd points_;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
};

// |mu_a - mu_b|^2 + Tr[C_a + C_b - 2 sqrt(C_a C_b)]. The square root goes
// through the symmetrized product sqrt(C_a^1/2 C_b C_a^1/2) by
// eigendecomposition; eigenvalues below -1e-10 (relative) are an error,
// small negatives clamp to zero.
double fid(const EmbeddingSet& a, const EmbeddingSet& b);

struct FidInfinity {
    double intercept = 0.0;
    double std_error = 0.0;
    std::vector<int> sizes;
    std::vector<double> fids;
};

// FID on n_sizes seeded subsamples between min(N)/10 and min(N), then an OLS
// fit of fid against 1/size; the intercept estimates the infinite-sample
// FID and std_error is the usual OLS intercept standard error.
FidInfinity fid_infinity_fit(const EmbeddingSet& a, const EmbeddingSet& b, int n_sizes = 15,
                             std::uint64_t seed = 0, int n_threads = 1);
double fid_infinity(const EmbeddingSet& a, const EmbeddingSet& b, int n_sizes = 15,
                    std::uint64_t seed = 0);

// Mean-scale-invariant diversity: D_i = I_i - R_i * mean(I_i)/mean(R_i),
// result sqrt(sum_i |D_i|^2 / N_t) with N_t the total entry count.
double msd(const std::vector<Eigen::VectorXd>& originals,
           const std::vector<Eigen::VectorXd>& relights);

// Solves C M + M C = C U for diagonal positive C: m_ij = c_i u_ij / (c_i + c_j).
// The residual identity is checked to 1e-10 relative before returning.
Eigen::MatrixXd sylvester_diag(const Eigen::VectorXd& c_diag, const Eigen::MatrixXd& u);

// Second-order FID change for replacing base point k by relit_point, in
// units where fid ~ lfid / N^2. eig_floor is relative to the largest
// covariance eigenvalue.
double lfid(const EmbeddingSet& base, int index_k, const Eigen::VectorXd& relit_point,
            double eig_floor = 1e-10);

struct RankedCandidate {
    int rank = 0;  // 1-based
    int index = 0;
    double lfid = 0.0;
};

// Ascending by lfid, stable in candidate order on ties.
std::vector<RankedCandidate> local_fid_ranking(
    const EmbeddingSet& base, const std::vector<std::pair<int, Eigen::VectorXd>>& candidates,
    double eig_floor = 1e-10, int n_threads = 1);

void write_ranking_csv(const std::string& path, const std::vector<RankedCandidate>& ranking);

enum class EmbeddingFormat { Csv, Binary };
EmbeddingSet load_embeddings(const std::string& path, EmbeddingFormat format);

}  // namespace relight

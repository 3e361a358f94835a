#include "relight/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "relight/parallel.hpp"
#include "relight/rng.hpp"
#include "relight/textio.hpp"

namespace relight {

EmbeddingSet::EmbeddingSet(Eigen::MatrixXd points) : points_(std::move(points)) {
    if (points_.rows() < 2) throw std::invalid_argument("embedding set needs at least two points");
    if (points_.cols() < 1) throw std::invalid_argument("embedding dimension must be positive");
    if (!points_.allFinite()) throw std::invalid_argument("embedding points must be finite");
    mean_ = points_.colwise().mean();
    const Eigen::MatrixXd centered = points_.rowwise() - mean_.transpose();
    cov_ = (centered.transpose() * centered) / static_cast<double>(points_.rows());
    cov_ = 0.5 * (cov_ + cov_.transpose().eval());
}

EmbeddingSet EmbeddingSet::subsample(const std::vector<int>& indices) const {
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(indices.size()), points_.cols());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        if (indices[r] < 0 || indices[r] >= size())
            throw std::invalid_argument("subsample index out of range");
        pts.row(static_cast<Eigen::Index>(r)) = points_.row(indices[r]);
    }
    return EmbeddingSet(std::move(pts));
}

EmbeddingSet EmbeddingSet::with_point_replaced(int k, const Eigen::VectorXd& p) const {
    if (k < 0 || k >= size()) throw std::invalid_argument("point index out of range");
    if (p.size() != points_.cols()) throw std::invalid_argument("replacement dimension mismatch");
    Eigen::MatrixXd pts = points_;
    pts.row(k) = p.transpose();
    return EmbeddingSet(std::move(pts));
}

namespace {

// Eigendecomposition with a PSD certificate: eigenvalues below the relative
// tolerance are an error; small negatives clamp to zero.
void psd_eigs(const Eigen::MatrixXd& m, Eigen::VectorXd& values, Eigen::MatrixXd& vectors,
              const char* what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error(std::string(what) + ": eigendecomposition failed");
    values = eig.eigenvalues();
    vectors = eig.eigenvectors();
    const double top = std::max(values.cwiseAbs().maxCoeff(), 1.0);
    if (values.minCoeff() < -1e-10 * top)
        throw std::invalid_argument(std::string(what) + ": matrix is not positive semidefinite");
    values = values.cwiseMax(0.0);
}

}  // namespace

double fid(const EmbeddingSet& a, const EmbeddingSet& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("fid: dimension mismatch");

    Eigen::VectorXd la;
    Eigen::MatrixXd va;
    psd_eigs(a.cov(), la, va, "fid: first covariance");
    const Eigen::MatrixXd root_a = va * la.cwiseSqrt().asDiagonal() * va.transpose();

    Eigen::MatrixXd inner = root_a * b.cov() * root_a;
    inner = 0.5 * (inner + inner.transpose().eval());
    Eigen::VectorXd li;
    Eigen::MatrixXd vi;
    psd_eigs(inner, li, vi, "fid: symmetrized product");

    const double mean_term = (a.mean() - b.mean()).squaredNorm();
    return mean_term + a.cov().trace() + b.cov().trace() - 2.0 * li.cwiseSqrt().sum();
}

namespace {

std::vector<int> sample_without_replacement(int n, int k, Rng& rng) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < k; ++i) std::swap(idx[static_cast<std::size_t>(i)],
                                          idx[static_cast<std::size_t>(rng.uniform_int(i, n - 1))]);
    idx.resize(static_cast<std::size_t>(k));
    return idx;
}

}  // namespace

FidInfinity fid_infinity_fit(const EmbeddingSet& a, const EmbeddingSet& b, int n_sizes,
                             std::uint64_t seed, int n_threads) {
    if (n_sizes < 3) throw std::invalid_argument("fid_infinity needs at least three subsample sizes");
    const int n = std::min(a.size(), b.size());
    const int smallest = std::max(2, n / 10);
    if (n < 2 * smallest)
        throw std::invalid_argument("fid_infinity needs at least twice the smallest subsample size");

    FidInfinity out;
    out.sizes.resize(static_cast<std::size_t>(n_sizes));
    out.fids.resize(static_cast<std::size_t>(n_sizes));
    for (int i = 0; i < n_sizes; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(n_sizes - 1);
        out.sizes[static_cast<std::size_t>(i)] =
            static_cast<int>(std::lround(smallest + f * (n - smallest)));
    }

    parallel_for(n_sizes, n_threads, [&](int i) {
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
        const int s = out.sizes[static_cast<std::size_t>(i)];
        const std::vector<int> idx_a = sample_without_replacement(a.size(), s, rng);
        const std::vector<int> idx_b =
            (&a == &b || a.size() == b.size()) ? idx_a : sample_without_replacement(b.size(), s, rng);
        out.fids[static_cast<std::size_t>(i)] = fid(a.subsample(idx_a), b.subsample(idx_b));
    });

    // OLS of fid against 1/size; the intercept is the infinite-sample estimate.
    const int m = n_sizes;
    double xbar = 0.0, ybar = 0.0;
    for (int i = 0; i < m; ++i) {
        xbar += 1.0 / out.sizes[static_cast<std::size_t>(i)];
        ybar += out.fids[static_cast<std::size_t>(i)];
    }
    xbar /= m;
    ybar /= m;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < m; ++i) {
        const double dx = 1.0 / out.sizes[static_cast<std::size_t>(i)] - xbar;
        sxx += dx * dx;
        sxy += dx * (out.fids[static_cast<std::size_t>(i)] - ybar);
    }
    if (!(sxx > 0.0)) throw std::runtime_error("fid_infinity: degenerate size ladder");
    const double slope = sxy / sxx;
    out.intercept = ybar - slope * xbar;
    double rss = 0.0;
    for (int i = 0; i < m; ++i) {
        const double pred = out.intercept + slope / out.sizes[static_cast<std::size_t>(i)];
        const double r = out.fids[static_cast<std::size_t>(i)] - pred;
        rss += r * r;
    }
    const double sigma_sq = rss / std::max(m - 2, 1);
    out.std_error = std::sqrt(sigma_sq * (1.0 / m + xbar * xbar / sxx));
    return out;
}

double fid_infinity(const EmbeddingSet& a, const EmbeddingSet& b, int n_sizes, std::uint64_t seed) {
    return fid_infinity_fit(a, b, n_sizes, seed).intercept;
}

double msd(const std::vector<Eigen::VectorXd>& originals,
           const std::vector<Eigen::VectorXd>& relights) {
    if (originals.size() != relights.size() || originals.empty())
        throw std::invalid_argument("msd needs paired, non-empty lists");
    double total = 0.0;
    long n_t = 0;
    for (std::size_t i = 0; i < originals.size(); ++i) {
        const Eigen::VectorXd& orig = originals[i];
        const Eigen::VectorXd& rel = relights[i];
        if (orig.size() != rel.size() || orig.size() == 0)
            throw std::invalid_argument("msd pair " + std::to_string(i) + ": length mismatch");
        const double mean_r = rel.mean();
        if (!(mean_r > 0.0))
            throw std::invalid_argument("msd pair " + std::to_string(i) + ": relight needs a positive mean");
        const double scale = orig.mean() / mean_r;
        total += (orig - rel * scale).squaredNorm();
        n_t += rel.size();
    }
    return std::sqrt(total / static_cast<double>(n_t));
}

Eigen::MatrixXd sylvester_diag(const Eigen::VectorXd& c_diag, const Eigen::MatrixXd& u) {
    const Eigen::Index d = c_diag.size();
    if (u.rows() != d || u.cols() != d) throw std::invalid_argument("sylvester_diag: size mismatch");
    if ((c_diag.array() <= 0.0).any())
        throw std::invalid_argument("sylvester_diag: diagonal must be positive");
    const double uscale = std::max(1.0, u.size() ? u.array().abs().maxCoeff() : 0.0);
    if ((u - u.transpose()).array().abs().maxCoeff() > 1e-12 * uscale)
        throw std::invalid_argument("sylvester_diag: u must be symmetric");

    Eigen::MatrixXd m(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = c_diag[i] * u(i, j) / (c_diag[i] + c_diag[j]);

    const Eigen::MatrixXd cu = c_diag.asDiagonal() * u;
    const Eigen::MatrixXd resid = c_diag.asDiagonal() * m + m * c_diag.asDiagonal() - cu;
    const double tol = 1e-10 * std::max(1e-300, cu.array().abs().maxCoeff());
    if (resid.array().abs().maxCoeff() > tol)
        throw std::runtime_error("sylvester_diag: residual identity failed");
    return m;
}

double lfid(const EmbeddingSet& base, int index_k, const Eigen::VectorXd& relit_point,
            double eig_floor) {
    if (index_k < 0 || index_k >= base.size())
        throw std::invalid_argument("lfid: index out of range");
    if (relit_point.size() != base.dim()) throw std::invalid_argument("lfid: dimension mismatch");
    if (!(eig_floor >= 0.0)) throw std::invalid_argument("lfid: eigenvalue floor must be >= 0");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(base.cov());
    if (eig.info() != Eigen::Success) throw std::runtime_error("lfid: eigendecomposition failed");
    const double top = eig.eigenvalues().maxCoeff();
    if (!(top > 0.0)) throw std::invalid_argument("lfid: base covariance is identically zero");
    const double floor = eig_floor * top;
    Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(floor);
    if ((lam.array() <= 0.0).any())
        throw std::invalid_argument("lfid: covariance rank-deficient below the floor");

    const Eigen::VectorXd d = relit_point - base.points().row(index_k).transpose();
    const Eigen::MatrixXd& q = eig.eigenvectors();
    const Eigen::VectorXd dt = q.transpose() * d;
    const Eigen::VectorXd xt =
        q.transpose() * (base.points().row(index_k).transpose() - base.mean());

    const Eigen::MatrixXd u =
        dt * xt.transpose() + xt * dt.transpose() + dt * dt.transpose();
    const Eigen::MatrixXd m1 = sylvester_diag(lam, u);
    // Tr[C^-1 M1^2] with diagonal C.
    double trace_term = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        trace_term += m1.row(i).dot(m1.col(i)) / lam[i];
    return d.squaredNorm() + trace_term;
}

std::vector<RankedCandidate> local_fid_ranking(
    const EmbeddingSet& base, const std::vector<std::pair<int, Eigen::VectorXd>>& candidates,
    double eig_floor, int n_threads) {
    std::vector<double> scores(candidates.size(), 0.0);
    parallel_for(static_cast<int>(candidates.size()), n_threads, [&](int i) {
        const auto& cand = candidates[static_cast<std::size_t>(i)];
        scores[static_cast<std::size_t>(i)] = lfid(base, cand.first, cand.second, eig_floor);
    });
    std::vector<int> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int lhs, int rhs) {
        return scores[static_cast<std::size_t>(lhs)] < scores[static_cast<std::size_t>(rhs)];
    });
    std::vector<RankedCandidate> out;
    out.reserve(candidates.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        const int i = order[r];
        out.push_back({static_cast<int>(r) + 1, candidates[static_cast<std::size_t>(i)].first,
                       scores[static_cast<std::size_t>(i)]});
    }
    return out;
}

void write_ranking_csv(const std::string& path, const std::vector<RankedCandidate>& ranking) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(ranking.size());
    for (const auto& r : ranking)
        rows.push_back({std::to_string(r.rank), std::to_string(r.index), textio::format_double(r.lfid)});
    textio::write_csv(path, {"rank", "index", "lfid"}, rows);
}

EmbeddingSet load_embeddings(const std::string& path, EmbeddingFormat format) {
    return EmbeddingSet(format == EmbeddingFormat::Csv ? textio::read_csv_matrix(path)
                                                       : textio::read_binary_matrix(path));
}

}  // namespace relight

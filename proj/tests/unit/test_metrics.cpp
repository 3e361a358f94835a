#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "relight/metrics.hpp"
#include "relight/rng.hpp"
#include "relight/textio.hpp"

using namespace relight;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

Eigen::MatrixXd gaussian_cloud(Rng& rng, int n, int d, double spread = 1.0) {
    Eigen::MatrixXd pts(n, d);
    for (int i = 0; i < n * d; ++i) pts.data()[i] = spread * rng.normal();
    return pts;
}

Eigen::MatrixXd random_rotation_matrix(Rng& rng, int d) {
    Eigen::MatrixXd g(d, d);
    for (int i = 0; i < d * d; ++i) g.data()[i] = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    return qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("embedding sets carry 1/N moments") {
    Eigen::MatrixXd pts(2, 2);
    pts << 0.0, 0.0, 2.0, 2.0;
    const EmbeddingSet set(pts);
    CHECK(set.mean()[0] == 1.0);
    CHECK(set.mean()[1] == 1.0);
    CHECK(set.cov()(0, 0) == 1.0);
    CHECK(set.cov()(0, 1) == 1.0);
    CHECK(set.cov()(1, 1) == 1.0);

    CHECK_THROWS_AS(EmbeddingSet(Eigen::MatrixXd::Ones(1, 3)), std::invalid_argument);
    CHECK_THROWS_AS(EmbeddingSet(Eigen::MatrixXd(2, 0)), std::invalid_argument);
    CHECK_THROWS_AS(set.subsample({0, 5}), std::invalid_argument);
    CHECK_THROWS_AS(set.with_point_replaced(3, Eigen::Vector2d(0, 0)), std::invalid_argument);
    CHECK_THROWS_AS(set.with_point_replaced(0, Eigen::Vector3d(0, 0, 0)), std::invalid_argument);

    const EmbeddingSet swapped = set.with_point_replaced(0, Eigen::Vector2d(4.0, 4.0));
    CHECK(swapped.mean()[0] == 3.0);
    CHECK(set.points()(0, 0) == 0.0);
}

TEST_CASE("fid of a set against itself vanishes") {
    Rng rng(71);
    const EmbeddingSet a(gaussian_cloud(rng, 60, 5));
    CHECK(fid(a, a) <= 1e-10);
    CHECK(fid(a, a) >= -1e-10);
}

TEST_CASE("fid matches the one-dimensional closed form") {
    Eigen::MatrixXd pa(2, 1), pb(2, 1);
    pa << 0.0, 2.0;
    pb << 1.0, 5.0;
    // Means 1 and 3, variances 1 and 4: (1-3)^2 + 1 + 4 - 2*2 = 5.
    CHECK(fid(EmbeddingSet(pa), EmbeddingSet(pb)) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("fid is symmetric and invariant to joint rotation") {
    Rng rng(72);
    const int d = 6;
    const Eigen::MatrixXd pa = gaussian_cloud(rng, 80, d);
    Eigen::MatrixXd pb = gaussian_cloud(rng, 70, d, 1.3);
    pb.rowwise() += Eigen::RowVectorXd::Constant(d, 0.4);
    const EmbeddingSet a(pa), b(pb);

    const double forward = fid(a, b);
    CHECK(forward > 0.0);
    CHECK(fid(b, a) == doctest::Approx(forward).epsilon(1e-9));

    const Eigen::MatrixXd q = random_rotation_matrix(rng, d);
    CHECK(fid(EmbeddingSet(pa * q), EmbeddingSet(pb * q)) ==
          doctest::Approx(forward).epsilon(1e-8));

    CHECK_THROWS_AS(fid(a, EmbeddingSet(gaussian_cloud(rng, 10, d + 1))),
                    std::invalid_argument);
}

TEST_CASE("a pure mean shift moves fid by its squared norm") {
    Rng rng(73);
    const int d = 4;
    const Eigen::MatrixXd pa = gaussian_cloud(rng, 500, d);
    Eigen::RowVectorXd v(d);
    v << 0.3, -0.2, 0.5, 0.1;
    Eigen::MatrixXd pb = pa;
    pb.rowwise() += v;
    CHECK(fid(EmbeddingSet(pa), EmbeddingSet(pb)) ==
          doctest::Approx(v.squaredNorm()).epsilon(1e-9));
}

TEST_CASE("fid_infinity on identical sets sits at zero") {
    Rng rng(74);
    const EmbeddingSet a(gaussian_cloud(rng, 200, 4));
    const FidInfinity fit = fid_infinity_fit(a, a, 8, 5);
    REQUIRE(fit.sizes.size() == 8);
    REQUIRE(fit.fids.size() == 8);
    for (const double f : fit.fids) CHECK(std::abs(f) <= 1e-10);
    CHECK(std::abs(fit.intercept) <= 1e-10);
    CHECK(fit.std_error >= 0.0);
    CHECK_THROWS_AS(fid_infinity_fit(a, a, 2, 0), std::invalid_argument);
}

TEST_CASE("fid_infinity debiases the finite-sample fid") {
    Rng rng(75);
    const int d = 4;
    const EmbeddingSet a(gaussian_cloud(rng, 1500, d));
    const EmbeddingSet b(gaussian_cloud(rng, 1500, d));
    // Same distribution: the finite-N fid is dominated by estimator bias,
    // which the 1/N extrapolation strips away.
    const std::vector<int> idx_small = [&] {
        std::vector<int> idx;
        for (int i = 0; i < 200; ++i) idx.push_back(i);
        return idx;
    }();
    const double fid_small = fid(a.subsample(idx_small), b.subsample(idx_small));
    const FidInfinity fit = fid_infinity_fit(a, b, 10, 11);
    CHECK(std::abs(fit.intercept) < fid_small);
    CHECK(fit.std_error > 0.0);
}

TEST_CASE("msd hand cases") {
    Eigen::VectorXd orig(2), relit(2);
    orig << 1.0, 1.0;
    relit << 2.0, 0.0;
    CHECK(msd({orig}, {relit}) == 1.0);

    // Power-of-two rescales commute with every rounding step.
    Rng rng(76);
    for (int t = 0; t < 20; ++t) {
        const int n = rng.uniform_int(3, 40);
        Eigen::VectorXd f(n);
        for (int i = 0; i < n; ++i) f[i] = rng.uniform(0.1, 2.0);
        const double scale = std::ldexp(1.0, rng.uniform_int(-8, 8));
        CHECK(msd({f}, {(f * scale).eval()}) == 0.0);
    }

    // A second identical pair doubles the entry count only.
    Eigen::VectorXd same(2);
    same << 1.0, 1.0;
    CHECK(msd({orig, same}, {relit, same}) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

    CHECK_THROWS_AS(msd({orig}, {relit, relit}), std::invalid_argument);
    CHECK_THROWS_AS(msd({}, {}), std::invalid_argument);
    Eigen::VectorXd dark(2);
    dark << 0.0, 0.0;
    CHECK_THROWS_AS(msd({orig}, {dark}), std::invalid_argument);
    Eigen::VectorXd shorter(1);
    shorter << 1.0;
    CHECK_THROWS_AS(msd({orig}, {shorter}), std::invalid_argument);
}

TEST_CASE("diagonal sylvester solve") {
    Eigen::VectorXd c(2);
    c << 2.0, 4.0;
    const Eigen::MatrixXd m = sylvester_diag(c, Eigen::MatrixXd::Ones(2, 2));
    CHECK(m(0, 0) == 0.5);
    CHECK(m(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(m(1, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(m(1, 1) == 0.5);

    CHECK(sylvester_diag(c, Eigen::MatrixXd::Zero(2, 2)).cwiseAbs().maxCoeff() == 0.0);

    // Constant diagonal reduces the equation to M = U/2.
    Eigen::VectorXd flat(3);
    flat << 2.0, 2.0, 2.0;
    Eigen::MatrixXd u(3, 3);
    u << 1.0, 0.5, 0.25, 0.5, 2.0, 0.125, 0.25, 0.125, 3.0;
    CHECK((sylvester_diag(flat, u) - 0.5 * u).cwiseAbs().maxCoeff() == 0.0);

    Rng rng(77);
    for (int t = 0; t < 50; ++t) {
        const int d = rng.uniform_int(2, 10);
        Eigen::VectorXd diag(d);
        for (int i = 0; i < d; ++i) diag[i] = rng.uniform(0.1, 4.0);
        Eigen::MatrixXd sym(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j <= i; ++j) sym(i, j) = sym(j, i) = rng.normal();
        const Eigen::MatrixXd sol = sylvester_diag(diag, sym);
        const Eigen::MatrixXd resid = diag.asDiagonal() * sol + sol * diag.asDiagonal() -
                                      diag.asDiagonal() * sym;
        CHECK(resid.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, sym.cwiseAbs().maxCoeff()));
    }

    Eigen::VectorXd bad(2);
    bad << 1.0, 0.0;
    CHECK_THROWS_AS(sylvester_diag(bad, Eigen::MatrixXd::Ones(2, 2)), std::invalid_argument);
    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.2, 0.4, 1.0;
    CHECK_THROWS_AS(sylvester_diag(c, asym), std::invalid_argument);
    CHECK_THROWS_AS(sylvester_diag(c, Eigen::MatrixXd::Ones(3, 3)), std::invalid_argument);
}

TEST_CASE("local fid basics") {
    Rng rng(78);
    const EmbeddingSet base(gaussian_cloud(rng, 120, 5));

    const Eigen::VectorXd unchanged = base.points().row(3).transpose();
    CHECK(lfid(base, 3, unchanged) == 0.0);

    for (int t = 0; t < 30; ++t) {
        const int k = rng.uniform_int(0, base.size() - 1);
        Eigen::VectorXd p(5);
        for (int i = 0; i < 5; ++i) p[i] = rng.normal();
        CHECK(lfid(base, k, p) >= 0.0);
    }

    CHECK_THROWS_AS(lfid(base, -1, unchanged), std::invalid_argument);
    CHECK_THROWS_AS(lfid(base, 0, Eigen::VectorXd::Ones(4)), std::invalid_argument);

    // Points on a line leave the covariance rank one.
    Eigen::MatrixXd flat(10, 2);
    for (int i = 0; i < 10; ++i) flat.row(i) << static_cast<double>(i), 0.0;
    CHECK_THROWS_AS(lfid(EmbeddingSet(flat), 0, Eigen::Vector2d(1.0, 1.0), 0.0),
                    std::invalid_argument);
}

TEST_CASE("local fid is invariant under joint rotation") {
    Rng rng(79);
    const int d = 5;
    const Eigen::MatrixXd pts = gaussian_cloud(rng, 90, d);
    Eigen::VectorXd p(d);
    for (int i = 0; i < d; ++i) p[i] = rng.normal();
    const double score = lfid(EmbeddingSet(pts), 7, p);
    CHECK(score > 0.0);

    const Eigen::MatrixXd q = random_rotation_matrix(rng, d);
    const double rotated = lfid(EmbeddingSet(pts * q), 7, q.transpose() * p);
    CHECK(rotated == doctest::Approx(score).epsilon(1e-8));
}

TEST_CASE("local fid tracks the exact single-replacement fid") {
    Rng rng(80);
    const int n = 500, d = 4;
    const EmbeddingSet base(gaussian_cloud(rng, n, d));
    const Eigen::VectorXd shift =
        base.points().row(11).transpose() + 0.8 * Eigen::VectorXd::Ones(d);
    const double direct = fid(base, base.with_point_replaced(11, shift));
    const double series = lfid(base, 11, shift);
    // fid ~ lfid / N^2 with third-order corrections.
    CHECK(static_cast<double>(n) * n * direct ==
          doctest::Approx(series).epsilon(0.15));
}

TEST_CASE("candidate ranking is ascending and stable") {
    Rng rng(81);
    const EmbeddingSet base(gaussian_cloud(rng, 40, 3));
    const Eigen::VectorXd original = base.points().row(5).transpose();
    Eigen::VectorXd dir(3);
    dir << 1.0, 2.0, -1.0;

    std::vector<std::pair<int, Eigen::VectorXd>> candidates;
    candidates.emplace_back(5, (original + 2.0 * dir).eval());
    candidates.emplace_back(5, original);
    candidates.emplace_back(5, (original + 0.5 * dir).eval());
    candidates.emplace_back(5, (original + 0.5 * dir).eval());

    const std::vector<RankedCandidate> ranked = local_fid_ranking(base, candidates);
    REQUIRE(ranked.size() == 4);
    CHECK(ranked[0].lfid == 0.0);
    for (std::size_t i = 0; i + 1 < ranked.size(); ++i)
        CHECK(ranked[i].lfid <= ranked[i + 1].lfid);
    // The duplicated candidates tie; stable order keeps their input order.
    CHECK(ranked[1].lfid == ranked[2].lfid);
    CHECK(ranked[3].lfid > ranked[2].lfid);

    const std::vector<RankedCandidate> threaded = local_fid_ranking(base, candidates, 1e-10, 4);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        CHECK(threaded[i].index == ranked[i].index);
        CHECK(threaded[i].lfid == ranked[i].lfid);
    }

    const std::string path = temp_path("metrics_ranking.csv");
    write_ranking_csv(path, ranked);
    const std::string text = textio::read_text_file(path);
    CHECK(text.rfind("rank,index,lfid\n", 0) == 0);
    CHECK(text.find("\n1,5,0\n") != std::string::npos);
}

TEST_CASE("embedding files round trip in both formats") {
    Rng rng(82);
    const Eigen::MatrixXd pts = gaussian_cloud(rng, 12, 3);
    const std::string csv = temp_path("metrics_embed.csv");
    textio::write_csv_matrix(csv, pts);
    const EmbeddingSet from_csv = load_embeddings(csv, EmbeddingFormat::Csv);
    CHECK((from_csv.points() - pts).cwiseAbs().maxCoeff() == 0.0);

    const std::string bin = temp_path("metrics_embed.bin");
    textio::write_binary_matrix(bin, pts);
    const EmbeddingSet from_bin = load_embeddings(bin, EmbeddingFormat::Binary);
    CHECK((from_bin.points() - pts).cwiseAbs().maxCoeff() == 0.0);
}

}  // TEST_SUITE

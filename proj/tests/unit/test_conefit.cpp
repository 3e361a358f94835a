#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "relight/conefit.hpp"
#include "relight/rng.hpp"

using namespace relight;

namespace {

GeneratorSet random_generators(Rng& rng, int dim, int count) {
    Eigen::MatrixXd g(dim, count);
    for (int i = 0; i < dim * count; ++i) g.data()[i] = rng.uniform(0.05, 1.0);
    return GeneratorSet(g);
}

Eigen::VectorXd random_target(Rng& rng, int dim) {
    Eigen::VectorXd t(dim);
    for (int i = 0; i < dim; ++i) t[i] = rng.normal();
    return t;
}

// Minimum over all supports of the unconstrained least-squares residual,
// restricted to supports whose solution is non-negative. Every such point is
// feasible, and the optimum's own support appears in the enumeration.
double support_enumeration_residual(const Eigen::VectorXd& target, const GeneratorSet& gens) {
    const Eigen::MatrixXd& g = gens.matrix();
    const int ng = gens.count();
    double best = target.squaredNorm();
    for (unsigned mask = 1; mask < (1u << ng); ++mask) {
        std::vector<int> idx;
        for (int i = 0; i < ng; ++i)
            if (mask & (1u << i)) idx.push_back(i);
        Eigen::MatrixXd sub(g.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k)
            sub.col(static_cast<Eigen::Index>(k)) = g.col(idx[k]);
        const Eigen::VectorXd w = sub.colPivHouseholderQr().solve(target);
        if ((w.array() < -1e-12).any()) continue;
        best = std::min(best, (sub * w.cwiseMax(0.0) - target).squaredNorm());
    }
    return best;
}

}  // namespace

TEST_SUITE("conefit") {

TEST_CASE("shading normalization pins the mean at 0.7") {
    Eigen::VectorXd flat(2);
    flat << 1.0, 1.0;
    const Eigen::VectorXd n1 = normalize_shading(flat);
    CHECK(n1[0] == 0.7);
    CHECK(n1[1] == 0.7);

    Eigen::VectorXd skew(2);
    skew << 2.0, 0.0;
    const Eigen::VectorXd n2 = normalize_shading(skew);
    CHECK(n2[0] == doctest::Approx(1.4).epsilon(1e-15));
    CHECK(n2[1] == 0.0);

    Rng rng(61);
    Eigen::VectorXd f(20);
    for (int i = 0; i < 20; ++i) f[i] = rng.uniform(0.0, 3.0);
    const Eigen::VectorXd a = normalize_shading(f);
    const Eigen::VectorXd b = normalize_shading(5.0 * f);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-15 * a.cwiseAbs().maxCoeff());
    CHECK(a.mean() == doctest::Approx(0.7).epsilon(1e-14));

    CHECK_THROWS_AS(normalize_shading(Eigen::VectorXd()), std::invalid_argument);
    CHECK_THROWS_AS(normalize_shading(Eigen::VectorXd::Zero(3)), std::invalid_argument);
    Eigen::VectorXd neg(2);
    neg << 1.0, -0.1;
    CHECK_THROWS_AS(normalize_shading(neg), std::invalid_argument);
}

TEST_CASE("generator set validation") {
    CHECK_THROWS_AS(GeneratorSet(Eigen::MatrixXd(3, 0)), std::invalid_argument);
    CHECK_THROWS_AS(GeneratorSet(Eigen::MatrixXd(0, 2)), std::invalid_argument);
    Eigen::MatrixXd neg = Eigen::MatrixXd::Ones(3, 2);
    neg(1, 0) = -0.5;
    CHECK_THROWS_AS((GeneratorSet(neg)), std::invalid_argument);
    Eigen::MatrixXd hollow = Eigen::MatrixXd::Ones(3, 2);
    hollow.col(1).setZero();
    CHECK_THROWS_WITH_AS((GeneratorSet(hollow)), doctest::Contains("generator 1"),
                         std::invalid_argument);
}

TEST_CASE("clip-only fit on coordinate axes") {
    const GeneratorSet axes{Eigen::MatrixXd::Identity(2, 2)};
    Eigen::VectorXd target(2);
    target << 3.0, -1.0;
    const FitResult fit = fit_approx(target, axes, 0);
    CHECK(fit.weights[0] == 3.0);
    CHECK(fit.weights[1] == 0.0);
    CHECK(fit.residual_sq == 1.0);
    CHECK(fit.steps_taken == 0);

    // Extra iterations cannot move off the optimum.
    const FitResult more = fit_approx(target, axes, 50);
    CHECK(more.weights[0] == 3.0);
    CHECK(more.weights[1] == 0.0);
    CHECK(more.residual_sq == 1.0);

    CHECK_THROWS_AS(fit_approx(target, axes, -1), std::invalid_argument);
    CHECK_THROWS_AS(fit_approx(Eigen::VectorXd::Ones(3), axes, 0), std::invalid_argument);
}

TEST_CASE("interior targets are recovered exactly") {
    Rng rng(62);
    for (int t = 0; t < 50; ++t) {
        const int dim = rng.uniform_int(6, 20);
        const int ng = rng.uniform_int(1, 5);
        const GeneratorSet gens = random_generators(rng, dim, ng);
        Eigen::VectorXd w0(ng);
        for (int i = 0; i < ng; ++i) w0[i] = rng.uniform(0.1, 2.0);
        const Eigen::VectorXd target = gens.matrix() * w0;
        CHECK(fit_approx(target, gens, 0).residual_sq <= 1e-10);
        CHECK(fit_exact(target, gens).residual_sq <= 1e-10);
    }
}

TEST_CASE("descent iterations never increase the residual") {
    Rng rng(63);
    for (int t = 0; t < 20; ++t) {
        const int dim = rng.uniform_int(8, 24);
        const int ng = rng.uniform_int(2, 6);
        const GeneratorSet gens = random_generators(rng, dim, ng);
        const Eigen::VectorXd target = random_target(rng, dim);
        double prev = fit_approx(target, gens, 0).residual_sq;
        for (const int n_gd : {1, 2, 5, 10, 25, 60}) {
            const double cur = fit_approx(target, gens, n_gd).residual_sq;
            CHECK(cur <= prev * (1.0 + 1e-12) + 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("long descent runs land on the exact fit") {
    Rng rng(64);
    for (int t = 0; t < 25; ++t) {
        const int ng = rng.uniform_int(2, 6);
        // Tall instances keep the Gram matrix well conditioned, which the
        // fixed 1/L step needs to reach the optimum in a bounded step count.
        const int dim = rng.uniform_int(3 * ng, 30);
        const GeneratorSet gens = random_generators(rng, dim, ng);
        const Eigen::VectorXd target = random_target(rng, dim);
        const double exact = fit_exact(target, gens).residual_sq;
        const double approx = fit_approx(target, gens, 500).residual_sq;
        CHECK(approx >= exact - 1e-12);
        CHECK(approx - exact <= 1e-6);
    }
}

TEST_CASE("exact fit against support enumeration") {
    const GeneratorSet axes{Eigen::MatrixXd::Identity(2, 2)};
    Eigen::VectorXd target(2);
    target << 3.0, -1.0;
    const FitResult ax = fit_exact(target, axes);
    CHECK(ax.weights[0] == 3.0);
    CHECK(ax.weights[1] == 0.0);
    CHECK(ax.residual_sq == 1.0);

    target << -1.0, -2.0;
    const FitResult zero = fit_exact(target, axes);
    CHECK(zero.weights.cwiseAbs().maxCoeff() == 0.0);
    CHECK(zero.residual_sq == 5.0);

    Rng rng(65);
    for (int t = 0; t < 100; ++t) {
        const int dim = rng.uniform_int(6, 24);
        const int ng = rng.uniform_int(2, 8);
        const GeneratorSet gens = random_generators(rng, dim, ng);
        // Mix interior and exterior targets.
        Eigen::VectorXd tgt = random_target(rng, dim);
        if (t % 3 == 0) {
            Eigen::VectorXd w0(ng);
            for (int i = 0; i < ng; ++i) w0[i] = rng.uniform(0.0, 1.0);
            tgt = gens.matrix() * w0;
        }
        const FitResult fit = fit_exact(tgt, gens);
        CHECK((fit.weights.array() >= 0.0).all());
        const double oracle = support_enumeration_residual(tgt, gens);
        CHECK(fit.residual_sq == doctest::Approx(oracle).epsilon(1e-9));
        // The oracle never beats a 500-step descent by more than its
        // convergence slack, and the exact fit never trails the approx one.
        CHECK(fit.residual_sq <=
              fit_approx(tgt, gens, 0).residual_sq * (1.0 + 1e-12) + 1e-12);
    }
}

TEST_CASE("summed nearby loss") {
    Rng rng(66);
    const GeneratorSet gens = random_generators(rng, 12, 3);
    std::vector<Eigen::VectorXd> targets;
    for (int i = 0; i < 5; ++i) {
        Eigen::VectorXd f(12);
        for (int k = 0; k < 12; ++k) f[k] = rng.uniform(0.0, 2.0);
        targets.push_back(normalize_shading(f));
    }
    const double total = nearby_loss(targets, gens, 20);
    double manual = 0.0;
    for (const auto& t : targets) manual += fit_approx(t, gens, 20).residual_sq;
    CHECK(total == manual);

    CHECK(nearby_loss({targets[0]}, gens, 20) == fit_approx(targets[0], gens, 20).residual_sq);
    CHECK(nearby_loss(targets, gens, 20, 4) == total);

    std::vector<Eigen::VectorXd> raw = {Eigen::VectorXd::Ones(12)};
    CHECK_THROWS_WITH_AS(nearby_loss(raw, gens, 5), doctest::Contains("not normalized"),
                         std::invalid_argument);
}

TEST_CASE("log barrier between intensity profiles") {
    Eigen::VectorXd p(4), q(4);
    p << 1.0, 2.0, 3.0, 4.0;
    q = p;
    CHECK(barrier_loss(p, q) == doctest::Approx(13.815510557964274).epsilon(1e-12));
    // Mean normalization makes uniform rescaling invisible.
    CHECK(barrier_loss(p, 2.0 * q) == doctest::Approx(13.815510557964274).epsilon(1e-12));

    Eigen::VectorXd near = q;
    near[0] += 0.01;
    Eigen::VectorXd far = q;
    far[0] += 1.0;
    CHECK(barrier_loss(p, far) < barrier_loss(p, near));
    CHECK(barrier_loss(p, near) < barrier_loss(p, q));

    CHECK_THROWS_AS(barrier_loss(p, Eigen::VectorXd::Ones(3)), std::invalid_argument);
    CHECK_THROWS_AS(barrier_loss(p, Eigen::VectorXd::Zero(4)), std::invalid_argument);
    CHECK_THROWS_AS(barrier_loss(p, q, 0.0), std::invalid_argument);
}

TEST_CASE("one-sided range penalties") {
    Eigen::VectorXd ok(3);
    ok << 0.2, 0.5, 1.0;
    const RangeLosses none = range_losses(ok);
    CHECK(none.under == 0.0);
    CHECK(none.over == 0.0);

    Eigen::VectorXd low(1);
    low << -0.5;
    CHECK(range_losses(low).under == 0.25);
    CHECK(range_losses(low).over == 0.0);

    Eigen::VectorXd high(1);
    high << 1.5;
    CHECK(range_losses(high).under == 0.0);
    CHECK(range_losses(high).over == 0.25);

    CHECK_THROWS_AS(range_losses(Eigen::VectorXd()), std::invalid_argument);
}

TEST_CASE("pixel uniformity penalty") {
    Eigen::VectorXd bright_ok(2), dark_ok(2);
    bright_ok << 0.9, 0.5;
    dark_ok << 0.05, 0.01;
    CHECK(pixel_uniformity_loss(bright_ok, dark_ok) == 0.0);

    Eigen::VectorXd too_bright(1), fine_dark(1);
    too_bright << 1.0;
    fine_dark << 0.05;
    CHECK(pixel_uniformity_loss(too_bright, fine_dark) ==
          doctest::Approx(0.05).epsilon(1e-12));

    Eigen::VectorXd fine_bright(1), too_dark(1);
    fine_bright << 0.5;
    too_dark << 0.25;
    CHECK(pixel_uniformity_loss(fine_bright, too_dark) == doctest::Approx(0.2).epsilon(1e-12));

    CHECK_THROWS_AS(pixel_uniformity_loss(too_bright, dark_ok), std::invalid_argument);
}

TEST_CASE("fit results serialize to json") {
    FitResult fit;
    fit.weights = Eigen::Vector2d(1.5, 0.0);
    fit.residual_sq = 0.25;
    fit.steps_taken = 7;
    const std::string doc = fit_result_to_json(fit);
    CHECK(doc.find("\"residual_sq\"") != std::string::npos);
    CHECK(doc.find("\"steps_taken\": 7") != std::string::npos);
    CHECK(doc.find("\"weights\"") != std::string::npos);
    CHECK(doc.find("1.5") != std::string::npos);
    CHECK(doc.back() == '\n');
}

}  // TEST_SUITE

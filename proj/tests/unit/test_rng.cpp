#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "relight/rng.hpp"

using relight::Rng;

TEST_SUITE("rng") {

TEST_CASE("same seed reproduces the stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("substreams are reproducible and distinct") {
    Rng a = Rng::substream(7, 3);
    Rng b = Rng::substream(7, 3);
    Rng c = Rng::substream(7, 4);
    bool all_equal = true;
    for (int i = 0; i < 64; ++i) {
        const std::uint64_t va = a.next_u64();
        CHECK(va == b.next_u64());
        all_equal = all_equal && va == c.next_u64();
    }
    CHECK_FALSE(all_equal);
}

TEST_CASE("uniform stays in range and fills it") {
    Rng rng(1);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);
}

TEST_CASE("uniform_int covers both endpoints") {
    Rng rng(2);
    std::vector<int> counts(6, 0);
    for (int i = 0; i < 6000; ++i) {
        const int v = rng.uniform_int(2, 7);
        REQUIRE(v >= 2);
        REQUIRE(v <= 7);
        ++counts[static_cast<std::size_t>(v - 2)];
    }
    for (int c : counts) CHECK(c > 0);
}

TEST_CASE("normal moments") {
    Rng rng(3);
    const int n = 200000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("gamma matches its mean and variance") {
    Rng rng(4);
    const double shape = 0.4;  // exercises the below-one boost branch
    const int n = 200000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.gamma(shape);
        CHECK(x >= 0.0);
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::abs(mean - shape) < 0.01);
    CHECK(std::abs(var - shape) < 0.02);
}

TEST_CASE("dirichlet draws live on the simplex") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const Eigen::VectorXd theta = rng.dirichlet(5, 0.6);
        REQUIRE(theta.size() == 5);
        CHECK((theta.array() >= 0.0).all());
        CHECK(theta.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("unit_vector has unit norm") {
    Rng rng(6);
    for (int i = 0; i < 200; ++i)
        CHECK(rng.unit_vector().norm() == doctest::Approx(1.0).epsilon(1e-12));
}

}  // TEST_SUITE

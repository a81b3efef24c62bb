#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fockforge/rng.hpp"

using fockforge::Rng;
using fockforge::derive_seed;

TEST_CASE("identical seeds give identical streams") {
    Rng a(1234), b(1234);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
    Rng c(1234), d(1234);
    for (int i = 0; i < 100; ++i) CHECK(c.poisson(3.7) == d.poisson(3.7));
}

TEST_CASE("uniform stays in [0, 1)") {
    Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
        double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("derived seeds differ by stream") {
    CHECK(derive_seed(42, 0) != derive_seed(42, 1));
    CHECK(derive_seed(42, 0) != derive_seed(43, 0));
    CHECK(derive_seed(42, 5) == derive_seed(42, 5));
}

TEST_CASE("poisson edge cases") {
    Rng rng(11);
    CHECK(rng.poisson(0.0) == 0);
    CHECK_THROWS_AS(rng.poisson(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(rng.poisson(std::nan("")), std::invalid_argument);
}

TEST_CASE("poisson sample mean matches the rate, small mean") {
    Rng rng(2024);
    const double mean = 7.0;
    const int n = 20000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(rng.poisson(mean));
    double sigma_of_mean = std::sqrt(mean / n);
    CHECK(std::abs(sum / n - mean) < 5.0 * sigma_of_mean);
}

TEST_CASE("poisson sample mean matches the rate, large mean") {
    Rng rng(99);
    const double mean = 12000.0;
    const int n = 4000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(rng.poisson(mean));
    double sigma_of_mean = std::sqrt(mean / n);
    CHECK(std::abs(sum / n - mean) < 5.0 * sigma_of_mean);
}

TEST_CASE("normal has zero mean and unit variance") {
    Rng rng(5);
    const int n = 50000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double z = rng.normal();
        s1 += z;
        s2 += z * z;
    }
    CHECK(std::abs(s1 / n) < 0.03);
    CHECK(std::abs(s2 / n - 1.0) < 0.05);
}

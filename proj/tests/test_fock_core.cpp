#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fockforge/fock_core.hpp"
#include "fockforge/rng.hpp"
#include "fockforge/serialization.hpp"
#include "oracles.hpp"

using namespace fockforge;

namespace {

constexpr double kPi = std::numbers::pi;

FockVector random_state(int cutoff, int max_total, Rng& rng) {
    FockVector psi(cutoff);
    for (int h = 0; h <= cutoff; ++h)
        for (int v = 0; v <= cutoff; ++v)
            if (h + v <= max_total)
                psi.at(h, v) = {rng.normal(), rng.normal()};
    return psi.normalized();
}

} // namespace

TEST_CASE("number_state puts one unit of amplitude at the right label") {
    FockVector psi = number_state(2, 0, 4);
    CHECK(psi.at(2, 0) == std::complex<double>(1.0));
    CHECK(psi.squared_norm() == doctest::Approx(1.0).epsilon(1e-15));
    FockVector vac = number_state(0, 0, 4);
    CHECK(vac.at(0, 0) == std::complex<double>(1.0));
    CHECK_THROWS_AS(number_state(5, 0, 4), std::out_of_range);
    CHECK_THROWS_AS(number_state(0, -1, 4), std::out_of_range);
}

TEST_CASE("apply_raising carries the sqrt(n+1) factor") {
    FockVector vac = number_state(0, 0, 4);
    FockVector one = apply_raising(vac, Mode::H);
    CHECK(std::abs(one.at(1, 0) - 1.0) < 1e-15);
    FockVector two = apply_raising(one, Mode::H);
    CHECK(std::abs(two.at(2, 0) - std::numbers::sqrt2) < 1e-15);
    CHECK(two.squared_norm() == doctest::Approx(2.0).epsilon(1e-15));
    FockVector v1 = apply_raising(vac, Mode::V);
    CHECK(std::abs(v1.at(0, 1) - 1.0) < 1e-15);
}

TEST_CASE("apply_raising at the cutoff drops mass and records it") {
    FockVector top = number_state(4, 0, 4);
    FockVector pushed = apply_raising(top, Mode::H);
    CHECK(pushed.squared_norm() == 0.0);
    CHECK(pushed.truncated_mass == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("sector_unitary on one photon is the transform itself") {
    Rng rng(8);
    ModeTransform u = oracle::random_unitary(2, rng);
    Eigen::MatrixXcd m = sector_unitary(u, 1);
    CHECK((m - u).norm() < 1e-14);
}

TEST_CASE("sector_unitary is unitary on every sector up to 8 photons") {
    Rng rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        ModeTransform u = oracle::random_unitary(2, rng);
        for (int n = 0; n <= 8; ++n) {
            Eigen::MatrixXcd m = sector_unitary(u, n);
            Eigen::MatrixXcd gram = m.adjoint() * m;
            CHECK((gram - Eigen::MatrixXcd::Identity(n + 1, n + 1)).cwiseAbs().maxCoeff() <
                  1e-11);
        }
    }
}

TEST_CASE("sector_unitary lifts products to products") {
    Rng rng(10);
    for (int trial = 0; trial < 5; ++trial) {
        ModeTransform u = oracle::random_unitary(2, rng);
        ModeTransform v = oracle::random_unitary(2, rng);
        for (int n = 2; n <= 6; ++n) {
            Eigen::MatrixXcd lhs = sector_unitary(u * v, n);
            Eigen::MatrixXcd rhs = sector_unitary(u, n) * sector_unitary(v, n);
            CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-11);
        }
    }
}

TEST_CASE("two bunched pairs interfere into |11> under the balanced gadget") {
    FockVector psi(4);
    psi.at(2, 0) = 1.0 / std::numbers::sqrt2;
    psi.at(0, 2) = 1.0 / std::numbers::sqrt2;
    FockVector out = induced_unitary(su2_from_angles(kPi / 2.0, kPi / 4.0), psi);
    CHECK(std::abs(out.at(1, 1)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.squared_norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("induced_unitary with the identity leaves states alone") {
    Rng rng(12);
    FockVector psi = random_state(5, 5, rng);
    FockVector out = induced_unitary(ModeTransform::Identity(), psi);
    CHECK((out.amps - psi.amps).norm() < 1e-14);
}

TEST_CASE("induced_unitary preserves photon number and norm") {
    Rng rng(13);
    ModeTransform u = oracle::random_unitary(2, rng);
    FockVector psi(8);
    psi.at(1, 3) = 0.6;
    psi.at(4, 0) = 0.8;
    FockVector out = induced_unitary(u, psi);
    CHECK(out.squared_norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (int h = 0; h <= 8; ++h)
        for (int v = 0; v <= 8; ++v)
            if (h + v != 4 && out.at(h, v) != std::complex<double>(0.0))
                FAIL("amplitude outside the four-photon sector at ", h, ",", v);
}

TEST_CASE("induced_unitary matches the permanent oracle") {
    Rng rng(14);
    for (int trial = 0; trial < 3; ++trial) {
        ModeTransform u = oracle::random_unitary(2, rng);
        FockVector psi = random_state(5, 5, rng);
        FockVector out = induced_unitary(u, psi);
        for (int n = 0; n <= 5; ++n) {
            for (int k = 0; k <= n; ++k) {
                std::complex<double> expect = 0.0;
                for (int j = 0; j <= n; ++j)
                    expect += psi.at(j, n - j) *
                              oracle::transfer_amplitude(u, {j, n - j}, {k, n - k});
                CHECK(std::abs(out.at(k, n - k) - expect) < 1e-12);
            }
        }
    }
}

TEST_CASE("induced_unitary accounts for mass pushed past the cutoff") {
    Rng rng(15);
    ModeTransform u = oracle::random_unitary(2, rng);
    FockVector psi = number_state(4, 4, 4); // 8 photons, sector needs labels up to (8,0)
    FockVector out = induced_unitary(u, psi);
    CHECK(out.truncated_mass > 0.0);
    CHECK(out.squared_norm() + out.truncated_mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("induced_unitary rejects non-unitary transforms") {
    ModeTransform bad;
    bad << 1.0, 0.1, 0.0, 1.0;
    CHECK_THROWS_AS(induced_unitary(bad, number_state(0, 0, 2)), std::invalid_argument);
}

TEST_CASE("full_lift agrees with the per-state path") {
    Rng rng(16);
    ModeTransform u = oracle::random_unitary(2, rng);
    FockVector psi = random_state(4, 4, rng);
    Eigen::VectorXcd via_matrix = full_lift(u, 4) * psi.amps;
    FockVector via_state = induced_unitary(u, psi);
    CHECK((via_matrix - via_state.amps).norm() < 1e-13);
}

TEST_CASE("fidelity_trace on pure states is the squared overlap") {
    FockVector a = number_state(2, 0, 3);
    FockVector b = number_state(0, 2, 3);
    CHECK(fidelity_trace(from_pure(a), from_pure(a)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(fidelity_trace(from_pure(a), from_pure(b)) == doctest::Approx(0.0));
    DensityMatrix small(2);
    CHECK_THROWS_AS(fidelity_trace(from_pure(a), small), std::invalid_argument);
}

TEST_CASE("fidelity of the maximally mixed four-photon sector against a pure state is 1/3") {
    FockVector pure(4);
    pure.at(4, 0) = std::sqrt(3.0 / 8.0);
    pure.at(2, 2) = 0.5;
    pure.at(0, 4) = std::sqrt(3.0 / 8.0);
    DensityMatrix mixed(4);
    for (int label : {pure.index(4, 0), pure.index(2, 2), pure.index(0, 4)})
        mixed.mat(label, label) = 1.0 / 3.0;
    CHECK(fidelity_trace(mixed, from_pure(pure)) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(fidelity_with_state(mixed, pure) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("apply_loss with unit transmission is the identity") {
    Rng rng(21);
    DensityMatrix rho = from_pure(random_state(3, 3, rng));
    DensityMatrix out = apply_loss(rho, {1.0, 1.0});
    CHECK((out.mat - rho.mat).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("apply_loss with zero transmission leaves vacuum") {
    Rng rng(22);
    DensityMatrix rho = from_pure(random_state(3, 3, rng));
    DensityMatrix out = apply_loss(rho, {0.0, 0.0});
    CHECK(out.mat(0, 0).real() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(out.trace() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("apply_loss thins a two photon state binomially") {
    double eta = 0.37;
    DensityMatrix rho = from_pure(number_state(2, 0, 4));
    DensityMatrix out = apply_loss(rho, {eta, 1.0});
    CHECK(out.mat(out.index(2, 0), out.index(2, 0)).real() ==
          doctest::Approx(eta * eta).epsilon(1e-13));
    CHECK(out.mat(out.index(1, 0), out.index(1, 0)).real() ==
          doctest::Approx(2.0 * eta * (1.0 - eta)).epsilon(1e-13));
    CHECK(out.mat(out.index(0, 0), out.index(0, 0)).real() ==
          doctest::Approx((1.0 - eta) * (1.0 - eta)).epsilon(1e-13));
}

TEST_CASE("loss channels compose multiplicatively") {
    Rng rng(23);
    DensityMatrix rho = from_pure(random_state(4, 4, rng));
    DensityMatrix twice = apply_loss(apply_loss(rho, {0.8, 0.5}), {0.7, 0.9});
    DensityMatrix once = apply_loss(rho, {0.8 * 0.7, 0.5 * 0.9});
    CHECK((twice.mat - once.mat).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("apply_loss preserves trace and scales mean photon number") {
    Rng rng(24);
    DensityMatrix rho = from_pure(random_state(4, 4, rng));
    auto [nh0, nv0] = mean_photon_numbers(rho);
    DensityMatrix out = apply_loss(rho, {0.6, 0.25});
    CHECK(out.trace() == doctest::Approx(1.0).epsilon(1e-13));
    auto [nh1, nv1] = mean_photon_numbers(out);
    CHECK(nh1 == doctest::Approx(0.6 * nh0).epsilon(1e-12));
    CHECK(nv1 == doctest::Approx(0.25 * nv0).epsilon(1e-12));
    CHECK_THROWS_AS(apply_loss(rho, {1.2, 1.0}), std::invalid_argument);
}

TEST_CASE("loss_transition_matrix matches apply_loss on diagonals") {
    Rng rng(25);
    DensityMatrix rho = from_pure(random_state(4, 4, rng));
    LossChannel loss{0.55, 0.8};
    Eigen::VectorXd direct = number_distribution(apply_loss(rho, loss));
    Eigen::VectorXd via_matrix = loss_transition_matrix(4, loss) * number_distribution(rho);
    CHECK((direct - via_matrix).cwiseAbs().maxCoeff() < 1e-13);
    // columns are probability distributions
    Eigen::VectorXd colsums = loss_transition_matrix(4, loss).colwise().sum();
    CHECK((colsums.array() - 1.0).abs().maxCoeff() < 1e-13);
}

TEST_CASE("state JSON round trip is bit exact") {
    Rng rng(26);
    FockVector psi = random_state(5, 10, rng);
    psi.amps[3] = std::complex<double>(1.0 / 3.0, -1e-12);
    psi.amps[7] = std::complex<double>(kPi, 5e300 * 1e-300);
    FockVector back = state_from_json(state_to_json(psi));
    REQUIRE(back.cutoff == psi.cutoff);
    for (int i = 0; i < psi.dim(); ++i) {
        CHECK(back.amps[i].real() == psi.amps[i].real());
        CHECK(back.amps[i].imag() == psi.amps[i].imag());
    }
}

TEST_CASE("density JSON round trip is bit exact") {
    Rng rng(27);
    DensityMatrix rho = from_pure(random_state(3, 6, rng));
    DensityMatrix back = density_from_json(density_to_json(rho));
    REQUIRE(back.cutoff == rho.cutoff);
    for (int r = 0; r < rho.dim(); ++r)
        for (int c = 0; c < rho.dim(); ++c) {
            CHECK(back.mat(r, c).real() == rho.mat(r, c).real());
            CHECK(back.mat(r, c).imag() == rho.mat(r, c).imag());
        }
}

TEST_CASE("malformed state documents are rejected") {
    CHECK_THROWS_AS(state_from_json("{\"cutoff\": 2}"), std::invalid_argument);
    CHECK_THROWS_AS(
        state_from_json(
            "{\"cutoff\": 1, \"basis\": \"something else\", \"re\": [[0,0],[0,0]], "
            "\"im\": [[0,0],[0,0]]}"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        state_from_json("{\"cutoff\": 1, \"basis\": \"nH,nV row-major\", \"re\": [[0,0]], "
                        "\"im\": [[0,0]]}"),
        std::invalid_argument);
}

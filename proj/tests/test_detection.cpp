#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "fockforge/detection.hpp"
#include "fockforge/sfwm_source.hpp"
#include "oracles.hpp"

using namespace fockforge;

namespace {

constexpr double kPi = std::numbers::pi;

// real beam splitter mixing modes i and j of a d-mode identity,
// transmission t into mode i
Eigen::MatrixXcd beam_splitter(int d, int i, int j, double t) {
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(d, d);
    u(i, i) = std::sqrt(t);
    u(i, j) = std::sqrt(1.0 - t);
    u(j, i) = std::sqrt(1.0 - t);
    u(j, j) = -std::sqrt(t);
    return u;
}

// balanced fan-out of input mode 0 over d output modes
Eigen::MatrixXcd splitter_tree(int d) {
    if (d == 1) return Eigen::MatrixXcd::Identity(1, 1);
    if (d == 2) return beam_splitter(2, 0, 1, 0.5);
    REQUIRE(d == 3);
    return beam_splitter(3, 1, 2, 0.5) * beam_splitter(3, 0, 1, 1.0 / 3.0);
}

// full bosonic computation of the click-count distribution: route the n-photon
// Fock state through the tree unitary via permanents, then detect per mode
Eigen::VectorXd bosonic_click_probs(int n, int d, const DetectorModel& model) {
    Eigen::MatrixXcd tree = splitter_tree(d);
    std::vector<int> in(d, 0);
    in[0] = n;

    Eigen::VectorXd clicks = Eigen::VectorXd::Zero(d + 1);
    for (const auto& occ : oracle::occupations(d, n)) {
        std::complex<double> amp = oracle::transfer_amplitude(tree, in, occ);
        double p_occ = std::norm(amp);
        if (p_occ == 0.0) continue;
        // detectors are independent given the arrival counts
        std::vector<double> poly{1.0};
        for (int mode = 0; mode < d; ++mode) {
            double silent = std::pow(1.0 - model.efficiency, occ[mode]) *
                            (1.0 - model.dark_click_prob);
            std::vector<double> next(poly.size() + 1, 0.0);
            for (std::size_t c = 0; c < poly.size(); ++c) {
                next[c] += poly[c] * silent;
                next[c + 1] += poly[c] * (1.0 - silent);
            }
            poly = std::move(next);
        }
        for (int c = 0; c <= d; ++c) clicks[c] += p_occ * poly[c];
    }
    return clicks;
}

FockVector single_photon_diagonal() {
    FockVector psi(kDefaultCutoff);
    psi.at(1, 0) = 1.0 / std::sqrt(2.0);
    psi.at(0, 1) = 1.0 / std::sqrt(2.0);
    return psi;
}

} // namespace

TEST_CASE("port distribution of the pair state at the identity setting") {
    Eigen::MatrixXd p =
        port_number_distribution(ideal_2n_state(1), WavePlateSetting(0.0, 0.0));
    CHECK(p(2, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p(0, 2) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p(1, 1) == doctest::Approx(0.0));
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("the pi/2, pi/4 setting turns the pair state into one photon per port") {
    Eigen::MatrixXd p = port_number_distribution(
        ideal_2n_state(1), WavePlateSetting(kPi / 2.0, kPi / 4.0));
    CHECK(p(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("port distributions are normalized for arbitrary settings") {
    Rng rng(41);
    FockVector four = ideal_2n_state(2);
    for (int trial = 0; trial < 25; ++trial) {
        WavePlateSetting s(rng.uniform() * 2.0 * kPi, rng.uniform() * kPi);
        CHECK(port_number_distribution(four, s).sum() ==
              doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("density matrix port distribution agrees with the pure-state path") {
    FockVector psi = ideal_2n_state(2);
    WavePlateSetting s(0.7, 0.9);
    Eigen::MatrixXd from_state = port_number_distribution(psi, s);
    Eigen::MatrixXd from_rho = port_number_distribution(from_pure(psi), s);
    CHECK((from_state - from_rho).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fan-out click probabilities for small hand cases") {
    DetectorModel ideal;
    Eigen::VectorXd two_two = fanout_click_probs(2, 2, ideal);
    CHECK(two_two[0] == doctest::Approx(0.0));
    CHECK(two_two[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(two_two[2] == doctest::Approx(0.5).epsilon(1e-12));

    Eigen::VectorXd one_two = fanout_click_probs(1, 2, ideal);
    CHECK(one_two[1] == doctest::Approx(1.0));
    CHECK(one_two[2] == doctest::Approx(0.0));

    DetectorModel lossy;
    lossy.efficiency = 0.85;
    CHECK(fanout_click_probs(1, 1, lossy)[1] == doctest::Approx(0.85));

    DetectorModel dark;
    dark.dark_click_prob = 0.01;
    Eigen::VectorXd vac = fanout_click_probs(0, 2, dark);
    CHECK(vac[0] == doctest::Approx(0.99 * 0.99));
    CHECK(vac[1] == doctest::Approx(2.0 * 0.01 * 0.99));
    CHECK(vac[2] == doctest::Approx(0.01 * 0.01));
}

TEST_CASE("fan-out click distribution equals the bosonic tree computation") {
    std::vector<DetectorModel> models(3);
    models[1].efficiency = 0.85;
    models[2].efficiency = 0.85;
    models[2].dark_click_prob = 1e-3;

    for (const auto& model : models)
        for (int d = 1; d <= 3; ++d)
            for (int n = 0; n <= 6; ++n) {
                Eigen::VectorXd fast = fanout_click_probs(n, d, model);
                Eigen::VectorXd oracle_probs = bosonic_click_probs(n, d, model);
                CHECK(fast.sum() == doctest::Approx(1.0).epsilon(1e-12));
                CHECK((fast - oracle_probs).cwiseAbs().maxCoeff() < 1e-10);
            }
}

TEST_CASE("coincidence probabilities on one detector per port") {
    DetectorModel ideal;
    DetectionTree tree{1, 1};
    FockVector one_one = number_state(1, 1);
    CHECK(coincidence_probability(one_one, WavePlateSetting(0.0, 0.0), tree,
                                  ideal, ClickPattern{1, 1}) ==
          doctest::Approx(1.0).epsilon(1e-12));

    CHECK(coincidence_probability(ideal_2n_state(1), WavePlateSetting(0.0, 0.0),
                                  tree, ideal, ClickPattern{1, 1}) ==
          doctest::Approx(0.0));
}

TEST_CASE("click classes sum to one") {
    DetectorModel model;
    model.efficiency = 0.7;
    model.dark_click_prob = 5e-3;
    DetectionTree tree{2, 3};
    Eigen::MatrixXd classes = click_class_probs(
        port_number_distribution(ideal_2n_state(2), WavePlateSetting(1.1, 0.6)),
        tree, model);
    CHECK(classes.sum() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(classes.rows() == 3);
    CHECK(classes.cols() == 4);
}

TEST_CASE("click pattern must fit the detection tree") {
    CHECK_THROWS_AS(
        coincidence_probability(number_state(1, 1), WavePlateSetting(0.0, 0.0),
                                DetectionTree{1, 1}, DetectorModel{},
                                ClickPattern{2, 0}),
        std::invalid_argument);
}

TEST_CASE("single-photon fringe has period 2 pi and unit visibility") {
    FockVector psi = single_photon_diagonal();
    DetectionTree tree{1, 1};
    DetectorModel ideal;
    for (double phi : {0.0, 0.4, 1.3, 2.8, 4.4, 6.0}) {
        double p = coincidence_probability(psi, WavePlateSetting(phi, kPi / 4.0),
                                           tree, ideal, ClickPattern{1, 0});
        CHECK(p == doctest::Approx((1.0 + std::cos(phi)) / 2.0).epsilon(1e-10));
    }
}

TEST_CASE("pair-state fringe oscillates at twice the phase") {
    DetectionTree tree{1, 1};
    DetectorModel ideal;
    for (double phi : {0.1, 0.9, 1.7, 2.5, 3.3}) {
        double p =
            coincidence_probability(ideal_2n_state(1),
                                    WavePlateSetting(phi, kPi / 4.0), tree,
                                    ideal, ClickPattern{1, 1});
        double s = std::sin(phi);
        CHECK(p == doctest::Approx(s * s).epsilon(1e-10));
    }
}

TEST_CASE("four-photon fringe matches the permanent oracle and has period pi/2") {
    FockVector four = ideal_2n_state(2);
    DetectionTree tree{1, 3};
    DetectorModel ideal;

    for (double phi : {0.0, 0.3, 0.8, 1.2, 1.9, 2.7}) {
        WavePlateSetting setting(phi, kPi / 4.0);
        double p = coincidence_probability(four, setting, tree, ideal,
                                           ClickPattern{1, 3});

        // oracle: amplitude into ports (1,3) summed over the state terms,
        // then the 3-detector fan-out keeps 3!/3^3 of the 3-photon side
        Eigen::MatrixXcd u = su2_from_angles(setting);
        std::complex<double> amp = 0.0;
        for (int j = 0; j <= 2; ++j) {
            std::complex<double> coeff = four.at(2 * j, 4 - 2 * j);
            amp += coeff * oracle::transfer_amplitude(u, {2 * j, 4 - 2 * j},
                                                      {1, 3});
        }
        double expected = std::norm(amp) * (6.0 / 27.0);
        CHECK(p == doctest::Approx(expected).epsilon(1e-10));

        // closed form of the port probability: 3/16 (1 - cos 4 phi)
        CHECK(std::norm(amp) ==
              doctest::Approx(0.1875 * (1.0 - std::cos(4.0 * phi)))
                  .epsilon(1e-10));

        double shifted = coincidence_probability(
            four, WavePlateSetting(phi + kPi / 2.0, kPi / 4.0), tree, ideal,
            ClickPattern{1, 3});
        CHECK(p == doctest::Approx(shifted).epsilon(1e-10));
    }
}

TEST_CASE("fringe scan covers the requested grid") {
    std::vector<double> phis;
    for (int i = 0; i < 16; ++i) phis.push_back(2.0 * kPi * i / 16.0);
    std::vector<double> curve =
        fringe_scan(ideal_2n_state(1), phis, kPi / 4.0, DetectionTree{1, 1},
                    DetectorModel{}, ClickPattern{1, 1});
    REQUIRE(curve.size() == phis.size());
    for (std::size_t i = 0; i < phis.size(); ++i) {
        double s = std::sin(phis[i]);
        CHECK(curve[i] == doctest::Approx(s * s).epsilon(1e-10));
    }
}

TEST_CASE("count sampling is deterministic and unbiased") {
    Rng a(11), b(11);
    CHECK(sample_counts(1e-4, 1e8, 10.0, a) == sample_counts(1e-4, 1e8, 10.0, b));
    CHECK(sample_counts(0.0, 1e8, 10.0, a) == 0);

    Rng rng(12);
    double mean = 0.0;
    const int trials = 400;
    const double expected = 1e-4 * 1e8 * 1.0; // 10000 per draw
    for (int i = 0; i < trials; ++i)
        mean += static_cast<double>(sample_counts(1e-4, 1e8, 1.0, rng));
    mean /= trials;
    double sigma = std::sqrt(expected / trials);
    CHECK(std::abs(mean - expected) < 5.0 * sigma);

    Rng r2(13);
    CHECK_THROWS_AS(sample_counts(1.5, 1e8, 1.0, r2), std::invalid_argument);
}

TEST_CASE("two-photon dip scan endpoints") {
    std::vector<double> delays{-60.0, -5.0, 0.0, 5.0, 60.0};
    std::vector<double> curve = hom_scan(delays, 1.0, 23.0);
    CHECK(curve[2] == doctest::Approx(0.0));
    CHECK(curve[0] == doctest::Approx(1.0).epsilon(0.05));
    CHECK_THROWS_AS(hom_scan(delays, 1.2, 23.0), std::invalid_argument);
}

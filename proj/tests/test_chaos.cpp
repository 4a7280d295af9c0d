#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "oracles.hpp"
#include "spinbath/chaos.hpp"

using namespace spinbath;

TEST_CASE("bath spectrum: single spin in a z field") {
    ModelParams p;
    p.n_bath = 1;
    p.gamma0 = 0.0;
    p.h0 = 0.2;
    RngStream stream = make_stream(1);
    BathDisorder d = sample_bath_disorder(p, stream);
    d.hx[0] = 0.0;
    CouplingSet c;
    c.a = {0.0};
    const SparseHamiltonian hb = build_hamiltonian(p, d, c, HamiltonianPart::bath_only);
    const auto eigs = bath_spectrum(hb);
    REQUIRE(eigs.size() == 2);
    CHECK(eigs[0] == doctest::Approx(-d.hz[0] / 2).epsilon(1e-13));
    CHECK(eigs[1] == doctest::Approx(d.hz[0] / 2).epsilon(1e-13));
}

TEST_CASE("bath spectrum: pure pair coupling gives +-gamma/4 doublets") {
    ModelParams p;
    p.n_bath = 2;
    p.gamma0 = 0.1;
    p.h0 = 0.0;
    RngStream stream = make_stream(2);
    BathDisorder d = sample_bath_disorder(p, stream);
    const double g = d.gamma_at(0, 1);
    REQUIRE(g != 0.0);
    CouplingSet c;
    c.a = {0.0, 0.0};
    const SparseHamiltonian hb = build_hamiltonian(p, d, c, HamiltonianPart::bath_only);
    const auto eigs = bath_spectrum(hb);
    REQUIRE(eigs.size() == 4);
    const double a = std::abs(g) / 4.0;
    CHECK(eigs[0] == doctest::Approx(-a).epsilon(1e-12));
    CHECK(eigs[1] == doctest::Approx(-a).epsilon(1e-12));
    CHECK(eigs[2] == doctest::Approx(a).epsilon(1e-12));
    CHECK(eigs[3] == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("bath spectrum is traceless at paper parameters" * doctest::timeout(600)) {
    ModelParams p;
    p.n_bath = 12;
    p.gamma0 = 0.04;
    p.h0 = 0.014;
    RngStream stream = make_stream(3);
    const BathDisorder d = sample_bath_disorder(p, stream);
    CouplingSet c;
    c.a.assign(12, 0.0);
    const SparseHamiltonian hb = build_hamiltonian(p, d, c, HamiltonianPart::bath_only);
    const auto eigs = bath_spectrum(hb);
    REQUIRE(eigs.size() == 4096);
    const double sum = std::accumulate(eigs.begin(), eigs.end(), 0.0);
    CHECK(std::abs(sum) < 1e-8 * 4096);
}

TEST_CASE("density of states: uniform spectrum is flat with W ~ 1.9a") {
    const double a = 0.7;
    const int n = 20000;
    std::vector<double> eigs(n);
    for (int i = 0; i < n; ++i)
        eigs[i] = -a + 2.0 * a * (static_cast<double>(i) + 0.5) / n;

    const DosHistogram dos = density_of_states(eigs, 20);
    const double expected_density = 1.0 / (2.0 * a);
    for (double d : dos.density) CHECK(d == doctest::Approx(expected_density).epsilon(0.02));
    CHECK(dos.width_w == doctest::Approx(1.9 * a).epsilon(0.01));
}

TEST_CASE("density of states input validation") {
    std::vector<double> few(50, 0.0);
    CHECK_THROWS_AS(density_of_states(few, 10), std::invalid_argument);
    std::vector<double> eigs(200, 0.0);
    CHECK_THROWS_AS(density_of_states(eigs, 3), std::invalid_argument);
}

TEST_CASE("unfolding a Poisson spectrum: unit mean, exponential shape") {
    RngStream stream = make_stream(5);
    const auto eigs = oracles::poisson_spectrum(10000, stream);
    const auto spacings = unfolded_spacings(eigs);
    const double mean =
        std::accumulate(spacings.begin(), spacings.end(), 0.0) / spacings.size();
    CHECK(mean == doctest::Approx(1.0).epsilon(0.02));

    // exponential shape: P(s > 1) = 1/e
    const auto above = std::count_if(spacings.begin(), spacings.end(),
                                     [](double s) { return s > 1.0; });
    CHECK(static_cast<double>(above) / spacings.size() ==
          doctest::Approx(std::exp(-1.0)).epsilon(0.05));
}

TEST_CASE("unfolding a rigid ladder gives unit spacings") {
    std::vector<double> eigs(1000);
    for (int i = 0; i < 1000; ++i) eigs[i] = static_cast<double>(i);
    const auto spacings = unfolded_spacings(eigs);
    for (double s : spacings) CHECK(s == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("GOE spacings match Wigner-Dyson (chi-squared)" * doctest::timeout(600)) {
    RngStream stream = make_stream(6);
    const auto eigs = oracles::goe_spectrum(4096, stream);
    const auto spacings = unfolded_spacings(eigs);

    // bin into [0, 3.5], compare observed counts against the reference
    const int n_bins = 14;
    const double hi = 3.5;
    std::vector<double> observed(n_bins, 0.0);
    int inside = 0;
    for (double s : spacings) {
        if (s >= 0.0 && s < hi) {
            observed[static_cast<int>(s / (hi / n_bins))] += 1.0;
            ++inside;
        }
    }
    double chi2 = 0.0;
    int used = 0;
    for (int i = 0; i < n_bins; ++i) {
        // expected mass from the Wigner surmise CDF: 1 - exp(-pi s^2/4)
        const double lo_edge = hi * i / n_bins;
        const double hi_edge = hi * (i + 1) / n_bins;
        const double mass = std::exp(-0.25 * std::numbers::pi * lo_edge * lo_edge) -
                            std::exp(-0.25 * std::numbers::pi * hi_edge * hi_edge);
        const double expected = mass * static_cast<double>(spacings.size());
        if (expected < 5.0) continue;
        chi2 += (observed[i] - expected) * (observed[i] - expected) / expected;
        ++used;
    }
    REQUIRE(used >= 8);
    const double p = oracles::chi2_tail(chi2, used - 1);
    CHECK(p > 0.01);
    CHECK(static_cast<double>(inside) / spacings.size() > 0.99);
}

TEST_CASE("unfolding requires enough levels") {
    std::vector<double> eigs(400, 0.0);
    CHECK_THROWS_AS(unfolded_spacings(eigs), std::invalid_argument);
}

TEST_CASE("degenerate spectra are flagged with zero spacings retained") {
    std::vector<double> eigs;
    for (int i = 0; i < 500; ++i) {
        eigs.push_back(static_cast<double>(i));
        eigs.push_back(static_cast<double>(i));  // exact doublets
    }
    bool degenerate = false;
    const auto spacings = unfolded_spacings(eigs, 9, &degenerate);
    CHECK(degenerate);
    const auto zeros = std::count(spacings.begin(), spacings.end(), 0.0);
    CHECK(zeros > static_cast<long>(spacings.size() / 3));
}

TEST_CASE("gap ratio: Poisson and GOE reference values" * doctest::timeout(600)) {
    RngStream stream = make_stream(7);
    const auto poisson = oracles::poisson_spectrum(10000, stream);
    CHECK(mean_gap_ratio(poisson) ==
          doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(0.03));

    const auto goe = oracles::goe_spectrum(2048, stream);
    CHECK(mean_gap_ratio(goe) == doctest::Approx(0.531).epsilon(0.02));
}

TEST_CASE("gap ratio is affine invariant") {
    RngStream stream = make_stream(8);
    const auto eigs = oracles::poisson_spectrum(2000, stream);
    const double r0 = mean_gap_ratio(eigs);
    std::vector<double> scaled(eigs.size());
    for (std::size_t i = 0; i < eigs.size(); ++i) scaled[i] = 3.7 * eigs[i] - 11.0;
    CHECK(std::abs(mean_gap_ratio(scaled) - r0) < 1e-12);
}

TEST_CASE("spacing statistics classify by the gap ratio") {
    RngStream stream = make_stream(9);
    const auto poisson = oracles::poisson_spectrum(5000, stream);
    const auto sp_p = unfolded_spacings(poisson);
    const SpacingHistogram hp = spacing_statistics(sp_p, poisson, 24);
    CHECK(hp.classification == ChaosClass::regular);
    CHECK(histogram_l1_distance(hp, poisson_pdf) <
          histogram_l1_distance(hp, wigner_dyson_pdf));

    const auto goe = oracles::goe_spectrum(1024, stream);
    const auto sp_g = unfolded_spacings(goe);
    const SpacingHistogram hg = spacing_statistics(sp_g, goe, 24);
    CHECK(hg.classification == ChaosClass::chaotic);
    CHECK(histogram_l1_distance(hg, wigner_dyson_pdf) <
          histogram_l1_distance(hg, poisson_pdf));
}

TEST_CASE("fewer than 500 spacings forces ambiguous") {
    RngStream stream = make_stream(10);
    const auto eigs = oracles::poisson_spectrum(300, stream);
    std::vector<double> spacings(eigs.size() - 1);
    for (std::size_t i = 0; i + 1 < eigs.size(); ++i)
        spacings[i] = eigs[i + 1] - eigs[i];
    const SpacingHistogram h = spacing_statistics(spacings, eigs, 16);
    CHECK(h.classification == ChaosClass::ambiguous);
}

TEST_CASE("reference densities") {
    CHECK(wigner_dyson_pdf(0.0) == 0.0);
    CHECK(poisson_pdf(0.0) == 1.0);
    // both normalized: crude quadrature
    double wd = 0.0, po = 0.0;
    const double ds = 1e-3;
    for (double s = 0.5 * ds; s < 20.0; s += ds) {
        wd += wigner_dyson_pdf(s) * ds;
        po += poisson_pdf(s) * ds;
    }
    CHECK(wd == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(po == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("gamma_critical arithmetic") {
    CHECK(gamma_critical(14, 1, 0.014, 1.0) == doctest::Approx(0.001).epsilon(1e-12));
    CHECK(gamma_critical(12, 11, 0.014, 0.0) == 0.0);
    CHECK_THROWS_AS(gamma_critical(0, 1, 0.014, 1.0), std::invalid_argument);
}

TEST_CASE("dos total variation compares shapes") {
    // same shape at different scales -> near zero
    std::vector<double> a(5000), b(5000);
    RngStream stream = make_stream(11);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < 5000; ++i) {
        const double x = g(stream);
        a[i] = x;
        b[i] = 5.0 * x;
    }
    const DosHistogram ha = density_of_states(a, 40);
    const DosHistogram hb = density_of_states(b, 40);
    CHECK(dos_total_variation(ha, hb) < 1e-12);
}

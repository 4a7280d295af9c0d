#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "spinbath/envelope.hpp"

using namespace spinbath;

namespace {

struct Series {
    std::vector<double> t, v;
};

Series sample(double t_max, double dt, const std::function<double(double)>& f) {
    Series s;
    for (double t = 0.0; t <= t_max + 1e-12; t += dt) {
        s.t.push_back(t);
        s.v.push_back(f(t));
    }
    return s;
}

EnvelopePoints synth_envelope(EnvelopeForm form, double alpha, double beta, double ts,
                              double t_max, int n, double noise_sigma,
                              std::uint64_t seed) {
    EnvelopePoints p;
    RngStream stream = make_stream(seed);
    std::normal_distribution<double> g(0.0, noise_sigma);
    for (int i = 0; i < n; ++i) {
        const double t = t_max * (i + 1.0) / n;
        const double gg = form == EnvelopeForm::gaussian ? std::exp(-t * t / (ts * ts))
                                                         : std::exp(-t / ts);
        p.times.push_back(t);
        p.values.push_back(alpha + beta * gg + (noise_sigma > 0 ? g(stream) : 0.0));
    }
    return p;
}

}  // namespace

TEST_CASE("pure sinusoid: lower branch -0.5, upper branch 0") {
    const double j = 0.4;
    const Series s = sample(200.0, 0.25, [j](double t) {
        return -0.25 + 0.25 * std::cos(j * t);
    });

    const EnvelopePoints lower = extract_envelope(s.t, s.v, Branch::lower);
    REQUIRE(lower.times.size() >= 4);
    for (double v : lower.values) CHECK(v == doctest::Approx(-0.5).epsilon(2e-3));

    const EnvelopePoints upper = extract_envelope(s.t, s.v, Branch::upper);
    for (double v : upper.values) CHECK(std::abs(v) < 2e-3);

    // extrema spacing ~ pi/J
    for (std::size_t i = 1; i < lower.times.size(); ++i) {
        const double gap = lower.times[i] - lower.times[i - 1];
        CHECK(gap == doctest::Approx(2.0 * std::numbers::pi / j).epsilon(0.2));
    }

    const EnvelopePoints amp = extract_envelope(s.t, s.v, Branch::amplitude);
    for (double v : amp.values) CHECK(v == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("damped cosine: lower branch follows the decaying envelope") {
    const Series s = sample(300.0, 0.1, [](double t) {
        return -0.25 - 0.25 * std::exp(-t / 50.0) * std::cos(0.4 * t);
    });
    const EnvelopePoints lower = extract_envelope(s.t, s.v, Branch::lower);
    REQUIRE(lower.times.size() >= 4);
    for (std::size_t i = 0; i < lower.times.size(); ++i) {
        const double expect = -0.25 - 0.25 * std::exp(-lower.times[i] / 50.0);
        CHECK(std::abs(lower.values[i] - expect) < 0.01 * std::abs(expect));
    }
}

TEST_CASE("too few extrema is an error") {
    const Series s = sample(5.0, 0.25, [](double t) { return std::cos(0.4 * t); });
    CHECK_THROWS_AS(extract_envelope(s.t, s.v, Branch::lower), std::runtime_error);
}

TEST_CASE("noise-free synthetic recovery within 0.1% for both forms") {
    RngStream stream = make_stream(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        const auto form = rep % 2 == 0 ? EnvelopeForm::gaussian : EnvelopeForm::exponential;
        const double alpha = -0.5 + u(stream);
        const double beta = (u(stream) < 0.5 ? -1 : 1) * (0.2 + 0.6 * u(stream));
        const double ts = 20.0 + 180.0 * u(stream);
        const EnvelopePoints pts =
            synth_envelope(form, alpha, beta, ts, 3.0 * ts, 60, 0.0, 1000 + rep);

        const FitResult fit = fit_envelope(pts, form);
        REQUIRE(fit.converged);
        CHECK(std::abs(fit.alpha - alpha) < 1e-3 * std::max(1.0, std::abs(alpha)));
        CHECK(std::abs(fit.beta - beta) < 1e-3 * std::abs(beta));
        CHECK(std::abs(fit.ts - ts) < 1e-3 * ts);
    }
}

TEST_CASE("noisy synthetic gaussian recovery within 5%") {
    const EnvelopePoints pts = synth_envelope(EnvelopeForm::gaussian, -0.1, -0.4, 80.0,
                                              240.0, 80, 0.002, 4242);
    const FitResult fit = fit_envelope(pts, EnvelopeForm::gaussian);
    REQUIRE(fit.converged);
    CHECK(std::abs(fit.alpha - (-0.1)) < 0.05 * 0.1 + 0.002);
    CHECK(std::abs(fit.beta - (-0.4)) < 0.05 * 0.4);
    CHECK(std::abs(fit.ts - 80.0) < 0.05 * 80.0);
}

TEST_CASE("constant data is degenerate") {
    EnvelopePoints pts;
    for (int i = 0; i < 10; ++i) {
        pts.times.push_back(i + 1.0);
        pts.values.push_back(-0.3);
    }
    const FitResult fit = fit_envelope(pts, EnvelopeForm::exponential);
    CHECK(fit.beta == 0.0);
    CHECK(!fit.converged);
    CHECK(std::isnan(fit.ts));
}

TEST_CASE("fit requires at least 4 points") {
    EnvelopePoints pts;
    pts.times = {1.0, 2.0, 3.0};
    pts.values = {0.1, 0.2, 0.3};
    CHECK_THROWS_AS(fit_envelope(pts, EnvelopeForm::gaussian), std::invalid_argument);
}

TEST_CASE("select_form picks the smaller residual") {
    FitResult g, e;
    g.form = EnvelopeForm::gaussian;
    e.form = EnvelopeForm::exponential;
    g.converged = e.converged = true;

    g.rms_residual = 0.02;
    e.rms_residual = 0.01;
    FormSelection sel = select_form(g, e);
    CHECK(sel.selected == EnvelopeForm::exponential);
    CHECK(sel.ratio_exp_over_gauss == doctest::Approx(0.5));
    CHECK(!sel.indistinguishable);

    e.rms_residual = 0.02;
    sel = select_form(g, e);
    CHECK(sel.indistinguishable);
    CHECK(sel.ratio_exp_over_gauss == doctest::Approx(1.0));

    g.converged = false;
    e.converged = false;
    CHECK_THROWS_AS(select_form(g, e), std::runtime_error);
}

TEST_CASE("exponential data prefers the exponential form and vice versa") {
    const EnvelopePoints ep = synth_envelope(EnvelopeForm::exponential, -0.05, -0.45,
                                             60.0, 240.0, 60, 0.002, 9);
    const FitResult eg = fit_envelope(ep, EnvelopeForm::gaussian);
    const FitResult ee = fit_envelope(ep, EnvelopeForm::exponential);
    const FormSelection sel_e = select_form(eg, ee);
    CHECK(sel_e.selected == EnvelopeForm::exponential);

    const EnvelopePoints gp = synth_envelope(EnvelopeForm::gaussian, -0.05, -0.45, 60.0,
                                             180.0, 60, 0.002, 10);
    const FitResult gg = fit_envelope(gp, EnvelopeForm::gaussian);
    const FitResult ge = fit_envelope(gp, EnvelopeForm::exponential);
    const FormSelection sel_g = select_form(gg, ge);
    CHECK(sel_g.selected == EnvelopeForm::gaussian);
}

TEST_CASE("plateau over a window") {
    std::vector<double> t, v;
    RngStream stream = make_stream(11);
    std::normal_distribution<double> g(0.0, 0.01);
    for (int i = 0; i <= 1000; ++i) {
        t.push_back(10.0 * i);
        v.push_back(-0.3 + g(stream));
    }
    const PlateauEstimate p = plateau_value(t, v, 2000.0, 10000.0);
    CHECK(p.count >= 20);
    CHECK(p.mean == doctest::Approx(-0.3).epsilon(0.01));
    CHECK(p.stddev == doctest::Approx(0.01).epsilon(0.2));

    CHECK_THROWS_AS(plateau_value(t, v, 2000.0, 20000.0), std::invalid_argument);
    CHECK_THROWS_AS(plateau_value(t, v, 9990.0, 10000.0), std::invalid_argument);
}

TEST_CASE("fitted ts agrees between forms on slowly decaying data") {
    // residual ratio near 1 when the decay is barely resolved
    const EnvelopePoints pts = synth_envelope(EnvelopeForm::exponential, -0.1, -0.4,
                                              400.0, 200.0, 50, 0.001, 21);
    const FitResult g = fit_envelope(pts, EnvelopeForm::gaussian);
    const FitResult e = fit_envelope(pts, EnvelopeForm::exponential);
    if (g.converged && e.converged) {
        const FormSelection sel = select_form(g, e);
        CHECK(sel.ratio_exp_over_gauss > 0.3);
        CHECK(sel.ratio_exp_over_gauss < 3.0);
    }
}

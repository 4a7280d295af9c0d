#include "spinbath/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>
#include <lapacke.h>

namespace spinbath {

namespace {

double quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

// Chebyshev basis values T_0..T_deg at x in [-1, 1].
void cheb_row(double x, int deg, double* out) {
    out[0] = 1.0;
    if (deg >= 1) out[1] = x;
    for (int n = 2; n <= deg; ++n) out[n] = 2.0 * x * out[n - 1] - out[n - 2];
}

}  // namespace

std::string to_string(ChaosClass c) {
    switch (c) {
        case ChaosClass::chaotic: return "chaotic";
        case ChaosClass::regular: return "regular";
        default: return "ambiguous";
    }
}

std::vector<double> bath_spectrum(const SparseHamiltonian& hb) {
    if (hb.dim > 16384)
        throw std::invalid_argument("bath_spectrum: dimension too large for dense solve");
    Eigen::MatrixXd dense = hb.dense_real();
    const auto n = static_cast<lapack_int>(hb.dim);
    std::vector<double> eigs(hb.dim);
    // dense_real is column-major (Eigen default); symmetric, so layout is moot
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, dense.data(),
                                           n, eigs.data());
    if (info != 0) throw std::runtime_error("bath_spectrum: dsyevd failed");
    return eigs;  // ascending
}

DosHistogram density_of_states(const std::vector<double>& eigs, int n_bins) {
    if (eigs.size() < 100)
        throw std::invalid_argument("density_of_states: need at least 100 eigenvalues");
    if (n_bins < 4) throw std::invalid_argument("density_of_states: n_bins must be >= 4");

    std::vector<double> sorted = eigs;
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    const double hi = sorted.back();
    const double span = hi > lo ? hi - lo : 1.0;
    const double bin_width = span / n_bins;

    DosHistogram h;
    h.edges.resize(n_bins + 1);
    for (int i = 0; i <= n_bins; ++i) h.edges[i] = lo + span * i / n_bins;
    h.density.assign(n_bins, 0.0);
    for (double e : sorted) {
        auto bin = static_cast<int>((e - lo) / bin_width);
        bin = std::clamp(bin, 0, n_bins - 1);
        h.density[bin] += 1.0;
    }
    const double norm = 1.0 / (static_cast<double>(sorted.size()) * bin_width);
    for (double& d : h.density) d *= norm;

    h.width_w = quantile(sorted, 0.975) - quantile(sorted, 0.025);
    return h;
}

std::vector<double> unfolded_spacings(const std::vector<double>& eigs, int poly_degree,
                                      bool* degenerate) {
    if (eigs.size() < 500)
        throw std::invalid_argument("unfolded_spacings: need at least 500 eigenvalues");
    if (poly_degree < 1 || poly_degree > 30)
        throw std::invalid_argument("unfolded_spacings: poly_degree out of range");

    std::vector<double> sorted = eigs;
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();

    std::size_t repeats = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (sorted[i] == sorted[i - 1]) ++repeats;
    const bool degen = repeats > n / 10;
    if (degenerate) *degenerate = degen;

    const auto trim = static_cast<std::size_t>(0.02 * static_cast<double>(n));
    const std::size_t lo = trim;
    const std::size_t hi = n - trim;  // exclusive
    const std::size_t m = hi - lo;
    if (m < static_cast<std::size_t>(poly_degree + 2))
        throw std::invalid_argument("unfolded_spacings: too few levels after trimming");

    const double e_lo = sorted[lo];
    const double e_hi = sorted[hi - 1];
    const double span = e_hi > e_lo ? e_hi - e_lo : 1.0;

    // Least-squares fit of the staircase rank(E) with a Chebyshev-basis
    // polynomial on the rescaled energy.
    Eigen::MatrixXd design(static_cast<Eigen::Index>(m), poly_degree + 1);
    Eigen::VectorXd target(static_cast<Eigen::Index>(m));
    std::vector<double> row(poly_degree + 1);
    for (std::size_t i = 0; i < m; ++i) {
        const double x = 2.0 * (sorted[lo + i] - e_lo) / span - 1.0;
        cheb_row(x, poly_degree, row.data());
        for (int p = 0; p <= poly_degree; ++p)
            design(static_cast<Eigen::Index>(i), p) = row[p];
        target[static_cast<Eigen::Index>(i)] = static_cast<double>(lo + i) + 0.5;
    }
    const Eigen::VectorXd coeff = design.colPivHouseholderQr().solve(target);

    std::vector<double> mapped(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double x = 2.0 * (sorted[lo + i] - e_lo) / span - 1.0;
        cheb_row(x, poly_degree, row.data());
        double v = 0.0;
        for (int p = 0; p <= poly_degree; ++p) v += coeff[p] * row[p];
        mapped[i] = v;
    }

    std::vector<double> spacings(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) spacings[i] = mapped[i + 1] - mapped[i];
    return spacings;
}

double mean_gap_ratio(const std::vector<double>& eigs) {
    if (eigs.size() < 3)
        throw std::invalid_argument("mean_gap_ratio: need at least 3 eigenvalues");
    std::vector<double> sorted = eigs;
    std::sort(sorted.begin(), sorted.end());

    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i + 2 < sorted.size(); ++i) {
        const double d1 = sorted[i + 1] - sorted[i];
        const double d2 = sorted[i + 2] - sorted[i + 1];
        const double mx = std::max(d1, d2);
        if (mx == 0.0) continue;  // coincident triple
        sum += std::min(d1, d2) / mx;
        ++count;
    }
    if (count == 0) throw std::runtime_error("mean_gap_ratio: fully degenerate spectrum");
    return sum / static_cast<double>(count);
}

SpacingHistogram spacing_statistics(const std::vector<double>& spacings,
                                    const std::vector<double>& raw_eigenvalues,
                                    int n_bins) {
    if (n_bins < 4) throw std::invalid_argument("spacing_statistics: n_bins must be >= 4");
    if (spacings.empty())
        throw std::invalid_argument("spacing_statistics: empty spacing array");

    SpacingHistogram h;
    const double s_max = 4.0;  // both references are negligible beyond
    h.edges.resize(n_bins + 1);
    for (int i = 0; i <= n_bins; ++i) h.edges[i] = s_max * i / n_bins;
    h.density.assign(n_bins, 0.0);
    const double bin_width = s_max / n_bins;
    for (double s : spacings) {
        if (s < 0.0 || s >= s_max) continue;
        h.density[static_cast<int>(s / bin_width)] += 1.0;
    }
    const double norm = 1.0 / (static_cast<double>(spacings.size()) * bin_width);
    for (double& d : h.density) d *= norm;

    h.mean_r = mean_gap_ratio(raw_eigenvalues);
    if (spacings.size() < 500)
        h.classification = ChaosClass::ambiguous;
    else if (h.mean_r > 0.48)
        h.classification = ChaosClass::chaotic;
    else if (h.mean_r < 0.42)
        h.classification = ChaosClass::regular;
    else
        h.classification = ChaosClass::ambiguous;
    return h;
}

double wigner_dyson_pdf(double s) {
    return 0.5 * std::numbers::pi * s * std::exp(-0.25 * std::numbers::pi * s * s);
}

double poisson_pdf(double s) { return std::exp(-s); }

double histogram_l1_distance(const SpacingHistogram& hist, double (*ref)(double)) {
    double l1 = 0.0;
    for (std::size_t i = 0; i + 1 < hist.edges.size(); ++i) {
        const double center = 0.5 * (hist.edges[i] + hist.edges[i + 1]);
        const double width = hist.edges[i + 1] - hist.edges[i];
        l1 += std::abs(hist.density[i] - ref(center)) * width;
    }
    return l1;
}

double dos_total_variation(const DosHistogram& a, const DosHistogram& b) {
    if (a.density.size() != b.density.size())
        throw std::invalid_argument("dos_total_variation: bin counts differ");
    // compare bin masses so the distance reflects shape, not spectral scale
    double tv = 0.0;
    for (std::size_t i = 0; i < a.density.size(); ++i) {
        const double wa = a.edges[i + 1] - a.edges[i];
        const double wb = b.edges[i + 1] - b.edges[i];
        tv += std::abs(a.density[i] * wa - b.density[i] * wb);
    }
    return 0.5 * tv;
}

double gamma_critical(int n_bath, int z, double h0, double prefactor) {
    if (z < 1 || n_bath < 1)
        throw std::invalid_argument("gamma_critical: z and n_bath must be >= 1");
    return prefactor * h0 / (static_cast<double>(z) * n_bath);
}

SpectrumReport analyze_spectrum(const std::vector<double>& eigenvalues, int dos_bins,
                                int spacing_bins, int unfold_degree) {
    SpectrumReport rep;
    rep.eigenvalues = eigenvalues;
    std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end());
    rep.dos = density_of_states(rep.eigenvalues, dos_bins);
    rep.spacings = unfolded_spacings(rep.eigenvalues, unfold_degree, &rep.degenerate);
    rep.spacing_stats = spacing_statistics(rep.spacings, rep.eigenvalues, spacing_bins);
    return rep;
}

}  // namespace spinbath

// chaos.hpp — spectral chaos diagnostics for the bath Hamiltonian:
// density of states, spectral width, unfolded level spacings, and the
// gap-ratio statistic, with Wigner-Dyson and Poisson references.

#pragma once

#include <vector>

#include "spinbath/hamiltonian.hpp"

namespace spinbath {

enum class ChaosClass { chaotic, regular, ambiguous };

std::string to_string(ChaosClass c);

struct DosHistogram {
    std::vector<double> edges;    // n_bins + 1 edges over [min, max]
    std::vector<double> density;  // unit area
    double width_w = 0.0;         // central interval holding 95% of levels
};

struct SpacingHistogram {
    std::vector<double> edges;
    std::vector<double> density;  // unit area over the binned range
    double mean_r = 0.0;
    ChaosClass classification = ChaosClass::ambiguous;
};

struct SpectrumReport {
    std::vector<double> eigenvalues;  // sorted ascending
    DosHistogram dos;
    std::vector<double> spacings;     // unfolded, mean ~ 1
    SpacingHistogram spacing_stats;
    bool degenerate = false;          // > 10% exactly repeated levels
};

// All 2^N eigenvalues of a bath-only Hamiltonian by dense Hermitian
// diagonalization; dim <= 16384.
std::vector<double> bath_spectrum(const SparseHamiltonian& hb);

// Unit-area histogram with W = central 95%-mass interval.
DosHistogram density_of_states(const std::vector<double>& eigs, int n_bins);

// Unfold by fitting the integrated density (staircase) with a smooth
// polynomial after trimming 2% of levels at each spectral edge. Mean of the
// returned spacings is 1 within ~2%. Sets *degenerate when more than 10% of
// consecutive levels coincide exactly (zero spacings are retained).
std::vector<double> unfolded_spacings(const std::vector<double>& eigs,
                                      int poly_degree = 9,
                                      bool* degenerate = nullptr);

// <r> from raw sorted eigenvalues: r_i = min(d_i, d_{i+1})/max(d_i, d_{i+1}).
// ~0.386 for Poisson spectra, ~0.531 for GOE. Needs no unfolding.
double mean_gap_ratio(const std::vector<double>& eigs);

// Histogram of unfolded spacings plus classification from the gap ratio:
// chaotic above 0.48, regular below 0.42, else ambiguous; fewer than 500
// spacings forces ambiguous.
SpacingHistogram spacing_statistics(const std::vector<double>& spacings,
                                    const std::vector<double>& raw_eigenvalues,
                                    int n_bins);

// Reference nearest-neighbor spacing densities.
double wigner_dyson_pdf(double s);
double poisson_pdf(double s);

// L1 distance between a spacing histogram and a reference density, evaluated
// at bin centers.
double histogram_l1_distance(const SpacingHistogram& hist, double (*ref)(double));

// Index-wise total-variation distance between two equal-bin-count histograms
// (shape comparison; each histogram spans its own spectral range).
double dos_total_variation(const DosHistogram& a, const DosHistogram& b);

// Advisory chaos border estimate prefactor * h0 / (z N); classification
// always comes from spectra.
double gamma_critical(int n_bath, int z, double h0, double prefactor);

// Convenience: full report for one bath spectrum.
SpectrumReport analyze_spectrum(const std::vector<double>& eigenvalues, int dos_bins,
                                int spacing_bins, int unfold_degree = 9);

}  // namespace spinbath

// observables.hpp — reduced density matrix of the central spins and
// derived coherence measures.
//
// RDM basis order: |uu>, |ud>, |du>, |dd> (first arrow = S1). rho12 denotes
// Re<ud|rho|du>, the tracked coherence: -1/2 for the singlet, 0 when the
// correlations between S1 and S2 are gone.

#pragma once

#include <Eigen/Dense>

#include "spinbath/hamiltonian.hpp"

namespace spinbath {

enum class CentralLabel { uu = 0, ud = 1, du = 2, dd = 3 };

struct ReducedDensityMatrix {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();

    cplx at(CentralLabel row, CentralLabel col) const {
        return m(static_cast<int>(row), static_cast<int>(col));
    }
    double rho12() const { return m(1, 2).real(); }
    double trace() const { return m.trace().real(); }
};

struct CoherenceMeasures {
    double entropy = 0.0;      // von Neumann, natural log
    double concurrence = 0.0;  // Wootters two-qubit concurrence
};

// rho_ab = sum_beta Psi_{a beta} conj(Psi_{b beta}); O(dim).
ReducedDensityMatrix reduced_density_matrix(const StateVector& psi);

cplx rdm_element(const ReducedDensityMatrix& rho, CentralLabel row, CentralLabel col);

CoherenceMeasures coherence_measures(const ReducedDensityMatrix& rho);

// Time series of reduced density matrices for one realization.
struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::Matrix4cd> rho;
    std::vector<double> norm_drift;  // max |norm-1| observed up to each time
    ModelParams params;
    int realization_index = 0;

    std::vector<double> re_rho12_series() const;
    std::vector<double> im_rho12_series() const;
    std::vector<double> diagonal_series(CentralLabel which) const;
};

}  // namespace spinbath

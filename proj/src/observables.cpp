#include "spinbath/observables.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace spinbath {

namespace {

// central bit pattern (bit0=S1, bit1=S2, 1=up) -> RDM basis index
constexpr int kPatternToLabel[4] = {3, 1, 2, 0};  // dd, ud, du, uu

}  // namespace

ReducedDensityMatrix reduced_density_matrix(const StateVector& psi) {
    if (psi.size() < 4 || psi.size() % 4 != 0)
        throw std::invalid_argument("reduced_density_matrix: dimension not divisible by 4");
    const std::size_t bath_dim = psi.size() / 4;

    ReducedDensityMatrix rho;
    for (std::size_t beta = 0; beta < bath_dim; ++beta) {
        const cplx* block = psi.data() + (beta << 2);
        for (int pa = 0; pa < 4; ++pa) {
            const int a = kPatternToLabel[pa];
            for (int pb = 0; pb < 4; ++pb) {
                const int b = kPatternToLabel[pb];
                rho.m(a, b) += block[pa] * std::conj(block[pb]);
            }
        }
    }
    return rho;
}

cplx rdm_element(const ReducedDensityMatrix& rho, CentralLabel row, CentralLabel col) {
    return rho.at(row, col);
}

CoherenceMeasures coherence_measures(const ReducedDensityMatrix& rho) {
    constexpr double kPsdTolerance = 1e-8;

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(rho.m);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("coherence_measures: eigendecomposition failed");
    const Eigen::Vector4d evals = solver.eigenvalues();
    if (evals.minCoeff() < -kPsdTolerance)
        throw std::invalid_argument("coherence_measures: density matrix is not PSD");

    CoherenceMeasures out;
    for (int i = 0; i < 4; ++i) {
        const double lam = evals[i];
        if (lam > 1e-14) out.entropy -= lam * std::log(lam);
    }

    // spin-flipped state: rho_tilde = (sy x sy) conj(rho) (sy x sy),
    // with sy x sy = antidiag(-1, 1, 1, -1) in this basis
    Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
    yy(0, 3) = -1.0; yy(1, 2) = 1.0; yy(2, 1) = 1.0; yy(3, 0) = -1.0;
    const Eigen::Matrix4cd prod = rho.m * yy * rho.m.conjugate() * yy;

    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> ces(prod, /*computeEigenvectors=*/false);
    if (ces.info() != Eigen::Success)
        throw std::runtime_error("coherence_measures: concurrence eigensolve failed");
    Eigen::Vector4d lams;
    for (int i = 0; i < 4; ++i)
        lams[i] = std::sqrt(std::max(0.0, ces.eigenvalues()[i].real()));
    std::sort(lams.data(), lams.data() + 4, std::greater<double>());
    out.concurrence = std::max(0.0, lams[0] - lams[1] - lams[2] - lams[3]);
    return out;
}

std::vector<double> Trajectory::re_rho12_series() const {
    std::vector<double> out(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) out[i] = rho[i](1, 2).real();
    return out;
}

std::vector<double> Trajectory::im_rho12_series() const {
    std::vector<double> out(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) out[i] = rho[i](1, 2).imag();
    return out;
}

std::vector<double> Trajectory::diagonal_series(CentralLabel which) const {
    const int d = static_cast<int>(which);
    std::vector<double> out(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) out[i] = rho[i](d, d).real();
    return out;
}

}  // namespace spinbath

// hamiltonian.hpp — sparse Hermitian operators on the tensor-product basis
//
// Basis convention: bit 0 = S1, bit 1 = S2, bits 2..N+1 = I_1..I_N,
// bit value 1 = spin-up along z. Amplitude index = sum of bit_j * 2^j.

#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "spinbath/model.hpp"

namespace spinbath {

using cplx = std::complex<double>;
using StateVector = std::vector<cplx>;

enum class HamiltonianPart { full, bath_only };

// Compressed-row storage of the upper triangle (col >= row, diagonal always
// present) plus a certified spectral-norm bound: ||H|| <= norm_bound by
// term-wise triangle inequality.
struct SparseHamiltonian {
    std::size_t dim = 0;
    std::vector<std::size_t> row_ptr;   // dim + 1
    std::vector<std::uint32_t> col;
    std::vector<cplx> val;
    double norm_bound = 0.0;
    bool all_real = false;  // set by the builder; enables the real matvec path

    std::size_t nnz_stored() const { return col.size(); }

    // out = H * in. Throws on dimension mismatch.
    void apply(const StateVector& in, StateVector& out) const;
    StateVector apply(const StateVector& in) const;

    // Dense reconstructions, for oracles and exact diagonalization.
    Eigen::MatrixXcd dense() const;
    Eigen::MatrixXd dense_real() const;  // throws if any entry has Im != 0
};

// Assembles H = J S1.S2 + S1.sum_k A_k I_k + H_B (full) or H_B alone
// (bath_only, with bath bits re-indexed from 0). Both isotropic spin-spin
// couplings expand to SzSz plus half the flip-flop; the intra-bath coupling
// contributes Gamma_kl Ix_k Ix_l once per unordered pair.
SparseHamiltonian build_hamiltonian(const ModelParams& params,
                                    const BathDisorder& disorder,
                                    const CouplingSet& couplings,
                                    HamiltonianPart part);

// Singlet on (S1,S2) tensor a Haar-uniform bath vector (normalized i.i.d.
// standard complex Gaussians).
StateVector initial_state(int n_bath, RngStream& stream);

double norm(const StateVector& psi);
void normalize(StateVector& psi);
cplx inner_product(const StateVector& bra, const StateVector& ket);

// <psi|H|psi>, real up to rounding for Hermitian H.
double energy_expectation(const SparseHamiltonian& h, const StateVector& psi);

}  // namespace spinbath

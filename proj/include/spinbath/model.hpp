// model.hpp — model parameters, bath disorder, and system-bath couplings
//
// Central system: two exchange-coupled spins 1/2 (S1, S2) with coupling J.
// Bath: N spins 1/2 with pairwise Ix*Ix couplings Gamma_kl and local fields
// (hz, hx). S1 couples to every bath spin k with isotropic strength A_k.
// All energies are dimensionless; spin operators are S = sigma/2.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spinbath/rng.hpp"

namespace spinbath {

enum class CouplingScheme { equal, random_uniform };
enum class Topology { all_to_all, ring };

std::string to_string(CouplingScheme s);
std::string to_string(Topology t);
CouplingScheme coupling_scheme_from_string(const std::string& s);
Topology topology_from_string(const std::string& s);

struct ModelParams {
    int n_bath = 12;            // N, number of bath spins (1..16)
    double j_coupling = 0.1;    // J, intra-system exchange
    double gamma0 = 0.04;       // bound on intra-bath couplings Gamma_kl
    double h0 = 0.014;          // bound on local fields hz, hx
    CouplingScheme coupling_scheme = CouplingScheme::equal;
    double b_target = 0.137;    // b = (sum_k A_k^2)^(1/2)
    Topology topology = Topology::all_to_all;
    std::uint64_t seed = 1;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

// Sampled intra-bath couplings and local fields for one disorder realization.
struct BathDisorder {
    int n = 0;
    std::vector<double> gamma;  // row-major n*n, symmetric, zero diagonal
    std::vector<double> hz;     // in [0, h0]
    std::vector<double> hx;     // in [0, h0]

    double gamma_at(int k, int l) const { return gamma[static_cast<std::size_t>(k) * n + l]; }
};

// System-bath couplings A_k with their Euclidean norm b.
struct CouplingSet {
    std::vector<double> a;
    double b = 0.0;
};

// Unordered bath pairs (k < l) carrying a Gamma_kl coupling.
std::vector<std::pair<int, int>> topology_pairs(int n_bath, Topology t);

// Number of coupled neighbors z for a topology.
int coordination_number(int n_bath, Topology t);

// Gamma_kl i.i.d. uniform on [-gamma0, gamma0] for pairs in the topology,
// hz_k and hx_k i.i.d. uniform on [0, h0].
BathDisorder sample_bath_disorder(const ModelParams& params, RngStream& stream);

// equal:          A_k = b/sqrt(N)
// random_uniform: u_k uniform on [0.5, 1.5], rescaled so ||A|| = b exactly
CouplingSet sample_couplings(const ModelParams& params, RngStream& stream);

}  // namespace spinbath

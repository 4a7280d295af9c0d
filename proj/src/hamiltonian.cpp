#include "spinbath/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spinbath {

namespace {

double bit_sz(std::size_t state, int bit) {
    return (state >> bit) & 1u ? 0.5 : -0.5;
}

struct FlipTerm {
    std::size_t mask;
    double coeff;
};

struct FlipFlopTerm {
    std::size_t mask;  // flips bit 0 and one bath bit
    int bath_bit;
    double coeff;
};

}  // namespace

SparseHamiltonian build_hamiltonian(const ModelParams& params,
                                    const BathDisorder& disorder,
                                    const CouplingSet& couplings,
                                    HamiltonianPart part) {
    params.validate();
    const int n = params.n_bath;
    if (disorder.n != n)
        throw std::invalid_argument("disorder size does not match n_bath");
    if (static_cast<int>(couplings.a.size()) != n)
        throw std::invalid_argument("coupling set size does not match n_bath");

    const bool full = part == HamiltonianPart::full;
    const int total_bits = full ? n + 2 : n;
    if (total_bits > 22)
        throw std::invalid_argument("Hilbert dimension overflow: n_bath too large");
    const std::size_t dim = std::size_t{1} << total_bits;
    const int bath_base = full ? 2 : 0;

    const double j = params.j_coupling;
    const auto pairs = topology_pairs(n, params.topology);

    // Off-diagonal generators, as XOR masks with their coefficients.
    std::vector<FlipTerm> single_flips;     // hx_k * Ix_k
    std::vector<FlipTerm> pair_flips;       // Gamma_kl * Ix_k Ix_l  (k<l)
    std::vector<FlipFlopTerm> hyperfine;    // A_k flip-flop between S1 and I_k
    for (int k = 0; k < n; ++k) {
        if (disorder.hx[k] != 0.0)
            single_flips.push_back({std::size_t{1} << (bath_base + k), disorder.hx[k] / 2.0});
        if (full && couplings.a[k] != 0.0)
            hyperfine.push_back({(std::size_t{1} << (bath_base + k)) | 1u,
                                 bath_base + k, couplings.a[k] / 2.0});
    }
    for (const auto& [k, l] : pairs) {
        const double g = disorder.gamma_at(k, l);
        if (g != 0.0)
            pair_flips.push_back({(std::size_t{1} << (bath_base + k)) |
                                      (std::size_t{1} << (bath_base + l)),
                                  g / 4.0});
    }

    SparseHamiltonian h;
    h.dim = dim;
    h.row_ptr.assign(dim + 1, 0);

    const std::size_t est = dim * (1 + single_flips.size() / 2 + pair_flips.size() / 2 +
                                   (full ? 1 + hyperfine.size() / 2 : 0) + 1);
    h.col.reserve(est);
    h.val.reserve(est);

    std::vector<std::pair<std::uint32_t, double>> row_entries;
    row_entries.reserve(2 + single_flips.size() + pair_flips.size() + hyperfine.size());

    for (std::size_t r = 0; r < dim; ++r) {
        row_entries.clear();

        double diag = 0.0;
        if (full) {
            const double s1 = bit_sz(r, 0);
            const double s2 = bit_sz(r, 1);
            diag += j * s1 * s2;
            for (int k = 0; k < n; ++k)
                diag += couplings.a[k] * s1 * bit_sz(r, bath_base + k);
            // J flip-flop: acts when S1, S2 are antiparallel
            if (((r ^ (r >> 1)) & 1u) && (r ^ 3u) > r)
                row_entries.emplace_back(static_cast<std::uint32_t>(r ^ 3u), j / 2.0);
            for (const auto& t : hyperfine) {
                // S1+ Ik- + S1- Ik+: acts when bit 0 and the bath bit differ
                if (((r ^ (r >> t.bath_bit)) & 1u) == 0) continue;
                const std::size_t other = r ^ t.mask;
                if (other > r)
                    row_entries.emplace_back(static_cast<std::uint32_t>(other), t.coeff);
            }
        }
        for (int k = 0; k < n; ++k) diag += disorder.hz[k] * bit_sz(r, bath_base + k);

        for (const auto& t : single_flips) {
            const std::size_t other = r ^ t.mask;
            if (other > r)
                row_entries.emplace_back(static_cast<std::uint32_t>(other), t.coeff);
        }
        for (const auto& t : pair_flips) {
            const std::size_t other = r ^ t.mask;
            if (other > r)
                row_entries.emplace_back(static_cast<std::uint32_t>(other), t.coeff);
        }

        std::sort(row_entries.begin(), row_entries.end());

        h.col.push_back(static_cast<std::uint32_t>(r));
        h.val.emplace_back(diag, 0.0);
        for (const auto& [c, v] : row_entries) {
            h.col.push_back(c);
            h.val.emplace_back(v, 0.0);
        }
        h.row_ptr[r + 1] = h.col.size();
    }

    // Term-by-term norm certificate; the pair-coupling contribution carries a
    // factor-2 allowance, so the bound stays valid with headroom.
    double bound = 0.0;
    if (full) {
        bound += 0.75 * std::abs(j);
        for (int k = 0; k < n; ++k) bound += 0.75 * std::abs(couplings.a[k]);
    }
    for (const auto& [k, l] : pairs) bound += 2.0 * std::abs(disorder.gamma_at(k, l)) / 4.0;
    for (int k = 0; k < n; ++k) bound += 0.5 * (disorder.hz[k] + disorder.hx[k]);
    h.norm_bound = bound;
    h.all_real = true;

    return h;
}

void SparseHamiltonian::apply(const StateVector& in, StateVector& out) const {
    if (in.size() != dim)
        throw std::invalid_argument("apply: state dimension mismatch");
    out.assign(dim, cplx{0.0, 0.0});

    if (all_real) {
        for (std::size_t r = 0; r < dim; ++r) {
            const std::size_t lo = row_ptr[r];
            const std::size_t hi = row_ptr[r + 1];
            cplx acc = out[r];
            const cplx xr = in[r];
            for (std::size_t i = lo; i < hi; ++i) {
                const std::size_t c = col[i];
                const double v = val[i].real();
                acc += v * in[c];
                if (c != r) out[c] += v * xr;
            }
            out[r] = acc;
        }
    } else {
        for (std::size_t r = 0; r < dim; ++r) {
            const std::size_t lo = row_ptr[r];
            const std::size_t hi = row_ptr[r + 1];
            cplx acc = out[r];
            const cplx xr = in[r];
            for (std::size_t i = lo; i < hi; ++i) {
                const std::size_t c = col[i];
                const cplx v = val[i];
                acc += v * in[c];
                if (c != r) out[c] += std::conj(v) * xr;
            }
            out[r] = acc;
        }
    }
}

StateVector SparseHamiltonian::apply(const StateVector& in) const {
    StateVector out;
    apply(in, out);
    return out;
}

Eigen::MatrixXcd SparseHamiltonian::dense() const {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                                static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t i = row_ptr[r]; i < row_ptr[r + 1]; ++i) {
            const std::size_t c = col[i];
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += val[i];
            if (c != r)
                m(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) +=
                    std::conj(val[i]);
        }
    }
    return m;
}

Eigen::MatrixXd SparseHamiltonian::dense_real() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t i = row_ptr[r]; i < row_ptr[r + 1]; ++i) {
            if (val[i].imag() != 0.0)
                throw std::invalid_argument("dense_real: operator has complex entries");
            const std::size_t c = col[i];
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += val[i].real();
            if (c != r)
                m(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) += val[i].real();
        }
    }
    return m;
}

StateVector initial_state(int n_bath, RngStream& stream) {
    if (n_bath < 1) throw std::invalid_argument("initial_state: n_bath must be >= 1");
    const std::size_t bath_dim = std::size_t{1} << n_bath;
    const std::size_t dim = bath_dim << 2;

    std::normal_distribution<double> gauss(0.0, 1.0);
    StateVector chi(bath_dim);
    double ss = 0.0;
    for (std::size_t b = 0; b < bath_dim; ++b) {
        const double re = gauss(stream);
        const double im = gauss(stream);
        chi[b] = cplx{re, im};
        ss += re * re + im * im;
    }
    const double inv = 1.0 / std::sqrt(ss);

    // singlet (|ud> - |du>)/sqrt(2): central patterns 1 (S1 up) and 2 (S2 up)
    const double r2 = 1.0 / std::sqrt(2.0);
    StateVector psi(dim, cplx{0.0, 0.0});
    for (std::size_t b = 0; b < bath_dim; ++b) {
        const cplx c = chi[b] * inv;
        psi[(b << 2) | 1u] = r2 * c;
        psi[(b << 2) | 2u] = -r2 * c;
    }
    return psi;
}

double norm(const StateVector& psi) {
    double ss = 0.0;
    for (const cplx& a : psi) ss += std::norm(a);
    return std::sqrt(ss);
}

void normalize(StateVector& psi) {
    const double n = norm(psi);
    if (n == 0.0) throw std::invalid_argument("normalize: zero vector");
    const double inv = 1.0 / n;
    for (cplx& a : psi) a *= inv;
}

cplx inner_product(const StateVector& bra, const StateVector& ket) {
    if (bra.size() != ket.size())
        throw std::invalid_argument("inner_product: dimension mismatch");
    cplx s{0.0, 0.0};
    for (std::size_t i = 0; i < bra.size(); ++i) s += std::conj(bra[i]) * ket[i];
    return s;
}

double energy_expectation(const SparseHamiltonian& h, const StateVector& psi) {
    return inner_product(psi, h.apply(psi)).real();
}

}  // namespace spinbath

#include "spinbath/model.hpp"

#include <cmath>
#include <stdexcept>

namespace spinbath {

std::string to_string(CouplingScheme s) {
    return s == CouplingScheme::equal ? "equal" : "random_uniform";
}

std::string to_string(Topology t) {
    return t == Topology::all_to_all ? "all_to_all" : "ring";
}

CouplingScheme coupling_scheme_from_string(const std::string& s) {
    if (s == "equal") return CouplingScheme::equal;
    if (s == "random_uniform") return CouplingScheme::random_uniform;
    throw std::invalid_argument("unknown coupling_scheme: " + s);
}

Topology topology_from_string(const std::string& s) {
    if (s == "all_to_all") return Topology::all_to_all;
    if (s == "ring") return Topology::ring;
    throw std::invalid_argument("unknown topology: " + s);
}

void ModelParams::validate() const {
    if (n_bath < 1 || n_bath > 16)
        throw std::invalid_argument("n_bath must be in [1, 16]");
    if (!(gamma0 >= 0.0)) throw std::invalid_argument("gamma0 must be >= 0");
    if (!(h0 >= 0.0)) throw std::invalid_argument("h0 must be >= 0");
    if (!(b_target >= 0.0)) throw std::invalid_argument("b must be >= 0");
    if (!std::isfinite(j_coupling))
        throw std::invalid_argument("j_coupling must be finite");
    if (!std::isfinite(gamma0) || !std::isfinite(h0) || !std::isfinite(b_target))
        throw std::invalid_argument("model parameters must be finite");
}

std::vector<std::pair<int, int>> topology_pairs(int n_bath, Topology t) {
    std::vector<std::pair<int, int>> pairs;
    if (t == Topology::all_to_all) {
        for (int k = 0; k < n_bath; ++k)
            for (int l = k + 1; l < n_bath; ++l) pairs.emplace_back(k, l);
    } else {
        if (n_bath == 2) {
            pairs.emplace_back(0, 1);
        } else if (n_bath > 2) {
            for (int k = 0; k + 1 < n_bath; ++k) pairs.emplace_back(k, k + 1);
            pairs.emplace_back(0, n_bath - 1);
        }
        // n_bath == 1: no pairs
    }
    return pairs;
}

int coordination_number(int n_bath, Topology t) {
    if (t == Topology::all_to_all) return n_bath > 1 ? n_bath - 1 : 0;
    if (n_bath <= 1) return 0;
    return n_bath == 2 ? 1 : 2;
}

BathDisorder sample_bath_disorder(const ModelParams& params, RngStream& stream) {
    params.validate();
    const int n = params.n_bath;
    BathDisorder d;
    d.n = n;
    d.gamma.assign(static_cast<std::size_t>(n) * n, 0.0);
    d.hz.resize(n);
    d.hx.resize(n);

    std::uniform_real_distribution<double> field(0.0, params.h0);
    std::uniform_real_distribution<double> coupling(-params.gamma0, params.gamma0);

    // Canonical draw order: hz, hx, then topology pairs in (k, l) order.
    for (int k = 0; k < n; ++k) d.hz[k] = params.h0 > 0.0 ? field(stream) : 0.0;
    for (int k = 0; k < n; ++k) d.hx[k] = params.h0 > 0.0 ? field(stream) : 0.0;
    for (const auto& [k, l] : topology_pairs(n, params.topology)) {
        const double g = params.gamma0 > 0.0 ? coupling(stream) : 0.0;
        d.gamma[static_cast<std::size_t>(k) * n + l] = g;
        d.gamma[static_cast<std::size_t>(l) * n + k] = g;
    }
    return d;
}

CouplingSet sample_couplings(const ModelParams& params, RngStream& stream) {
    params.validate();
    const int n = params.n_bath;
    CouplingSet c;
    c.a.resize(n);

    if (params.coupling_scheme == CouplingScheme::equal) {
        const double ak = params.b_target / std::sqrt(static_cast<double>(n));
        for (int k = 0; k < n; ++k) c.a[k] = ak;
    } else {
        std::uniform_real_distribution<double> u(0.5, 1.5);
        double ss = 0.0;
        for (int k = 0; k < n; ++k) {
            c.a[k] = u(stream);
            ss += c.a[k] * c.a[k];
        }
        const double scale = params.b_target / std::sqrt(ss);
        for (int k = 0; k < n; ++k) c.a[k] *= scale;
    }

    double ss = 0.0;
    for (double ak : c.a) ss += ak * ak;
    c.b = std::sqrt(ss);
    return c;
}

}  // namespace spinbath

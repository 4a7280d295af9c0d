// chebyshev.hpp — time evolution exp(-iHt) by Chebyshev polynomial expansion
//
// exp(-i dt H) = e^{-ic dt} sum_n (2 - delta_n0) (-i)^n J_n(d dt) T_n(Htilde),
// Htilde = (H - c)/d, with d >= ||H - c||. Truncated where the Bessel weights
// drop below tol, which bounds the step error by ~tol in Euclidean norm.

#pragma once

#include <functional>

#include "spinbath/hamiltonian.hpp"

namespace spinbath {

struct PropagatorPlan {
    double center = 0.0;      // c
    double half_width = 0.0;  // d, includes the 1.01 safety factor
    double dt = 0.0;
    int order = 1;            // M, truncation order
    std::vector<cplx> coefficients;  // M+1 weights, global phase folded in
    double tol = 0.0;
};

struct TimeGrid {
    enum class Scheme { uniform, uniform_then_log };
    std::vector<double> times;  // strictly increasing, starts at 0
    Scheme scheme = Scheme::uniform;

    void validate() const;  // throws std::invalid_argument
};

struct EvolveStats {
    double max_drift = 0.0;       // largest |norm-1| seen before renormalizing
    std::size_t matvec_count = 0;
    std::size_t renorm_count = 0;
};

struct EvolveOptions {
    double tol = 1e-12;    // Bessel truncation tolerance
    double max_step = 0.0; // planned step; 0 picks dt so that d*dt ~ 10
};

// c = 0, d = 1.01 * norm_bound; M = smallest order past the Bessel turnover
// with |J_M(d dt)| < tol. Rejects dt <= 0 and tol outside (1e-15, 1).
PropagatorPlan plan_propagator(const SparseHamiltonian& h, double dt, double tol = 1e-12);

// psi <- exp(-i dt H) psi using exactly plan.order sparse matvecs. Returns
// |norm-1| before the (conditional) renormalization; the state is
// renormalized only when that drift exceeds 1e-12.
double propagate_step(const PropagatorPlan& plan, const SparseHamiltonian& h,
                      StateVector& psi);

// Convenience copy-returning overload.
StateVector propagate_step(const PropagatorPlan& plan, const SparseHamiltonian& h,
                           const StateVector& psi, double* drift);

// Walks the grid, invoking observer(t, psi) at every grid time. Steps of the
// planned length between grid points, with a separately planned partial step
// landing exactly on each grid time.
EvolveStats evolve_trajectory(const SparseHamiltonian& h, const StateVector& psi0,
                              const TimeGrid& grid,
                              const std::function<void(double, const StateVector&)>& observer,
                              const EvolveOptions& opts = {});

// Observer variant that also sees the running step statistics.
EvolveStats evolve_trajectory(
    const SparseHamiltonian& h, const StateVector& psi0, const TimeGrid& grid,
    const std::function<void(double, const StateVector&, const EvolveStats&)>& observer,
    const EvolveOptions& opts);

// Exact evolution by full Hermitian eigendecomposition; dim <= 4096.
StateVector dense_oracle_evolve(const SparseHamiltonian& h, const StateVector& psi0,
                                double t);

// Cached eigendecomposition for repeated oracle evaluations.
class DenseOracle {
  public:
    explicit DenseOracle(const SparseHamiltonian& h);
    StateVector evolve(const StateVector& psi0, double t) const;

  private:
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXcd eigenvectors_;
};

// Default grid: uniform spacing 0.25 up to t=500, then 40 points per decade.
TimeGrid make_time_grid(TimeGrid::Scheme scheme, double t_max, double dt_uniform = 0.25,
                        double t_uniform_end = 500.0, int points_per_decade = 40);

}  // namespace spinbath

#include "spinbath/chebyshev.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace spinbath {

namespace {

constexpr double kRenormThreshold = 1e-12;
constexpr int kMaxOrder = 100000;

// (-i)^n
cplx minus_i_pow(int n) {
    switch (n & 3) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, -1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, 1.0};
    }
}

}  // namespace

void TimeGrid::validate() const {
    if (times.empty()) throw std::invalid_argument("time grid is empty");
    if (times.front() != 0.0) throw std::invalid_argument("time grid must start at 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("time grid must be strictly increasing");
}

PropagatorPlan plan_propagator(const SparseHamiltonian& h, double dt, double tol) {
    if (!(dt > 0.0)) throw std::invalid_argument("plan_propagator: dt must be > 0");
    if (!(tol < 1.0) || !(tol >= 1e-15))
        throw std::invalid_argument("plan_propagator: tol must be in [1e-15, 1)");

    PropagatorPlan plan;
    plan.center = 0.0;
    plan.half_width = std::max(1.01 * h.norm_bound, 1e-30);
    plan.dt = dt;
    plan.tol = tol;

    const double tau = plan.half_width * dt;
    int m = std::max(1, static_cast<int>(std::ceil(tau)) + 1);
    while (m < kMaxOrder && std::abs(std::cyl_bessel_j(m, tau)) >= tol) ++m;
    if (m >= kMaxOrder)
        throw std::invalid_argument("plan_propagator: truncation order diverged");
    plan.order = m;

    const cplx phase = std::exp(cplx{0.0, -plan.center * dt});
    plan.coefficients.resize(m + 1);
    for (int n = 0; n <= m; ++n) {
        const double jn = std::cyl_bessel_j(n, tau);
        plan.coefficients[n] = (n == 0 ? 1.0 : 2.0) * minus_i_pow(n) * jn * phase;
    }
    return plan;
}

double propagate_step(const PropagatorPlan& plan, const SparseHamiltonian& h,
                      StateVector& psi) {
    if (psi.size() != h.dim)
        throw std::invalid_argument("propagate_step: state dimension mismatch");

    const std::size_t dim = h.dim;
    const double inv_d = 1.0 / plan.half_width;
    const double c = plan.center;

    // Three-term recurrence: T_{n+1} = 2 Htilde T_n - T_{n-1}
    StateVector t_prev = psi;            // T_0
    StateVector t_curr(dim), work(dim), acc(dim);

    for (std::size_t i = 0; i < dim; ++i) acc[i] = plan.coefficients[0] * t_prev[i];

    h.apply(t_prev, work);  // T_1 = Htilde psi
    for (std::size_t i = 0; i < dim; ++i) t_curr[i] = (work[i] - c * t_prev[i]) * inv_d;
    if (plan.order >= 1) {
        const cplx c1 = plan.coefficients[1];
        for (std::size_t i = 0; i < dim; ++i) acc[i] += c1 * t_curr[i];
    }

    for (int n = 2; n <= plan.order; ++n) {
        h.apply(t_curr, work);
        const cplx cn = plan.coefficients[n];
        for (std::size_t i = 0; i < dim; ++i) {
            const cplx next = 2.0 * ((work[i] - c * t_curr[i]) * inv_d) - t_prev[i];
            t_prev[i] = t_curr[i];
            t_curr[i] = next;
            acc[i] += cn * next;
        }
    }

    const double nrm = norm(acc);
    const double drift = std::abs(nrm - 1.0);
    if (drift > kRenormThreshold && nrm > 0.0) {
        const double inv = 1.0 / nrm;
        for (cplx& a : acc) a *= inv;
    }
    psi.swap(acc);
    return drift;
}

StateVector propagate_step(const PropagatorPlan& plan, const SparseHamiltonian& h,
                           const StateVector& psi, double* drift) {
    StateVector out = psi;
    const double d = propagate_step(plan, h, out);
    if (drift) *drift = d;
    return out;
}

EvolveStats evolve_trajectory(
    const SparseHamiltonian& h, const StateVector& psi0, const TimeGrid& grid,
    const std::function<void(double, const StateVector&, const EvolveStats&)>& observer,
    const EvolveOptions& opts) {
    grid.validate();
    if (psi0.size() != h.dim)
        throw std::invalid_argument("evolve_trajectory: state dimension mismatch");

    const double d = std::max(1.01 * h.norm_bound, 1e-30);
    const double planned_dt = opts.max_step > 0.0 ? opts.max_step : 10.0 / d;

    PropagatorPlan main_plan = plan_propagator(h, planned_dt, opts.tol);
    PropagatorPlan partial_plan;  // reused while consecutive gaps repeat
    double partial_dt = -1.0;

    EvolveStats stats;
    StateVector psi = psi0;
    observer(grid.times.front(), psi, stats);

    double t_now = 0.0;
    for (std::size_t gi = 1; gi < grid.times.size(); ++gi) {
        const double target = grid.times[gi];
        const double gap = target - t_now;
        const auto n_full = static_cast<std::size_t>(std::floor(gap / planned_dt + 1e-12));
        const double remainder = gap - static_cast<double>(n_full) * planned_dt;

        for (std::size_t s = 0; s < n_full; ++s) {
            const double drift = propagate_step(main_plan, h, psi);
            stats.max_drift = std::max(stats.max_drift, drift);
            if (drift > kRenormThreshold) ++stats.renorm_count;
            stats.matvec_count += main_plan.order;
        }
        if (remainder > 1e-12 * std::max(1.0, target)) {
            if (remainder != partial_dt) {
                partial_plan = plan_propagator(h, remainder, opts.tol);
                partial_dt = remainder;
            }
            const double drift = propagate_step(partial_plan, h, psi);
            stats.max_drift = std::max(stats.max_drift, drift);
            if (drift > kRenormThreshold) ++stats.renorm_count;
            stats.matvec_count += partial_plan.order;
        }
        t_now = target;
        observer(target, psi, stats);
    }
    return stats;
}

EvolveStats evolve_trajectory(const SparseHamiltonian& h, const StateVector& psi0,
                              const TimeGrid& grid,
                              const std::function<void(double, const StateVector&)>& observer,
                              const EvolveOptions& opts) {
    return evolve_trajectory(
        h, psi0, grid,
        [&observer](double t, const StateVector& psi, const EvolveStats&) {
            observer(t, psi);
        },
        opts);
}

DenseOracle::DenseOracle(const SparseHamiltonian& h) {
    if (h.dim > 4096)
        throw std::invalid_argument("dense oracle: dimension too large (max 4096)");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.dense());
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("dense oracle: eigendecomposition failed");
    eigenvalues_ = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();
}

StateVector DenseOracle::evolve(const StateVector& psi0, double t) const {
    const auto dim = static_cast<Eigen::Index>(psi0.size());
    if (dim != eigenvectors_.rows())
        throw std::invalid_argument("dense oracle: state dimension mismatch");
    Eigen::Map<const Eigen::VectorXcd> v(psi0.data(), dim);
    Eigen::VectorXcd coeffs = eigenvectors_.adjoint() * v;
    for (Eigen::Index i = 0; i < dim; ++i)
        coeffs[i] *= std::exp(cplx{0.0, -eigenvalues_[i] * t});
    Eigen::VectorXcd out = eigenvectors_ * coeffs;
    StateVector result(psi0.size());
    Eigen::Map<Eigen::VectorXcd>(result.data(), dim) = out;
    return result;
}

StateVector dense_oracle_evolve(const SparseHamiltonian& h, const StateVector& psi0,
                                double t) {
    return DenseOracle(h).evolve(psi0, t);
}

TimeGrid make_time_grid(TimeGrid::Scheme scheme, double t_max, double dt_uniform,
                        double t_uniform_end, int points_per_decade) {
    if (!(t_max > 0.0)) throw std::invalid_argument("time grid: t_max must be > 0");
    if (!(dt_uniform > 0.0)) throw std::invalid_argument("time grid: dt must be > 0");
    if (points_per_decade < 1)
        throw std::invalid_argument("time grid: points_per_decade must be >= 1");

    TimeGrid grid;
    grid.scheme = scheme;
    const double uniform_end =
        scheme == TimeGrid::Scheme::uniform ? t_max : std::min(t_uniform_end, t_max);

    const auto n_uniform = static_cast<std::size_t>(std::floor(uniform_end / dt_uniform + 1e-9));
    for (std::size_t k = 0; k <= n_uniform; ++k)
        grid.times.push_back(static_cast<double>(k) * dt_uniform);
    if (grid.times.back() < uniform_end * (1.0 - 1e-12))
        grid.times.push_back(uniform_end);

    if (scheme == TimeGrid::Scheme::uniform_then_log && t_max > uniform_end) {
        const double ratio = std::pow(10.0, 1.0 / points_per_decade);
        double t = grid.times.back();
        while (true) {
            t *= ratio;
            if (t >= t_max * (1.0 - 1e-12)) break;
            grid.times.push_back(t);
        }
        grid.times.push_back(t_max);
    } else if (grid.times.back() < t_max * (1.0 - 1e-12)) {
        grid.times.push_back(t_max);
    }
    grid.validate();
    return grid;
}

}  // namespace spinbath

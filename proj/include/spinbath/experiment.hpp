// experiment.hpp — command-line experiment front end: seeded disorder-averaged
// simulation batches, sweeps, and CSV/JSON artifact emission.

#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>

#include "spinbath/chaos.hpp"
#include "spinbath/config.hpp"
#include "spinbath/envelope.hpp"
#include "spinbath/observables.hpp"

namespace spinbath {

enum class Command { propagate, spectrum, fit, sweep, collapse };

Command command_from_string(const std::string& s);
std::string to_string(Command c);

inline constexpr std::array<const char*, 7> kTrajectoryColumns = {
    "rho_uu", "rho_ud", "rho_du", "rho_dd", "re_rho12", "im_rho12", "norm_drift"};

struct TrajectoryTable {
    std::vector<double> times;
    std::array<std::vector<double>, 7> cols;
};

struct AveragedTable {
    std::vector<double> times;
    std::array<std::vector<double>, 7> mean;
    std::array<std::vector<double>, 7> sem;
};

TrajectoryTable tabulate(const Trajectory& traj);
AveragedTable average_tables(const std::vector<TrajectoryTable>& tables);

struct RunRecord {
    std::uint64_t config_hash = 0;
    int sweep_index = 0;
    int realization_index = 0;
    std::uint64_t derived_seed = 0;
    double runtime_seconds = 0.0;
    double max_norm_drift = 0.0;
    std::size_t matvec_count = 0;
    bool failed = false;
    std::string error;
};

// Runs body(0..n_jobs-1) on up to `workers` threads. Results must be written
// to per-index slots; aggregation stays deterministic regardless of timing.
void parallel_for(int n_jobs, int workers, const std::function<void(int)>& body);

// One full simulation: sample disorder, couplings, and the initial state from
// the derived seed, assemble Eq.-style operators, evolve over the grid, and
// record the reduced density matrix at every grid time.
Trajectory simulate_trajectory(const ModelParams& params, const GridParams& grid,
                               double cheb_tol, std::uint64_t derived_seed,
                               int realization_index, EvolveStats* stats = nullptr);

// Batch of R realizations with per-run seeds derive_seed(seed, sweep_index, r).
// Failures are recorded per run without aborting the batch.
std::vector<Trajectory> run_trajectory_batch(const ModelParams& params,
                                             const GridParams& grid, double cheb_tol,
                                             int realizations, int sweep_index,
                                             int workers,
                                             std::vector<RunRecord>* records = nullptr);

// Bath-only spectra for R disorder realizations.
std::vector<std::vector<double>> run_spectrum_batch(const ModelParams& params,
                                                    int realizations, int sweep_index,
                                                    int workers,
                                                    std::vector<RunRecord>* records = nullptr);

struct FitPair {
    FitResult gaussian;
    FitResult exponential;
    FormSelection selection;
};

// Envelope extraction + both decay-form fits over the analysis fit window.
FitPair fit_trajectory(const Trajectory& traj, const AnalysisParams& analysis);
FitPair fit_series(const std::vector<double>& times, const std::vector<double>& values,
                   const AnalysisParams& analysis);

// Applies one sweep-axis value to a parameter set.
ModelParams apply_sweep(const ModelParams& base, const std::string& parameter,
                        double value);

// Executes a command, writing artifacts under out_dir (config.output.dir when
// empty). Returns the output directory used. Throws ConfigError for invalid
// configs and std::runtime_error for runtime failures.
std::string run_experiment(const ExperimentConfig& config, Command command,
                           const std::string& out_dir_override = "", int workers = 0);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace spinbath

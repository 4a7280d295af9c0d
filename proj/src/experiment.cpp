#include "spinbath/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "spinbath/version.hpp"

namespace spinbath {

namespace fs = std::filesystem;
using nlohmann::json;

Command command_from_string(const std::string& s) {
    if (s == "propagate") return Command::propagate;
    if (s == "spectrum") return Command::spectrum;
    if (s == "fit") return Command::fit;
    if (s == "sweep") return Command::sweep;
    if (s == "collapse") return Command::collapse;
    throw ConfigError("unknown command: " + s);
}

std::string to_string(Command c) {
    switch (c) {
        case Command::propagate: return "propagate";
        case Command::spectrum: return "spectrum";
        case Command::fit: return "fit";
        case Command::sweep: return "sweep";
        default: return "collapse";
    }
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string format_compact(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

void write_lines(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string join_row(const std::vector<std::string>& cells) {
    std::string row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) row += ',';
        row += cells[i];
    }
    row += '\n';
    return row;
}

json record_to_json(const RunRecord& r) {
    json j{{"sweep_index", r.sweep_index},
           {"realization_index", r.realization_index},
           {"derived_seed", r.derived_seed},
           {"runtime_seconds", r.runtime_seconds},
           {"max_norm_drift", r.max_norm_drift},
           {"matvec_count", r.matvec_count},
           {"failed", r.failed}};
    if (r.failed) j["error"] = r.error;
    return j;
}

json summary_header(const ExperimentConfig& config, Command command, int workers) {
    return json{{"command", to_string(command)},
                {"code_version", kVersion},
                {"workers", workers},
                {"config_hash", config_hash(config)},
                {"config", json::parse(serialize_config(config))}};
}

void write_summary(const fs::path& dir, const std::string& name, json j) {
    write_lines(dir / name, j.dump(2) + "\n");
}

int effective_workers(int workers) {
    if (workers > 0) return workers;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

struct PerValueDir {
    fs::path dir;
    std::string label;
};

PerValueDir sweep_dir(const fs::path& base, const std::optional<SweepSpec>& sweep,
                      int index) {
    if (!sweep) return {base, ""};
    const std::string label =
        sweep->parameter + "_" + format_compact(sweep->values[index]);
    return {base / label, label};
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

void parallel_for(int n_jobs, int workers, const std::function<void(int)>& body) {
    workers = std::min(std::max(1, workers), std::max(1, n_jobs));
    if (workers == 1) {
        for (int i = 0; i < n_jobs; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= n_jobs) break;
                body(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

TrajectoryTable tabulate(const Trajectory& traj) {
    TrajectoryTable t;
    t.times = traj.times;
    const std::size_t n = traj.times.size();
    for (auto& c : t.cols) c.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Matrix4cd& rho = traj.rho[i];
        t.cols[0][i] = rho(0, 0).real();
        t.cols[1][i] = rho(1, 1).real();
        t.cols[2][i] = rho(2, 2).real();
        t.cols[3][i] = rho(3, 3).real();
        t.cols[4][i] = rho(1, 2).real();
        t.cols[5][i] = rho(1, 2).imag();
        t.cols[6][i] = traj.norm_drift[i];
    }
    return t;
}

AveragedTable average_tables(const std::vector<TrajectoryTable>& tables) {
    if (tables.empty()) throw std::invalid_argument("average_tables: empty batch");
    AveragedTable avg;
    avg.times = tables.front().times;
    const std::size_t n = avg.times.size();
    const auto rr = static_cast<double>(tables.size());
    for (const auto& t : tables)
        if (t.times.size() != n)
            throw std::invalid_argument("average_tables: inconsistent grids");

    for (int c = 0; c < 7; ++c) {
        avg.mean[c].assign(n, 0.0);
        avg.sem[c].assign(n, 0.0);
        for (const auto& t : tables)
            for (std::size_t i = 0; i < n; ++i) avg.mean[c][i] += t.cols[c][i];
        for (std::size_t i = 0; i < n; ++i) avg.mean[c][i] /= rr;
        if (tables.size() > 1) {
            for (const auto& t : tables)
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = t.cols[c][i] - avg.mean[c][i];
                    avg.sem[c][i] += d * d;
                }
            for (std::size_t i = 0; i < n; ++i)
                avg.sem[c][i] = std::sqrt(avg.sem[c][i] / (rr - 1.0) / rr);
        }
    }
    return avg;
}

Trajectory simulate_trajectory(const ModelParams& params, const GridParams& grid,
                               double cheb_tol, std::uint64_t derived_seed,
                               int realization_index, EvolveStats* stats) {
    params.validate();
    RngStream stream = make_stream(derived_seed);
    const BathDisorder disorder = sample_bath_disorder(params, stream);
    const CouplingSet couplings = sample_couplings(params, stream);
    const StateVector psi0 = initial_state(params.n_bath, stream);
    const SparseHamiltonian h =
        build_hamiltonian(params, disorder, couplings, HamiltonianPart::full);
    const TimeGrid tg = make_time_grid(grid.scheme, grid.t_max, grid.dt_uniform,
                                       grid.t_uniform_end, grid.points_per_decade);

    Trajectory traj;
    traj.params = params;
    traj.realization_index = realization_index;
    traj.times.reserve(tg.times.size());
    traj.rho.reserve(tg.times.size());
    traj.norm_drift.reserve(tg.times.size());

    EvolveOptions opts;
    opts.tol = cheb_tol;
    opts.max_step = grid.max_step;
    const EvolveStats st = evolve_trajectory(
        h, psi0, tg,
        [&traj](double t, const StateVector& psi, const EvolveStats& s) {
            traj.times.push_back(t);
            traj.rho.push_back(reduced_density_matrix(psi).m);
            traj.norm_drift.push_back(std::max(s.max_drift, std::abs(norm(psi) - 1.0)));
        },
        opts);
    if (stats) *stats = st;
    return traj;
}

std::vector<Trajectory> run_trajectory_batch(const ModelParams& params,
                                             const GridParams& grid, double cheb_tol,
                                             int realizations, int sweep_index,
                                             int workers,
                                             std::vector<RunRecord>* records) {
    std::vector<Trajectory> runs(realizations);
    std::vector<RunRecord> recs(realizations);
    std::vector<char> ok(realizations, 0);

    parallel_for(realizations, workers, [&](int r) {
        RunRecord rec;
        rec.sweep_index = sweep_index;
        rec.realization_index = r;
        rec.derived_seed = derive_seed(params.seed, static_cast<std::uint64_t>(sweep_index),
                                       static_cast<std::uint64_t>(r));
        const auto t0 = std::chrono::steady_clock::now();
        try {
            EvolveStats st;
            runs[r] = simulate_trajectory(params, grid, cheb_tol, rec.derived_seed, r, &st);
            rec.max_norm_drift = st.max_drift;
            rec.matvec_count = st.matvec_count;
            ok[r] = 1;
        } catch (const std::exception& e) {
            rec.failed = true;
            rec.error = e.what();
        }
        rec.runtime_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        recs[r] = rec;
    });

    if (records) *records = recs;
    std::vector<Trajectory> good;
    good.reserve(realizations);
    for (int r = 0; r < realizations; ++r)
        if (ok[r]) good.push_back(std::move(runs[r]));
    if (good.empty()) throw std::runtime_error("all realizations failed");
    return good;
}

std::vector<std::vector<double>> run_spectrum_batch(const ModelParams& params,
                                                    int realizations, int sweep_index,
                                                    int workers,
                                                    std::vector<RunRecord>* records) {
    std::vector<std::vector<double>> spectra(realizations);
    std::vector<RunRecord> recs(realizations);
    std::vector<char> ok(realizations, 0);

    parallel_for(realizations, workers, [&](int r) {
        RunRecord rec;
        rec.sweep_index = sweep_index;
        rec.realization_index = r;
        rec.derived_seed = derive_seed(params.seed, static_cast<std::uint64_t>(sweep_index),
                                       static_cast<std::uint64_t>(r));
        const auto t0 = std::chrono::steady_clock::now();
        try {
            RngStream stream = make_stream(rec.derived_seed);
            const BathDisorder disorder = sample_bath_disorder(params, stream);
            CouplingSet couplings;
            couplings.a.assign(params.n_bath, 0.0);
            const SparseHamiltonian hb =
                build_hamiltonian(params, disorder, couplings, HamiltonianPart::bath_only);
            spectra[r] = bath_spectrum(hb);
            ok[r] = 1;
        } catch (const std::exception& e) {
            rec.failed = true;
            rec.error = e.what();
        }
        rec.runtime_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        recs[r] = rec;
    });

    if (records) *records = recs;
    std::vector<std::vector<double>> good;
    good.reserve(realizations);
    for (int r = 0; r < realizations; ++r)
        if (ok[r]) good.push_back(std::move(spectra[r]));
    if (good.empty()) throw std::runtime_error("all realizations failed");
    return good;
}

FitPair fit_series(const std::vector<double>& times, const std::vector<double>& values,
                   const AnalysisParams& analysis) {
    std::vector<double> t, v;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] >= analysis.fit_lo && times[i] <= analysis.fit_hi) {
            t.push_back(times[i]);
            v.push_back(values[i]);
        }
    }
    const EnvelopePoints env = extract_envelope(t, v, analysis.envelope_branch);
    FitPair pair;
    pair.gaussian = fit_envelope(env, EnvelopeForm::gaussian);
    pair.exponential = fit_envelope(env, EnvelopeForm::exponential);
    pair.selection = select_form(pair.gaussian, pair.exponential);
    return pair;
}

FitPair fit_trajectory(const Trajectory& traj, const AnalysisParams& analysis) {
    return fit_series(traj.times, traj.re_rho12_series(), analysis);
}

ModelParams apply_sweep(const ModelParams& base, const std::string& parameter,
                        double value) {
    ModelParams p = base;
    if (parameter == "b")
        p.b_target = value;
    else if (parameter == "j")
        p.j_coupling = value;
    else if (parameter == "gamma0")
        p.gamma0 = value;
    else if (parameter == "n_bath")
        p.n_bath = static_cast<int>(value);
    else
        throw ConfigError("unknown sweep parameter: " + parameter);
    p.validate();
    return p;
}

namespace {

void write_trajectory_csv(const fs::path& path, const TrajectoryTable& t) {
    std::string out = "time";
    for (const char* c : kTrajectoryColumns) out += std::string(",") + c;
    out += '\n';
    for (std::size_t i = 0; i < t.times.size(); ++i) {
        std::vector<std::string> cells{format_double(t.times[i])};
        for (int c = 0; c < 7; ++c) cells.push_back(format_double(t.cols[c][i]));
        out += join_row(cells);
    }
    write_lines(path, out);
}

void write_averaged_csv(const fs::path& path, const AveragedTable& t) {
    std::string out = "time";
    for (const char* c : kTrajectoryColumns)
        out += std::string(",") + c + "_mean," + c + "_sem";
    out += '\n';
    for (std::size_t i = 0; i < t.times.size(); ++i) {
        std::vector<std::string> cells{format_double(t.times[i])};
        for (int c = 0; c < 7; ++c) {
            cells.push_back(format_double(t.mean[c][i]));
            cells.push_back(format_double(t.sem[c][i]));
        }
        out += join_row(cells);
    }
    write_lines(path, out);
}

json fit_to_json(const FitResult& f) {
    return json{{"form", to_string(f.form)},   {"alpha", f.alpha},
                {"beta", f.beta},              {"ts", f.ts},
                {"rms_residual", f.rms_residual}, {"converged", f.converged}};
}

struct FitAggregate {
    std::vector<double> ts_gauss, ts_exp, rms_gauss, rms_exp;
    int exp_selected = 0, gauss_selected = 0;
    std::vector<json> per_realization;
};

FitAggregate aggregate_fits(const std::vector<Trajectory>& runs,
                            const AnalysisParams& analysis) {
    FitAggregate agg;
    for (const auto& traj : runs) {
        try {
            const FitPair pair = fit_trajectory(traj, analysis);
            if (pair.gaussian.converged) agg.ts_gauss.push_back(pair.gaussian.ts);
            if (pair.exponential.converged) agg.ts_exp.push_back(pair.exponential.ts);
            agg.rms_gauss.push_back(pair.gaussian.rms_residual);
            agg.rms_exp.push_back(pair.exponential.rms_residual);
            if (pair.selection.selected == EnvelopeForm::exponential)
                ++agg.exp_selected;
            else
                ++agg.gauss_selected;
            agg.per_realization.push_back(
                json{{"realization", traj.realization_index},
                     {"gaussian", fit_to_json(pair.gaussian)},
                     {"exponential", fit_to_json(pair.exponential)},
                     {"selected", to_string(pair.selection.selected)},
                     {"ratio_exp_over_gauss", pair.selection.ratio_exp_over_gauss},
                     {"indistinguishable", pair.selection.indistinguishable}});
        } catch (const std::exception& e) {
            agg.per_realization.push_back(json{{"realization", traj.realization_index},
                                               {"failed", true},
                                               {"error", e.what()}});
        }
    }
    return agg;
}

std::vector<std::string> fit_row(const ModelParams& params, const FitAggregate& agg) {
    const double b = params.b_target;
    const double inv_b = b > 0.0 ? 1.0 / b : 0.0;
    const std::string selected =
        agg.exp_selected > agg.gauss_selected ? "exponential" : "gaussian";
    return {format_double(b),
            format_double(inv_b),
            format_double(mean_of(agg.ts_gauss)),
            format_double(mean_of(agg.ts_exp)),
            format_double(mean_of(agg.rms_gauss)),
            format_double(mean_of(agg.rms_exp)),
            selected};
}

constexpr const char* kFitCsvHeader =
    "b,inv_b,ts_gauss,ts_exp,rms_gauss,rms_exp,selected_form\n";

void cmd_propagate(const ExperimentConfig& config, const fs::path& out, int workers,
                   json& summary) {
    const int n_sweep = config.sweep ? static_cast<int>(config.sweep->values.size()) : 1;
    json sweep_summaries = json::array();
    for (int si = 0; si < n_sweep; ++si) {
        const ModelParams params =
            config.sweep ? apply_sweep(config.model, config.sweep->parameter,
                                       config.sweep->values[si])
                         : config.model;
        const auto [dir, label] = sweep_dir(out, config.sweep, si);
        fs::create_directories(dir);

        std::vector<RunRecord> records;
        const std::vector<Trajectory> runs =
            run_trajectory_batch(params, config.grid, config.analysis.cheb_tol,
                                 config.realizations, si, workers, &records);

        std::vector<TrajectoryTable> tables;
        tables.reserve(runs.size());
        for (const auto& tr : runs) tables.push_back(tabulate(tr));
        if (config.output.per_realization)
            for (std::size_t i = 0; i < runs.size(); ++i)
                write_trajectory_csv(
                    dir / ("trajectory_r" + std::to_string(runs[i].realization_index) +
                           ".csv"),
                    tables[i]);
        write_averaged_csv(dir / "trajectory_mean.csv", average_tables(tables));

        json recs = json::array();
        for (const auto& r : records) recs.push_back(record_to_json(r));
        sweep_summaries.push_back(json{{"label", label.empty() ? "all" : label},
                                       {"runs", recs}});
    }
    summary["sweeps"] = sweep_summaries;
}

void cmd_spectrum(const ExperimentConfig& config, const fs::path& out, int workers,
                  json& summary) {
    const int n_sweep = config.sweep ? static_cast<int>(config.sweep->values.size()) : 1;
    json sweep_summaries = json::array();
    for (int si = 0; si < n_sweep; ++si) {
        const ModelParams params =
            config.sweep ? apply_sweep(config.model, config.sweep->parameter,
                                       config.sweep->values[si])
                         : config.model;
        const auto [dir, label] = sweep_dir(out, config.sweep, si);
        fs::create_directories(dir);

        std::vector<RunRecord> records;
        const auto spectra =
            run_spectrum_batch(params, config.realizations, si, workers, &records);

        std::vector<double> pooled;
        std::vector<double> pooled_spacings;
        std::vector<double> mean_rs;
        int degenerate_count = 0;
        for (const auto& eigs : spectra) {
            pooled.insert(pooled.end(), eigs.begin(), eigs.end());
            bool degen = false;
            const auto sp =
                unfolded_spacings(eigs, config.analysis.unfold_degree, &degen);
            pooled_spacings.insert(pooled_spacings.end(), sp.begin(), sp.end());
            if (degen) ++degenerate_count;
            mean_rs.push_back(mean_gap_ratio(eigs));
        }

        const DosHistogram dos = density_of_states(pooled, config.analysis.dos_bins);
        std::string dos_csv = "epsilon,dos\n";
        for (std::size_t i = 0; i < dos.density.size(); ++i) {
            const double center = 0.5 * (dos.edges[i] + dos.edges[i + 1]);
            dos_csv += join_row({format_double(center), format_double(dos.density[i])});
        }
        write_lines(dir / "dos.csv", dos_csv);

        const SpacingHistogram hist = spacing_statistics(
            pooled_spacings, pooled, config.analysis.spacing_bins);
        std::string sp_csv = "s,p_of_s,wigner_dyson_ref,poisson_ref\n";
        for (std::size_t i = 0; i < hist.density.size(); ++i) {
            const double center = 0.5 * (hist.edges[i] + hist.edges[i + 1]);
            sp_csv += join_row({format_double(center), format_double(hist.density[i]),
                                format_double(wigner_dyson_pdf(center)),
                                format_double(poisson_pdf(center))});
        }
        write_lines(dir / "spacings.csv", sp_csv);

        // classification from the realization-averaged gap ratio
        const double r_mean = mean_of(mean_rs);
        ChaosClass cls = ChaosClass::ambiguous;
        if (pooled_spacings.size() >= 500) {
            if (r_mean > 0.48)
                cls = ChaosClass::chaotic;
            else if (r_mean < 0.42)
                cls = ChaosClass::regular;
        }

        json recs = json::array();
        for (const auto& r : records) recs.push_back(record_to_json(r));
        json jsum{{"label", label.empty() ? "all" : label},
                  {"mean_r", r_mean},
                  {"mean_r_std", sample_std(mean_rs)},
                  {"mean_r_per_realization", mean_rs},
                  {"width_w", dos.width_w},
                  {"classification", to_string(cls)},
                  {"degenerate_realizations", degenerate_count},
                  {"l1_to_wigner_dyson", histogram_l1_distance(hist, wigner_dyson_pdf)},
                  {"l1_to_poisson", histogram_l1_distance(hist, poisson_pdf)},
                  {"runs", recs}};
        write_summary(dir, "spectrum_summary.json", jsum);
        sweep_summaries.push_back(std::move(jsum));
    }
    summary["sweeps"] = sweep_summaries;
}

void cmd_fit(const ExperimentConfig& config, const fs::path& out, int workers,
             json& summary) {
    fs::create_directories(out);
    std::vector<RunRecord> records;
    const std::vector<Trajectory> runs =
        run_trajectory_batch(config.model, config.grid, config.analysis.cheb_tol,
                             config.realizations, 0, workers, &records);

    const FitAggregate agg = aggregate_fits(runs, config.analysis);

    std::string csv = kFitCsvHeader;
    csv += join_row(fit_row(config.model, agg));
    write_lines(out / "fits.csv", csv);

    // envelope + fits of the realization-averaged trajectory
    std::vector<TrajectoryTable> tables;
    for (const auto& tr : runs) tables.push_back(tabulate(tr));
    const AveragedTable avg = average_tables(tables);
    write_averaged_csv(out / "trajectory_mean.csv", avg);

    json mean_fit = json::object();
    try {
        const FitPair pair = fit_series(avg.times, avg.mean[4], config.analysis);
        std::vector<double> t, v;
        for (std::size_t i = 0; i < avg.times.size(); ++i)
            if (avg.times[i] >= config.analysis.fit_lo &&
                avg.times[i] <= config.analysis.fit_hi) {
                t.push_back(avg.times[i]);
                v.push_back(avg.mean[4][i]);
            }
        const EnvelopePoints env = extract_envelope(t, v, config.analysis.envelope_branch);
        std::string env_csv = "time,envelope\n";
        for (std::size_t i = 0; i < env.times.size(); ++i)
            env_csv += join_row({format_double(env.times[i]), format_double(env.values[i])});
        write_lines(out / "envelope_mean.csv", env_csv);
        mean_fit = json{{"gaussian", fit_to_json(pair.gaussian)},
                        {"exponential", fit_to_json(pair.exponential)},
                        {"selected", to_string(pair.selection.selected)},
                        {"ratio_exp_over_gauss", pair.selection.ratio_exp_over_gauss}};
    } catch (const std::exception& e) {
        mean_fit = json{{"failed", true}, {"error", e.what()}};
    }

    json recs = json::array();
    for (const auto& r : records) recs.push_back(record_to_json(r));
    summary["fit"] = json{{"per_realization", agg.per_realization},
                          {"ts_gauss_mean", mean_of(agg.ts_gauss)},
                          {"ts_gauss_sem",
                           sample_std(agg.ts_gauss) /
                               std::sqrt(std::max<std::size_t>(1, agg.ts_gauss.size()))},
                          {"ts_exp_mean", mean_of(agg.ts_exp)},
                          {"ts_exp_sem",
                           sample_std(agg.ts_exp) /
                               std::sqrt(std::max<std::size_t>(1, agg.ts_exp.size()))},
                          {"mean_trajectory_fit", mean_fit}};
    summary["runs"] = recs;
}

void cmd_sweep(const ExperimentConfig& config, const fs::path& out, int workers,
               json& summary) {
    if (!config.sweep) throw ConfigError("sweep command requires a sweep section");
    fs::create_directories(out);

    std::string csv = kFitCsvHeader;
    json values = json::array();
    for (int si = 0; si < static_cast<int>(config.sweep->values.size()); ++si) {
        const ModelParams params =
            apply_sweep(config.model, config.sweep->parameter, config.sweep->values[si]);
        std::vector<RunRecord> records;
        const std::vector<Trajectory> runs =
            run_trajectory_batch(params, config.grid, config.analysis.cheb_tol,
                                 config.realizations, si, workers, &records);
        const FitAggregate agg = aggregate_fits(runs, config.analysis);
        csv += join_row(fit_row(params, agg));

        json recs = json::array();
        for (const auto& r : records) recs.push_back(record_to_json(r));
        values.push_back(json{{"value", config.sweep->values[si]},
                              {"per_realization", agg.per_realization},
                              {"runs", recs}});
    }
    write_lines(out / "sweep.csv", csv);
    summary["values"] = values;
}

void cmd_collapse(const ExperimentConfig& config, const fs::path& out, int workers,
                  json& summary) {
    if (!config.collapse) throw ConfigError("collapse command requires a collapse section");
    fs::create_directories(out);

    const auto& spec = *config.collapse;
    const int n_conf = static_cast<int>(spec.configurations.size());
    const int n_jb = static_cast<int>(spec.j_over_b.size());
    const int rr = config.realizations;
    const int n_jobs = n_conf * n_jb * rr;

    struct Cell {
        std::vector<double> plateaus;
    };
    std::vector<Cell> cells(static_cast<std::size_t>(n_conf) * n_jb);
    std::vector<double> plateau_results(n_jobs, std::numeric_limits<double>::quiet_NaN());
    std::vector<RunRecord> records(n_jobs);

    parallel_for(n_jobs, workers, [&](int job) {
        const int ci = job / (n_jb * rr);
        const int ji = (job / rr) % n_jb;
        const int r = job % rr;
        const int group = ci * n_jb + ji;

        ModelParams params = config.model;
        params.n_bath = spec.configurations[ci].n_bath;
        params.b_target = spec.configurations[ci].b;
        params.j_coupling = spec.j_over_b[ji] * params.b_target;

        RunRecord rec;
        rec.sweep_index = group;
        rec.realization_index = r;
        rec.derived_seed = derive_seed(params.seed, static_cast<std::uint64_t>(group),
                                       static_cast<std::uint64_t>(r));
        const auto t0 = std::chrono::steady_clock::now();
        try {
            EvolveStats st;
            const Trajectory traj = simulate_trajectory(
                params, config.grid, config.analysis.cheb_tol, rec.derived_seed, r, &st);
            const PlateauEstimate p =
                plateau_value(traj, config.analysis.plateau_lo, config.analysis.plateau_hi);
            plateau_results[job] = p.mean;
            rec.max_norm_drift = st.max_drift;
            rec.matvec_count = st.matvec_count;
        } catch (const std::exception& e) {
            rec.failed = true;
            rec.error = e.what();
        }
        rec.runtime_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        records[job] = rec;
    });

    for (int job = 0; job < n_jobs; ++job) {
        if (records[job].failed) continue;
        const int ci = job / (n_jb * rr);
        const int ji = (job / rr) % n_jb;
        cells[static_cast<std::size_t>(ci) * n_jb + ji].plateaus.push_back(
            plateau_results[job]);
    }

    std::string csv = "n_bath,b,j,j_over_b,rho12_pt_mean,rho12_pt_std\n";
    for (int ci = 0; ci < n_conf; ++ci) {
        for (int ji = 0; ji < n_jb; ++ji) {
            const auto& cell = cells[static_cast<std::size_t>(ci) * n_jb + ji];
            const double b = spec.configurations[ci].b;
            csv += join_row({std::to_string(spec.configurations[ci].n_bath),
                             format_double(b),
                             format_double(spec.j_over_b[ji] * b),
                             format_double(spec.j_over_b[ji]),
                             format_double(mean_of(cell.plateaus)),
                             format_double(sample_std(cell.plateaus))});
        }
    }
    write_lines(out / "collapse.csv", csv);

    json recs = json::array();
    for (const auto& r : records) recs.push_back(record_to_json(r));
    summary["runs"] = recs;
}

}  // namespace

std::string run_experiment(const ExperimentConfig& config, Command command,
                           const std::string& out_dir_override, int workers) {
    config.validate();
    const fs::path out =
        out_dir_override.empty() ? fs::path(config.output.dir) : fs::path(out_dir_override);
    fs::create_directories(out);
    const int w = effective_workers(workers);

    json summary = summary_header(config, command, w);
    switch (command) {
        case Command::propagate: cmd_propagate(config, out, w, summary); break;
        case Command::spectrum: cmd_spectrum(config, out, w, summary); break;
        case Command::fit: cmd_fit(config, out, w, summary); break;
        case Command::sweep: cmd_sweep(config, out, w, summary); break;
        case Command::collapse: cmd_collapse(config, out, w, summary); break;
    }
    write_summary(out, "run_summary.json", summary);
    return out.string();
}

}  // namespace spinbath

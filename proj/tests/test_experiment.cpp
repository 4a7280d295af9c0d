#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "spinbath/experiment.hpp"

using namespace spinbath;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("spinbath_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.model.n_bath = 4;
    c.model.j_coupling = 0.1;
    c.model.gamma0 = 0.01;
    c.model.h0 = 0.014;
    c.model.b_target = 0.137;
    c.model.seed = 5;
    c.grid.scheme = TimeGrid::Scheme::uniform;
    c.grid.t_max = 50.0;
    c.grid.dt_uniform = 0.5;
    c.realizations = 3;
    c.analysis.cheb_tol = 1e-12;
    return c;
}

}  // namespace

TEST_CASE("derived seeds are pairwise distinct over 10^4 draws") {
    std::set<std::uint64_t> seen;
    for (int s = 0; s < 10; ++s)
        for (int r = 0; r < 1000; ++r) seen.insert(derive_seed(1234, s, r));
    CHECK(seen.size() == 10000);

    // different master seeds decorrelate
    CHECK(derive_seed(1, 0, 0) != derive_seed(2, 0, 0));
}

TEST_CASE("averaged diagonals sum to one at every time") {
    const ExperimentConfig c = small_config();
    const std::vector<Trajectory> runs =
        run_trajectory_batch(c.model, c.grid, c.analysis.cheb_tol, 4, 0, 2);
    std::vector<TrajectoryTable> tables;
    for (const auto& t : runs) tables.push_back(tabulate(t));
    const AveragedTable avg = average_tables(tables);
    for (std::size_t i = 0; i < avg.times.size(); ++i) {
        const double sum = avg.mean[0][i] + avg.mean[1][i] + avg.mean[2][i] +
                           avg.mean[3][i];
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("decoupled run keeps rho12 at -1/2") {
    ExperimentConfig c = small_config();
    c.model.b_target = 0.0;
    c.realizations = 1;
    const std::vector<Trajectory> runs =
        run_trajectory_batch(c.model, c.grid, c.analysis.cheb_tol, 1, 0, 1);
    const auto series = runs[0].re_rho12_series();
    for (double v : series) CHECK(std::abs(v + 0.5) < 1e-9);
}

TEST_CASE("scheduling invariance: identical results for 1 and 2 workers") {
    const ExperimentConfig c = small_config();
    const fs::path d1 = temp_dir("w1");
    const fs::path d2 = temp_dir("w2");
    run_experiment(c, Command::propagate, d1.string(), 1);
    run_experiment(c, Command::propagate, d2.string(), 2);
    CHECK(slurp(d1 / "trajectory_mean.csv") == slurp(d2 / "trajectory_mean.csv"));
    CHECK(slurp(d1 / "trajectory_r0.csv") == slurp(d2 / "trajectory_r0.csv"));
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("determinism: byte-identical CSV payloads on re-run") {
    const ExperimentConfig c = small_config();
    const fs::path d1 = temp_dir("det1");
    const fs::path d2 = temp_dir("det2");
    run_experiment(c, Command::propagate, d1.string(), 2);
    run_experiment(c, Command::propagate, d2.string(), 2);
    for (const char* f : {"trajectory_mean.csv", "trajectory_r0.csv", "trajectory_r1.csv",
                          "trajectory_r2.csv"})
        CHECK(slurp(d1 / f) == slurp(d2 / f));
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("apply_sweep changes exactly the requested axis") {
    const ModelParams base = small_config().model;
    CHECK(apply_sweep(base, "b", 0.9).b_target == 0.9);
    CHECK(apply_sweep(base, "j", -0.2).j_coupling == -0.2);
    CHECK(apply_sweep(base, "gamma0", 0.02).gamma0 == 0.02);
    CHECK(apply_sweep(base, "n_bath", 6).n_bath == 6);
    CHECK_THROWS_AS(apply_sweep(base, "h0", 1.0), ConfigError);
    CHECK_THROWS_AS(apply_sweep(base, "n_bath", 99), ConfigError);
}

TEST_CASE("propagate with sweep writes per-value directories") {
    ExperimentConfig c = small_config();
    c.realizations = 2;
    c.sweep = SweepSpec{"b", {0.1, 0.2}};
    const fs::path dir = temp_dir("sweepdirs");
    run_experiment(c, Command::propagate, dir.string(), 2);
    CHECK(fs::exists(dir / "b_0.1" / "trajectory_mean.csv"));
    CHECK(fs::exists(dir / "b_0.2" / "trajectory_mean.csv"));
    CHECK(fs::exists(dir / "run_summary.json"));
    fs::remove_all(dir);
}

TEST_CASE("spectrum command emits DOS, spacings, and a summary") {
    ExperimentConfig c = small_config();
    c.model.n_bath = 9;  // 512 levels per realization
    c.realizations = 2;
    const fs::path dir = temp_dir("spectrum");
    run_experiment(c, Command::spectrum, dir.string(), 2);

    const std::string dos = slurp(dir / "dos.csv");
    CHECK(dos.rfind("epsilon,dos\n", 0) == 0);
    const std::string sp = slurp(dir / "spacings.csv");
    CHECK(sp.rfind("s,p_of_s,wigner_dyson_ref,poisson_ref\n", 0) == 0);
    const std::string sum = slurp(dir / "spectrum_summary.json");
    CHECK(sum.find("mean_r") != std::string::npos);
    CHECK(sum.find("classification") != std::string::npos);
    CHECK(sum.find("width_w") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("fit command emits the spec CSV columns") {
    ExperimentConfig c = small_config();
    c.model.j_coupling = 0.4;
    c.model.b_target = 0.05;
    c.grid.t_max = 150.0;
    c.grid.dt_uniform = 0.25;
    c.realizations = 2;
    c.analysis.fit_lo = 0.0;
    c.analysis.fit_hi = 150.0;
    const fs::path dir = temp_dir("fit");
    run_experiment(c, Command::fit, dir.string(), 2);
    const std::string fits = slurp(dir / "fits.csv");
    CHECK(fits.rfind("b,inv_b,ts_gauss,ts_exp,rms_gauss,rms_exp,selected_form\n", 0) == 0);
    CHECK(fs::exists(dir / "trajectory_mean.csv"));
    fs::remove_all(dir);
}

TEST_CASE("collapse command emits one row per (config, j_over_b) cell") {
    ExperimentConfig c = small_config();
    c.realizations = 2;
    c.grid.scheme = TimeGrid::Scheme::uniform_then_log;
    c.grid.t_max = 4000.0;
    c.grid.dt_uniform = 2.0;
    c.grid.t_uniform_end = 100.0;
    c.grid.points_per_decade = 30;
    c.analysis.plateau_lo = 500.0;
    c.analysis.plateau_hi = 4000.0;
    c.collapse = CollapseSpec{{{4, 0.3}}, {0.5, 2.0}};
    const fs::path dir = temp_dir("collapse");
    run_experiment(c, Command::collapse, dir.string(), 2);

    const std::string csv = slurp(dir / "collapse.csv");
    CHECK(csv.rfind("n_bath,b,j,j_over_b,rho12_pt_mean,rho12_pt_std\n", 0) == 0);
    int lines = 0;
    for (char ch : csv)
        if (ch == '\n') ++lines;
    CHECK(lines == 3);  // header + 2 cells
    fs::remove_all(dir);
}

TEST_CASE("sweep command requires a sweep section") {
    const ExperimentConfig c = small_config();
    const fs::path dir = temp_dir("badsweep");
    CHECK_THROWS_AS(run_experiment(c, Command::sweep, dir.string(), 1), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("command name round trip") {
    for (const char* name : {"propagate", "spectrum", "fit", "sweep", "collapse"}) {
        CHECK(to_string(command_from_string(name)) == name);
    }
    CHECK_THROWS_AS(command_from_string("bogus"), ConfigError);
}

#include <doctest.h>

#include "spinbath/config.hpp"

using namespace spinbath;

TEST_CASE("minimal config materializes defaults") {
    const std::string doc = R"({
      "model": {"n_bath": 12, "j": 0.1, "gamma0": 0.04, "h0": 0.014, "b": 0.137,
                "seed": 1}
    })";
    const ExperimentConfig c = load_config(doc);
    CHECK(c.model.n_bath == 12);
    CHECK(c.model.j_coupling == 0.1);
    CHECK(c.model.gamma0 == 0.04);
    CHECK(c.model.h0 == 0.014);
    CHECK(c.model.b_target == 0.137);
    CHECK(c.model.seed == 1);
    // defaults
    CHECK(c.model.coupling_scheme == CouplingScheme::equal);
    CHECK(c.model.topology == Topology::all_to_all);
    CHECK(c.realizations == 10);
    CHECK(c.grid.t_max == 1e4);
    CHECK(c.grid.dt_uniform == 0.25);
    CHECK(c.analysis.plateau_lo == 2000.0);
    CHECK(c.analysis.plateau_hi == 1e4);
    CHECK(c.analysis.envelope_branch == Branch::lower);
    CHECK(c.output.dir == "out");
    CHECK(!c.sweep.has_value());
}

TEST_CASE("zero realizations is rejected") {
    const std::string doc = R"({"realizations": 0})";
    CHECK_THROWS_AS(load_config(doc), ConfigError);
}

TEST_CASE("unknown keys are rejected with the key name") {
    try {
        load_config(R"({"model": {"n_bath": 4, "j_coupling": 0.1}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("j_coupling") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config(R"({"grib": {}})"), ConfigError);
    CHECK_THROWS_AS(load_config(R"({"analysis": {"bins": 4}})"), ConfigError);
}

TEST_CASE("parse errors carry line information") {
    try {
        load_config("{\n  \"model\": {\n  broken\n}");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("serialize/load round trip is the identity") {
    const std::string doc = R"({
      "model": {"n_bath": 8, "j": 0.4, "gamma0": 0.01, "h0": 0.014, "b": 0.2,
                "coupling_scheme": "random_uniform", "topology": "ring", "seed": 99},
      "grid": {"scheme": "uniform", "t_max": 300.0, "dt_uniform": 0.5},
      "realizations": 3,
      "sweep": {"parameter": "b", "values": [0.1, 0.2]},
      "collapse": {"configurations": [{"n_bath": 8, "b": 0.518}],
                   "j_over_b": [0.5, 1.0]},
      "analysis": {"fit_window": [0, 150], "envelope_branch": "upper"},
      "output": {"dir": "artifacts", "per_realization": false}
    })";
    const ExperimentConfig a = load_config(doc);
    const ExperimentConfig b = load_config(serialize_config(a));
    CHECK(a == b);
    CHECK(config_hash(a) == config_hash(b));
}

TEST_CASE("validation catches bad sections") {
    CHECK_THROWS_AS(load_config(R"({"sweep": {"parameter": "x", "values": [1]}})"),
                    ConfigError);
    CHECK_THROWS_AS(load_config(R"({"sweep": {"parameter": "b", "values": []}})"),
                    ConfigError);
    CHECK_THROWS_AS(load_config(R"({"analysis": {"plateau_window": [100, 50]}})"),
                    ConfigError);
    CHECK_THROWS_AS(load_config(R"({"analysis": {"cheb_tol": 1e-16}})"), ConfigError);
    CHECK_THROWS_AS(load_config(R"({"model": {"n_bath": 40}})"), ConfigError);
    CHECK_THROWS_AS(load_config(R"({"grid": {"scheme": "quadratic"}})"), ConfigError);
    CHECK_THROWS_AS(
        load_config(R"({"collapse": {"configurations": [], "j_over_b": [1]}})"),
        ConfigError);
}

TEST_CASE("config hash distinguishes different configs") {
    const ExperimentConfig a = load_config(R"({"model": {"seed": 1}})");
    const ExperimentConfig b = load_config(R"({"model": {"seed": 2}})");
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("missing file raises a config error") {
    CHECK_THROWS_AS(load_config_file("/nonexistent/config.json"), ConfigError);
}

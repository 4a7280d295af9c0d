// config.hpp — declarative experiment configuration: JSON schema with strict
// validation (unknown keys rejected), defaults, and canonical serialization.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spinbath/chebyshev.hpp"
#include "spinbath/envelope.hpp"
#include "spinbath/model.hpp"

namespace spinbath {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridParams {
    TimeGrid::Scheme scheme = TimeGrid::Scheme::uniform_then_log;
    double t_max = 1e4;
    double dt_uniform = 0.25;
    double t_uniform_end = 500.0;
    int points_per_decade = 40;
    double max_step = 0.0;  // propagator step; 0 = auto (d*dt ~ 10)
};

struct SweepSpec {
    std::string parameter;  // one of: b, j, gamma0, n_bath
    std::vector<double> values;
};

struct CollapsePoint {
    int n_bath = 12;
    double b = 0.137;
};

struct CollapseSpec {
    std::vector<CollapsePoint> configurations;
    std::vector<double> j_over_b;
};

struct AnalysisParams {
    double plateau_lo = 2000.0;
    double plateau_hi = 1e4;
    double fit_lo = 0.0;
    double fit_hi = 300.0;
    Branch envelope_branch = Branch::lower;
    int dos_bins = 61;
    int spacing_bins = 32;
    int unfold_degree = 9;
    double cheb_tol = 1e-12;
};

struct OutputParams {
    std::string dir = "out";
    bool per_realization = true;
};

struct ExperimentConfig {
    ModelParams model;
    GridParams grid;
    int realizations = 10;
    std::optional<SweepSpec> sweep;
    std::optional<CollapseSpec> collapse;
    AnalysisParams analysis;
    OutputParams output;

    void validate() const;  // throws ConfigError naming the offending key
};

// Parses and validates a JSON document; all defaults materialized, unknown
// keys rejected. Parse errors carry line information.
ExperimentConfig load_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Canonical serialization; load_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& c);

// FNV-1a hash of the canonical serialization.
std::uint64_t config_hash(const ExperimentConfig& c);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace spinbath

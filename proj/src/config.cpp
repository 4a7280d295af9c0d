#include "spinbath/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace spinbath {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& scope) {
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key))
            throw ConfigError("unknown key \"" + (scope.empty() ? key : scope + "." + key) +
                              "\"");
    }
}

template <typename T>
void read_field(const json& j, const std::string& scope, const std::string& key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("invalid value for \"" + (scope.empty() ? key : scope + "." + key) +
                          "\"");
    }
}

int line_of_offset(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

}  // namespace

void ExperimentConfig::validate() const {
    try {
        model.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
    if (realizations < 1) throw ConfigError("realizations must be >= 1");
    if (!(grid.t_max > 0.0)) throw ConfigError("grid.t_max must be > 0");
    if (!(grid.dt_uniform > 0.0)) throw ConfigError("grid.dt_uniform must be > 0");
    if (!(grid.t_uniform_end > 0.0)) throw ConfigError("grid.t_uniform_end must be > 0");
    if (grid.points_per_decade < 1) throw ConfigError("grid.points_per_decade must be >= 1");
    if (grid.max_step < 0.0) throw ConfigError("grid.max_step must be >= 0");
    if (sweep) {
        static const std::set<std::string> axes{"b", "j", "gamma0", "n_bath"};
        if (!axes.count(sweep->parameter))
            throw ConfigError("sweep.parameter must be one of b, j, gamma0, n_bath");
        if (sweep->values.empty()) throw ConfigError("sweep.values must be non-empty");
        for (double v : sweep->values) {
            if (sweep->parameter == "n_bath") {
                if (v < 1 || v > 16 || v != static_cast<int>(v))
                    throw ConfigError("sweep.values: n_bath values must be integers in [1,16]");
            } else if (!(v >= 0.0) && sweep->parameter != "j") {
                throw ConfigError("sweep.values must be >= 0 for " + sweep->parameter);
            }
        }
    }
    if (collapse) {
        if (collapse->configurations.empty())
            throw ConfigError("collapse.configurations must be non-empty");
        if (collapse->j_over_b.empty())
            throw ConfigError("collapse.j_over_b must be non-empty");
        for (const auto& c : collapse->configurations) {
            if (c.n_bath < 1 || c.n_bath > 16)
                throw ConfigError("collapse.configurations: n_bath must be in [1,16]");
            if (!(c.b >= 0.0)) throw ConfigError("collapse.configurations: b must be >= 0");
        }
    }
    if (!(analysis.plateau_hi > analysis.plateau_lo))
        throw ConfigError("analysis.plateau_window must be increasing");
    if (!(analysis.fit_hi > analysis.fit_lo))
        throw ConfigError("analysis.fit_window must be increasing");
    if (analysis.dos_bins < 4) throw ConfigError("analysis.dos_bins must be >= 4");
    if (analysis.spacing_bins < 4) throw ConfigError("analysis.spacing_bins must be >= 4");
    if (analysis.unfold_degree < 1 || analysis.unfold_degree > 30)
        throw ConfigError("analysis.unfold_degree must be in [1,30]");
    if (!(analysis.cheb_tol >= 1e-15 && analysis.cheb_tol < 1.0))
        throw ConfigError("analysis.cheb_tol must be in [1e-15, 1)");
    if (output.dir.empty()) throw ConfigError("output.dir must be non-empty");
}

ExperimentConfig load_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("parse error at line " +
                          std::to_string(line_of_offset(text, e.byte)) + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be an object");

    reject_unknown_keys(j, {"model", "grid", "realizations", "sweep", "collapse",
                            "analysis", "output"}, "");

    ExperimentConfig c;

    if (j.contains("model")) {
        const json& m = j.at("model");
        reject_unknown_keys(m, {"n_bath", "j", "gamma0", "h0", "b", "coupling_scheme",
                                "topology", "seed"}, "model");
        read_field(m, "model", "n_bath", c.model.n_bath);
        read_field(m, "model", "j", c.model.j_coupling);
        read_field(m, "model", "gamma0", c.model.gamma0);
        read_field(m, "model", "h0", c.model.h0);
        read_field(m, "model", "b", c.model.b_target);
        read_field(m, "model", "seed", c.model.seed);
        if (m.contains("coupling_scheme")) {
            std::string s;
            read_field(m, "model", "coupling_scheme", s);
            try {
                c.model.coupling_scheme = coupling_scheme_from_string(s);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("model.coupling_scheme: ") + e.what());
            }
        }
        if (m.contains("topology")) {
            std::string s;
            read_field(m, "model", "topology", s);
            try {
                c.model.topology = topology_from_string(s);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("model.topology: ") + e.what());
            }
        }
    }

    if (j.contains("grid")) {
        const json& g = j.at("grid");
        reject_unknown_keys(g, {"scheme", "t_max", "dt_uniform", "t_uniform_end",
                                "points_per_decade", "max_step"}, "grid");
        if (g.contains("scheme")) {
            std::string s;
            read_field(g, "grid", "scheme", s);
            if (s == "uniform")
                c.grid.scheme = TimeGrid::Scheme::uniform;
            else if (s == "uniform_then_log")
                c.grid.scheme = TimeGrid::Scheme::uniform_then_log;
            else
                throw ConfigError("grid.scheme must be uniform or uniform_then_log");
        }
        read_field(g, "grid", "t_max", c.grid.t_max);
        read_field(g, "grid", "dt_uniform", c.grid.dt_uniform);
        read_field(g, "grid", "t_uniform_end", c.grid.t_uniform_end);
        read_field(g, "grid", "points_per_decade", c.grid.points_per_decade);
        read_field(g, "grid", "max_step", c.grid.max_step);
    }

    read_field(j, "", "realizations", c.realizations);

    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        reject_unknown_keys(s, {"parameter", "values"}, "sweep");
        SweepSpec spec;
        read_field(s, "sweep", "parameter", spec.parameter);
        read_field(s, "sweep", "values", spec.values);
        c.sweep = std::move(spec);
    }

    if (j.contains("collapse")) {
        const json& col = j.at("collapse");
        reject_unknown_keys(col, {"configurations", "j_over_b"}, "collapse");
        CollapseSpec spec;
        if (col.contains("configurations")) {
            if (!col.at("configurations").is_array())
                throw ConfigError("collapse.configurations must be an array");
            for (const auto& e : col.at("configurations")) {
                reject_unknown_keys(e, {"n_bath", "b"}, "collapse.configurations[]");
                CollapsePoint p;
                read_field(e, "collapse.configurations[]", "n_bath", p.n_bath);
                read_field(e, "collapse.configurations[]", "b", p.b);
                spec.configurations.push_back(p);
            }
        }
        read_field(col, "collapse", "j_over_b", spec.j_over_b);
        c.collapse = std::move(spec);
    }

    if (j.contains("analysis")) {
        const json& a = j.at("analysis");
        reject_unknown_keys(a, {"plateau_window", "fit_window", "envelope_branch",
                                "dos_bins", "spacing_bins", "unfold_degree", "cheb_tol"},
                            "analysis");
        if (a.contains("plateau_window")) {
            std::vector<double> w;
            read_field(a, "analysis", "plateau_window", w);
            if (w.size() != 2) throw ConfigError("analysis.plateau_window needs [lo, hi]");
            c.analysis.plateau_lo = w[0];
            c.analysis.plateau_hi = w[1];
        }
        if (a.contains("fit_window")) {
            std::vector<double> w;
            read_field(a, "analysis", "fit_window", w);
            if (w.size() != 2) throw ConfigError("analysis.fit_window needs [lo, hi]");
            c.analysis.fit_lo = w[0];
            c.analysis.fit_hi = w[1];
        }
        if (a.contains("envelope_branch")) {
            std::string s;
            read_field(a, "analysis", "envelope_branch", s);
            try {
                c.analysis.envelope_branch = branch_from_string(s);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("analysis.envelope_branch: ") + e.what());
            }
        }
        read_field(a, "analysis", "dos_bins", c.analysis.dos_bins);
        read_field(a, "analysis", "spacing_bins", c.analysis.spacing_bins);
        read_field(a, "analysis", "unfold_degree", c.analysis.unfold_degree);
        read_field(a, "analysis", "cheb_tol", c.analysis.cheb_tol);
    }

    if (j.contains("output")) {
        const json& o = j.at("output");
        reject_unknown_keys(o, {"dir", "per_realization"}, "output");
        read_field(o, "output", "dir", c.output.dir);
        read_field(o, "output", "per_realization", c.output.per_realization);
    }

    c.validate();
    return c;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
    json j;
    j["model"] = {{"n_bath", c.model.n_bath},
                  {"j", c.model.j_coupling},
                  {"gamma0", c.model.gamma0},
                  {"h0", c.model.h0},
                  {"b", c.model.b_target},
                  {"coupling_scheme", to_string(c.model.coupling_scheme)},
                  {"topology", to_string(c.model.topology)},
                  {"seed", c.model.seed}};
    j["grid"] = {{"scheme", c.grid.scheme == TimeGrid::Scheme::uniform ? "uniform"
                                                                       : "uniform_then_log"},
                 {"t_max", c.grid.t_max},
                 {"dt_uniform", c.grid.dt_uniform},
                 {"t_uniform_end", c.grid.t_uniform_end},
                 {"points_per_decade", c.grid.points_per_decade},
                 {"max_step", c.grid.max_step}};
    j["realizations"] = c.realizations;
    if (c.sweep)
        j["sweep"] = {{"parameter", c.sweep->parameter}, {"values", c.sweep->values}};
    if (c.collapse) {
        json configs = json::array();
        for (const auto& p : c.collapse->configurations)
            configs.push_back({{"n_bath", p.n_bath}, {"b", p.b}});
        j["collapse"] = {{"configurations", configs}, {"j_over_b", c.collapse->j_over_b}};
    }
    j["analysis"] = {{"plateau_window", {c.analysis.plateau_lo, c.analysis.plateau_hi}},
                     {"fit_window", {c.analysis.fit_lo, c.analysis.fit_hi}},
                     {"envelope_branch", to_string(c.analysis.envelope_branch)},
                     {"dos_bins", c.analysis.dos_bins},
                     {"spacing_bins", c.analysis.spacing_bins},
                     {"unfold_degree", c.analysis.unfold_degree},
                     {"cheb_tol", c.analysis.cheb_tol}};
    j["output"] = {{"dir", c.output.dir}, {"per_realization", c.output.per_realization}};
    return j.dump(2);
}

std::uint64_t config_hash(const ExperimentConfig& c) {
    const std::string s = serialize_config(c);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return serialize_config(a) == serialize_config(b);
}

}  // namespace spinbath

#include "spinbath/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace spinbath {

namespace {

struct Extrema {
    std::vector<double> t_min, v_min;
    std::vector<double> t_max, v_max;
};

Extrema find_extrema(const std::vector<double>& t, const std::vector<double>& v) {
    Extrema e;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        const double d1 = v[i] - v[i - 1];
        const double d2 = v[i + 1] - v[i];
        if (d1 < 0.0 && d2 > 0.0) {
            e.t_min.push_back(t[i]);
            e.v_min.push_back(v[i]);
        } else if (d1 > 0.0 && d2 < 0.0) {
            e.t_max.push_back(t[i]);
            e.v_max.push_back(v[i]);
        }
    }
    return e;
}

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    const auto it = std::lower_bound(xs.begin(), xs.end(), x);
    if (it == xs.begin()) return ys.front();
    if (it == xs.end()) return ys.back();
    const auto hi = static_cast<std::size_t>(it - xs.begin());
    const std::size_t lo = hi - 1;
    const double f = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] * (1.0 - f) + ys[hi] * f;
}

double model_g(EnvelopeForm form, double t, double ts) {
    return form == EnvelopeForm::gaussian ? std::exp(-(t * t) / (ts * ts))
                                          : std::exp(-t / ts);
}

double model_dg_dts(EnvelopeForm form, double t, double ts) {
    if (form == EnvelopeForm::gaussian)
        return std::exp(-(t * t) / (ts * ts)) * 2.0 * t * t / (ts * ts * ts);
    return std::exp(-t / ts) * t / (ts * ts);
}

// Best (alpha, beta) for fixed ts by linear least squares; returns SSE.
double solve_linear(const EnvelopePoints& p, EnvelopeForm form, double ts,
                    double& alpha, double& beta) {
    const std::size_t n = p.times.size();
    double sg = 0.0, sgg = 0.0, sv = 0.0, sgv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double g = model_g(form, p.times[i], ts);
        sg += g;
        sgg += g * g;
        sv += p.values[i];
        sgv += g * p.values[i];
    }
    const double nn = static_cast<double>(n);
    const double det = nn * sgg - sg * sg;
    if (std::abs(det) < 1e-14 * std::max(1.0, nn * sgg)) {
        alpha = sv / nn;
        beta = 0.0;
    } else {
        alpha = (sgg * sv - sg * sgv) / det;
        beta = (nn * sgv - sg * sv) / det;
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = p.values[i] - alpha - beta * model_g(form, p.times[i], ts);
        sse += r * r;
    }
    return sse;
}

double sse_of(const EnvelopePoints& p, EnvelopeForm form, double alpha, double beta,
              double ts) {
    double sse = 0.0;
    for (std::size_t i = 0; i < p.times.size(); ++i) {
        const double r = p.values[i] - alpha - beta * model_g(form, p.times[i], ts);
        sse += r * r;
    }
    return sse;
}

}  // namespace

std::string to_string(Branch b) {
    switch (b) {
        case Branch::lower: return "lower";
        case Branch::upper: return "upper";
        default: return "amplitude";
    }
}

std::string to_string(EnvelopeForm f) {
    return f == EnvelopeForm::gaussian ? "gaussian" : "exponential";
}

Branch branch_from_string(const std::string& s) {
    if (s == "lower") return Branch::lower;
    if (s == "upper") return Branch::upper;
    if (s == "amplitude") return Branch::amplitude;
    throw std::invalid_argument("unknown envelope branch: " + s);
}

EnvelopePoints extract_envelope(const std::vector<double>& times,
                                const std::vector<double>& values, Branch branch) {
    if (times.size() != values.size())
        throw std::invalid_argument("extract_envelope: times/values length mismatch");
    const Extrema e = find_extrema(times, values);

    EnvelopePoints out;
    out.branch = branch;
    if (branch == Branch::lower) {
        out.times = e.t_min;
        out.values = e.v_min;
    } else if (branch == Branch::upper) {
        out.times = e.t_max;
        out.values = e.v_max;
    } else {
        // amplitude at minima times, upper branch interpolated there
        for (std::size_t i = 0; i < e.t_min.size(); ++i) {
            const double t = e.t_min[i];
            if (e.t_max.empty() || t < e.t_max.front() || t > e.t_max.back()) continue;
            const double up = interpolate(e.t_max, e.v_max, t);
            out.times.push_back(t);
            out.values.push_back(0.5 * (up - e.v_min[i]));
        }
    }
    if (out.times.size() < 4)
        throw std::runtime_error(
            "extract_envelope: fewer than 4 extrema; use a denser grid or a longer window");
    return out;
}

EnvelopePoints extract_envelope(const Trajectory& traj, Branch branch, double t_lo,
                                double t_hi) {
    std::vector<double> t, v;
    const std::vector<double> series = traj.re_rho12_series();
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        if (traj.times[i] >= t_lo && traj.times[i] <= t_hi) {
            t.push_back(traj.times[i]);
            v.push_back(series[i]);
        }
    }
    return extract_envelope(t, v, branch);
}

FitResult fit_envelope(const EnvelopePoints& points, EnvelopeForm form) {
    const std::size_t n = points.times.size();
    if (n < 4) throw std::invalid_argument("fit_envelope: need at least 4 points");

    FitResult res;
    res.form = form;

    const auto [vmin, vmax] = std::minmax_element(points.values.begin(), points.values.end());
    const double scale = std::max({1.0, std::abs(*vmin), std::abs(*vmax)});
    if (*vmax - *vmin <= 1e-13 * scale) {
        // constant data: no decay to fit
        res.alpha = points.values.front();
        res.beta = 0.0;
        res.ts = std::numeric_limits<double>::quiet_NaN();
        res.rms_residual = 0.0;
        res.converged = false;
        return res;
    }

    // Coarse logarithmic grid over ts with (alpha, beta) solved exactly.
    const double ts_lo = points.times[1] - points.times[0];
    const double ts_hi = 10.0 * points.times.back();
    constexpr int kGridPoints = 50;
    double best_ts = ts_lo, best_sse = std::numeric_limits<double>::infinity();
    double best_alpha = 0.0, best_beta = 0.0;
    for (int i = 0; i < kGridPoints; ++i) {
        const double ts =
            ts_lo * std::pow(ts_hi / ts_lo, static_cast<double>(i) / (kGridPoints - 1));
        double alpha, beta;
        const double sse = solve_linear(points, form, ts, alpha, beta);
        if (sse < best_sse) {
            best_sse = sse;
            best_ts = ts;
            best_alpha = alpha;
            best_beta = beta;
        }
    }

    // Damped Gauss-Newton on (alpha, beta, ts).
    double alpha = best_alpha, beta = best_beta, ts = best_ts, sse = best_sse;
    bool converged = false;
    constexpr int kMaxIter = 200;
    for (int iter = 0; iter < kMaxIter; ++iter) {
        Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
        Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            const double t = points.times[i];
            const double g = model_g(form, t, ts);
            const Eigen::Vector3d j{1.0, g, beta * model_dg_dts(form, t, ts)};
            const double r = points.values[i] - alpha - beta * g;
            jtj += j * j.transpose();
            jtr += j * r;
        }
        jtj.diagonal() += Eigen::Vector3d::Constant(1e-12 * jtj.trace());
        Eigen::Vector3d step = jtj.ldlt().solve(jtr);
        if (!step.allFinite()) break;

        // halve the step until the objective decreases
        double damp = 1.0;
        double new_sse = std::numeric_limits<double>::infinity();
        double na = alpha, nb = beta, nts = ts;
        bool improved = false;
        for (int h = 0; h < 25; ++h) {
            na = alpha + damp * step[0];
            nb = beta + damp * step[1];
            nts = ts + damp * step[2];
            if (nts > 0.0) {
                new_sse = sse_of(points, form, na, nb, nts);
                if (new_sse <= sse) {
                    improved = true;
                    break;
                }
            }
            damp *= 0.5;
        }
        if (!improved) break;

        const double rel = std::max({std::abs(na - alpha) / std::max(1.0, std::abs(alpha)),
                                     std::abs(nb - beta) / std::max(1.0, std::abs(beta)),
                                     std::abs(nts - ts) / std::max(1.0, std::abs(ts))});
        alpha = na;
        beta = nb;
        ts = nts;
        sse = new_sse;
        if (rel < 1e-8) {
            converged = true;
            break;
        }
    }

    res.alpha = alpha;
    res.beta = beta;
    res.ts = ts;
    res.rms_residual = std::sqrt(sse / static_cast<double>(n));
    res.converged = converged && ts > 0.0;
    return res;
}

FormSelection select_form(const FitResult& gaussian, const FitResult& exponential) {
    if (gaussian.form != EnvelopeForm::gaussian ||
        exponential.form != EnvelopeForm::exponential)
        throw std::invalid_argument("select_form: results passed in the wrong order");
    if (!gaussian.converged && !exponential.converged)
        throw std::runtime_error("select_form: neither fit converged");

    FormSelection sel;
    if (gaussian.rms_residual == 0.0 && exponential.rms_residual == 0.0)
        sel.ratio_exp_over_gauss = 1.0;
    else if (gaussian.rms_residual == 0.0)
        sel.ratio_exp_over_gauss = std::numeric_limits<double>::infinity();
    else
        sel.ratio_exp_over_gauss = exponential.rms_residual / gaussian.rms_residual;

    sel.selected = sel.ratio_exp_over_gauss < 1.0 ? EnvelopeForm::exponential
                                                  : EnvelopeForm::gaussian;
    sel.indistinguishable =
        sel.ratio_exp_over_gauss >= 0.9 && sel.ratio_exp_over_gauss <= 1.1;
    return sel;
}

PlateauEstimate plateau_value(const std::vector<double>& times,
                              const std::vector<double>& values, double t_lo,
                              double t_hi) {
    if (times.size() != values.size())
        throw std::invalid_argument("plateau_value: times/values length mismatch");
    if (times.empty() || t_lo < times.front() - 1e-9 || t_hi > times.back() + 1e-9)
        throw std::invalid_argument("plateau_value: window outside trajectory range");

    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] >= t_lo && times[i] <= t_hi) {
            sum += values[i];
            ++count;
        }
    }
    if (count < 20)
        throw std::invalid_argument("plateau_value: fewer than 20 samples in window");
    const double mean = sum / count;

    double ss = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] >= t_lo && times[i] <= t_hi) ss += (values[i] - mean) * (values[i] - mean);

    PlateauEstimate p;
    p.mean = mean;
    p.stddev = std::sqrt(ss / (count - 1));
    p.count = count;
    return p;
}

PlateauEstimate plateau_value(const Trajectory& traj, double t_lo, double t_hi) {
    return plateau_value(traj.times, traj.re_rho12_series(), t_lo, t_hi);
}

}  // namespace spinbath

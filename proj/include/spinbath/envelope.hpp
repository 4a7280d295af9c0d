// envelope.hpp — oscillation-envelope extraction, Gaussian/exponential decay
// fits by damped Gauss-Newton, and long-time plateau estimation for rho12(t).

#pragma once

#include <vector>

#include "spinbath/observables.hpp"

namespace spinbath {

enum class Branch { lower, upper, amplitude };
enum class EnvelopeForm { gaussian, exponential };

std::string to_string(Branch b);
std::string to_string(EnvelopeForm f);
Branch branch_from_string(const std::string& s);

struct EnvelopePoints {
    std::vector<double> times;
    std::vector<double> values;
    Branch branch = Branch::lower;
};

// v(t) = alpha + beta * g(t), g = exp(-t^2/ts^2) or exp(-t/ts).
struct FitResult {
    EnvelopeForm form = EnvelopeForm::gaussian;
    double alpha = 0.0;
    double beta = 0.0;
    double ts = 0.0;
    double rms_residual = 0.0;
    bool converged = false;
};

struct FormSelection {
    EnvelopeForm selected = EnvelopeForm::gaussian;
    double ratio_exp_over_gauss = 1.0;  // rms(exponential) / rms(gaussian)
    bool indistinguishable = false;     // ratio within [0.9, 1.1]
};

struct PlateauEstimate {
    double mean = 0.0;
    double stddev = 0.0;
    int count = 0;
};

// Local extrema of the series by strict sign change of the first difference.
// lower = minima, upper = maxima, amplitude = (upper - lower)/2 interpolated
// to the minima times. Throws when fewer than 4 extrema are found.
EnvelopePoints extract_envelope(const std::vector<double>& times,
                                const std::vector<double>& values, Branch branch);

// Convenience: envelope of Re<ud|rho|du>(t) restricted to [t_lo, t_hi].
EnvelopePoints extract_envelope(const Trajectory& traj, Branch branch, double t_lo,
                                double t_hi);

// Coarse logarithmic T_s grid (alpha, beta solved linearly at each point)
// followed by damped Gauss-Newton refinement. Degenerate (constant) data
// returns beta = 0, converged = false.
FitResult fit_envelope(const EnvelopePoints& points, EnvelopeForm form);

// Smaller-rms form wins; indistinguishable when the ratio falls in [0.9, 1.1].
// Throws when both fits failed to converge.
FormSelection select_form(const FitResult& gaussian, const FitResult& exponential);

// Mean and standard deviation of rho12 over [t_lo, t_hi]; needs >= 20 samples.
PlateauEstimate plateau_value(const Trajectory& traj, double t_lo, double t_hi);
PlateauEstimate plateau_value(const std::vector<double>& times,
                              const std::vector<double>& values, double t_lo,
                              double t_hi);

}  // namespace spinbath

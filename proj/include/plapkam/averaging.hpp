// Averages over 2 pi_p, the twist constant c* and the oscillatory-integral
// decay experiment
//     V(r) = | (1/2 pi_p) int_0^{2 pi_p} G(r^(1/p) v(theta), t) w(theta) dtheta |.

#ifndef PLAPKAM_AVERAGING_HPP
#define PLAPKAM_AVERAGING_HPP

#include "plapkam/problem.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace plapkam {

/// Exact: the constant Fourier coefficient.
double mean_over_period(const FourierSeries& f);
/// Adaptive Gauss-Kronrod over [0, period], split at `breaks` (points inside
/// the period where fn is not smooth); tol is relative to the L1 norm.
double mean_over_period(const std::function<double(double)>& fn, double period,
                        const std::vector<double>& breaks = {}, double tol = 1e-10);

struct CStar {
    double value = 0.0;  ///< omega^(p + 1/p) d^(1/p) [f], d = p / a1
    bool zero = false;   ///< [f] = 0: no twist, the boundedness result does not apply
};

CStar c_star(const JumpProblem& problem);

struct DecayOptions {
    double t_fixed = 0.0;
    /// Weight w(theta), evaluated at phase lambda * theta.
    FourierSeries weight = FourierSeries::constant(1.0);
    /// Shifts both w and the oscillator phase: theta -> theta + shift.
    double phase_shift = 0.0;
    double delta_target = 0.1;
};

struct DecayExperiment {
    std::vector<double> r_grid;
    std::vector<double> values;
    /// Least-squares slope of log V against log r over values >= 1e-13.
    double fitted_slope = 0.0;
    double prefactor = 0.0;
    std::size_t excluded = 0;
    double delta_target = 0.1;
    /// G and its antiderivative in x are bounded.
    bool gate_passed = false;
    /// gate_passed, and fitted_slope <= -delta_target (or every value is 0).
    bool passed = false;
};

/// Uses the problem's G.  Throws std::invalid_argument unless r_grid is
/// increasing, positive and spans at least three decades.
DecayExperiment decay_experiment(const JumpProblem& problem, const std::vector<double>& r_grid,
                                 const DecayOptions& options = {});

/// [f1](r, t) = (1/2 pi_p) int omega^(p-1) G((D r)^(1/p) v(theta), t) dtheta,
/// with D the action-angle chart constant.
double f1_average(const JumpProblem& problem, double r, double t);

/// CSV `r,value`.
void write_decay_csv(std::ostream& out, const DecayExperiment& experiment);
std::string decay_to_json(const DecayExperiment& experiment);

}  // namespace plapkam

#endif

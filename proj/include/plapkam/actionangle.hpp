// Action-angle chart for the unforced oscillator:
//     x = (D r)^(1/p) v(theta),  y = -(D r)^(1/q) u(theta),  D = q / a1.
// The map (r, theta) -> (x, y) has Jacobian 1 and r = H0(x, y).  theta
// increases along the unforced flow at rate 1/omega.

#ifndef PLAPKAM_ACTIONANGLE_HPP
#define PLAPKAM_ACTIONANGLE_HPP

#include "plapkam/dynamics.hpp"
#include "plapkam/problem.hpp"

namespace plapkam {

struct ActionAngle {
    double r = 0.0;
    double theta = 0.0;  ///< in [0, 2 pi_p)
};

/// D = q / a1.
double chart_scale(const JumpProblem& problem);

/// theta is reduced mod 2 pi_p; throws std::invalid_argument unless r > 0.
PhaseState from_action_angle(const JumpProblem& problem, ActionAngle aa);

/// Throws std::domain_error at the origin.
ActionAngle to_action_angle(const JumpProblem& problem, PhaseState state);

/// Central-difference determinant of d(x, y)/d(r, theta).  step <= 0 uses
/// 1e-6 max(1, r) in r and 1e-6 in theta.
double jacobian_check(const JumpProblem& problem, ActionAngle aa, double step = 0.0);

}  // namespace plapkam

#endif

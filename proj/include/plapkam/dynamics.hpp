// Time integration of
//     x' = -omega^-1 phi_q(y),
//     y' = omega^-1 [a1 phi_p(x+) - b1 phi_p(x-)] - omega^(p-1) [G_x(x, t) + f(t)]
// by Dormand-Prince 5(4) with dense output and x = 0 events.

#ifndef PLAPKAM_DYNAMICS_HPP
#define PLAPKAM_DYNAMICS_HPP

#include "plapkam/problem.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

namespace plapkam {

/// y = -phi_p(omega x').
struct PhaseState {
    double x = 0.0;
    double y = 0.0;
};

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-10;
    /// 0: an 800th of the unforced period.
    double max_step = 0.0;
    double event_tol = 1e-12;
    /// 0 picks a starting step automatically.
    double initial_step = 0.0;
    std::int64_t max_steps = 100'000'000;

    /// Throws std::invalid_argument unless tolerances are positive and steps non-negative.
    void validate() const;
};

/// Step-size underflow, blowup past |x| + |y| > 1e12, non-finite state or
/// step budget exhausted.
class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Sample {
    double t;
    PhaseState state;
};

struct TrajectoryStats {
    std::int64_t accepted = 0;
    std::int64_t rejected = 0;
    double max_error = 0.0;  ///< largest accepted scaled error estimate
};

/// Samples at every step boundary, t monotone in the direction of
/// integration; events are included as step boundaries.
struct Trajectory {
    std::vector<Sample> samples;
    std::vector<double> events;
    TrajectoryStats stats;
};

struct AdvanceResult {
    PhaseState state;
    /// Number of x = 0 crossings on the way.
    std::int64_t crossings = 0;
    /// max |x| + |x'| over the start and every step boundary.
    double sup_norm = 0.0;
    TrajectoryStats stats;
};

std::pair<double, double> rhs(const JumpProblem& problem, double t, PhaseState state);

/// t1 may lie before t0 (backward integration).
Trajectory integrate(const JumpProblem& problem, PhaseState state0, double t0, double t1,
                     const IntegratorConfig& config = {});

/// Same stepping as integrate, keeping only the end state.
AdvanceResult advance(const JumpProblem& problem, PhaseState state0, double t0, double t1,
                      const IntegratorConfig& config = {});

double to_xprime(const JumpProblem& problem, PhaseState state);
PhaseState from_xprime(const JumpProblem& problem, double x, double xprime);

/// H0 = |y|^q / q + (a1 |x+|^p + b1 |x-|^p) / p, conserved when G = f = 0.
double energy_h0(const JumpProblem& problem, PhaseState state);

/// CSV `t,x,y,xprime`, every stride-th sample (the last one always).
void write_trajectory_csv(std::ostream& out, const JumpProblem& problem, const Trajectory& trajectory,
                          std::size_t stride = 1);
/// CSV with a single `t_event` column.
void write_events_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace plapkam

#endif

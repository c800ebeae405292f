// Stroboscopic (period 2 pi_p) map, orbits, rotation numbers, twist fits and
// boundedness probes.

#ifndef PLAPKAM_POINCARE_HPP
#define PLAPKAM_POINCARE_HPP

#include "plapkam/actionangle.hpp"
#include "plapkam/dynamics.hpp"
#include "plapkam/problem.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace plapkam {

/// Solution at t0 + 2 pi_p from state at t0.
PhaseState stroboscopic_map(const JumpProblem& problem, PhaseState state, double t0,
                            const IntegratorConfig& config = {});

/// points[0] is the start; points[i] is its i-th image.
struct SectionOrbit {
    std::vector<double> times;
    std::vector<ActionAngle> points;
    std::vector<PhaseState> raw_points;
    /// Continuous lift of theta, lifts[0] = points[0].theta.
    std::vector<double> lifts;
    double angle_period = 0.0;  ///< 2 pi_p
    /// max |x| + |x'| over every integrator step of the orbit.
    double sup_norm = 0.0;
    double r_min = 0.0;
    double r_max = 0.0;
    /// The integrator aborted; the orbit holds what was reached.
    bool truncated = false;
    std::string error;
};

/// Throws std::invalid_argument when n < 2.
SectionOrbit section_orbit(const JumpProblem& problem, PhaseState state0, std::int64_t n,
                           const IntegratorConfig& config = {}, double t0 = 0.0);

struct RotationEstimate {
    double rho = 0.0;        ///< revolutions of 2 pi_p per iterate
    double std_error = 0.0;  ///< batch means, floor(sqrt(n)) batches
    std::int64_t n_iterates = 0;
};

/// Throws std::invalid_argument with fewer than 10 points and
/// std::domain_error when the orbit dips below r_floor.
RotationEstimate rotation_number(const SectionOrbit& orbit, double r_floor = 1.0);

struct TwistFit {
    std::vector<double> amplitudes;
    /// Orbit averages of r; the fit abscissa.
    std::vector<double> mean_r;
    std::vector<double> rho_values;
    std::vector<double> rho_errors;
    /// kappa and c in rho(r) - 1/omega = c r^-kappa.
    double exponent = 0.0;
    double coefficient = 0.0;
    double r2 = 0.0;
    bool conclusive = false;  ///< r2 >= 0.9
    double expected_exponent = 0.0;  ///< 1/q
    /// omega^(p + 1/p) d^(1/p) [f].
    double c_star_pred = 0.0;
    /// First-order averaging: -(1/p) omega^(p-1) D^(1/p) [f] [v].
    double averaged_coefficient = 0.0;
};

/// Orbits of n_per_orbit points started at (r, theta = 0), t = 0.  Throws
/// std::invalid_argument unless r_grid is geometric with >= 6 points over
/// >= 2 decades and [f] != 0; IntegrationError if an orbit aborts.
TwistFit twist_fit(const JumpProblem& problem, const std::vector<double>& r_grid, std::int64_t n_per_orbit,
                   const IntegratorConfig& config = {});

struct OrbitProbe {
    double amplitude = 0.0;
    std::int64_t iterates = 0;
    double sup_norm = 0.0;
    double r_min = 0.0;
    double r_max = 0.0;
    /// Least-squares slope of r per iterate and its 95% interval, from
    /// batch means over floor(sqrt(n)) batches.
    double slope = 0.0;
    double slope_low = 0.0;
    double slope_high = 0.0;
    bool completed = false;
    std::string error;

    double ratio() const { return r_max / r_min; }
    bool slope_consistent_with_zero() const { return slope_low <= 0.0 && 0.0 <= slope_high; }
};

struct BoundednessReport {
    Verdict verdict = Verdict::theorem1_applies;
    bool overridden = false;
    std::vector<OrbitProbe> orbits;
};

struct ProbeOptions {
    IntegratorConfig config;
    /// Run even when the hypotheses fail (contrast experiments).
    bool override_hypotheses = false;
    /// Diophantine window for the hypothesis check.
    double gamma = 0.2;
    double tau = 1.5;
    std::int64_t m_max = 10'000;
};

/// One orbit of n_periods + 1 points per amplitude, started at
/// (r, theta = 0), t = 0.  Throws std::invalid_argument unless the hypotheses
/// hold or are overridden.
BoundednessReport boundedness_probe(const JumpProblem& problem, const std::vector<double>& amplitudes,
                                    std::int64_t n_periods, const ProbeOptions& options = {});

/// Area of the image of a small triangle over area of the triangle, averaged
/// over a triangle of side `size` centred on the state at aa and its point
/// reflection (which cancels the leading curvature error).
double area_ratio(const JumpProblem& problem, ActionAngle aa, double size, const IntegratorConfig& config = {});

/// CSV `iterate,t,x,y,r,theta`.
void write_section_csv(std::ostream& out, const SectionOrbit& orbit);
std::string twist_to_json(const TwistFit& fit);
std::string boundedness_to_json(const BoundednessReport& report);

}  // namespace plapkam

#endif

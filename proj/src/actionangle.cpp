#include "plapkam/actionangle.hpp"

#include <cmath>
#include <stdexcept>

namespace plapkam {

double chart_scale(const JumpProblem& problem)
{
    return problem.q() / problem.coefs.a1();
}

PhaseState from_action_angle(const JumpProblem& problem, ActionAngle aa)
{
    if (!(aa.r > 0.0) || !std::isfinite(aa.r) || !std::isfinite(aa.theta)) {
        throw std::invalid_argument("from_action_angle: r must be positive and finite");
    }
    const double dr = chart_scale(problem) * aa.r;
    const AuxPoint pt = problem.aux().at(problem.trig().reduce(aa.theta));
    return {std::pow(dr, 1.0 / problem.p()) * pt.v, -std::pow(dr, 1.0 / problem.q()) * pt.u};
}

ActionAngle to_action_angle(const JumpProblem& problem, PhaseState state)
{
    if (state.x == 0.0 && state.y == 0.0) {
        throw std::domain_error("to_action_angle: the angle is undefined at the origin");
    }
    // H0 = D r a1 / q = r.
    const double r = energy_h0(problem, state);
    const double dr = chart_scale(problem) * r;
    const double v = state.x / std::pow(dr, 1.0 / problem.p());
    const double u = -state.y / std::pow(dr, 1.0 / problem.q());
    return {r, problem.aux().angle_of(v, u)};
}

double jacobian_check(const JumpProblem& problem, ActionAngle aa, double step)
{
    const double hr = step > 0.0 ? step : 1e-6 * std::max(1.0, aa.r);
    const double ht = step > 0.0 ? step : 1e-6;
    const auto at = [&](double r, double th) { return from_action_angle(problem, {r, th}); };
    const PhaseState rp = at(aa.r + hr, aa.theta), rm = at(aa.r - hr, aa.theta);
    const PhaseState tp = at(aa.r, aa.theta + ht), tm = at(aa.r, aa.theta - ht);
    const double xr = (rp.x - rm.x) / (2.0 * hr), yr = (rp.y - rm.y) / (2.0 * hr);
    const double xt = (tp.x - tm.x) / (2.0 * ht), yt = (tp.y - tm.y) / (2.0 * ht);
    return xr * yt - xt * yr;
}

}  // namespace plapkam

#include "plapkam/dynamics.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

namespace plapkam {

namespace {

using Vec = std::array<double, 2>;

constexpr double kBlowup = 1e12;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense output (Hairer's contd5).
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

class Field {
public:
    explicit Field(const JumpProblem& pr)
        : pr_(pr), p_(pr.p()), q_(pr.q()), inv_omega_(1.0 / pr.omega), wp1_(std::pow(pr.omega, pr.p() - 1.0)),
          a1_(pr.coefs.a1()), b1_(pr.coefs.b1()), unforced_(pr.forcing.f.terms.empty() ||
                                                           (pr.forcing.f.sup_bound() == 0.0)),
          g_zero_(std::holds_alternative<ZeroG>(pr.forcing.g))
    {
    }

    Vec operator()(double t, const Vec& s) const
    {
        const double x = s[0];
        const double spring = x > 0.0 ? a1_ * phi(x, p_) : (x < 0.0 ? b1_ * phi(x, p_) : 0.0);
        double force = 0.0;
        if (!unforced_) {
            force += eval_f(pr_, t);
        }
        if (!g_zero_) {
            force += eval_Gx(pr_, x, t);
        }
        return {-inv_omega_ * phi(s[1], q_), inv_omega_ * spring - wp1_ * force};
    }

private:
    const JumpProblem& pr_;
    double p_, q_, inv_omega_, wp1_, a1_, b1_;
    bool unforced_, g_zero_;
};

struct Step {
    Vec y1;
    Vec k7;  // f(t + h, y1), reused as the next k1
    double err;
    std::array<Vec, 7> k;
};

class Stepper {
public:
    Stepper(const JumpProblem& pr, const IntegratorConfig& cfg) : field_(pr), cfg_(cfg) {}

    const Field& field() const { return field_; }

    Step step(double t, const Vec& y, const Vec& k1, double h, double tol_scale = 1.0) const
    {
        Step s;
        auto& k = s.k;
        k[0] = k1;
        auto stage = [&](double c, std::initializer_list<double> coef) {
            Vec z = y;
            std::size_t j = 0;
            for (double a : coef) {
                for (int i = 0; i < 2; ++i) {
                    z[i] += h * a * k[j][i];
                }
                ++j;
            }
            return field_(t + c * h, z);
        };
        k[1] = stage(c2, {a21});
        k[2] = stage(c3, {a31, a32});
        k[3] = stage(c4, {a41, a42, a43});
        k[4] = stage(c5, {a51, a52, a53, a54});
        k[5] = stage(1.0, {a61, a62, a63, a64, a65});
        for (int i = 0; i < 2; ++i) {
            s.y1[i] = y[i] + h * (a71 * k[0][i] + a73 * k[2][i] + a74 * k[3][i] + a75 * k[4][i] + a76 * k[5][i]);
        }
        k[6] = field_(t + h, s.y1);
        s.k7 = k[6];
        double sum = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double e =
                h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] + e6 * k[5][i] + e7 * k[6][i]);
            const double sc =
                tol_scale * (cfg_.abs_tol + cfg_.rel_tol * std::max(std::fabs(y[i]), std::fabs(s.y1[i])));
            sum += (e / sc) * (e / sc);
        }
        s.err = std::sqrt(0.5 * sum);
        return s;
    }

    // Dense output of component c at fraction theta of the step.
    static double dense(int c, const Vec& y0, const Step& s, double h, double theta)
    {
        const auto& k = s.k;
        const double ydiff = s.y1[c] - y0[c];
        const double bspl = h * k[0][c] - ydiff;
        const double r4 = ydiff - h * k[6][c] - bspl;
        const double r5 =
            h * (d1 * k[0][c] + d3 * k[2][c] + d4 * k[3][c] + d5 * k[4][c] + d6 * k[5][c] + d7 * k[6][c]);
        const double t1 = 1.0 - theta;
        return y0[c] + theta * (ydiff + t1 * (bspl + theta * (r4 + t1 * r5)));
    }

private:
    Field field_;
    const IntegratorConfig& cfg_;
};

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_state(const Vec& y, double t)
{
    if (!std::isfinite(y[0]) || !std::isfinite(y[1])) {
        throw IntegrationError("non-finite state at t = " + std::to_string(t));
    }
    if (std::fabs(y[0]) + std::fabs(y[1]) > kBlowup) {
        throw IntegrationError("blowup guard |x| + |y| > 1e12 tripped at t = " + std::to_string(t));
    }
}

// Starting step in the spirit of Hairer's hinit, simplified for 2 components.
double initial_step(const Stepper& st, double t, const Vec& y, const Vec& f0, const IntegratorConfig& cfg,
                    double dir)
{
    if (cfg.initial_step > 0.0) {
        return cfg.initial_step;
    }
    double dnf = 0.0, dny = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::fabs(y[i]);
        dnf += (f0[i] / sc) * (f0[i] / sc);
        dny += (y[i] / sc) * (y[i] / sc);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
    h = std::min(h, cfg.max_step);
    Vec y1{y[0] + dir * h * f0[0], y[1] + dir * h * f0[1]};
    const Vec f1 = st.field()(t + dir * h, y1);
    double der2 = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::fabs(y[i]);
        der2 += ((f1[i] - f0[i]) / sc) * ((f1[i] - f0[i]) / sc);
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(std::fabs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, cfg.max_step});
}

// Where a component c crosses zero, the other component's derivative has a
// term ~ |t - t*|^e: e = p - 1 at x = 0 (in y') and e = q - 1 at y = 0 (in
// x').  For non-integer e the embedded estimate undershoots the true error by
// a factor of 30-60 on a step with t* at an end.  It is reliable once the step
// is no longer than its distance to t*, so such crossings are made step
// boundaries and steps are capped by that distance, with a floor sized from
// the leading singular error term.
class CrossingGuard {
public:
    CrossingGuard(const JumpProblem& pr, const IntegratorConfig& cfg)
        : cfg_(cfg), zone_(kZoneFraction * pr.period() * pr.omega)
    {
        expo_ = {pr.p() - 1.0, pr.q() - 1.0};
        coef_ = {std::max(pr.coefs.a1(), pr.coefs.b1()) / pr.omega, 1.0 / pr.omega};
        for (int c = 0; c < 2; ++c) {
            active_[c] = std::fabs(expo_[c] - std::round(expo_[c])) > 1e-12;
            k_[c] = dp5_error(expo_[c]);
        }
    }

    bool active(int c) const { return active_[c]; }

    // Tolerance factor for a step starting at (y, dy).
    double tol_scale(const Vec& y, const Vec& dy, const std::array<double, 2>& since, double dir) const
    {
        for (int c = 0; c < 2; ++c) {
            if (active_[c] && distance(c, y, dy, since[c], dir, 1.0) < zone_) {
                return kZoneShare;
            }
        }
        return 1.0;
    }

    double cap(const Vec& y, const Vec& dy, const std::array<double, 2>& since, double dir) const
    {
        double h = std::numeric_limits<double>::infinity();
        for (int c = 0; c < 2; ++c) {
            const double rate = std::fabs(dy[c]);
            if (!active_[c] || rate == 0.0) {
                continue;
            }
            // The singular error has one sign at every crossing, so it is
            // held well below the tolerance instead of at it.
            const int o = 1 - c;
            const double sc = kSingularShare * (cfg_.abs_tol + cfg_.rel_tol * std::fabs(y[o]));
            const double floor =
                std::pow(sc / (k_[c] * coef_[c] * std::pow(rate, expo_[c])), 1.0 / (expo_[c] + 1.0));
            h = std::min(h, std::max(floor, distance(c, y, dy, since[c], dir, kRatio)));
        }
        return h;
    }

private:
    // Distance to the last or next crossing of component c, scaled by ratio.
    static double distance(int c, const Vec& y, const Vec& dy, double since, double dir, double ratio)
    {
        double dist = std::isnan(since) ? std::numeric_limits<double>::infinity() : ratio * since;
        const double rate = std::fabs(dy[c]);
        if (rate > 0.0 && y[c] * dy[c] * dir < 0.0) {
            dist = std::min(dist, ratio / (1.0 + ratio) * std::fabs(y[c]) / rate);
        }
        return dist;
    }

    // Quadrature error of the fifth-order weights on tau^e over [0, 1], with
    // the singularity at either end.
    static double dp5_error(double e)
    {
        constexpr std::array<double, 7> b{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
        constexpr std::array<double, 7> c{0.0, c2, c3, c4, c5, 1.0, 1.0};
        double left = -1.0 / (e + 1.0), right = left;
        for (std::size_t i = 0; i < b.size(); ++i) {
            left += b[i] * std::pow(c[i], e);
            right += b[i] * std::pow(1.0 - c[i], e);
        }
        return std::max(std::fabs(left), std::fabs(right));
    }

    static constexpr double kSingularShare = 1e-4;
    // Within this fraction of the unforced period from a crossing the
    // singular term dominates the local error, again with a fixed sign.
    static constexpr double kZoneFraction = 0.125;
    static constexpr double kZoneShare = 0.0002;
    // Largest step length relative to the distance from t*.
    static constexpr double kRatio = 0.25;
    const IntegratorConfig& cfg_;
    double zone_;
    std::array<double, 2> expo_{}, coef_{}, k_{};
    std::array<bool, 2> active_{};
};

constexpr double kStepsPerPeriod = 800.0;

// Core loop.  on_step(t, y) is called after every accepted step boundary
// (including event points); on_event(t) at each crossing.
template <class OnStep, class OnEvent>
TrajectoryStats run(const JumpProblem& problem, PhaseState s0, double t0, double t1, IntegratorConfig cfg,
                    OnStep on_step, OnEvent on_event)
{
    cfg.validate();
    if (cfg.max_step == 0.0) {
        // The DP5 estimate is slightly biased on these orbits and the bias
        // accumulates as energy drift; short steps keep it below the tolerance
        // over ~1e3 periods.
        cfg.max_step = problem.period() * problem.omega / kStepsPerPeriod;
    }
    if (!std::isfinite(t0) || !std::isfinite(t1)) {
        throw std::invalid_argument("integrate: non-finite time bounds");
    }
    TrajectoryStats stats;
    Vec y{s0.x, s0.y};
    check_state(y, t0);
    if (t1 == t0) {
        return stats;
    }
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const Stepper st(problem, cfg);
    double t = t0;
    Vec k1 = st.field()(t, y);
    const CrossingGuard guard(problem, cfg);
    // Side of x = 0 (and of y = 0) the solution is on, or heading to when it
    // sits on it.  Guarded turning points are step boundaries as well; they
    // are not reported.
    const int components = guard.active(1) ? 2 : 1;
    const bool guarded = guard.active(0) || guard.active(1);
    std::array<double, 2> side{};
    for (int c = 0; c < 2; ++c) {
        side[c] = sign_of(y[c]);
        if (side[c] == 0.0) {
            side[c] = dir * sign_of(k1[c]);
        }
    }
    double h = initial_step(st, t, y, k1, cfg, dir);
    std::array<double, 2> last_cross{};
    for (int c = 0; c < 2; ++c) {
        last_cross[c] = y[c] == 0.0 ? t : std::numeric_limits<double>::quiet_NaN();
    }
    const auto since = [&] { return std::array<double, 2>{std::fabs(t - last_cross[0]), std::fabs(t - last_cross[1])}; };
    double err_old = 1e-4;
    bool last_rejected = false;
    constexpr double beta = 0.04, expo1 = 0.2 - beta * 0.75, safe = 0.9, facmin = 0.2, facmax = 10.0;

    while ((t1 - t) * dir > 0.0) {
        if (stats.accepted + stats.rejected >= cfg.max_steps) {
            throw IntegrationError("step budget exhausted at t = " + std::to_string(t));
        }
        h = std::min(h, cfg.max_step);
        if (guarded) {
            h = std::min(h, guard.cap(y, k1, since(), dir));
        }
        bool final_step = false;
        if (h >= std::fabs(t1 - t)) {
            h = std::fabs(t1 - t);
            final_step = true;
        }
        if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(t))) {
            if (final_step) {
                t = t1;
                on_step(t, y);
                break;
            }
            throw IntegrationError("step size underflow at t = " + std::to_string(t));
        }
        const double hs = dir * h;
        const double tol_scale = guarded ? guard.tol_scale(y, k1, since(), dir) : 1.0;
        const Step s = st.step(t, y, k1, hs, tol_scale);
        if (!(s.err <= 1.0)) {
            ++stats.rejected;
            const double fac = std::isfinite(s.err) ? std::pow(s.err, expo1) / safe : 1.0 / facmin;
            h /= std::min(1.0 / facmin, std::max(1.0, fac));
            if (!std::isfinite(s.err)) {
                h *= facmin;
            }
            last_rejected = true;
            continue;
        }

        // Accepted.  Look for the earliest sign change within the step.
        int which = -1;
        double theta = 2.0;
        for (int c = 0; c < components; ++c) {
            if (side[c] == 0.0) {
                side[c] = sign_of(s.y1[c]);
                continue;
            }
            if (s.y1[c] * side[c] >= 0.0) {
                continue;
            }
            const auto fc = [&](double th) { return Stepper::dense(c, y, s, hs, th); };
            const double fa = y[c] * side[c] > 0.0 ? y[c] : side[c] * std::numeric_limits<double>::min();
            std::uintmax_t iters = 100;
            const auto root = boost::math::tools::toms748_solve(
                fc, 0.0, 1.0, fa, s.y1[c], [](double lo, double hi) { return std::fabs(hi - lo) <= 1e-15; },
                iters);
            const double th = 0.5 * (root.first + root.second);
            if (th < theta) {
                theta = th;
                which = c;
            }
        }
        if (which >= 0) {
            // Refine with genuine steps: Newton on the component, kept inside
            // the accepted step.
            double he = theta * hs;
            Step se = st.step(t, y, k1, he, tol_scale);
            for (int it = 0; it < 6; ++it) {
                const double rate = se.k7[which];
                if (rate == 0.0) {
                    break;
                }
                double he_new = he - se.y1[which] / rate;
                if (he_new * dir <= 0.0) {
                    he_new = 0.5 * he;
                } else if (std::fabs(he_new) > h) {
                    he_new = hs;
                }
                const bool small = std::fabs(he_new - he) <= cfg.event_tol;
                he = he_new;
                se = st.step(t, y, k1, he, tol_scale);
                if (small) {
                    break;
                }
            }
            t += he;
            y = se.y1;
            k1 = se.k7;
            side[which] = -side[which];
            last_cross[which] = t;
            check_state(y, t);
            ++stats.accepted;
            stats.max_error = std::max(stats.max_error, se.err);
            if (which == 0) {
                on_event(t);
            }
            on_step(t, y);
            // Keep the step size that was just accepted.
            last_rejected = false;
            continue;
        }

        ++stats.accepted;
        stats.max_error = std::max(stats.max_error, s.err);
        t = final_step ? t1 : t + hs;
        y = s.y1;
        k1 = s.k7;
        check_state(y, t);
        on_step(t, y);

        const double fac11 = std::pow(std::max(s.err, 1e-16), expo1);
        double fac = fac11 / std::pow(err_old, beta);
        fac = std::clamp(fac / safe, 1.0 / facmax, 1.0 / facmin);
        double h_new = h / fac;
        if (last_rejected) {
            h_new = std::min(h_new, h);
        }
        err_old = std::max(s.err, 1e-4);
        last_rejected = false;
        h = h_new;
    }
    return stats;
}

}  // namespace

void IntegratorConfig::validate() const
{
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(max_step >= 0.0) || !(event_tol > 0.0) ||
        !(initial_step >= 0.0) || max_steps <= 0) {
        throw std::invalid_argument("integrator configuration values must be positive");
    }
}

std::pair<double, double> rhs(const JumpProblem& problem, double t, PhaseState state)
{
    const Vec d = Field(problem)(t, {state.x, state.y});
    return {d[0], d[1]};
}

Trajectory integrate(const JumpProblem& problem, PhaseState state0, double t0, double t1,
                     const IntegratorConfig& config)
{
    Trajectory tr;
    tr.samples.push_back({t0, state0});
    tr.stats = run(
        problem, state0, t0, t1, config,
        [&](double t, const Vec& y) { tr.samples.push_back({t, {y[0], y[1]}}); },
        [&](double t) { tr.events.push_back(t); });
    return tr;
}

AdvanceResult advance(const JumpProblem& problem, PhaseState state0, double t0, double t1,
                      const IntegratorConfig& config)
{
    AdvanceResult r;
    r.state = state0;
    const auto norm = [&](double x, double y) { return std::fabs(x) + std::fabs(phi(y, problem.q())) / problem.omega; };
    r.sup_norm = norm(state0.x, state0.y);
    r.stats = run(
        problem, state0, t0, t1, config,
        [&](double, const Vec& y) {
            r.state = {y[0], y[1]};
            r.sup_norm = std::max(r.sup_norm, norm(y[0], y[1]));
        },
        [&](double) { ++r.crossings; });
    return r;
}

double to_xprime(const JumpProblem& problem, PhaseState state)
{
    return -phi(state.y, problem.q()) / problem.omega;
}

PhaseState from_xprime(const JumpProblem& problem, double x, double xprime)
{
    return {x, -phi(problem.omega * xprime, problem.p())};
}

double energy_h0(const JumpProblem& problem, PhaseState state)
{
    const double p = problem.p(), q = problem.q();
    const double spring = state.x >= 0.0 ? problem.coefs.a1() * std::pow(state.x, p)
                                         : problem.coefs.b1() * std::pow(-state.x, p);
    return std::pow(std::fabs(state.y), q) / q + spring / p;
}

void write_trajectory_csv(std::ostream& out, const JumpProblem& problem, const Trajectory& trajectory,
                          std::size_t stride)
{
    stride = std::max<std::size_t>(stride, 1);
    out << "t,x,y,xprime\n";
    char line[160];
    const std::size_t n = trajectory.samples.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (i % stride != 0 && i + 1 != n) {
            continue;
        }
        const auto& s = trajectory.samples[i];
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", s.t, s.state.x, s.state.y,
                      to_xprime(problem, s.state));
        out << line;
    }
}

void write_events_csv(std::ostream& out, const Trajectory& trajectory)
{
    out << "t_event\n";
    char line[40];
    for (double t : trajectory.events) {
        std::snprintf(line, sizeof line, "%.17g\n", t);
        out << line;
    }
}

}  // namespace plapkam

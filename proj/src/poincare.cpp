#include "plapkam/poincare.hpp"

#include "plapkam/parallel.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace plapkam {

namespace {

using json = nlohmann::ordered_json;

// Zeros of v in (a, b]: the two per period sit at z1 and 2 pi_p - z1.
std::int64_t zeros_between(double a, double b, double z1, double period)
{
    std::int64_t n = 0;
    for (double z : {z1, period - z1}) {
        n += static_cast<std::int64_t>(std::floor((b - z) / period) - std::floor((a - z) / period));
    }
    return n;
}

// Unwrapped angle advance from theta0 to theta1 given the number of x = 0
// crossings on the way.  Between two crossings v keeps its sign, so the
// crossing count pins down the number of whole turns when theta advances
// monotonically; otherwise the nearest candidate to c/2 turns is taken.
double angle_advance(double theta0, double theta1, std::int64_t crossings, double z1, double period)
{
    const double base = theta1 - theta0;
    const double k_est = std::round((0.5 * static_cast<double>(crossings) * period - base) / period);
    for (double dk : {0.0, -1.0, 1.0}) {
        const double delta = base + (k_est + dk) * period;
        if (delta >= 0.0 && zeros_between(theta0, theta0 + delta, z1, period) == crossings) {
            return delta;
        }
    }
    return base + k_est * period;
}

struct LineFit {
    double slope;
    double intercept;
    double r2;
    double slope_se;  // from residuals, n - 2 degrees of freedom
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f{};
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    const double sse = std::max(0.0, syy - f.slope * sxy);
    f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    f.slope_se = x.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
    return f;
}

// Means of consecutive batches of floor(sqrt(n)) values; a trailing partial
// batch is dropped.
std::vector<double> batch_means(const std::vector<double>& values, std::size_t& batch)
{
    batch = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(values.size()))));
    std::vector<double> means;
    for (std::size_t start = 0; start + batch <= values.size(); start += batch) {
        double s = 0.0;
        for (std::size_t i = start; i < start + batch; ++i) {
            s += values[i];
        }
        means.push_back(s / static_cast<double>(batch));
    }
    return means;
}

double triangle_area(PhaseState a, PhaseState b, PhaseState c)
{
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

}  // namespace

PhaseState stroboscopic_map(const JumpProblem& problem, PhaseState state, double t0, const IntegratorConfig& config)
{
    return advance(problem, state, t0, t0 + problem.period(), config).state;
}

SectionOrbit section_orbit(const JumpProblem& problem, PhaseState state0, std::int64_t n,
                           const IntegratorConfig& config, double t0)
{
    if (n < 2) {
        throw std::invalid_argument("section_orbit: n must be at least 2");
    }
    const double period = problem.period();
    const double z1 = problem.aux().first_zero();
    SectionOrbit o;
    o.angle_period = period;
    o.times.reserve(static_cast<std::size_t>(n));
    o.points.reserve(static_cast<std::size_t>(n));
    o.raw_points.reserve(static_cast<std::size_t>(n));
    o.lifts.reserve(static_cast<std::size_t>(n));

    const auto push = [&](double t, PhaseState s, double lift) {
        const ActionAngle aa = to_action_angle(problem, s);
        o.times.push_back(t);
        o.points.push_back(aa);
        o.raw_points.push_back(s);
        o.lifts.push_back(lift);
        o.r_min = o.points.size() == 1 ? aa.r : std::min(o.r_min, aa.r);
        o.r_max = std::max(o.r_max, aa.r);
    };
    push(t0, state0, to_action_angle(problem, state0).theta);
    o.sup_norm = std::fabs(state0.x) + std::fabs(to_xprime(problem, state0));

    PhaseState s = state0;
    for (std::int64_t i = 1; i < n; ++i) {
        // Times are i periods from t0 rather than accumulated sums.
        const double ta = t0 + static_cast<double>(i - 1) * period;
        const double tb = t0 + static_cast<double>(i) * period;
        AdvanceResult r;
        try {
            r = advance(problem, s, ta, tb, config);
        } catch (const IntegrationError& e) {
            o.truncated = true;
            o.error = e.what();
            break;
        }
        o.sup_norm = std::max(o.sup_norm, r.sup_norm);
        s = r.state;
        const double theta_prev = o.points.back().theta;
        const ActionAngle aa = to_action_angle(problem, s);
        push(tb, s, o.lifts.back() + angle_advance(theta_prev, aa.theta, r.crossings, z1, period));
    }
    return o;
}

RotationEstimate rotation_number(const SectionOrbit& orbit, double r_floor)
{
    if (orbit.points.size() < 10) {
        throw std::invalid_argument("rotation_number: at least 10 orbit points are required");
    }
    if (orbit.r_min < r_floor) {
        throw std::domain_error("rotation_number: orbit dips below r_floor = " + std::to_string(r_floor));
    }
    std::vector<double> steps(orbit.lifts.size() - 1);
    for (std::size_t i = 0; i + 1 < orbit.lifts.size(); ++i) {
        steps[i] = (orbit.lifts[i + 1] - orbit.lifts[i]) / orbit.angle_period;
    }
    RotationEstimate est;
    est.n_iterates = static_cast<std::int64_t>(steps.size());
    est.rho = (orbit.lifts.back() - orbit.lifts.front()) / orbit.angle_period / static_cast<double>(steps.size());
    std::size_t batch = 0;
    const auto means = batch_means(steps, batch);
    if (means.size() >= 2) {
        double m = 0.0;
        for (double v : means) {
            m += v;
        }
        m /= static_cast<double>(means.size());
        double var = 0.0;
        for (double v : means) {
            var += (v - m) * (v - m);
        }
        var /= static_cast<double>(means.size() - 1);
        est.std_error = std::sqrt(var / static_cast<double>(means.size()));
    }
    return est;
}

TwistFit twist_fit(const JumpProblem& problem, const std::vector<double>& r_grid, std::int64_t n_per_orbit,
                   const IntegratorConfig& config)
{
    if (r_grid.size() < 6) {
        throw std::invalid_argument("twist_fit: r_grid needs at least 6 points");
    }
    const double ratio = r_grid[1] / r_grid[0];
    for (std::size_t i = 0; i + 1 < r_grid.size(); ++i) {
        if (!(r_grid[i] > 0.0) || !(r_grid[i + 1] > r_grid[i]) ||
            std::fabs(r_grid[i + 1] / r_grid[i] - ratio) > 1e-9 * ratio) {
            throw std::invalid_argument("twist_fit: r_grid must be positive, increasing and geometric");
        }
    }
    if (r_grid.back() / r_grid.front() < 100.0 * (1.0 - 1e-12)) {
        throw std::invalid_argument("twist_fit: r_grid must span at least two decades");
    }
    if (!mean_is_nonzero(problem.forcing.f)) {
        throw std::invalid_argument("twist_fit: the forcing mean [f] is zero, so there is no twist");
    }
    if (n_per_orbit < 10) {
        throw std::invalid_argument("twist_fit: n_per_orbit must be at least 10");
    }
    config.validate();

    TwistFit fit;
    const std::size_t m = r_grid.size();
    fit.amplitudes = r_grid;
    fit.mean_r.assign(m, 0.0);
    fit.rho_values.assign(m, 0.0);
    fit.rho_errors.assign(m, 0.0);
    parallel_for(m, [&](std::size_t i) {
        const SectionOrbit o = section_orbit(problem, from_action_angle(problem, {r_grid[i], 0.0}), n_per_orbit, config);
        if (o.truncated) {
            throw IntegrationError("twist_fit: orbit at r = " + std::to_string(r_grid[i]) + " aborted: " + o.error);
        }
        double mean = 0.0;
        for (const auto& pt : o.points) {
            mean += pt.r;
        }
        fit.mean_r[i] = mean / static_cast<double>(o.points.size());
        const RotationEstimate est = rotation_number(o);
        fit.rho_values[i] = est.rho;
        fit.rho_errors[i] = est.std_error;
    });

    const double rho_inf = 1.0 / problem.omega;
    std::vector<double> lx(m), ly(m);
    double sign_sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double dev = fit.rho_values[i] - rho_inf;
        lx[i] = std::log(fit.mean_r[i]);
        ly[i] = std::log(std::fabs(dev));
        sign_sum += dev > 0.0 ? 1.0 : -1.0;
    }
    const LineFit lf = fit_line(lx, ly);
    fit.exponent = -lf.slope;
    fit.coefficient = (sign_sum >= 0.0 ? 1.0 : -1.0) * std::exp(lf.intercept);
    fit.r2 = lf.r2;
    fit.conclusive = std::isfinite(lf.r2) && lf.r2 >= 0.9;

    const double p = problem.p();
    const double mean_f = problem.forcing.f.mean();
    fit.expected_exponent = 1.0 / problem.q();
    fit.c_star_pred = std::pow(problem.omega, p + 1.0 / p) * std::pow(problem.d, 1.0 / p) * mean_f;
    fit.averaged_coefficient = -std::pow(problem.omega, p - 1.0) * std::pow(chart_scale(problem), 1.0 / p) * mean_f *
                               problem.aux().mean() / p;
    return fit;
}

BoundednessReport boundedness_probe(const JumpProblem& problem, const std::vector<double>& amplitudes,
                                    std::int64_t n_periods, const ProbeOptions& options)
{
    if (amplitudes.empty() || n_periods < 4) {
        throw std::invalid_argument("boundedness_probe: need amplitudes and at least 4 periods");
    }
    for (double a : amplitudes) {
        if (!(a > 0.0) || !std::isfinite(a)) {
            throw std::invalid_argument("boundedness_probe: amplitudes must be positive");
        }
    }
    options.config.validate();
    BoundednessReport report;
    report.verdict = check_hypotheses(problem, options.gamma, options.tau, options.m_max).verdict;
    report.overridden = options.override_hypotheses;
    if (report.verdict != Verdict::theorem1_applies && !options.override_hypotheses) {
        throw std::invalid_argument(std::string("boundedness_probe: hypotheses fail (") +
                                    verdict_name(report.verdict) + ")");
    }
    report.orbits.resize(amplitudes.size());
    parallel_for(amplitudes.size(), [&](std::size_t i) {
        OrbitProbe& probe = report.orbits[i];
        probe.amplitude = amplitudes[i];
        const SectionOrbit o = section_orbit(problem, from_action_angle(problem, {amplitudes[i], 0.0}),
                                             n_periods + 1, options.config);
        probe.iterates = static_cast<std::int64_t>(o.points.size()) - 1;
        probe.sup_norm = o.sup_norm;
        probe.r_min = o.r_min;
        probe.r_max = o.r_max;
        probe.completed = !o.truncated;
        probe.error = o.error;

        std::vector<double> r(o.points.size());
        for (std::size_t k = 0; k < r.size(); ++k) {
            r[k] = o.points[k].r;
        }
        std::size_t batch = 0;
        const auto means = batch_means(r, batch);
        if (means.size() < 3) {
            probe.slope = probe.slope_low = probe.slope_high = std::numeric_limits<double>::quiet_NaN();
            return;
        }
        std::vector<double> centre(means.size());
        for (std::size_t b = 0; b < means.size(); ++b) {
            centre[b] = static_cast<double>(b * batch) + 0.5 * static_cast<double>(batch - 1);
        }
        const LineFit lf = fit_line(centre, means);
        const boost::math::students_t dist(static_cast<double>(means.size() - 2));
        const double half = boost::math::quantile(dist, 0.975) * lf.slope_se;
        probe.slope = lf.slope;
        probe.slope_low = lf.slope - half;
        probe.slope_high = lf.slope + half;
    });
    return report;
}

double area_ratio(const JumpProblem& problem, ActionAngle aa, double size, const IntegratorConfig& config)
{
    if (!(size > 0.0)) {
        throw std::invalid_argument("area_ratio: size must be positive");
    }
    const PhaseState c = from_action_angle(problem, aa);
    const double h = 0.5 * std::sqrt(3.0) * size;
    const std::array<std::pair<double, double>, 3> e{{{size, 0.0}, {-0.5 * size, h}, {-0.5 * size, -h}}};
    double before = 0.0, after = 0.0;
    for (double sign : {1.0, -1.0}) {
        std::array<PhaseState, 3> v{}, w{};
        for (std::size_t k = 0; k < 3; ++k) {
            v[k] = {c.x + sign * e[k].first, c.y + sign * e[k].second};
            w[k] = stroboscopic_map(problem, v[k], 0.0, config);
        }
        before += triangle_area(v[0], v[1], v[2]);
        after += triangle_area(w[0], w[1], w[2]);
    }
    return after / before;
}

void write_section_csv(std::ostream& out, const SectionOrbit& orbit)
{
    out << "iterate,t,x,y,r,theta\n";
    char buf[256];
    for (std::size_t i = 0; i < orbit.points.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, orbit.times[i], orbit.raw_points[i].x,
                      orbit.raw_points[i].y, orbit.points[i].r, orbit.points[i].theta);
        out << buf;
    }
}

std::string twist_to_json(const TwistFit& fit)
{
    json j;
    j["grid"] = fit.amplitudes;
    j["mean_r"] = fit.mean_r;
    j["rho"] = fit.rho_values;
    j["rho_stderr"] = fit.rho_errors;
    j["exponent"] = fit.exponent;
    j["expected_exponent"] = fit.expected_exponent;
    j["coefficient"] = fit.coefficient;
    j["averaged_coefficient"] = fit.averaged_coefficient;
    j["r2"] = fit.r2;
    j["conclusive"] = fit.conclusive;
    j["c_star_pred"] = fit.c_star_pred;
    return j.dump(2) + "\n";
}

std::string boundedness_to_json(const BoundednessReport& report)
{
    json j;
    j["verdict"] = verdict_name(report.verdict);
    j["overridden"] = report.overridden;
    json orbits = json::array();
    for (const auto& o : report.orbits) {
        json e;
        e["amplitude"] = o.amplitude;
        e["completed"] = o.completed;
        if (!o.completed) {
            e["error"] = o.error;
        }
        e["iterates"] = o.iterates;
        e["sup_norm"] = o.sup_norm;
        e["r_min"] = o.r_min;
        e["r_max"] = o.r_max;
        e["r_ratio"] = o.ratio();
        e["slope"] = o.slope;
        e["slope_ci95"] = {o.slope_low, o.slope_high};
        e["slope_consistent_with_zero"] = o.slope_consistent_with_zero();
        orbits.push_back(std::move(e));
    }
    j["orbits"] = std::move(orbits);
    return j.dump(2) + "\n";
}

}  // namespace plapkam

#include "plapkam/averaging.hpp"

#include "plapkam/actionangle.hpp"
#include "plapkam/parallel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace plapkam {

namespace {

// Joints of v in [0, 2 pi_p]: extrema at 0 and pi_p, zeros at z1 and
// 2 pi_p - z1.  v is monotone between consecutive joints.
std::vector<double> joints(const JumpProblem& problem)
{
    const double z1 = problem.aux().first_zero();
    return {z1, problem.pi_p(), problem.period() - z1};
}

// Each piece is cut into min_panels panels before adaptive refinement; tol is
// relative to the L1 norm of the integrand on each panel.  The decay
// integrand oscillates about A (max v - min v) / (2 pi) times per piece.
// For large A the rounding noise of v, amplified by A, sets a floor near
// 1e-13 per panel, so its tolerance is 1e-9 and the depth is capped.
double integrate_split(const std::function<double(double)>& fn, double period, std::vector<double> breaks,
                       double tol, std::size_t min_panels)
{
    breaks.push_back(0.0);
    breaks.push_back(period);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double lo = breaks[i], hi = breaks[i + 1];
        if (!(hi > lo)) {
            continue;
        }
        const std::size_t panels = std::max<std::size_t>(1, min_panels);
        const double w = (hi - lo) / static_cast<double>(panels);
        for (std::size_t k = 0; k < panels; ++k) {
            const double a = lo + w * static_cast<double>(k);
            const double b = k + 1 == panels ? hi : a + w;
            total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fn, a, b, 10, tol);
        }
    }
    return total;
}

}  // namespace

double mean_over_period(const FourierSeries& f)
{
    return f.mean();
}

double mean_over_period(const std::function<double(double)>& fn, double period, const std::vector<double>& breaks,
                        double tol)
{
    if (!(period > 0.0)) {
        throw std::invalid_argument("mean_over_period: period must be positive");
    }
    for (double b : breaks) {
        if (!(b > 0.0 && b < period)) {
            throw std::invalid_argument("mean_over_period: breaks must lie inside the period");
        }
    }
    return integrate_split(fn, period, breaks, tol, 1) / period;
}

CStar c_star(const JumpProblem& problem)
{
    const double p = problem.p();
    CStar c;
    c.zero = !mean_is_nonzero(problem.forcing.f);
    c.value = c.zero ? 0.0
                     : std::pow(problem.omega, p + 1.0 / p) * std::pow(problem.d, 1.0 / p) * problem.forcing.f.mean();
    return c;
}

DecayExperiment decay_experiment(const JumpProblem& problem, const std::vector<double>& r_grid,
                                 const DecayOptions& options)
{
    if (r_grid.size() < 2 || !(r_grid.front() > 0.0)) {
        throw std::invalid_argument("decay_experiment: r_grid needs at least two positive values");
    }
    for (std::size_t i = 0; i + 1 < r_grid.size(); ++i) {
        if (!(r_grid[i + 1] > r_grid[i])) {
            throw std::invalid_argument("decay_experiment: r_grid must be strictly increasing");
        }
    }
    if (r_grid.back() / r_grid.front() < 1000.0 * (1.0 - 1e-12)) {
        throw std::invalid_argument("decay_experiment: r_grid must span at least three decades");
    }
    options.weight.validate();

    DecayExperiment ex;
    ex.r_grid = r_grid;
    ex.delta_target = options.delta_target;
    ex.gate_passed = std::isfinite(problem.bounds.sup_G) && std::isfinite(problem.bounds.sup_Ghat);
    ex.values.assign(r_grid.size(), 0.0);

    const double p = problem.p();
    const double period = problem.period();
    const double lambda = problem.lambda();
    const double t = options.t_fixed;
    const AuxOscillator& aux = problem.aux();
    // Range of v is [minimum, amplitude], so A v sweeps about A (1 + ratio)
    // per monotone piece.
    const double sweep = aux.trig().amplitude() - aux.minimum();
    // Joints of the shifted integrand: theta + shift at a joint of v.
    std::vector<double> breaks;
    for (double j : {0.0, aux.first_zero(), problem.pi_p(), period - aux.first_zero()}) {
        double b = std::fmod(j - options.phase_shift, period);
        if (b < 0.0) {
            b += period;
        }
        if (b > 0.0 && b < period) {
            breaks.push_back(b);
        }
    }
    parallel_for(r_grid.size(), [&](std::size_t i) {
        const double amp = std::pow(r_grid[i], 1.0 / p);
        const auto fn = [&](double theta) {
            const double th = theta + options.phase_shift;
            return eval_G(problem, amp * aux.v(problem.trig().reduce(th)), t) * options.weight.eval(lambda * th);
        };
        const auto panels = static_cast<std::size_t>(std::ceil(amp * sweep / 4.0)) + 1;
        ex.values[i] = std::fabs(integrate_split(fn, period, breaks, 1e-9, panels) / period);
    });

    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        if (ex.values[i] < 1e-13) {
            ++ex.excluded;
            continue;
        }
        lx.push_back(std::log(r_grid[i]));
        ly.push_back(std::log(ex.values[i]));
    }
    bool decays = true;
    if (lx.size() >= 2) {
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            mx += lx[i];
            my += ly[i];
        }
        mx /= static_cast<double>(lx.size());
        my /= static_cast<double>(lx.size());
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxx += (lx[i] - mx) * (lx[i] - mx);
            sxy += (lx[i] - mx) * (ly[i] - my);
        }
        ex.fitted_slope = sxy / sxx;
        ex.prefactor = std::exp(my - ex.fitted_slope * mx);
        decays = ex.fitted_slope <= -options.delta_target;
    } else if (!lx.empty()) {
        decays = false;
    }
    ex.passed = ex.gate_passed && decays;
    return ex;
}

double f1_average(const JumpProblem& problem, double r, double t)
{
    if (!(r > 0.0)) {
        throw std::invalid_argument("f1_average: r must be positive");
    }
    const double amp = std::pow(chart_scale(problem) * r, 1.0 / problem.p());
    const AuxOscillator& aux = problem.aux();
    const auto fn = [&](double theta) { return eval_G(problem, amp * aux.v(theta), t); };
    const auto panels =
        static_cast<std::size_t>(std::ceil(amp * (aux.trig().amplitude() - aux.minimum()) / 4.0)) + 1;
    const double period = problem.period();
    return std::pow(problem.omega, problem.p() - 1.0) * integrate_split(fn, period, joints(problem), 1e-9, panels) /
           period;
}

void write_decay_csv(std::ostream& out, const DecayExperiment& experiment)
{
    out << "r,value\n";
    char buf[96];
    for (std::size_t i = 0; i < experiment.r_grid.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", experiment.r_grid[i], experiment.values[i]);
        out << buf;
    }
}

std::string decay_to_json(const DecayExperiment& experiment)
{
    nlohmann::ordered_json j;
    j["r_grid"] = experiment.r_grid;
    j["values"] = experiment.values;
    j["fitted_slope"] = experiment.fitted_slope;
    j["prefactor"] = experiment.prefactor;
    j["excluded"] = experiment.excluded;
    j["delta_target"] = experiment.delta_target;
    j["gate_passed"] = experiment.gate_passed;
    j["passed"] = experiment.passed;
    return j.dump(2) + "\n";
}

}  // namespace plapkam

// plapkam: command-line front end.
//
// Exit codes: 0 pass, 1 internal error, 2 bad flags or input, 3 hypothesis or
// fit failure, 4 rational omega, 5 integrator abort.

#include "manifest.hpp"

#include "plapkam/actionangle.hpp"
#include "plapkam/arithmetic.hpp"
#include "plapkam/averaging.hpp"
#include "plapkam/dynamics.hpp"
#include "plapkam/poincare.hpp"
#include "plapkam/problem.hpp"
#include "plapkam/ptrig.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

using nlohmann::ordered_json;
using namespace plapkam;

namespace {

enum Exit : int { kPass = 0, kInternal = 1, kUsage = 2, kFailed = 3, kRational = 4, kNumeric = 5 };

// Input problems found after flag parsing; exit 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Outcome {
    int code = kPass;
    std::string error;
};

std::string g17(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> geometric_grid(double lo, double hi, int n)
{
    if (!(lo > 0.0) || !(hi > lo) || n < 2) {
        throw UsageError("grid needs 0 < r-min < r-max and at least two points");
    }
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        g[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    }
    g.back() = hi;
    return g;
}

struct IntegratorFlags {
    std::optional<double> tol, rtol, atol, max_step;
    std::optional<std::int64_t> max_steps;

    void attach(CLI::App* sub)
    {
        sub->add_option("--tol", tol, "relative and absolute tolerance");
        sub->add_option("--rtol", rtol, "relative tolerance (overrides --tol)");
        sub->add_option("--atol", atol, "absolute tolerance (overrides --tol)");
        sub->add_option("--max-step", max_step, "largest step; 0 = an 800th of the unforced period");
        sub->add_option("--max-steps", max_steps, "step budget per integration");
    }

    IntegratorConfig resolve() const
    {
        IntegratorConfig c;
        if (tol) {
            c.rel_tol = c.abs_tol = *tol;
        }
        if (rtol) {
            c.rel_tol = *rtol;
        }
        if (atol) {
            c.abs_tol = *atol;
        }
        if (max_step) {
            c.max_step = *max_step;
        }
        if (max_steps) {
            c.max_steps = *max_steps;
        }
        try {
            c.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        return c;
    }
};

JumpProblem load(cli::Run& run, const std::string& path)
{
    JumpProblem pr = load_problem(path);
    run.set_problem(problem_to_json(pr));
    return pr;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

// ---- ptrig -----------------------------------------------------------------

struct PtrigArgs {
    double p = 2.0;
    int grid_points = 1001;
    double a1 = 1.0;
};

Outcome run_ptrig(cli::Run& run, const PtrigArgs& args)
{
    if (args.grid_points < 2) {
        throw UsageError("--grid-points must be at least 2");
    }
    run.set_arguments({{"p", args.p}, {"grid-points", args.grid_points}, {"a1", args.a1}});
    const PExponents pexp = PExponents::from_p(args.p);
    const AuxOscillator aux(pexp, AsymmetricCoefs::from_a1(pexp, args.a1));
    const PTrig& trig = aux.trig();
    std::ostringstream csv;
    csv << "# p = " << g17(args.p) << "\n# a1 = " << g17(aux.coefs().a1()) << "\n# b1 = " << g17(aux.coefs().b1())
        << "\n# pi_p = " << g17(trig.pi_p()) << "\n# I_p = " << g17(quarter_area(pexp)) << "\nt,sinp,v,u\n";
    const int n = args.grid_points;
    for (int i = 0; i < n; ++i) {
        const double t = i == n - 1 ? trig.period() : trig.period() * i / (n - 1);
        const AuxPoint at = aux.at(t);
        csv << g17(t) << ',' << g17(trig.sin(t)) << ',' << g17(at.v) << ',' << g17(at.u) << '\n';
    }
    run.write("ptrig.csv", csv.str());
    std::cout << dump({{"pi_p", trig.pi_p()}, {"I_p", quarter_area(pexp)}});
    return {};
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
    std::string problem;
    double x0 = 1.0;
    double xp0 = 0.0;
    double t0 = 0.0;
    double t1 = 0.0;
    std::size_t stride = 1;
    IntegratorFlags flags;
};

Outcome run_simulate(cli::Run& run, const SimulateArgs& args)
{
    const JumpProblem pr = load(run, args.problem);
    const IntegratorConfig cfg = args.flags.resolve();
    run.set_tolerances(cfg);
    if (!(args.t1 > args.t0)) {
        throw UsageError("--t1 must exceed --t0");
    }
    if (args.stride < 1) {
        throw UsageError("--stride must be at least 1");
    }
    run.set_arguments({{"x0", args.x0}, {"xp0", args.xp0}, {"t0", args.t0}, {"t1", args.t1}, {"stride", args.stride}});

    // Integrated in chunks of 100 unforced periods so that an abort keeps
    // everything up to the last completed chunk.
    const double chunk = 100.0 * pr.period() * pr.omega;
    const PhaseState start = from_xprime(pr, args.x0, args.xp0);
    Trajectory all;
    all.samples.push_back({args.t0, start});
    Outcome outcome;
    double t = args.t0;
    PhaseState state = start;
    while (t < args.t1) {
        const double t_next = std::min(args.t1, t + chunk);
        try {
            Trajectory part = integrate(pr, state, t, t_next, cfg);
            all.samples.insert(all.samples.end(), part.samples.begin() + 1, part.samples.end());
            all.events.insert(all.events.end(), part.events.begin(), part.events.end());
            all.stats.accepted += part.stats.accepted;
            all.stats.rejected += part.stats.rejected;
            all.stats.max_error = std::max(all.stats.max_error, part.stats.max_error);
        } catch (const IntegrationError& e) {
            outcome = {kNumeric, e.what()};
            break;
        }
        t = t_next;
        state = all.samples.back().state;
    }

    std::ostringstream traj, events;
    write_trajectory_csv(traj, pr, all, args.stride);
    write_events_csv(events, all);
    run.write("trajectory.csv", traj.str());
    run.write("events.csv", events.str());

    const bool unforced = pr.forcing.f.terms.empty() && std::holds_alternative<ZeroG>(pr.forcing.g);
    const double h_start = energy_h0(pr, start);
    const double h_end = energy_h0(pr, all.samples.back().state);
    ordered_json report;
    report["t_end"] = all.samples.back().t;
    report["x"] = all.samples.back().state.x;
    report["xprime"] = to_xprime(pr, all.samples.back().state);
    report["h0_start"] = h_start;
    report["h0_end"] = h_end;
    report["h0_drift"] = std::fabs(h_end - h_start) / std::max(h_start, 1e-300);
    report["unforced"] = unforced;
    report["unforced_period"] = pr.period() * pr.omega;
    if (all.events.size() >= 3) {
        // Every other x = 0 crossing closes a revolution.
        const std::size_t k = (all.events.size() - 1) / 2;
        report["measured_period"] = (all.events[2 * k] - all.events[0]) / static_cast<double>(k);
    } else {
        report["measured_period"] = nullptr;
    }
    report["crossings"] = all.events.size();
    report["accepted_steps"] = all.stats.accepted;
    report["rejected_steps"] = all.stats.rejected;
    report["truncated"] = outcome.code != kPass;
    report["error"] = outcome.error.empty() ? ordered_json(nullptr) : ordered_json(outcome.error);
    run.write("simulate.json", dump(report));
    std::cout << dump(report);
    return outcome;
}

// ---- rotation --------------------------------------------------------------

struct RotationArgs {
    std::string problem;
    double r0 = 100.0;
    double theta0 = 0.0;
    std::int64_t n = 1000;
    double r_floor = 1.0;
    IntegratorFlags flags;
};

Outcome run_rotation(cli::Run& run, const RotationArgs& args)
{
    const JumpProblem pr = load(run, args.problem);
    const IntegratorConfig cfg = args.flags.resolve();
    run.set_tolerances(cfg);
    if (!(args.r0 > 0.0) || args.n < 10) {
        throw UsageError("rotation needs --r0 > 0 and --n >= 10");
    }
    run.set_arguments({{"r0", args.r0}, {"theta0", args.theta0}, {"n", args.n}, {"r-floor", args.r_floor}});
    const SectionOrbit orbit = section_orbit(pr, from_action_angle(pr, {args.r0, args.theta0}), args.n + 1, cfg);
    std::ostringstream csv;
    write_section_csv(csv, orbit);
    run.write("section.csv", csv.str());

    Outcome outcome;
    ordered_json report;
    report["one_over_omega"] = 1.0 / pr.omega;
    report["rho"] = nullptr;
    report["std_error"] = nullptr;
    report["deviation"] = nullptr;
    report["n_iterates"] = static_cast<std::int64_t>(orbit.points.size()) - 1;
    report["r_min"] = orbit.r_min;
    report["r_max"] = orbit.r_max;
    report["sup_norm"] = orbit.sup_norm;
    if (orbit.truncated) {
        outcome = {kNumeric, orbit.error};
    } else {
        try {
            const RotationEstimate est = rotation_number(orbit, args.r_floor);
            report["rho"] = est.rho;
            report["std_error"] = est.std_error;
            report["deviation"] = est.rho - 1.0 / pr.omega;
        } catch (const std::domain_error& e) {
            outcome = {kFailed, e.what()};
        }
    }
    report["truncated"] = orbit.truncated;
    report["error"] = outcome.error.empty() ? ordered_json(nullptr) : ordered_json(outcome.error);
    run.write("rotation.json", dump(report));
    std::cout << dump(report);
    return outcome;
}

// ---- twist -----------------------------------------------------------------

struct TwistArgs {
    std::string problem;
    double r_min = 100.0;
    double r_max = 1e4;
    int points = 6;
    std::int64_t n = 300;
    IntegratorFlags flags;
};

Outcome run_twist(cli::Run& run, const TwistArgs& args)
{
    const JumpProblem pr = load(run, args.problem);
    const IntegratorConfig cfg = args.flags.resolve();
    run.set_tolerances(cfg);
    if (args.points < 6 || args.r_max < 100.0 * args.r_min || args.n < 10) {
        throw UsageError("twist needs --points >= 6, --r-max >= 100 r-min and --n >= 10");
    }
    const auto grid = geometric_grid(args.r_min, args.r_max, args.points);
    run.set_arguments({{"r-min", args.r_min}, {"r-max", args.r_max}, {"points", args.points}, {"n", args.n}});
    if (!mean_is_nonzero(pr.forcing.f)) {
        return {kFailed, "the mean of f is zero: no twist is predicted"};
    }
    const TwistFit fit = twist_fit(pr, grid, args.n, cfg);
    const std::string json = twist_to_json(fit) + "\n";
    run.write("twist.json", json);
    std::cout << json;
    if (!fit.conclusive) {
        return {kFailed, "fit inconclusive (r2 below 0.9)"};
    }
    return {};
}

// ---- bounded ---------------------------------------------------------------

struct BoundedArgs {
    std::string problem;
    std::vector<double> amplitudes{100.0, 1000.0};
    std::int64_t periods = 10'000;
    double gamma = 0.2;
    double tau = 1.5;
    std::int64_t m_max = 10'000;
    double max_ratio = 2.0;
    bool override_hypotheses = false;
    IntegratorFlags flags;
};

Outcome run_bounded(cli::Run& run, const BoundedArgs& args)
{
    const JumpProblem pr = load(run, args.problem);
    ProbeOptions opt;
    opt.config = args.flags.resolve();
    run.set_tolerances(opt.config);
    if (args.amplitudes.empty() || args.periods < 10 || !(args.max_ratio > 1.0)) {
        throw UsageError("bounded needs amplitudes, --periods >= 10 and --max-ratio > 1");
    }
    for (double a : args.amplitudes) {
        if (!(a > 0.0)) {
            throw UsageError("amplitudes must be positive");
        }
    }
    run.set_arguments({{"amplitudes", args.amplitudes},
                       {"periods", args.periods},
                       {"gamma", args.gamma},
                       {"tau", args.tau},
                       {"mmax", args.m_max},
                       {"max-ratio", args.max_ratio},
                       {"override", args.override_hypotheses}});
    opt.override_hypotheses = args.override_hypotheses;
    opt.gamma = args.gamma;
    opt.tau = args.tau;
    opt.m_max = args.m_max;

    const HypothesisReport hyp = check_hypotheses(pr, args.gamma, args.tau, args.m_max);
    if (hyp.verdict != Verdict::theorem1_applies && !args.override_hypotheses) {
        const std::string why = std::string("hypotheses fail: ") + verdict_name(hyp.verdict);
        return {hyp.verdict == Verdict::resonant ? kRational : kFailed, why};
    }
    const BoundednessReport rep = boundedness_probe(pr, args.amplitudes, args.periods, opt);
    const std::string json = boundedness_to_json(rep) + "\n";
    run.write("bounded.json", json);
    std::cout << json;
    for (const auto& o : rep.orbits) {
        if (!o.completed) {
            return {kNumeric, o.error};
        }
    }
    for (const auto& o : rep.orbits) {
        if (o.ratio() > args.max_ratio || !o.slope_consistent_with_zero()) {
            return {kFailed, "orbit at amplitude " + g17(o.amplitude) + " drifts"};
        }
    }
    return {};
}

// ---- diophantine -----------------------------------------------------------

struct DiophantineArgs {
    std::optional<double> omega;
    std::vector<std::int64_t> quadratic;
    std::int64_t den = 1;
    std::vector<std::int64_t> rational;
    std::string problem;
    double gamma = 0.2;
    double tau = 1.5;
    std::int64_t m_max = 10'000;
    bool allow_any_tau = false;
};

Outcome run_diophantine(cli::Run& run, const DiophantineArgs& args)
{
    const int sources = (args.omega ? 1 : 0) + (args.quadratic.empty() ? 0 : 1) + (args.rational.empty() ? 0 : 1) +
                        (args.problem.empty() ? 0 : 1);
    if (sources != 1) {
        throw UsageError("give exactly one of --omega, --omega-quadratic, --omega-rational, --problem");
    }
    ordered_json source;
    Frequency omega;
    if (args.omega) {
        omega = *args.omega;
        source = {{"double", *args.omega}};
    } else if (!args.quadratic.empty()) {
        if (args.quadratic.size() != 3) {
            throw UsageError("--omega-quadratic expects A,B,C for (A + B sqrt C) / den");
        }
        omega = QuadraticIrrational{args.quadratic[0], args.quadratic[1], args.quadratic[2], args.den};
        source = {{"quadratic", {args.quadratic[0], args.quadratic[1], args.quadratic[2], args.den}}};
    } else if (!args.rational.empty()) {
        if (args.rational.size() != 2) {
            throw UsageError("--omega-rational expects n,d");
        }
        omega = Rational{args.rational[0], args.rational[1]};
        source = {{"rational", {args.rational[0], args.rational[1]}}};
    } else {
        const JumpProblem pr = load(run, args.problem);
        omega = pr.exact_omega ? *pr.exact_omega : Frequency{pr.omega};
        source = {{"problem", pr.exact_omega ? "exact" : "double"}};
    }
    run.set_arguments({{"omega", source},
                       {"gamma", args.gamma},
                       {"tau", args.tau},
                       {"mmax", args.m_max},
                       {"allow-any-tau", args.allow_any_tau}});
    Frequency positive;
    try {
        positive = absolute(omega);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const DiophantineReport rep = diophantine_scan(positive, args.gamma, args.tau, args.m_max,
                                                   {.allow_any_tau = args.allow_any_tau});
    ordered_json j;
    j["omega"] = rep.omega;
    j["gamma"] = rep.gamma;
    j["tau"] = rep.tau;
    j["m_max"] = rep.m_max;
    j["worst_m"] = rep.worst_m;
    j["worst_n"] = rep.worst_n;
    j["worst_value"] = rep.worst_value;
    j["passed"] = rep.passed;
    j["rational"] = rep.rational;
    j["exact"] = rep.exact;
    j["convergents"] = ordered_json::array();
    for (const auto& c : rep.convergents) {
        j["convergents"].push_back({c.p, c.q});
    }
    run.write("diophantine.json", dump(j));
    std::cout << dump(j);
    if (rep.rational) {
        return {kRational, "omega is rational"};
    }
    return rep.passed ? Outcome{} : Outcome{kFailed, "Diophantine bound violated in the window"};
}

// ---- decay -----------------------------------------------------------------

struct DecayArgs {
    std::string problem;
    double r_min = 1e2;
    double r_max = 1e6;
    int points = 17;
    double t_fixed = 0.0;
    double delta = 0.1;
};

Outcome run_decay(cli::Run& run, const DecayArgs& args)
{
    const JumpProblem pr = load(run, args.problem);
    if (args.r_max < 1000.0 * args.r_min || args.points < 4 || !(args.delta > 0.0)) {
        throw UsageError("decay needs --r-max >= 1000 r-min, --points >= 4 and --delta > 0");
    }
    const auto grid = geometric_grid(args.r_min, args.r_max, args.points);
    run.set_arguments({{"r-min", args.r_min},
                       {"r-max", args.r_max},
                       {"points", args.points},
                       {"t-fixed", args.t_fixed},
                       {"delta", args.delta}});
    DecayOptions opt;
    opt.t_fixed = args.t_fixed;
    opt.delta_target = args.delta;
    const DecayExperiment ex = decay_experiment(pr, grid, opt);
    std::ostringstream csv;
    write_decay_csv(csv, ex);
    run.write("decay.csv", csv.str());
    const std::string json = decay_to_json(ex) + "\n";
    run.write("decay.json", json);
    std::cout << json;
    if (!ex.gate_passed) {
        return {kFailed, "G or its antiderivative is not bounded"};
    }
    return ex.passed ? Outcome{} : Outcome{kFailed, "decay slope above -delta"};
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Jumping p-Laplacian oscillator toolkit"};
    app.set_version_flag("--version", PLAPKAM_VERSION);
    app.require_subcommand(1);
    std::string out = ".";
    app.add_option("--out", out, "output directory (manifest and data files)");

    PtrigArgs pt;
    auto* ptrig = app.add_subcommand("ptrig", "table of sin_p, v and u over one period");
    ptrig->add_option("--p", pt.p, "exponent p >= 2")->required();
    ptrig->add_option("--grid-points", pt.grid_points, "number of samples");
    ptrig->add_option("--a1", pt.a1, "a1 of the pair (v, u); b1 follows from the normalization");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "trajectory of the transformed system");
    simulate->add_option("--problem", sim.problem, "problem file")->required();
    simulate->add_option("--x0", sim.x0, "initial x");
    simulate->add_option("--xp0", sim.xp0, "initial x'");
    simulate->add_option("--t0", sim.t0, "start time");
    simulate->add_option("--t1", sim.t1, "end time")->required();
    simulate->add_option("--stride", sim.stride, "write every stride-th step");
    sim.flags.attach(simulate);

    RotationArgs rot;
    auto* rotation = app.add_subcommand("rotation", "rotation number of one section orbit");
    rotation->add_option("--problem", rot.problem, "problem file")->required();
    rotation->add_option("--r0", rot.r0, "initial action");
    rotation->add_option("--theta0", rot.theta0, "initial angle");
    rotation->add_option("--n", rot.n, "iterates of the period map");
    rotation->add_option("--r-floor", rot.r_floor, "orbits below this action are rejected");
    rot.flags.attach(rotation);

    TwistArgs tw;
    auto* twist = app.add_subcommand("twist", "fit rho(r) - 1/omega = c r^-kappa");
    twist->add_option("--problem", tw.problem, "problem file")->required();
    twist->add_option("--r-min", tw.r_min, "smallest action");
    twist->add_option("--r-max", tw.r_max, "largest action");
    twist->add_option("--points", tw.points, "geometric grid size");
    twist->add_option("--n", tw.n, "points per orbit");
    tw.flags.attach(twist);

    BoundedArgs bd;
    auto* bounded = app.add_subcommand("bounded", "finite-horizon boundedness probe");
    bounded->add_option("--problem", bd.problem, "problem file")->required();
    bounded->add_option("--amplitudes", bd.amplitudes, "initial actions")->delimiter(',');
    bounded->add_option("--periods", bd.periods, "forcing periods per orbit");
    bounded->add_option("--gamma", bd.gamma, "Diophantine gamma");
    bounded->add_option("--tau", bd.tau, "Diophantine tau");
    bounded->add_option("--mmax", bd.m_max, "Diophantine window");
    bounded->add_option("--max-ratio", bd.max_ratio, "largest accepted r_max / r_min");
    bounded->add_flag("--override", bd.override_hypotheses, "run even when the hypotheses fail");
    bd.flags.attach(bounded);

    DiophantineArgs di;
    auto* dioph = app.add_subcommand("diophantine", "finite-window Diophantine scan");
    dioph->add_option("--omega", di.omega, "omega as a double");
    dioph->add_option("--omega-quadratic", di.quadratic, "A,B,C for (A + B sqrt C) / den")->delimiter(',');
    dioph->add_option("--den", di.den, "denominator for --omega-quadratic");
    dioph->add_option("--omega-rational", di.rational, "n,d")->delimiter(',');
    dioph->add_option("--problem", di.problem, "take omega from a problem file");
    dioph->add_option("--gamma", di.gamma, "gamma");
    dioph->add_option("--tau", di.tau, "tau in (1, 2)");
    dioph->add_option("--mmax", di.m_max, "largest |m|");
    dioph->add_flag("--allow-any-tau", di.allow_any_tau, "permit tau outside (1, 2)");

    DecayArgs dc;
    auto* decay = app.add_subcommand("decay", "oscillatory-integral decay experiment");
    decay->add_option("--problem", dc.problem, "problem file")->required();
    decay->add_option("--r-min", dc.r_min, "smallest r");
    decay->add_option("--r-max", dc.r_max, "largest r");
    decay->add_option("--points", dc.points, "geometric grid size");
    decay->add_option("--t-fixed", dc.t_fixed, "time at which G is frozen");
    decay->add_option("--delta", dc.delta, "required decay exponent");

    // --out is accepted after the subcommand too.
    for (auto* sub : {ptrig, simulate, rotation, twist, bounded, dioph, decay}) {
        sub->add_option("--out", out, "output directory (manifest and data files)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kPass : kUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    std::optional<cli::Run> run;
    Outcome outcome;
    try {
        run.emplace(sub->get_name(), out);
        if (sub == ptrig) {
            outcome = run_ptrig(*run, pt);
        } else if (sub == simulate) {
            outcome = run_simulate(*run, sim);
        } else if (sub == rotation) {
            outcome = run_rotation(*run, rot);
        } else if (sub == twist) {
            outcome = run_twist(*run, tw);
        } else if (sub == bounded) {
            outcome = run_bounded(*run, bd);
        } else if (sub == dioph) {
            outcome = run_diophantine(*run, di);
        } else {
            outcome = run_decay(*run, dc);
        }
    } catch (const UsageError& e) {
        outcome = {kUsage, e.what()};
    } catch (const ProblemFileError& e) {
        outcome = {kUsage, e.what()};
    } catch (const std::invalid_argument& e) {
        outcome = {kUsage, e.what()};
    } catch (const std::domain_error& e) {
        outcome = {kUsage, e.what()};
    } catch (const IntegrationError& e) {
        outcome = {kNumeric, e.what()};
    } catch (const std::exception& e) {
        outcome = {kInternal, e.what()};
    }
    if (!outcome.error.empty()) {
        std::cerr << "plapkam " << sub->get_name() << ": " << outcome.error << '\n';
    }
    if (run) {
        try {
            run->finish(outcome.code, outcome.error);
        } catch (const std::exception& e) {
            std::cerr << "plapkam: cannot write manifest: " << e.what() << '\n';
            return kInternal;
        }
    }
    return outcome.code;
}

#include "plapkam/problem.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace plapkam {

namespace {

using json = nlohmann::json;

void require(bool ok, const std::string& message)
{
    if (!ok) {
        throw std::invalid_argument(message);
    }
}

double mean_threshold(const FourierSeries& f) { return 1e-13 * std::max(1.0, f.sup_bound()); }

// Hermite cell [x_i, x_{i+1}] at local coordinate s in [0, 1].
struct Cell {
    std::size_t i;
    double h;
    double s;
};

Cell locate(const HermiteTable& t, double x)
{
    const auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
    std::size_t i = static_cast<std::size_t>(it - t.x.begin());
    i = std::clamp<std::size_t>(i, 1, t.x.size() - 1) - 1;
    const double h = t.x[i + 1] - t.x[i];
    return {i, h, (x - t.x[i]) / h};
}

HermiteTable make_table(const TabulatedG& tab)
{
    require(tab.x.size() >= 2, "tabulated G needs at least two samples");
    require(tab.x.size() == tab.g.size(), "tabulated G: x and g must have equal length");
    for (std::size_t i = 0; i < tab.x.size(); ++i) {
        require(std::isfinite(tab.x[i]) && std::isfinite(tab.g[i]), "tabulated G: non-finite sample");
        require(i == 0 || tab.x[i] > tab.x[i - 1], "tabulated G: grid must be strictly increasing");
    }
    HermiteTable t;
    t.x = tab.x;
    t.g = tab.g;
    const std::size_t n = t.x.size();
    t.slope.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        // Three-point derivative on a nonuniform grid.
        const double h0 = t.x[i] - t.x[i - 1];
        const double h1 = t.x[i + 1] - t.x[i];
        const double d0 = (t.g[i] - t.g[i - 1]) / h0;
        const double d1 = (t.g[i + 1] - t.g[i]) / h1;
        t.slope[i] = (h1 * d0 + h0 * d1) / (h0 + h1);
    }
    t.cumulative.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = t.x[i + 1] - t.x[i];
        t.cumulative[i + 1] =
            t.cumulative[i] + h * (0.5 * (t.g[i] + t.g[i + 1]) + h * (t.slope[i] - t.slope[i + 1]) / 12.0);
    }
    return t;
}

GBounds bounds_for(const GModel& g, const HermiteTable* table)
{
    GBounds b;
    if (const auto* s = std::get_if<SinusoidalG>(&g)) {
        const double c = std::fabs(s->amplitude) * s->coupling.sup_bound();
        b.sup_G = c;
        b.sup_Gx = c * s->mu;
        b.sup_Ghat = c / s->mu;
    } else if (std::holds_alternative<TabulatedG>(g)) {
        const auto* tab = &std::get<TabulatedG>(g);
        const double tc = tab->coupling.sup_bound();
        double gmax = 0.0, gxmax = 0.0;
        // Cubic extrema are bounded by the samples plus the slope terms.
        for (std::size_t i = 0; i + 1 < table->x.size(); ++i) {
            const double h = table->x[i + 1] - table->x[i];
            for (int j = 0; j <= 64; ++j) {
                const double x = table->x[i] + h * j / 64.0;
                gmax = std::max(gmax, std::fabs(table->eval(x)));
                gxmax = std::max(gxmax, std::fabs(table->derivative(x)));
            }
        }
        b.sup_G = gmax * tc;
        b.sup_Gx = gxmax * tc;
        const bool vanishes = table->g.front() == 0.0 && table->g.back() == 0.0;
        b.sup_Ghat = std::numeric_limits<double>::infinity();
        if (vanishes) {
            double m = 0.0;
            for (double c : table->cumulative) {
                m = std::max(m, std::fabs(c));
            }
            b.sup_Ghat = m * tc;  // sampled, not certified
        }
        b.verified = false;
    }
    return b;
}

}  // namespace

double FourierSeries::mean() const
{
    double m = 0.0;
    for (const auto& t : terms) {
        if (t.k == 0) {
            m += t.c;
        }
    }
    return m;
}

double FourierSeries::sup_bound() const
{
    double s = 0.0;
    for (const auto& t : terms) {
        s += std::fabs(t.c) + (t.k == 0 ? 0.0 : std::fabs(t.s));
    }
    return s;
}

void FourierSeries::validate() const
{
    for (const auto& t : terms) {
        require(t.k >= 0, "Fourier term with negative frequency index");
        require(std::isfinite(t.c) && std::isfinite(t.s), "non-finite Fourier coefficient");
    }
}

double FourierSeries::eval(double phase) const
{
    double v = 0.0;
    for (const auto& t : terms) {
        if (t.k == 0) {
            v += t.c;
        } else {
            const double arg = t.k * phase;
            v += t.c * std::cos(arg) + t.s * std::sin(arg);
        }
    }
    return v;
}

double HermiteTable::eval(double xv) const
{
    if (xv <= x.front()) {
        return g.front();
    }
    if (xv >= x.back()) {
        return g.back();
    }
    const auto [i, h, s] = locate(*this, xv);
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * g[i] + (s3 - 2 * s2 + s) * h * slope[i] + (3 * s2 - 2 * s3) * g[i + 1] +
           (s3 - s2) * h * slope[i + 1];
}

double HermiteTable::derivative(double xv) const
{
    if (xv <= x.front() || xv >= x.back()) {
        return 0.0;
    }
    const auto [i, h, s] = locate(*this, xv);
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * g[i] + (6 * s - 6 * s2) * g[i + 1]) / h + (3 * s2 - 4 * s + 1) * slope[i] +
           (3 * s2 - 2 * s) * slope[i + 1];
}

double HermiteTable::integral(double xv) const
{
    if (xv <= x.front()) {
        return g.front() * (xv - x.front());
    }
    if (xv >= x.back()) {
        return cumulative.back() + g.back() * (xv - x.back());
    }
    const auto [i, h, s] = locate(*this, xv);
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
    const double part = (s - s3 + 0.5 * s4) * g[i] + (0.5 * s2 - 2.0 * s3 / 3.0 + 0.25 * s4) * h * slope[i] +
                        (s3 - 0.5 * s4) * g[i + 1] + (0.25 * s4 - s3 / 3.0) * h * slope[i + 1];
    return cumulative[i] + h * part;
}

const char* g_kind_name(const GModel& g)
{
    switch (g.index()) {
    case 0: return "zero";
    case 1: return "sinusoidal";
    default: return "tabulated";
    }
}

const HermiteTable* hermite_table(const JumpProblem& problem)
{
    return problem.table_ ? &*problem.table_ : nullptr;
}

JumpProblem build_problem(double a, double b, double p, ForcingModel forcing, BuildOptions options)
{
    const PExponents pexp = PExponents::from_p(p);
    require(std::isfinite(a) && a > 0.0, "stiffness a must be positive and finite");
    require(std::isfinite(b) && b > 0.0, "stiffness b must be positive and finite");
    require(options.allow_symmetric || a != b, "stiffnesses must differ (a != b)");
    forcing.f.validate();
    if (const auto* s = std::get_if<SinusoidalG>(&forcing.g)) {
        require(std::isfinite(s->amplitude), "sinusoidal G: amplitude must be finite");
        require(std::isfinite(s->mu) && s->mu > 0.0, "sinusoidal G: mu must be positive");
        s->coupling.validate();
    }

    JumpProblem pr;
    pr.a = a;
    pr.b = b;
    pr.pexp = pexp;
    pr.omega = 0.5 * (std::pow(a, -1.0 / p) + std::pow(b, -1.0 / p));
    const double wp = std::pow(pr.omega, p);
    pr.coefs = AsymmetricCoefs::make(pexp, wp * a, wp * b);
    pr.d = p / pr.coefs.a1();
    pr.trig_.emplace(pexp);
    pr.aux_.emplace(pexp, pr.coefs);
    pr.lambda_ = std::numbers::pi / pr.trig_->pi_p();
    if (const auto* tab = std::get_if<TabulatedG>(&forcing.g)) {
        tab->coupling.validate();
        pr.table_ = make_table(*tab);
    }
    pr.bounds = bounds_for(forcing.g, pr.table_ ? &*pr.table_ : nullptr);
    pr.forcing = std::move(forcing);
    if (options.exact_omega) {
        const double exact = frequency_value(*options.exact_omega);
        require(std::fabs(exact - pr.omega) <= 1e-12 * std::max(1.0, pr.omega),
                "exact omega does not match (a^(-1/p) + b^(-1/p))/2");
        pr.exact_omega = options.exact_omega;
    }
    return pr;
}

JumpProblem build_from_scaled(double omega, double a1, double b1, double p, ForcingModel forcing,
                              BuildOptions options)
{
    require(std::isfinite(omega) && omega > 0.0, "omega must be positive");
    const double wp = std::pow(omega, -p);
    return build_problem(wp * a1, wp * b1, p, std::move(forcing), std::move(options));
}

bool mean_is_nonzero(const FourierSeries& f)
{
    return std::fabs(f.mean()) > mean_threshold(f);
}

double eval_f(const JumpProblem& problem, double t)
{
    return problem.forcing.f.eval(problem.lambda() * problem.trig().reduce(t));
}

namespace {

double coupling(const JumpProblem& problem, const FourierSeries& series, double t)
{
    return series.eval(problem.lambda() * problem.trig().reduce(t));
}

}  // namespace

double eval_G(const JumpProblem& problem, double x, double t)
{
    const auto& g = problem.forcing.g;
    if (const auto* s = std::get_if<SinusoidalG>(&g)) {
        return s->amplitude * std::sin(s->mu * x) * coupling(problem, s->coupling, t);
    }
    if (const auto* tab = std::get_if<TabulatedG>(&g)) {
        return hermite_table(problem)->eval(x) * coupling(problem, tab->coupling, t);
    }
    return 0.0;
}

double eval_Gx(const JumpProblem& problem, double x, double t)
{
    const auto& g = problem.forcing.g;
    if (const auto* s = std::get_if<SinusoidalG>(&g)) {
        return s->amplitude * s->mu * std::cos(s->mu * x) * coupling(problem, s->coupling, t);
    }
    if (const auto* tab = std::get_if<TabulatedG>(&g)) {
        return hermite_table(problem)->derivative(x) * coupling(problem, tab->coupling, t);
    }
    return 0.0;
}

double eval_Ghat(const JumpProblem& problem, double x, double t)
{
    const auto& g = problem.forcing.g;
    if (const auto* s = std::get_if<SinusoidalG>(&g)) {
        return -(s->amplitude / s->mu) * std::cos(s->mu * x) * coupling(problem, s->coupling, t);
    }
    if (const auto* tab = std::get_if<TabulatedG>(&g)) {
        return hermite_table(problem)->integral(x) * coupling(problem, tab->coupling, t);
    }
    return 0.0;
}

const char* verdict_name(Verdict v)
{
    switch (v) {
    case Verdict::theorem1_applies: return "theorem1-applies";
    case Verdict::resonant: return "resonant";
    case Verdict::mean_zero: return "mean-zero";
    case Verdict::non_diophantine_evidence: return "non-diophantine-evidence";
    case Verdict::g_unverified: return "g-unverified";
    }
    return "?";
}

HypothesisReport check_hypotheses(const JumpProblem& problem, double gamma, double tau, std::int64_t m_max)
{
    HypothesisReport r;
    r.mean_f = problem.forcing.f.mean();
    r.mean_nonzero = mean_is_nonzero(problem.forcing.f);
    const Frequency omega = problem.exact_omega ? *problem.exact_omega : Frequency{problem.omega};
    r.diophantine = diophantine_scan(omega, gamma, tau, m_max);
    r.g_bounded = problem.bounds.verified && std::isfinite(problem.bounds.sup_Ghat);
    if (!r.mean_nonzero) {
        r.verdict = Verdict::mean_zero;
    } else if (r.diophantine.rational) {
        r.verdict = Verdict::resonant;
    } else if (!r.diophantine.passed) {
        r.verdict = Verdict::non_diophantine_evidence;
    } else if (!r.g_bounded) {
        r.verdict = Verdict::g_unverified;
    } else {
        r.verdict = Verdict::theorem1_applies;
    }
    return r;
}

// ---- JSON ----------------------------------------------------------------

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& message)
{
    throw ProblemFileError("field '" + field + "': " + message);
}

const json& member(const json& obj, const std::string& key, const std::string& path)
{
    if (!obj.is_object()) {
        field_error(path, "expected an object");
    }
    const auto it = obj.find(key);
    if (it == obj.end()) {
        field_error(path.empty() ? key : path + "." + key, "missing");
    }
    return *it;
}

double number(const json& v, const std::string& path)
{
    if (!v.is_number()) {
        field_error(path, "expected a number");
    }
    return v.get<double>();
}

std::int64_t integer(const json& v, const std::string& path)
{
    if (!v.is_number_integer()) {
        field_error(path, "expected an integer");
    }
    return v.get<std::int64_t>();
}

FourierSeries read_fourier(const json& v, const std::string& path)
{
    if (!v.is_array()) {
        field_error(path, "expected a list of [k, c_k, s_k]");
    }
    FourierSeries f;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string at = path + "[" + std::to_string(i) + "]";
        const json& t = v[i];
        if (!t.is_array() || t.size() < 2 || t.size() > 3) {
            field_error(at, "expected [k, c_k, s_k]");
        }
        const std::int64_t k = integer(t[0], at + "[0]");
        if (k < 0 || k > 100000) {
            field_error(at + "[0]", "frequency index must lie in [0, 100000]");
        }
        f.terms.push_back({static_cast<int>(k), number(t[1], at + "[1]"), t.size() == 3 ? number(t[2], at + "[2]") : 0.0});
    }
    return f;
}

json write_fourier(const FourierSeries& f)
{
    json out = json::array();
    for (const auto& t : f.terms) {
        out.push_back({t.k, t.c, t.s});
    }
    return out;
}

std::vector<double> read_numbers(const json& v, const std::string& path)
{
    if (!v.is_array()) {
        field_error(path, "expected a list of numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

GModel read_g(const json& g)
{
    if (g.is_null()) {
        return ZeroG{};
    }
    const json& kind = member(g, "kind", "G");
    if (!kind.is_string()) {
        field_error("G.kind", "expected a string");
    }
    const std::string k = kind.get<std::string>();
    if (k == "zero") {
        return ZeroG{};
    }
    const json& params = member(g, "params", "G");
    if (k == "sinusoidal") {
        SinusoidalG s;
        s.amplitude = number(member(params, "amplitude", "G.params"), "G.params.amplitude");
        s.mu = number(member(params, "mu", "G.params"), "G.params.mu");
        if (params.contains("coupling")) {
            s.coupling = read_fourier(params["coupling"], "G.params.coupling");
        }
        return s;
    }
    if (k == "tabulated") {
        TabulatedG t;
        t.x = read_numbers(member(params, "x", "G.params"), "G.params.x");
        t.g = read_numbers(member(params, "g", "G.params"), "G.params.g");
        if (params.contains("coupling")) {
            t.coupling = read_fourier(params["coupling"], "G.params.coupling");
        }
        return t;
    }
    field_error("G.kind", "unknown kind '" + k + "' (expected zero, sinusoidal or tabulated)");
}

json write_g(const GModel& g)
{
    json out;
    out["kind"] = g_kind_name(g);
    if (const auto* s = std::get_if<SinusoidalG>(&g)) {
        out["params"] = {{"amplitude", s->amplitude}, {"mu", s->mu}, {"coupling", write_fourier(s->coupling)}};
    } else if (const auto* t = std::get_if<TabulatedG>(&g)) {
        out["params"] = {{"x", t->x}, {"g", t->g}, {"coupling", write_fourier(t->coupling)}};
    }
    return out;
}

Frequency read_exact(const json& v)
{
    if (!v.is_object() || v.size() != 1) {
        field_error("omega_exact", "expected {quadratic: [A, B, C, D]} or {rational: [n, d]}");
    }
    if (v.contains("quadratic")) {
        const json& q = v["quadratic"];
        if (!q.is_array() || q.size() != 4) {
            field_error("omega_exact.quadratic", "expected [A, B, C, D]");
        }
        return QuadraticIrrational{integer(q[0], "omega_exact.quadratic[0]"), integer(q[1], "omega_exact.quadratic[1]"),
                                   integer(q[2], "omega_exact.quadratic[2]"), integer(q[3], "omega_exact.quadratic[3]")};
    }
    if (v.contains("rational")) {
        const json& q = v["rational"];
        if (!q.is_array() || q.size() != 2) {
            field_error("omega_exact.rational", "expected [n, d]");
        }
        return Rational{integer(q[0], "omega_exact.rational[0]"), integer(q[1], "omega_exact.rational[1]")};
    }
    field_error("omega_exact", "expected key quadratic or rational");
}

json write_exact(const Frequency& w)
{
    if (const auto* q = std::get_if<QuadraticIrrational>(&w)) {
        return {{"quadratic", {q->a, q->b, q->c, q->den}}};
    }
    if (const auto* r = std::get_if<Rational>(&w)) {
        return {{"rational", {r->num, r->den}}};
    }
    return nullptr;
}

// 1-based line of a byte offset.
std::size_t line_of(std::string_view text, std::size_t offset)
{
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

}  // namespace

JumpProblem problem_from_json(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ProblemFileError("line " + std::to_string(line_of(text, e.byte == 0 ? 0 : e.byte - 1)) +
                               ": malformed JSON: " + e.what());
    }
    if (!doc.is_object()) {
        field_error("<root>", "expected an object");
    }
    static const char* const known[] = {"schema", "a", "b", "p", "f", "G", "omega_exact"};
    for (const auto& item : doc.items()) {
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return item.key() == k; }) ==
            std::end(known)) {
            field_error(item.key(), "unknown field");
        }
    }
    if (doc.contains("schema") && integer(doc["schema"], "schema") != kProblemSchema) {
        field_error("schema", "unsupported version (expected " + std::to_string(kProblemSchema) + ")");
    }
    const double a = number(member(doc, "a", ""), "a");
    const double b = number(member(doc, "b", ""), "b");
    const double p = number(member(doc, "p", ""), "p");
    ForcingModel forcing;
    if (doc.contains("f")) {
        forcing.f = read_fourier(member(doc["f"], "fourier", "f"), "f.fourier");
    }
    if (doc.contains("G")) {
        forcing.g = read_g(doc["G"]);
    }
    BuildOptions options;
    if (doc.contains("omega_exact") && !doc["omega_exact"].is_null()) {
        options.exact_omega = read_exact(doc["omega_exact"]);
    }
    try {
        return build_problem(a, b, p, std::move(forcing), options);
    } catch (const std::invalid_argument& e) {
        throw ProblemFileError(std::string("invalid problem: ") + e.what());
    } catch (const std::domain_error& e) {
        throw ProblemFileError(std::string("field 'p': ") + e.what());
    }
}

JumpProblem load_problem(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ProblemFileError("cannot open problem file " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return problem_from_json(ss.str());
}

std::string problem_to_json(const JumpProblem& problem)
{
    json doc;
    doc["schema"] = kProblemSchema;
    doc["a"] = problem.a;
    doc["b"] = problem.b;
    doc["p"] = problem.p();
    doc["f"] = {{"fourier", write_fourier(problem.forcing.f)}};
    doc["G"] = write_g(problem.forcing.g);
    if (problem.exact_omega) {
        doc["omega_exact"] = write_exact(*problem.exact_omega);
    }
    return doc.dump();
}

}  // namespace plapkam

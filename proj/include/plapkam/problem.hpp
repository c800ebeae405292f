// Problem instances for
//     (phi_p(x'))' + a phi_p(x+) - b phi_p(x-) = G_x(x, t) + f(t)
// with forcing of period 2 pi_p.

#ifndef PLAPKAM_PROBLEM_HPP
#define PLAPKAM_PROBLEM_HPP

#include "plapkam/arithmetic.hpp"
#include "plapkam/ptrig.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace plapkam {

struct FourierTerm {
    int k = 0;
    double c = 0.0;  ///< cosine coefficient
    double s = 0.0;  ///< sine coefficient (ignored for k = 0)
};

/// c_0 + sum_k c_k cos(k lambda t) + s_k sin(k lambda t), lambda = pi / pi_p.
struct FourierSeries {
    std::vector<FourierTerm> terms;

    static FourierSeries constant(double c0) { return {{{0, c0, 0.0}}}; }
    /// Sum of the k = 0 cosine coefficients.
    double mean() const;
    /// Sum of |c_k| + |s_k|; bounds the series.
    double sup_bound() const;
    /// Throws std::invalid_argument on negative k or non-finite coefficients.
    void validate() const;
    /// Value at phase lambda * t.
    double eval(double phase) const;
};

struct ZeroG {};

/// G = A sin(mu x) T(t),  G_hat = -(A/mu) cos(mu x) T(t).
struct SinusoidalG {
    double amplitude = 0.0;
    double mu = 1.0;
    FourierSeries coupling = {{{1, 1.0, 0.0}}};
};

/// G = g(x) T(t) with g the C^1 cubic Hermite interpolant of samples on a
/// strictly increasing grid (zero end slopes, constant outside the grid).
/// G_hat = int_{x_0}^x g, which grows linearly outside the grid unless g
/// vanishes there.
struct TabulatedG {
    std::vector<double> x;
    std::vector<double> g;
    FourierSeries coupling = {{{1, 1.0, 0.0}}};
};

using GModel = std::variant<ZeroG, SinusoidalG, TabulatedG>;

struct GBounds {
    double sup_G = 0.0;
    double sup_Gx = 0.0;
    double sup_Ghat = 0.0;  ///< infinity when not bounded
    /// Bounds hold by construction for all derivatives (analytic kinds).
    bool verified = true;
};

struct ForcingModel {
    FourierSeries f = FourierSeries::constant(0.0);
    GModel g = ZeroG{};

    static ForcingModel unforced() { return {}; }
    static ForcingModel constant(double c0) { return {FourierSeries::constant(c0), ZeroG{}}; }
};

const char* g_kind_name(const GModel& g);

/// Precomputed tables for a TabulatedG.
struct HermiteTable {
    std::vector<double> x, g, slope, cumulative;
    double eval(double x) const;
    double derivative(double x) const;
    double integral(double x) const;
};

struct BuildOptions {
    /// Permit a == b; only for oracle tests.
    bool allow_symmetric = false;
    /// Exact omega; checked against the computed value to 1e-12.
    std::optional<Frequency> exact_omega;
};

class JumpProblem;
const HermiteTable* hermite_table(const JumpProblem& problem);

class JumpProblem {
public:
    double a = 0.0;
    double b = 0.0;
    PExponents pexp = PExponents::from_p(2.0);
    double omega = 0.0;
    AsymmetricCoefs coefs = AsymmetricCoefs::make(PExponents::from_p(2.0), 1.0, 1.0);
    double d = 0.0;  ///< p / a1
    ForcingModel forcing;
    GBounds bounds;
    /// Exact value of omega when known; used by the Diophantine scan.
    std::optional<Frequency> exact_omega;

    double p() const { return pexp.p(); }
    double q() const { return pexp.q(); }
    double pi_p() const { return trig_->pi_p(); }
    double period() const { return trig_->period(); }
    /// pi / pi_p
    double lambda() const { return lambda_; }
    const PTrig& trig() const { return *trig_; }
    /// The auxiliary pair (v, u) for this problem's (p, a1, b1).
    const AuxOscillator& aux() const { return *aux_; }

private:
    friend JumpProblem build_problem(double, double, double, ForcingModel, BuildOptions);
    std::optional<PTrig> trig_;
    std::optional<AuxOscillator> aux_;
    std::optional<HermiteTable> table_;
    double lambda_ = 0.0;
    friend const HermiteTable* hermite_table(const JumpProblem&);
};

/// Throws std::invalid_argument (a, b not positive, a == b, bad forcing,
/// exact omega mismatch) or std::domain_error (p < 2).
JumpProblem build_problem(double a, double b, double p, ForcingModel forcing, BuildOptions options = {});

/// Rebuild from (omega, a1, b1): a = omega^-p a1, b = omega^-p b1.
JumpProblem build_from_scaled(double omega, double a1, double b1, double p, ForcingModel forcing,
                              BuildOptions options = {});

/// [f] != 0 beyond rounding of the coefficients.
bool mean_is_nonzero(const FourierSeries& f);

double eval_f(const JumpProblem& problem, double t);
double eval_G(const JumpProblem& problem, double x, double t);
double eval_Gx(const JumpProblem& problem, double x, double t);
double eval_Ghat(const JumpProblem& problem, double x, double t);

enum class Verdict { theorem1_applies, resonant, mean_zero, non_diophantine_evidence, g_unverified };
const char* verdict_name(Verdict v);

struct HypothesisReport {
    double mean_f = 0.0;
    bool mean_nonzero = false;
    DiophantineReport diophantine;
    bool g_bounded = false;
    Verdict verdict = Verdict::mean_zero;
};

HypothesisReport check_hypotheses(const JumpProblem& problem, double gamma, double tau, std::int64_t m_max);

/// Malformed problem file; what() names the line or field.
class ProblemFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// JSON document {a, b, p, f: {fourier: [[k, c, s], ...]}, G: {kind, params},
/// omega_exact?: {quadratic: [A, B, C, D]} | {rational: [n, d]}}.
/// Optional top-level "schema" field; files without it are read as this version.
inline constexpr int kProblemSchema = 1;

JumpProblem problem_from_json(std::string_view text);
JumpProblem load_problem(const std::string& path);
/// Canonical form: sorted keys, shortest round-trip numbers.
std::string problem_to_json(const JumpProblem& problem);

}  // namespace plapkam

#endif

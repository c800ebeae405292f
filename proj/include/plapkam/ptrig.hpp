// Generalized p-trigonometric functions.
//
// sin_p is the solution of (phi_p(C'))' + phi_p(C) = 0, C(0) = 0, C'(0) = 1,
// with phi_p(s) = |s|^(p-2) s.  It is odd, 2 pi_p periodic and on the first
// quarter [0, pi_p/2] it is the inverse of
//
//     arcsin_p(w) = int_0^w (1 - s^p/(p-1))^(-1/p) ds.
//
// The asymmetric pair (v, u) is the periodic solution of
//     v' = phi_q(u),  u' = -a1 phi_p(v+) + b1 phi_p(v-)
// started at (v, u) = ((p-1)^(1/p), 0).

#ifndef PLAPKAM_PTRIG_HPP
#define PLAPKAM_PTRIG_HPP

#include <utility>

namespace plapkam {

/// Exponent pair (p, q) with 1/p + 1/q = 1 and p >= 2.
class PExponents {
public:
    /// Throws std::domain_error when p < 2 or p is not finite.
    static PExponents from_p(double p);

    double p() const { return p_; }
    double q() const { return q_; }

private:
    PExponents(double p, double q) : p_(p), q_(q) {}
    double p_;
    double q_;
};

/// Stiffness pair normalized so that a1^(-1/p) + b1^(-1/p) = 2.
class AsymmetricCoefs {
public:
    /// Checks the normalization to 1e-12; throws std::invalid_argument.
    static AsymmetricCoefs make(PExponents pexp, double a1, double b1);
    /// b1 chosen so the pair is normalized; requires a1 > 2^-p.
    static AsymmetricCoefs from_a1(PExponents pexp, double a1);

    double a1() const { return a1_; }
    double b1() const { return b1_; }

private:
    AsymmetricCoefs(double a1, double b1) : a1_(a1), b1_(b1) {}
    double a1_;
    double b1_;
};

/// phi_p(s) = |s|^(p-2) s, with phi_p(0) = 0.
double phi(double s, double exponent);

double log_beta(double x, double y);
double beta_function(double x, double y);

/// A point on the first quarter of the p-circle z^p + mu^q = 1, together with
/// its angle.  For C = sin_p(angle):  C = M z and |phi_p(C')| = mu, where
/// M = (p-1)^(1/p).  `complement` is pi_p/2 - angle, carried separately so
/// that neither end of the quarter loses digits.
struct QuarterPoint {
    double z;
    double mu;
    double angle;
    double complement;
};

/// Generalized trigonometric functions for a fixed exponent.  Construction
/// caches pi_p and the quarter split point; all members are const.
class PTrig {
public:
    explicit PTrig(PExponents pexp);

    PExponents exponents() const { return pexp_; }
    double p() const { return pexp_.p(); }
    double q() const { return pexp_.q(); }
    /// (p-1)^(1/p), the amplitude of sin_p.
    double amplitude() const { return amp_; }
    double pi_p() const { return pi_p_; }
    double half_pi_p() const { return 0.5 * pi_p_; }
    double period() const { return 2.0 * pi_p_; }

    double sin(double t) const;
    double dsin(double t) const;
    /// sin_p and its derivative in one evaluation.
    std::pair<double, double> sin_and_dsin(double t) const;
    /// Throws std::domain_error outside [0, (p-1)^(1/p)].
    double arcsin(double w) const;

    /// Quarter point at `angle` in [0, pi_p/2]; `complement` must equal
    /// pi_p/2 - angle (pass it when it is known more accurately).
    QuarterPoint quarter_at(double angle, double complement) const;
    QuarterPoint quarter_at(double angle) const { return quarter_at(angle, half_pi_p() - angle); }
    /// Inverse of quarter_at from a (possibly slightly off-circle) pair
    /// (z, mu); the better conditioned coordinate decides the angle.
    QuarterPoint quarter_from(double z, double mu) const;

    /// t reduced into [0, 2 pi_p) with a two-word period, accurate for
    /// |t| up to about 1e8.
    double reduce(double t) const;

private:
    PExponents pexp_;
    double amp_;
    double pi_p_;
    double period_hi_;
    double period_lo_;
    double split_angle_;  // angle where z^p = 1/2
};

double pi_p(PExponents pexp);
double sin_p(PExponents pexp, double t);
double sin_p_derivative(PExponents pexp, double t);
double arcsin_p(PExponents pexp, double w);
/// I_p = int_0^{pi_p/2} sin_p t dt = (p-1)^(2/p)/p * B(2/p, 1 - 1/p).
double quarter_area(PExponents pexp);

struct AuxPoint {
    double v;
    double dv;  ///< v'
    double u;   ///< phi_p(v')
};

/// The asymmetric periodic pair (v, u).
class AuxOscillator {
public:
    AuxOscillator(PExponents pexp, AsymmetricCoefs coefs);

    const PTrig& trig() const { return trig_; }
    AsymmetricCoefs coefs() const { return coefs_; }
    double period() const { return trig_.period(); }
    /// First zero of v, pi_p / (2 a1^(1/p)); also the first branch joint.
    double first_zero() const { return zero_; }
    /// Minimum of v: -(a1/b1)^(1/p) (p-1)^(1/p), attained at t = pi_p.
    double minimum() const { return -ratio_ * trig_.amplitude(); }

    AuxPoint at(double t) const;
    double v(double t) const { return at(t).v; }
    double u(double t) const { return at(t).u; }

    /// (v', one-sided) from the left and right of the joint t = first_zero().
    std::pair<double, double> joint_derivatives() const;

    /// Angle t in [0, 2 pi_p) of a point (v, u) on the energy level
    /// q^-1 |u|^q + p^-1 (a1 |v+|^p + b1 |v-|^p) = a1/q.  Off-level input is
    /// projected along the better conditioned coordinate.
    double angle_of(double v, double u) const;

    /// (int_0^{z1} v, int_{z1}^{pi_p} v) with z1 = first_zero(), closed form.
    std::pair<double, double> quarter_integrals() const;
    /// [v] = (1/2 pi_p) int_0^{2 pi_p} v.
    double mean() const;

private:
    PTrig trig_;
    AsymmetricCoefs coefs_;
    double alpha_;  // a1^(1/p)
    double beta_;   // b1^(1/p)
    double ratio_;  // (a1/b1)^(1/p)
    double zero_;
    double u_scale_;  // a1^(1/q)
};

double v_aux(PExponents pexp, AsymmetricCoefs coefs, double t);
double u_aux(PExponents pexp, AsymmetricCoefs coefs, double t);
std::pair<double, double> quarter_integrals(PExponents pexp, AsymmetricCoefs coefs);

}  // namespace plapkam

#endif

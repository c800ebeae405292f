#include "plapkam/ptrig.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace plapkam {

namespace {

constexpr long double kPiL = 3.141592653589793238462643383279502884L;

// K_s(z) = int_0^z (1 - x^s)^(-1/s) dx for z^s <= 1/2 (and a little beyond),
// from the binomial series z * sum_k (1/s)_k / k! * z^(sk) / (sk + 1).
double kernel(double z, double s)
{
    if (z <= 0.0) {
        return 0.0;
    }
    const double w = std::pow(z, s);
    const double inv_s = 1.0 / s;
    double coef = 1.0;  // (1/s)_k / k!
    double wk = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 400; ++k) {
        coef *= (inv_s + (k - 1)) / k;
        wk *= w;
        const double term = coef * wk / (s * k + 1.0);
        sum += term;
        if (term < 1e-17 * sum) {
            break;
        }
    }
    return z * sum;
}

double kernel_derivative(double z, double s)
{
    return std::pow(1.0 - std::pow(z, s), -1.0 / s);
}

// Solves scale * K_s(z) = target for z in [0, zmax].  K_s is increasing and
// convex, so Newton started to the right of the root decreases monotonically;
// the bracket catches anything the iteration overshoots.
double invert_kernel(double target, double scale, double s, double zmax)
{
    if (target <= 0.0) {
        return 0.0;
    }
    double lo = 0.0;
    double hi = zmax;
    double z = std::min(target / scale, zmax);
    for (int it = 0; it < 100; ++it) {
        const double f = scale * kernel(z, s) - target;
        if (f > 0.0) {
            hi = z;
        } else {
            lo = z;
        }
        double next = z - f / (scale * kernel_derivative(z, s));
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - z) <= 2.0 * std::numeric_limits<double>::epsilon() * z || hi - lo <= 0.0) {
            return next;
        }
        z = next;
    }
    return z;
}

}  // namespace

PExponents PExponents::from_p(double p)
{
    if (!std::isfinite(p) || p < 2.0) {
        throw std::domain_error("exponent p must be finite and >= 2, got " + std::to_string(p));
    }
    return PExponents(p, p / (p - 1.0));
}

AsymmetricCoefs AsymmetricCoefs::make(PExponents pexp, double a1, double b1)
{
    if (!(a1 > 0.0) || !(b1 > 0.0) || !std::isfinite(a1) || !std::isfinite(b1)) {
        throw std::invalid_argument("a1 and b1 must be positive and finite");
    }
    const double p = pexp.p();
    const double norm = std::pow(a1, -1.0 / p) + std::pow(b1, -1.0 / p);
    if (std::abs(norm - 2.0) > 1e-12) {
        throw std::invalid_argument("a1^(-1/p) + b1^(-1/p) must equal 2, got " + std::to_string(norm));
    }
    return AsymmetricCoefs(a1, b1);
}

AsymmetricCoefs AsymmetricCoefs::from_a1(PExponents pexp, double a1)
{
    const double p = pexp.p();
    const double rest = 2.0 - std::pow(a1, -1.0 / p);
    if (!(a1 > 0.0) || !(rest > 0.0)) {
        throw std::invalid_argument("a1 must exceed 2^-p");
    }
    return AsymmetricCoefs(a1, std::pow(rest, -p));
}

double phi(double s, double exponent)
{
    if (s == 0.0) {
        return 0.0;
    }
    return std::copysign(std::pow(std::abs(s), exponent - 1.0), s);
}

double log_beta(double x, double y)
{
    return std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y);
}

double beta_function(double x, double y)
{
    return std::exp(log_beta(x, y));
}

PTrig::PTrig(PExponents pexp) : pexp_(pexp)
{
    const long double p = pexp.p();
    const long double amp = std::pow(p - 1.0L, 1.0L / p);
    const long double pi_p = 2.0L * kPiL * amp / (p * std::sin(kPiL / p));
    amp_ = static_cast<double>(amp);
    pi_p_ = static_cast<double>(pi_p);
    period_hi_ = static_cast<double>(2.0L * pi_p);
    period_lo_ = static_cast<double>(2.0L * pi_p - static_cast<long double>(period_hi_));
    split_angle_ = amp_ * kernel(std::pow(0.5, 1.0 / pexp.p()), pexp.p());
}

double PTrig::reduce(double t) const
{
    const double k = std::floor(t / period_hi_);
    double r = std::fma(-k, period_hi_, t) - k * period_lo_;
    if (r < 0.0) {
        r += period_hi_;
    } else if (r >= period_hi_) {
        r -= period_hi_;
    }
    return r < 0.0 ? 0.0 : r;
}

QuarterPoint PTrig::quarter_at(double angle, double complement) const
{
    const double p = pexp_.p();
    const double q = pexp_.q();
    angle = std::clamp(angle, 0.0, half_pi_p());
    complement = std::clamp(complement, 0.0, half_pi_p());
    QuarterPoint qp{0.0, 0.0, angle, complement};
    if (angle <= split_angle_) {
        qp.z = invert_kernel(angle, amp_, p, std::pow(0.5, 1.0 / p) * (1.0 + 1e-12));
        qp.mu = std::pow(1.0 - std::pow(qp.z, p), 1.0 / q);
    } else {
        qp.mu = invert_kernel(complement, amp_ * q / p, q, std::pow(0.5, 1.0 / q) * (1.0 + 1e-12));
        qp.z = std::pow(1.0 - std::pow(qp.mu, q), 1.0 / p);
    }
    return qp;
}

QuarterPoint PTrig::quarter_from(double z, double mu) const
{
    const double p = pexp_.p();
    const double q = pexp_.q();
    z = std::max(z, 0.0);
    mu = std::max(mu, 0.0);
    QuarterPoint qp{};
    if (std::pow(z, p) <= std::pow(mu, q)) {
        qp.z = std::min(z, 1.0);
        qp.mu = std::pow(1.0 - std::pow(qp.z, p), 1.0 / q);
        qp.angle = amp_ * kernel(qp.z, p);
        qp.complement = half_pi_p() - qp.angle;
    } else {
        qp.mu = std::min(mu, 1.0);
        qp.z = std::pow(1.0 - std::pow(qp.mu, q), 1.0 / p);
        qp.complement = amp_ * q / p * kernel(qp.mu, q);
        qp.angle = half_pi_p() - qp.complement;
    }
    return qp;
}

std::pair<double, double> PTrig::sin_and_dsin(double t) const
{
    double tau = reduce(t);
    double sign = 1.0;
    if (tau >= pi_p_) {
        tau -= pi_p_;
        sign = -1.0;
    }
    const double q = pexp_.q();
    if (tau <= half_pi_p()) {
        const QuarterPoint qp = quarter_at(tau, half_pi_p() - tau);
        return {sign * amp_ * qp.z, sign * std::pow(qp.mu, q - 1.0)};
    }
    const QuarterPoint qp = quarter_at(pi_p_ - tau, tau - half_pi_p());
    return {sign * amp_ * qp.z, -sign * std::pow(qp.mu, q - 1.0)};
}

double PTrig::sin(double t) const
{
    return sin_and_dsin(t).first;
}

double PTrig::dsin(double t) const
{
    return sin_and_dsin(t).second;
}

double PTrig::arcsin(double w) const
{
    if (!(w >= 0.0) || w > amp_) {
        throw std::domain_error("arcsin_p argument outside [0, (p-1)^(1/p)]: " + std::to_string(w));
    }
    const double p = pexp_.p();
    const double q = pexp_.q();
    const double z = std::min(w / amp_, 1.0);
    const double zp = std::pow(z, p);
    if (zp <= 0.5) {
        return amp_ * kernel(z, p);
    }
    const double mu = std::pow(1.0 - zp, 1.0 / q);
    return half_pi_p() - amp_ * q / p * kernel(mu, q);
}

double pi_p(PExponents pexp)
{
    return PTrig(pexp).pi_p();
}

double sin_p(PExponents pexp, double t)
{
    return PTrig(pexp).sin(t);
}

double sin_p_derivative(PExponents pexp, double t)
{
    return PTrig(pexp).dsin(t);
}

double arcsin_p(PExponents pexp, double w)
{
    return PTrig(pexp).arcsin(w);
}

double quarter_area(PExponents pexp)
{
    const double p = pexp.p();
    return std::pow(p - 1.0, 2.0 / p) / p * beta_function(2.0 / p, 1.0 - 1.0 / p);
}

AuxOscillator::AuxOscillator(PExponents pexp, AsymmetricCoefs coefs)
    : trig_(pexp), coefs_(coefs)
{
    const double p = pexp.p();
    alpha_ = std::pow(coefs.a1(), 1.0 / p);
    beta_ = std::pow(coefs.b1(), 1.0 / p);
    ratio_ = std::pow(coefs.a1() / coefs.b1(), 1.0 / p);
    zero_ = trig_.half_pi_p() / alpha_;
    u_scale_ = std::pow(coefs.a1(), 1.0 / pexp.q());
}

AuxPoint AuxOscillator::at(double t) const
{
    const PTrig& tr = trig_;
    double tau = tr.reduce(t);
    const bool mirrored = tau > tr.pi_p();
    if (mirrored) {
        tau = tr.period() - tau;
    }
    const double qm1 = tr.q() - 1.0;
    AuxPoint pt{};
    if (tau <= zero_) {
        const QuarterPoint qp = tr.quarter_at(alpha_ * (zero_ - tau), alpha_ * tau);
        pt.v = tr.amplitude() * qp.z;
        pt.dv = -alpha_ * std::pow(qp.mu, qm1);
        pt.u = -u_scale_ * qp.mu;
    } else {
        const QuarterPoint qp = tr.quarter_at(beta_ * (tau - zero_), beta_ * (tr.pi_p() - tau));
        pt.v = -ratio_ * tr.amplitude() * qp.z;
        pt.dv = -ratio_ * beta_ * std::pow(qp.mu, qm1);
        pt.u = -u_scale_ * qp.mu;
    }
    if (mirrored) {
        pt.dv = -pt.dv;
        pt.u = -pt.u;
    }
    return pt;
}

std::pair<double, double> AuxOscillator::joint_derivatives() const
{
    const double left = alpha_ * trig_.dsin(trig_.pi_p());
    const double right = -ratio_ * beta_ * trig_.dsin(0.0);
    return {left, right};
}

double AuxOscillator::angle_of(double v, double u) const
{
    const PTrig& tr = trig_;
    const double z = v >= 0.0 ? v / tr.amplitude() : -v / (ratio_ * tr.amplitude());
    const QuarterPoint qp = tr.quarter_from(z, std::abs(u) / u_scale_);
    const double base = v >= 0.0 ? qp.complement / alpha_ : zero_ + qp.angle / beta_;
    if (u > 0.0) {
        const double theta = tr.period() - base;
        return theta >= tr.period() ? 0.0 : theta;
    }
    return base;
}

std::pair<double, double> AuxOscillator::quarter_integrals() const
{
    const double ip = quarter_area(trig_.exponents());
    return {ip / alpha_, -alpha_ * ip / (beta_ * beta_)};
}

double AuxOscillator::mean() const
{
    const auto [first, second] = quarter_integrals();
    return (first + second) / trig_.pi_p();
}

double v_aux(PExponents pexp, AsymmetricCoefs coefs, double t)
{
    return AuxOscillator(pexp, coefs).v(t);
}

double u_aux(PExponents pexp, AsymmetricCoefs coefs, double t)
{
    return AuxOscillator(pexp, coefs).u(t);
}

std::pair<double, double> quarter_integrals(PExponents pexp, AsymmetricCoefs coefs)
{
    return AuxOscillator(pexp, coefs).quarter_integrals();
}

}  // namespace plapkam

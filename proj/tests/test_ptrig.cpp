#include <doctest.h>

#include "plapkam/ptrig.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

using namespace plapkam;
using std::numbers::pi;

namespace {

// 1 - s^p/(p-1) evaluated without cancellation near the turning point; `gap`
// is the distance from s to the right end w of the interval.
double turning_base(double p, double w, double s, double gap)
{
    const double amp = std::pow(p - 1.0, 1.0 / p);
    if (s < 0.5 * amp) {
        return 1.0 - std::pow(s, p) / (p - 1.0);
    }
    // s = w - gap;  1 - (s/amp)^p = -expm1(p log1p((w - amp - gap)/amp))
    return -std::expm1(p * std::log1p((w - amp - gap) / amp));
}

// Independent oracle: the implicit integral with its endpoint singularity
// left to tanh-sinh.
double arcsin_by_quadrature(double p, double w)
{
    if (w == 0.0) {
        return 0.0;
    }
    boost::math::quadrature::tanh_sinh<double> ts;
    auto f = [p, w](double s, double sc) {
        const double gap = s > 0.5 * w ? sc : w - s;
        return std::pow(turning_base(p, w, s, gap), -1.0 / p);
    };
    return ts.integrate(f, 0.0, w);
}

// Independent oracle: integrate (phi_p(C'))' + phi_p(C) = 0 as the system
// C' = phi_q(w), w' = -phi_p(C) with C(0) = 0, w(0) = 1.
double sin_by_ivp(double p, double t)
{
    using State = std::array<double, 2>;
    namespace odeint = boost::numeric::odeint;
    const double q = p / (p - 1.0);
    auto sys = [p, q](const State& s, State& ds, double) {
        ds[0] = std::copysign(std::pow(std::abs(s[1]), q - 1.0), s[1]);
        ds[1] = -std::copysign(std::pow(std::abs(s[0]), p - 1.0), s[0]);
    };
    State s{0.0, 1.0};
    odeint::integrate_adaptive(odeint::make_controlled<odeint::runge_kutta_fehlberg78<State>>(1e-15, 1e-15), sys,
                               s, 0.0, t, 1e-4);
    return s[0];
}

const std::array<double, 4> kExponents{2.0, 2.5, 3.0, 4.0};

}  // namespace

TEST_CASE("pi_p closed formula")
{
    CHECK(pi_p(PExponents::from_p(2.0)) == doctest::Approx(pi).epsilon(1e-15));

    // Oracle: 2 * int_0^{3^{1/4}} (1 - s^4/3)^{-1/4} ds by quadrature.
    const double oracle = 2.0 * arcsin_by_quadrature(4.0, std::pow(3.0, 0.25));
    const double closed = pi_p(PExponents::from_p(4.0));
    CHECK(std::abs(closed - oracle) < 1e-10);
    CHECK(closed == doctest::Approx(2.9236).epsilon(1e-4));

    for (double p : kExponents) {
        const auto pe = PExponents::from_p(p);
        const PTrig tr(pe);
        CHECK(std::abs(2.0 * tr.arcsin(tr.amplitude()) - tr.pi_p()) < 1e-10);
        CHECK(std::abs(2.0 * arcsin_by_quadrature(p, tr.amplitude()) - tr.pi_p()) < 1e-10);
    }
}

TEST_CASE("exponent validation")
{
    CHECK_THROWS_AS(PExponents::from_p(1.5), std::domain_error);
    CHECK_THROWS_AS(PExponents::from_p(std::nan("")), std::domain_error);
    for (double p : {2.0, 2.25, 3.0, 7.5}) {
        const auto pe = PExponents::from_p(p);
        CHECK(std::abs(1.0 / pe.p() + 1.0 / pe.q() - 1.0) <= 1e-14);
    }
    const auto pe = PExponents::from_p(3.0);
    CHECK_THROWS_AS(AsymmetricCoefs::make(pe, 1.0, 2.0), std::invalid_argument);
    const auto c = AsymmetricCoefs::from_a1(pe, 0.5);
    CHECK_NOTHROW(AsymmetricCoefs::make(pe, c.a1(), c.b1()));
}

TEST_CASE("sin_p reduces to sin at p = 2")
{
    const PTrig tr(PExponents::from_p(2.0));
    for (int i = 0; i <= 4000; ++i) {
        const double t = 4.0 * pi * i / 4000.0;
        REQUIRE(std::abs(tr.sin(t) - std::sin(t)) < 1e-10);
        REQUIRE(std::abs(tr.dsin(t) - std::cos(t)) < 1e-10);
    }
    // Long arguments go through the two-word period reduction.
    for (double t : {1e3, 12345.678, 1e6 + 0.5, 1e8}) {
        CHECK(std::abs(tr.sin(t) - std::sin(t)) < 1e-8);
    }
}

TEST_CASE("sin_p initial values and quarter point")
{
    for (double p : kExponents) {
        const PTrig tr(PExponents::from_p(p));
        CHECK(tr.sin(0.0) == 0.0);
        CHECK(tr.dsin(0.0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(tr.sin(tr.half_pi_p()) - std::pow(p - 1.0, 1.0 / p)) < 1e-14);
        CHECK(std::abs(tr.dsin(tr.half_pi_p())) < 1e-12);
    }
}

TEST_CASE("sin_p matches IVP integration")
{
    const PTrig tr3(PExponents::from_p(3.0));
    CHECK(std::abs(tr3.sin(0.7) - sin_by_ivp(3.0, 0.7)) < 1e-10);
    for (double p : kExponents) {
        const PTrig tr(PExponents::from_p(p));
        // The IVP loses order at the turning point, so stay inside the
        // first quarter where the oracle is smooth.
        for (double s : {0.05, 0.3, 0.55, 0.8, 0.95}) {
            const double t = s * tr.half_pi_p();
            CHECK(std::abs(tr.sin(t) - sin_by_ivp(p, t)) < 1e-10);
        }
    }
}

TEST_CASE("arcsin_p values and domain")
{
    const auto p2 = PExponents::from_p(2.0);
    CHECK(arcsin_p(p2, 0.0) == 0.0);
    CHECK(arcsin_p(p2, 1.0) == doctest::Approx(pi / 2).epsilon(1e-15));
    CHECK(arcsin_p(p2, 0.3) == doctest::Approx(std::asin(0.3)).epsilon(1e-15));
    const auto p4 = PExponents::from_p(4.0);
    const double top = std::pow(3.0, 0.25);
    CHECK(std::abs(arcsin_p(p4, top) - 1.4618) < 1e-4);
    CHECK(std::abs(arcsin_p(p4, top) - arcsin_by_quadrature(4.0, top)) < 1e-10);
    CHECK_THROWS_AS(arcsin_p(p4, -0.1), std::domain_error);
    CHECK_THROWS_AS(arcsin_p(p4, top * 1.001), std::domain_error);

    for (double p : kExponents) {
        const PTrig tr(PExponents::from_p(p));
        double prev = -1.0;
        for (int i = 0; i <= 200; ++i) {
            const double w = tr.amplitude() * i / 200.0;
            const double a = tr.arcsin(w);
            REQUIRE(a > prev);
            prev = a;
            REQUIRE(std::abs(a - arcsin_by_quadrature(p, w)) < 1e-10);
            // inverse pair
            REQUIRE(std::abs(tr.sin(a) - w) < 1e-12);
        }
    }
}

TEST_CASE("quarter area I_p: Beta formula against quadrature")
{
    boost::math::quadrature::tanh_sinh<double> ts;
    CHECK(quarter_area(PExponents::from_p(2.0)) == doctest::Approx(1.0).epsilon(1e-14));
    for (double p : kExponents) {
        const auto pe = PExponents::from_p(p);
        const PTrig tr(pe);
        // Route 1: quadrature of sin_p itself.
        const double direct = ts.integrate([&](double t) { return tr.sin(t); }, 0.0, tr.half_pi_p());
        // Route 2: substitute s = sin_p t, no use of the sin_p implementation.
        const double w = tr.amplitude();
        const double subst = ts.integrate(
            [p, w](double s, double sc) {
                const double gap = s > 0.5 * w ? sc : w - s;
                return s * std::pow(turning_base(p, w, s, gap), -1.0 / p);
            },
            0.0, w);
        CHECK(std::abs(quarter_area(pe) - direct) < 1e-9);
        CHECK(std::abs(quarter_area(pe) - subst) < 1e-9);
    }
    CHECK(std::abs(quarter_area(PExponents::from_p(4.0)) - 1.0377) < 1e-4);
}

TEST_CASE("p-Pythagorean identity")
{
    for (double p : kExponents) {
        const PTrig tr(PExponents::from_p(p));
        for (int i = 0; i <= 1000; ++i) {
            const double t = tr.half_pi_p() * i / 1000.0;
            const auto [s, ds] = tr.sin_and_dsin(t);
            REQUIRE(std::abs(std::pow(std::abs(ds), p) + std::pow(std::abs(s), p) / (p - 1.0) - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("sin_p symmetries on a 1000-point grid")
{
    for (double p : kExponents) {
        const PTrig tr(PExponents::from_p(p));
        const double P = tr.pi_p();
        for (int i = 0; i <= 1000; ++i) {
            const double s = i / 1000.0;
            const double t1 = 0.5 * P * s;
            REQUIRE(std::abs(tr.sin(P - t1) - tr.sin(t1)) < 1e-10);
            const double t2 = P + P * s;
            REQUIRE(std::abs(tr.sin(2.0 * P - t2) + tr.sin(t2)) < 1e-10);
            const double t3 = 2.0 * P * s;
            REQUIRE(std::abs(tr.sin(t3 + 2.0 * P) - tr.sin(t3)) < 1e-10);
            REQUIRE(std::abs(tr.sin(-t3) + tr.sin(t3)) < 1e-10);
            REQUIRE(std::abs(tr.sin(t3)) <= tr.amplitude() * (1.0 + 1e-15));
        }
    }
}

namespace {

struct Triple {
    double p;
    double a1;
};

// Three (p, a1) choices; b1 follows from the normalization.
const std::array<Triple, 3> kTriples{{{2.0, 9.0 / 16.0}, {3.0, 0.6}, {4.0, 1.7}}};

}  // namespace

TEST_CASE("auxiliary pair: initial values, zero and minimum")
{
    for (const auto& tr : kTriples) {
        const auto pe = PExponents::from_p(tr.p);
        const auto coefs = AsymmetricCoefs::from_a1(pe, tr.a1);
        const AuxOscillator aux(pe, coefs);
        const double amp = std::pow(tr.p - 1.0, 1.0 / tr.p);
        CHECK(aux.v(0.0) == doctest::Approx(amp).epsilon(1e-15));
        CHECK(aux.u(0.0) == 0.0);
        CHECK(std::abs(aux.v(pi_p(pe) / (2.0 * std::pow(coefs.a1(), 1.0 / tr.p)))) < 1e-14);

        // Oracle: dense sampling of the second branch of v.
        double vmin = 1e300;
        const double z1 = aux.first_zero();
        for (int i = 0; i <= 20000; ++i) {
            const double t = z1 + (aux.trig().pi_p() - z1) * i / 20000.0;
            vmin = std::min(vmin, aux.v(t));
        }
        const double expected = -std::pow(coefs.a1() / coefs.b1(), 1.0 / tr.p) * amp;
        CHECK(std::abs(vmin - expected) < 1e-12);
        CHECK(std::abs(aux.minimum() - expected) < 1e-15);

        const auto [left, right] = aux.joint_derivatives();
        CHECK(std::abs(left - right) < 1e-9);
        // one-sided values from the evaluator agree with the joint formula
        CHECK(std::abs(aux.at(z1 - 1e-9).dv - left) < 1e-7);
        CHECK(std::abs(aux.at(z1 + 1e-9).dv - right) < 1e-7);
    }
}

TEST_CASE("auxiliary pair: energy identity and periodicity")
{
    for (const auto& tr : kTriples) {
        const auto pe = PExponents::from_p(tr.p);
        const auto coefs = AsymmetricCoefs::from_a1(pe, tr.a1);
        const AuxOscillator aux(pe, coefs);
        const double p = pe.p();
        const double q = pe.q();
        const double T = aux.period();
        for (int i = 0; i <= 1000; ++i) {
            const double t = T * i / 1000.0;
            const AuxPoint pt = aux.at(t);
            const double vp = std::max(pt.v, 0.0);
            const double vm = std::max(-pt.v, 0.0);
            const double energy = std::pow(std::abs(pt.u), q) / q +
                                  (coefs.a1() * std::pow(vp, p) + coefs.b1() * std::pow(vm, p)) / p;
            REQUIRE(std::abs(energy - coefs.a1() / q) < 1e-9);
            REQUIRE(std::abs(pt.u - phi(pt.dv, p)) < 1e-12);
            const AuxPoint shifted = aux.at(t + T);
            REQUIRE(std::abs(shifted.v - pt.v) < 1e-10);
            REQUIRE(std::abs(shifted.u - pt.u) < 1e-10);
        }
    }
}

TEST_CASE("auxiliary pair: u is the derivative route of v")
{
    // central differences of v against v' from the branch formulas
    for (const auto& tr : kTriples) {
        const auto pe = PExponents::from_p(tr.p);
        const AuxOscillator aux(pe, AsymmetricCoefs::from_a1(pe, tr.a1));
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> dist(0.0, aux.period());
        for (int i = 0; i < 300; ++i) {
            const double t = dist(rng);
            const double h = 1e-6;
            const double fd = (aux.v(t + h) - aux.v(t - h)) / (2 * h);
            REQUIRE(std::abs(fd - aux.at(t).dv) < 1e-6);
        }
    }
}

TEST_CASE("auxiliary pair: harmonic oracle at p = 2, a1 = b1 = 1")
{
    const auto pe = PExponents::from_p(2.0);
    const AuxOscillator aux(pe, AsymmetricCoefs::make(pe, 1.0, 1.0));
    for (int i = 0; i <= 500; ++i) {
        const double t = 2.0 * pi * i / 500.0;
        REQUIRE(std::abs(aux.v(t) - std::cos(t)) < 1e-12);
        REQUIRE(std::abs(aux.u(t) + std::sin(t)) < 1e-12);
    }
}

TEST_CASE("quarter integrals match the closed forms")
{
    {
        const auto pe = PExponents::from_p(2.0);
        const auto coefs = AsymmetricCoefs::make(pe, 9.0 / 16.0, 9.0 / 4.0);
        const auto [first, second] = quarter_integrals(pe, coefs);
        CHECK(std::abs(first - 4.0 / 3.0) < 1e-12);
        CHECK(std::abs(second + 1.0 / 3.0) < 1e-12);
    }
    {
        const auto pe = PExponents::from_p(3.0);
        const auto [first, second] = quarter_integrals(pe, AsymmetricCoefs::make(pe, 1.0, 1.0));
        CHECK(first == doctest::Approx(quarter_area(pe)).epsilon(1e-14));
        CHECK(second == doctest::Approx(-quarter_area(pe)).epsilon(1e-14));
    }
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    for (double p : kExponents) {
        const auto pe = PExponents::from_p(p);
        for (double a1 : {0.7, 1.0, 2.5}) {
            const auto coefs = AsymmetricCoefs::from_a1(pe, a1);
            const AuxOscillator aux(pe, coefs);
            auto v = [&](double t) { return aux.v(t); };
            const double z1 = aux.first_zero();
            const double q1 = GK::integrate(v, 0.0, z1, 15, 1e-14);
            const double q2 = GK::integrate(v, z1, aux.trig().pi_p(), 15, 1e-14);
            const auto [c1, c2] = aux.quarter_integrals();
            CHECK(std::abs(q1 - c1) < 1e-9);
            CHECK(std::abs(q2 - c2) < 1e-9);
        }
    }
}

TEST_CASE("angle recovery inverts the pair")
{
    for (const auto& tr : kTriples) {
        const auto pe = PExponents::from_p(tr.p);
        const AuxOscillator aux(pe, AsymmetricCoefs::from_a1(pe, tr.a1));
        for (int i = 0; i < 1000; ++i) {
            const double t = aux.period() * (i + 0.5) / 1000.0;
            const AuxPoint pt = aux.at(t);
            REQUIRE(std::abs(aux.angle_of(pt.v, pt.u) - t) < 1e-11);
        }
        CHECK(aux.angle_of(aux.v(0.0), 0.0) == 0.0);
        CHECK(std::abs(aux.angle_of(aux.minimum(), 0.0) - aux.trig().pi_p()) < 1e-12);
    }
}

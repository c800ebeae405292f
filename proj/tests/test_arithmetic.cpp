#include <doctest.h>

#include "plapkam/arithmetic.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>

using namespace plapkam;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

const QuadraticIrrational kGolden{-1, 1, 5, 2};

// Exhaustive oracle in 50-digit arithmetic: every m, and n on both sides of
// m*omega.
struct Oracle {
    big value;
    std::int64_t m;
};

Oracle brute_force(const big& omega, double tau, std::int64_t m_max)
{
    Oracle best{big(1e300), 0};
    for (std::int64_t m = 1; m <= m_max; ++m) {
        const big x = omega * m;
        const big fl = floor(x);
        for (const big& n : {fl, fl + 1}) {
            const big v = pow(big(m), big(tau)) * abs(x - n);
            if (v < best.value) {
                best = {v, m};
            }
        }
    }
    return best;
}

big golden_big() { return (sqrt(big(5)) - 1) / 2; }

}  // namespace

TEST_CASE("continued fraction examples")
{
    SUBCASE("golden mean, exact")
    {
        const auto cf = continued_fraction(kGolden, 40);
        REQUIRE(cf.quotients.size() == 41);
        CHECK(cf.quotients[0] == 0);
        for (std::size_t k = 1; k < cf.quotients.size(); ++k) {
            CHECK(cf.quotients[k] == 1);
        }
        CHECK_FALSE(cf.rational);
    }
    SUBCASE("golden mean, double: all ones until rounding level")
    {
        const auto cf = continued_fraction((std::sqrt(5.0) - 1.0) / 2.0, 40);
        CHECK(cf.quotients[0] == 0);
        REQUIRE(cf.quotients.size() >= 30);
        for (std::size_t k = 1; k < 30; ++k) {
            CHECK(cf.quotients[k] == 1);
        }
    }
    SUBCASE("3/4 terminates")
    {
        for (const Frequency w : {Frequency{0.75}, Frequency{Rational{3, 4}}, Frequency{Rational{-6, -8}}}) {
            const auto cf = continued_fraction(w, 40);
            CHECK(cf.quotients == std::vector<std::int64_t>{0, 1, 3});
            CHECK(cf.rational);
            CHECK(cf.convergents.back().p == 3);
            CHECK(cf.convergents.back().q == 4);
        }
    }
    SUBCASE("sqrt 2 = [1; 2, 2, ...]")
    {
        const auto cf = continued_fraction(QuadraticIrrational{0, 1, 2, 1}, 20);
        CHECK(cf.quotients[0] == 1);
        for (std::size_t k = 1; k < cf.quotients.size(); ++k) {
            CHECK(cf.quotients[k] == 2);
        }
    }
    SUBCASE("(3 + sqrt 7)/2 with a denominator not dividing N - P^2")
    {
        // Compare against 50-digit floating expansion.
        const QuadraticIrrational w{3, 1, 7, 2};
        const auto cf = continued_fraction(w, 25);
        big x = (3 + sqrt(big(7))) / 2;
        for (std::size_t k = 0; k < cf.quotients.size(); ++k) {
            const big a = floor(x);
            CHECK(cf.quotients[k] == a.convert_to<std::int64_t>());
            x = 1 / (x - a);
        }
    }
    SUBCASE("negative b")
    {
        // (5 - sqrt 3)/2 = 1.633...
        const QuadraticIrrational w{5, -1, 3, 2};
        const auto cf = continued_fraction(w, 25);
        big x = (5 - sqrt(big(3))) / 2;
        for (std::size_t k = 0; k < cf.quotients.size(); ++k) {
            const big a = floor(x);
            CHECK(cf.quotients[k] == a.convert_to<std::int64_t>());
            x = 1 / (x - a);
        }
    }
    SUBCASE("perfect-square radicand is rational")
    {
        const auto cf = continued_fraction(QuadraticIrrational{1, 2, 9, 4}, 40);  // 7/4
        CHECK(cf.rational);
        CHECK(cf.quotients == std::vector<std::int64_t>{1, 1, 3});
    }
}

TEST_CASE("continued fraction preconditions")
{
    CHECK_THROWS_AS(continued_fraction(-0.5, 10), std::invalid_argument);
    CHECK_THROWS_AS(continued_fraction(0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(continued_fraction(0.5, 41), std::invalid_argument);
    CHECK_THROWS_AS(continued_fraction(kGolden, -1), std::invalid_argument);
    CHECK_THROWS_AS(continued_fraction(Rational{1, 0}, 10), std::invalid_argument);
    CHECK_THROWS_AS(continued_fraction(QuadraticIrrational{1, 1, -5, 2}, 10), std::invalid_argument);
}

TEST_CASE("convergent recurrence, error bound and decreasing residuals")
{
    std::mt19937_64 rng(20261016);
    std::uniform_real_distribution<double> uni(0.01, 7.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double w = uni(rng);
        const auto cf = continued_fraction(w, 40);
        const auto& c = cf.convergents;
        REQUIRE(c.size() == cf.quotients.size());
        std::int64_t p1 = 1, q1 = 0, p2 = 0, q2 = 1;
        big prev_residual = 1e300;
        const big W = w;
        for (std::size_t k = 0; k < c.size(); ++k) {
            const std::int64_t a = cf.quotients[k];
            CHECK(c[k].p == a * p1 + p2);
            CHECK(c[k].q == a * q1 + q2);
            p2 = p1;
            q2 = q1;
            p1 = c[k].p;
            q1 = c[k].q;
            const big residual = abs(W * c[k].q - c[k].p);
            CHECK(residual < prev_residual);
            prev_residual = residual;
            if (k + 1 < c.size()) {
                const big bound = big(1) / (big(c[k].q) * big(c[k + 1].q));
                CHECK(abs(W - big(c[k].p) / c[k].q) < bound);
            }
        }
    }
}

TEST_CASE("diophantine scan: rational omega fails exactly")
{
    for (const Frequency w : {Frequency{2.0 / 3.0}, Frequency{Rational{2, 3}}}) {
        for (const double gamma : {1e-12, 0.2, 5.0}) {
            const auto r = diophantine_scan(w, gamma, 1.5, 1000);
            CHECK_FALSE(r.passed);
            CHECK(r.rational);
            CHECK(r.worst_value == 0.0);
            CHECK(r.worst_m == 3);
            CHECK(r.worst_n == -2);
        }
    }
    const auto r = diophantine_scan(Rational{3, 4}, 0.2, 1.5, 100);
    CHECK(r.rational);
    CHECK(r.worst_m == 4);
    CHECK(r.worst_n == -3);
    const auto d = diophantine_scan(0.75, 0.2, 1.5, 100);
    CHECK(d.rational);
    CHECK(d.worst_m == 4);
    // Rational but with denominator beyond the window: not detected there.
    const auto w = diophantine_scan(Rational{1, 1000}, 1e-9, 1.5, 999);
    CHECK_FALSE(w.rational);
    CHECK(w.worst_value > 0.0);
}

TEST_CASE("diophantine scan: golden mean")
{
    const auto exact = diophantine_scan(kGolden, 0.2, 1.5, 10000);
    CHECK(exact.exact);
    CHECK(exact.passed);
    CHECK_FALSE(exact.rational);
    const Oracle oracle = brute_force(golden_big(), 1.5, 10000);
    CHECK(exact.worst_m == oracle.m);
    CHECK(exact.worst_value == doctest::Approx(oracle.value.convert_to<double>()).epsilon(1e-12));
    // m = 1 realises the minimum: 1 - omega = 0.381966...
    CHECK(exact.worst_m == 1);
    CHECK(exact.worst_value > 0.38);

    const auto dbl = diophantine_scan((std::sqrt(5.0) - 1.0) / 2.0, 0.2, 1.5, 10000);
    CHECK(dbl.passed);
    CHECK_FALSE(dbl.exact);
    CHECK(dbl.worst_m == exact.worst_m);
    CHECK(dbl.worst_value == doctest::Approx(exact.worst_value).epsilon(1e-12));
}

TEST_CASE("diophantine scan: exact quadratic agrees with 50-digit oracle")
{
    struct Case {
        QuadraticIrrational w;
        big value;
        double tau;
    };
    const Case cases[] = {
        {{0, 1, 2, 1}, sqrt(big(2)), 1.1},
        {{3, 1, 7, 2}, (3 + sqrt(big(7))) / 2, 1.9},
        {{5, -1, 3, 2}, (5 - sqrt(big(3))) / 2, 1.3},
        {{1, 1, 1000003, 997}, (1 + sqrt(big(1000003))) / 997, 1.5},
    };
    for (const auto& c : cases) {
        const auto r = diophantine_scan(c.w, 1e-3, c.tau, 5000);
        const Oracle o = brute_force(c.value, c.tau, 5000);
        CHECK(r.worst_m == o.m);
        CHECK(r.worst_value == doctest::Approx(o.value.convert_to<double>()).epsilon(1e-12));
    }
}

TEST_CASE("diophantine scan: properties")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.05, 3.0);
    for (int trial = 0; trial < 30; ++trial) {
        const double w = uni(rng);
        const double tau = 1.0 + std::uniform_real_distribution<double>(0.05, 0.95)(rng);
        const auto r = diophantine_scan(w, 0.1, tau, 3000);
        // passed iff worst_value >= gamma, exactly.
        CHECK(r.passed == (r.worst_value >= 0.1));
        CHECK(r.worst_value >= 0.0);
        // worst_m is a convergent denominator.
        bool found = false;
        for (const auto& c : r.convergents) {
            found = found || c.q == r.worst_m;
        }
        CHECK(found);
        // Monotone in the window.
        double prev = 1e300;
        for (const std::int64_t m_max : {1, 10, 100, 1000, 3000}) {
            const double v = diophantine_scan(w, 0.1, tau, m_max).worst_value;
            CHECK(v <= prev);
            prev = v;
        }
        // m = 0 is excluded: the value is positive for irrational-looking omega.
        CHECK(r.worst_m >= 1);
    }
}

TEST_CASE("diophantine scan: thread count does not change the result")
{
    const auto run = [](const char* threads) {
        setenv("PLAPKAM_THREADS", threads, 1);
        return diophantine_scan(kGolden, 0.2, 1.5, 300000);
    };
    const auto a = run("1");
    const auto b = run("4");
    unsetenv("PLAPKAM_THREADS");
    CHECK(a.worst_m == b.worst_m);
    CHECK(a.worst_value == b.worst_value);
}

TEST_CASE("diophantine scan: preconditions")
{
    CHECK_THROWS_AS(diophantine_scan(-0.5, 0.2, 1.5, 10), std::invalid_argument);
    CHECK_THROWS_AS(diophantine_scan(0.5, 0.0, 1.5, 10), std::invalid_argument);
    CHECK_THROWS_AS(diophantine_scan(0.5, 0.2, 2.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(diophantine_scan(0.5, 0.2, 1.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(diophantine_scan(0.5, 0.2, 1.5, 0), std::invalid_argument);
    CHECK_NOTHROW(diophantine_scan(0.5, 0.2, 2.5, 10, {.allow_any_tau = true}));
    // Negative quadratic is accepted after taking the absolute value.
    const QuadraticIrrational negative{1, -1, 5, 2};
    CHECK_THROWS_AS(diophantine_scan(negative, 0.2, 1.5, 10), std::invalid_argument);
    const Frequency flipped = absolute(negative);
    CHECK(frequency_value(flipped) == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0));
    CHECK(diophantine_scan(flipped, 0.2, 1.5, 10000).passed);
}

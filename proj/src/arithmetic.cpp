#include "plapkam/arithmetic.hpp"

#include "plapkam/parallel.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace plapkam {

namespace {

using i128 = __int128;

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr i128 kInt64Max = std::numeric_limits<std::int64_t>::max();

i128 abs128(i128 v) { return v < 0 ? -v : v; }

// floor(sqrt(n)) for n >= 0.
i128 isqrt(i128 n)
{
    if (n < 0) {
        throw std::invalid_argument("isqrt of negative number");
    }
    i128 r = static_cast<i128>(std::sqrt(static_cast<long double>(n)));
    while (r > 0 && r * r > n) {
        --r;
    }
    while ((r + 1) * (r + 1) <= n) {
        ++r;
    }
    return r;
}

bool is_square(std::int64_t c)
{
    if (c < 0) {
        return false;
    }
    const i128 r = isqrt(c);
    return r * r == c;
}

i128 floor_div(i128 a, i128 b)
{
    i128 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) {
        --q;
    }
    return q;
}

// Nearest integer to a/b, ties away from zero.
i128 round_div(i128 a, i128 b)
{
    if (b < 0) {
        a = -a;
        b = -b;
    }
    const i128 twice = 2 * a + (a >= 0 ? b : -b);
    return a >= 0 ? twice / (2 * b) : -((-twice) / (2 * b));
}

void check_quadratic(const QuadraticIrrational& w)
{
    if (w.den == 0 || w.c < 0) {
        throw std::invalid_argument("quadratic irrational needs den != 0 and c >= 0");
    }
}

void check_rational(const Rational& w)
{
    if (w.den == 0) {
        throw std::invalid_argument("rational needs den != 0");
    }
}

Rational reduce(Rational w)
{
    check_rational(w);
    if (w.den < 0) {
        w.num = -w.num;
        w.den = -w.den;
    }
    const std::int64_t g = std::gcd(w.num, w.den);
    if (g > 1) {
        w.num /= g;
        w.den /= g;
    }
    return w;
}

// A quadratic irrational with b == 0 or square c, as a rational.
Rational to_rational(const QuadraticIrrational& w)
{
    const i128 root = w.b == 0 ? 0 : isqrt(w.c);
    const i128 num = static_cast<i128>(w.a) + static_cast<i128>(w.b) * root;
    if (abs128(num) > kInt64Max) {
        throw std::invalid_argument("quadratic irrational out of range");
    }
    return reduce({static_cast<std::int64_t>(num), w.den});
}

// Appends convergents for the quotients; false once a denominator or
// numerator would overflow int64 (the expansion is then cut short).
bool push_quotient(ContinuedFraction& cf, i128 a)
{
    const std::size_t k = cf.convergents.size();
    i128 p_prev = 1, q_prev = 0, p_prev2 = 0, q_prev2 = 1;
    if (k >= 1) {
        p_prev = cf.convergents[k - 1].p;
        q_prev = cf.convergents[k - 1].q;
    }
    if (k >= 2) {
        p_prev2 = cf.convergents[k - 2].p;
        q_prev2 = cf.convergents[k - 2].q;
    } else if (k == 1) {
        p_prev2 = 1;
        q_prev2 = 0;
    }
    const i128 p = a * p_prev + p_prev2;
    const i128 q = a * q_prev + q_prev2;
    if (abs128(a) > kInt64Max || abs128(p) > kInt64Max || abs128(q) > kInt64Max) {
        return false;
    }
    cf.quotients.push_back(static_cast<std::int64_t>(a));
    cf.convergents.push_back({static_cast<std::int64_t>(p), static_cast<std::int64_t>(q)});
    return true;
}

ContinuedFraction cf_double(double w, int depth)
{
    ContinuedFraction cf;
    const double tol_scale = 4.0 * kEps * std::max(1.0, w);
    // Signed residuals r_k = q_k w - p_k, evaluated with a single rounding.
    double r_prev2 = -1.0;  // k = -1: q = 0, p = 1
    const double a0 = std::floor(w);
    push_quotient(cf, static_cast<i128>(a0));
    double r_prev = std::fma(1.0, w, -a0);
    if (std::fabs(r_prev) <= tol_scale) {
        cf.rational = true;
        return cf;
    }
    constexpr double kExactLimit = 9007199254740992.0;  // 2^53
    for (int k = 1; k <= depth; ++k) {
        double a = std::floor(std::fabs(r_prev2) / std::fabs(r_prev));
        const Convergent c1 = cf.convergents.back();
        const Convergent c0 = k >= 2 ? cf.convergents[cf.convergents.size() - 2] : Convergent{1, 0};
        auto residual = [&](double aa) {
            const double p = aa * static_cast<double>(c1.p) + static_cast<double>(c0.p);
            const double q = aa * static_cast<double>(c1.q) + static_cast<double>(c0.q);
            return std::fma(q, w, -p);
        };
        // Repair the quotient if the ratio rounded across an integer.
        double r = residual(a);
        for (int fix = 0; fix < 4; ++fix) {
            if (r != 0.0 && std::signbit(r) == std::signbit(r_prev) && a > 1.0) {
                a -= 1.0;
            } else if (std::fabs(r) >= std::fabs(r_prev)) {
                a += 1.0;
            } else {
                break;
            }
            r = residual(a);
        }
        const double q_next = a * static_cast<double>(c1.q) + static_cast<double>(c0.q);
        if (!(a >= 1.0) || q_next >= kExactLimit || !push_quotient(cf, static_cast<i128>(a))) {
            break;
        }
        if (std::fabs(r) <= tol_scale * q_next) {
            cf.rational = true;
            break;
        }
        r_prev2 = r_prev;
        r_prev = r;
    }
    return cf;
}

ContinuedFraction cf_rational(Rational w, int depth)
{
    w = reduce(w);
    ContinuedFraction cf;
    i128 n = w.num, d = w.den;
    for (int k = 0; k <= depth; ++k) {
        const i128 a = floor_div(n, d);
        if (!push_quotient(cf, a)) {
            return cf;
        }
        const i128 rem = n - a * d;
        if (rem == 0) {
            cf.rational = true;
            return cf;
        }
        n = d;
        d = rem;
    }
    return cf;
}

ContinuedFraction cf_quadratic(const QuadraticIrrational& w, int depth)
{
    check_quadratic(w);
    if (w.is_rational()) {
        return cf_rational(to_rational(w), depth);
    }
    // Complete quotients (P + sqrt(N)) / Q with Q | N - P^2.
    i128 P = w.a, Q = w.den;
    i128 N = static_cast<i128>(w.b) * w.b * w.c;
    if (w.b < 0) {
        P = -P;
        Q = -Q;
    }
    if ((N - P * P) % Q != 0) {
        const i128 s = abs128(Q);
        P *= s;
        N *= Q * Q;
        Q *= s;
    }
    const i128 root = isqrt(N);
    ContinuedFraction cf;
    for (int k = 0; k <= depth; ++k) {
        // floor((P + sqrt N) / Q); sqrt N is irrational so floor(P + sqrt N)
        // may replace it when Q > 0, and ceil when Q < 0.
        const i128 a = Q > 0 ? floor_div(P + root, Q) : floor_div(P + root + 1, Q);
        if (!push_quotient(cf, a)) {
            return cf;
        }
        P = a * Q - P;
        Q = (N - P * P) / Q;
    }
    return cf;
}

struct Candidate {
    double value = std::numeric_limits<double>::infinity();
    std::int64_t m = 0;
    std::int64_t n = 0;
    bool zero = false;
};

// Better: smaller value, ties to smaller m.
bool better(const Candidate& a, const Candidate& b)
{
    return a.value < b.value || (a.value == b.value && a.m < b.m);
}

// |X + Y sqrt(C)| without cancellation.
long double conjugate_magnitude(i128 X, i128 Y, std::int64_t C, long double sqrt_c)
{
    const long double ax = static_cast<long double>(abs128(X));
    const long double ay = static_cast<long double>(abs128(Y));
    if (X == 0 || Y == 0 || (X > 0) == (Y > 0)) {
        return ax + ay * sqrt_c;
    }
    const i128 num = abs128(X * X - Y * Y * C);
    return static_cast<long double>(num) / (ax + ay * sqrt_c);
}

template <class Distance>
Candidate scan_range(std::int64_t lo, std::int64_t hi, double tau, Distance dist)
{
    Candidate best;
    for (std::int64_t m = lo; m <= hi; ++m) {
        Candidate c = dist(m);
        c.m = m;
        c.value = c.zero ? 0.0 : std::pow(static_cast<double>(m), tau) * c.value;
        if (better(c, best)) {
            best = c;
        }
    }
    return best;
}

template <class Distance>
Candidate scan(std::int64_t m_max, double tau, Distance dist)
{
    // Chunking depends on m_max only, so the reduction order is fixed.
    constexpr std::int64_t kChunk = 1 << 16;
    const std::int64_t chunks = (m_max + kChunk - 1) / kChunk;
    std::vector<Candidate> partial(static_cast<std::size_t>(chunks));
    parallel_for(partial.size(), [&](std::size_t i) {
        const std::int64_t lo = 1 + static_cast<std::int64_t>(i) * kChunk;
        const std::int64_t hi = std::min(m_max, lo + kChunk - 1);
        partial[i] = scan_range(lo, hi, tau, dist);
    });
    Candidate best;
    for (const auto& c : partial) {
        if (better(c, best)) {
            best = c;
        }
    }
    return best;
}

}  // namespace

double Rational::value() const
{
    check_rational(*this);
    return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

double QuadraticIrrational::value() const
{
    check_quadratic(*this);
    const long double root = std::sqrt(static_cast<long double>(c));
    return static_cast<double>((static_cast<long double>(a) + static_cast<long double>(b) * root) /
                               static_cast<long double>(den));
}

bool QuadraticIrrational::is_rational() const { return b == 0 || is_square(c); }

double frequency_value(const Frequency& omega)
{
    return std::visit([](const auto& w) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(w)>, double>) {
            return w;
        } else {
            return w.value();
        }
    }, omega);
}

Frequency absolute(const Frequency& omega)
{
    if (frequency_value(omega) >= 0.0) {
        return omega;
    }
    if (const auto* r = std::get_if<Rational>(&omega)) {
        return Rational{-r->num, r->den};
    }
    if (const auto* w = std::get_if<QuadraticIrrational>(&omega)) {
        return QuadraticIrrational{-w->a, -w->b, w->c, w->den};
    }
    return -std::get<double>(omega);
}

ContinuedFraction continued_fraction(const Frequency& omega, int depth)
{
    if (depth < 0 || depth > 40) {
        throw std::invalid_argument("continued_fraction: depth must lie in [0, 40]");
    }
    const double value = frequency_value(omega);
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw std::invalid_argument("continued_fraction: omega must be positive and finite");
    }
    if (const auto* r = std::get_if<Rational>(&omega)) {
        return cf_rational(*r, depth);
    }
    if (const auto* w = std::get_if<QuadraticIrrational>(&omega)) {
        return cf_quadratic(*w, depth);
    }
    return cf_double(value, depth);
}

DiophantineReport diophantine_scan(const Frequency& omega, double gamma, double tau, std::int64_t m_max,
                                   ScanOptions options)
{
    const double w = frequency_value(omega);
    if (!(w > 0.0) || !std::isfinite(w)) {
        throw std::invalid_argument("diophantine_scan: omega must be positive and finite");
    }
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("diophantine_scan: gamma must be positive");
    }
    if (!std::isfinite(tau) || (!options.allow_any_tau && !(tau > 1.0 && tau < 2.0))) {
        throw std::invalid_argument("diophantine_scan: tau must lie in (1, 2)");
    }
    if (m_max < 1) {
        throw std::invalid_argument("diophantine_scan: m_max must be at least 1");
    }

    DiophantineReport report;
    report.omega = w;
    report.gamma = gamma;
    report.tau = tau;
    report.m_max = m_max;

    Candidate best;
    const Rational* rational = std::get_if<Rational>(&omega);
    Rational from_quadratic;
    const auto* quadratic = std::get_if<QuadraticIrrational>(&omega);
    if (quadratic && quadratic->is_rational()) {
        from_quadratic = to_rational(*quadratic);
        rational = &from_quadratic;
        quadratic = nullptr;
    }

    if (rational) {
        report.exact = true;
        const Rational r = reduce(*rational);
        best = scan(m_max, tau, [r](std::int64_t m) {
            const i128 x = static_cast<i128>(m) * r.num;
            const i128 n = -round_div(x, r.den);
            const i128 num = abs128(x + n * r.den);
            Candidate c;
            c.n = static_cast<std::int64_t>(n);
            c.zero = num == 0;
            c.value = static_cast<double>(static_cast<long double>(num) / static_cast<long double>(r.den));
            return c;
        });
    } else if (quadratic) {
        report.exact = true;
        const QuadraticIrrational q = *quadratic;
        const long double sqrt_c = std::sqrt(static_cast<long double>(q.c));
        const long double value = (q.a + q.b * sqrt_c) / q.den;
        const long double den = std::fabs(static_cast<long double>(q.den));
        best = scan(m_max, tau, [&](std::int64_t m) {
            const i128 n0 = -static_cast<i128>(std::llround(static_cast<long double>(m) * value));
            Candidate c;
            c.value = std::numeric_limits<double>::infinity();
            for (i128 n = n0 - 1; n <= n0 + 1; ++n) {
                const i128 X = static_cast<i128>(m) * q.a + n * q.den;
                const i128 Y = static_cast<i128>(m) * q.b;
                const double d = static_cast<double>(conjugate_magnitude(X, Y, q.c, sqrt_c) / den);
                if (d < c.value) {
                    c.value = d;
                    c.n = static_cast<std::int64_t>(n);
                }
            }
            return c;
        });
    } else {
        const double scale = 4.0 * kEps * std::max(1.0, w);
        best = scan(m_max, tau, [w, scale](std::int64_t m) {
            const double md = static_cast<double>(m);
            const double n = -std::nearbyint(md * w);
            Candidate c;
            c.value = std::fabs(std::fma(md, w, n));
            c.n = static_cast<std::int64_t>(n);
            c.zero = c.value <= scale * md;
            return c;
        });
    }

    report.worst_m = best.m;
    report.worst_n = best.n;
    report.worst_value = best.value;
    report.rational = best.zero;
    report.passed = report.worst_value >= gamma;

    ContinuedFraction cf = continued_fraction(omega, options.cf_depth);
    report.rational = report.rational || (cf.rational && cf.convergents.back().q <= m_max);
    report.convergents = std::move(cf.convergents);
    return report;
}

}  // namespace plapkam

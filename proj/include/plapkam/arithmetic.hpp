// Diophantine scanning and continued fractions for the frequency omega.

#ifndef PLAPKAM_ARITHMETIC_HPP
#define PLAPKAM_ARITHMETIC_HPP

#include <cstdint>
#include <variant>
#include <vector>

namespace plapkam {

/// num/den, den != 0.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;
    double value() const;
};

/// (a + b sqrt(c)) / den, c >= 0, den != 0.
struct QuadraticIrrational {
    std::int64_t a = 0;
    std::int64_t b = 1;
    std::int64_t c = 5;
    std::int64_t den = 1;
    double value() const;
    /// True when b == 0 or c is a perfect square.
    bool is_rational() const;
};

/// A frequency given either as a double or exactly.
using Frequency = std::variant<double, Rational, QuadraticIrrational>;

double frequency_value(const Frequency& omega);
Frequency absolute(const Frequency& omega);

struct Convergent {
    std::int64_t p = 0;
    std::int64_t q = 1;
};

struct ContinuedFraction {
    std::vector<std::int64_t> quotients;
    std::vector<Convergent> convergents;
    /// Expansion terminated: exactly for exact input, numerically for a
    /// double (|q_k omega - p_k| at rounding level).
    bool rational = false;
};

/// Partial quotients and convergents, at most `depth` + 1 terms.
/// Throws std::invalid_argument for omega <= 0 or depth outside [0, 40].
ContinuedFraction continued_fraction(const Frequency& omega, int depth = 40);

struct DiophantineReport {
    double omega = 0.0;
    double gamma = 0.0;
    double tau = 0.0;
    std::int64_t m_max = 0;
    std::int64_t worst_m = 0;
    std::int64_t worst_n = 0;
    /// min over 1 <= m <= m_max of m^tau * min_n |m omega + n|.
    double worst_value = 0.0;
    bool passed = false;
    bool rational = false;
    bool exact = false;
    std::vector<Convergent> convergents;
};

struct ScanOptions {
    /// Permit tau outside (1, 2); such scans say nothing about invariant curves.
    bool allow_any_tau = false;
    int cf_depth = 40;
};

/// Finite-window check of |m omega + n| >= gamma / |m|^tau.
DiophantineReport diophantine_scan(const Frequency& omega, double gamma, double tau, std::int64_t m_max,
                                   ScanOptions options = {});

}  // namespace plapkam

#endif

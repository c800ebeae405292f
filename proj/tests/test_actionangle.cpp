#include <doctest.h>

#include "plapkam/actionangle.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace plapkam;

namespace {

struct Triple {
    double p, a, b;
};

const std::vector<Triple> kTriples{{2.0, 1.0, 4.0}, {3.0, 1.0, 2.0}, {4.0, 2.0, 5.0}, {2.5, 0.4, 5.0}};

JumpProblem unforced(const Triple& t)
{
    return build_problem(t.a, t.b, t.p, ForcingModel::unforced());
}

// Branch joints of v: extrema at 0 and pi_p, zeros at z1 and 2 pi_p - z1.
bool near_joint(const JumpProblem& pr, double theta, double gap)
{
    const double z1 = pr.aux().first_zero();
    for (double j : {0.0, z1, pr.pi_p(), pr.period() - z1, pr.period()}) {
        if (std::fabs(theta - j) < gap) {
            return true;
        }
    }
    return false;
}

double angle_gap(const JumpProblem& pr, double a, double b)
{
    const double d = std::fabs(a - b);
    return std::min(d, pr.period() - d);
}

}  // namespace

TEST_CASE("theta = 0 lies on the positive x axis")
{
    for (const auto& tr : kTriples) {
        const auto pr = unforced(tr);
        const double r = 7.0;
        const auto s = from_action_angle(pr, {r, 0.0});
        const double dr = chart_scale(pr) * r;
        CHECK(s.x == doctest::Approx(std::pow(dr, 1.0 / pr.p()) * std::pow(pr.p() - 1.0, 1.0 / pr.p())).epsilon(1e-13));
        CHECK(std::fabs(s.y) < 1e-13);
    }
}

TEST_CASE("harmonic oscillator: classical action-angle variables")
{
    const auto pr = build_problem(1.0, 1.0, 2.0, ForcingModel::unforced(), {.allow_symmetric = true});
    CHECK(chart_scale(pr) == doctest::Approx(2.0));
    for (double r : {0.5, 3.0, 200.0}) {
        for (double th = 0.0; th < 2.0 * std::numbers::pi; th += 0.37) {
            const auto s = from_action_angle(pr, {r, th});
            CHECK(s.x == doctest::Approx(std::sqrt(2.0 * r) * std::cos(th)).epsilon(1e-12));
            CHECK(s.y == doctest::Approx(std::sqrt(2.0 * r) * std::sin(th)).epsilon(1e-12));
            const auto aa = to_action_angle(pr, s);
            CHECK(aa.r == doctest::Approx(0.5 * (s.x * s.x + s.y * s.y)).epsilon(1e-13));
            CHECK(jacobian_check(pr, {r, th}) == doctest::Approx(1.0).epsilon(1e-8));
        }
    }
}

TEST_CASE("homogeneity in r")
{
    for (const auto& tr : kTriples) {
        const auto pr = unforced(tr);
        for (double th : {0.3, 1.9, 4.4}) {
            const auto s1 = from_action_angle(pr, {3.0, th});
            const auto s2 = from_action_angle(pr, {6.0, th});
            CHECK(s2.x == doctest::Approx(std::pow(2.0, 1.0 / pr.p()) * s1.x).epsilon(1e-13));
            CHECK(s2.y == doctest::Approx(std::pow(2.0, 1.0 / pr.q()) * s1.y).epsilon(1e-13));
        }
    }
}

TEST_CASE("round trips, action and Jacobian on a grid")
{
    for (const auto& tr : kTriples) {
        CAPTURE(tr.p);
        const auto pr = unforced(tr);
        double worst_theta = 0.0, worst_r = 0.0, worst_back = 0.0, worst_h = 0.0, worst_jac = 0.0;
        for (double r : {1.0, 10.0, 1e3, 1e6}) {
            for (int i = 0; i < 256; ++i) {
                const double th = pr.period() * (i + 0.5) / 256.0;
                if (near_joint(pr, th, 1e-6)) {
                    continue;
                }
                const auto s = from_action_angle(pr, {r, th});
                const auto aa = to_action_angle(pr, s);
                worst_theta = std::max(worst_theta, angle_gap(pr, aa.theta, th));
                worst_r = std::max(worst_r, std::fabs(aa.r - r) / r);
                worst_h = std::max(worst_h, std::fabs(energy_h0(pr, s) - r) / r);
                const auto back = from_action_angle(pr, aa);
                const double scale = std::fabs(s.x) + std::fabs(s.y);
                worst_back = std::max(worst_back, (std::fabs(back.x - s.x) + std::fabs(back.y - s.y)) / scale);
                worst_jac = std::max(worst_jac, std::fabs(jacobian_check(pr, {r, th}) - 1.0));
            }
        }
        CHECK(worst_theta < 1e-9);
        CHECK(worst_r < 1e-9);
        CHECK(worst_h < 1e-9);
        CHECK(worst_back < 1e-9);
        CHECK(worst_jac < 1e-6);
    }
}

TEST_CASE("round trip at the joints themselves")
{
    for (const auto& tr : kTriples) {
        const auto pr = unforced(tr);
        const double z1 = pr.aux().first_zero();
        for (double j : {0.0, z1, pr.pi_p(), pr.period() - z1}) {
            for (double off : {0.0, 1e-9, -1e-9, 1e-7, -1e-7}) {
                const double th = pr.trig().reduce(j + off);
                const auto aa = to_action_angle(pr, from_action_angle(pr, {2.0, th}));
                CHECK(angle_gap(pr, aa.theta, th) < 1e-9);
            }
        }
    }
}

TEST_CASE("Jacobian does not depend on r")
{
    for (const auto& tr : kTriples) {
        const auto pr = unforced(tr);
        for (double th : {0.2, 2.2, 5.0}) {
            const double j10 = jacobian_check(pr, {10.0, th});
            CHECK(jacobian_check(pr, {100.0, th}) == doctest::Approx(j10).epsilon(1e-7));
            CHECK(jacobian_check(pr, {1000.0, th}) == doctest::Approx(j10).epsilon(1e-7));
        }
    }
}

TEST_CASE("unforced flow advances theta at rate 1/omega")
{
    for (const auto& tr : kTriples) {
        CAPTURE(tr.p);
        const auto pr = unforced(tr);
        for (double th0 : {0.4, 2.9, 5.1}) {
            const ActionAngle start{20.0, th0};
            for (double delta : {0.7, 3.3, 9.0}) {
                const auto end = advance(pr, from_action_angle(pr, start), 0.0, pr.omega * delta).state;
                const auto aa = to_action_angle(pr, end);
                const double expected = pr.trig().reduce(th0 + delta);
                CHECK(angle_gap(pr, aa.theta, expected) < 1e-7);
                CHECK(std::fabs(aa.r - 20.0) < 1e-9 * 20.0);
            }
        }
    }
}

TEST_CASE("preconditions")
{
    const auto pr = unforced(kTriples[0]);
    CHECK_THROWS_AS(to_action_angle(pr, {0.0, 0.0}), std::domain_error);
    CHECK_THROWS_AS(from_action_angle(pr, {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(from_action_angle(pr, {-1.0, 1.0}), std::invalid_argument);
    const auto s = from_action_angle(pr, {1.0, -0.5});
    CHECK(to_action_angle(pr, s).theta == doctest::Approx(pr.period() - 0.5).epsilon(1e-12));
}

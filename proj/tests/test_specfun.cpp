#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <gupdirac/specfun.hpp>

using namespace gupdirac;
using namespace gupdirac::specfun;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

} // namespace

TEST(LnGamma, SmallIntegers) {
    EXPECT_NEAR(ln_gamma(1.0), 0.0, 1e-15);
    EXPECT_NEAR(ln_gamma(2.0), 0.0, 1e-15);
    EXPECT_NEAR(ln_gamma(5.0), std::log(24.0), 1e-14);
}

TEST(LnGamma, HalfIsLogSqrtPi) { EXPECT_NEAR(ln_gamma(0.5), 0.5723649429247001, 1e-15); }

TEST(LnGamma, RejectsNonPositive) {
    EXPECT_THROW(ln_gamma(0.0), domain_error);
    EXPECT_THROW(ln_gamma(-2.5), domain_error);
}

TEST(LnGamma, MatchesStdLgammaOnRange) {
    for (int i = 0; i <= 495; ++i) {
        double const x = 0.5 + 0.1 * i;
        EXPECT_LE(rel(ln_gamma(x), std::lgamma(x)), 1e-13) << "x = " << x;
    }
}

TEST(Pochhammer, Basics) {
    EXPECT_EQ(pochhammer(3.0, 0), 1.0);
    EXPECT_DOUBLE_EQ(pochhammer(3.0, 3), 60.0);
    EXPECT_DOUBLE_EQ(pochhammer(-2.0, 3), 0.0);
}

TEST(Binomial, GammaAndProductPaths) {
    EXPECT_NEAR(binomial(5.0, 3), 10.0, 1e-12);
    EXPECT_NEAR(binomial(4.3, 0), 1.0, 1e-15);
    // top + 1 - k <= 0 forces the falling product
    EXPECT_NEAR(binomial(-0.5, 2), 0.375, 1e-15);
    EXPECT_NEAR(binomial(1.0, 3), 0.0, 1e-15);
}

TEST(Jacobi, DegreeZeroIsOne) { EXPECT_EQ(jacobi_p({0, 0.7, -0.2}, 3.5), 1.0); }

TEST(Jacobi, LegendreDegreeOne) { EXPECT_NEAR(jacobi_p({1, 0.0, 0.0}, 0.3), 0.3, 1e-15); }

TEST(Jacobi, ValueAtOneIsBinomial) { EXPECT_NEAR(jacobi_p({3, 2.0, 1.0}, 1.0), 10.0, 1e-12); }

TEST(Jacobi, LegendreDegreeTwo) {
    for (double x : {-3.0, -0.4, 0.0, 0.8, 5.0}) EXPECT_NEAR(jacobi_p(2, 0.0, 0.0, x), 1.5 * x * x - 0.5, 1e-13);
}

TEST(Jacobi, RejectsNegativeDegree) { EXPECT_THROW(jacobi_p({-1, 0.0, 0.0}, 0.1), domain_error); }

TEST(Jacobi, RecurrenceMatchesExplicitSum) {
    auto const a_vals = {0.0, 0.5, 1.0, 2.3, -0.5};
    for (int n = 0; n <= 10; ++n)
        for (double a : a_vals)
            for (double b : a_vals)
                for (double x : {-2.0, -0.7, 0.1, 1.0, 3.0, 11.0}) {
                    double const r = jacobi_p(n, a, b, x);
                    double const s = detail::jacobi_explicit_sum(n, a, b, x);
                    EXPECT_LE(std::abs(r - s) / std::max(1.0, std::abs(s)), 1e-12)
                        << n << " " << a << " " << b << " " << x;
                }
}

TEST(Jacobi, DegenerateRecurrenceDenominatorFallsBack) {
    // a + b = -2 zeroes the k = 2 denominator; the explicit sum still defines the polynomial
    double const v = jacobi_p(2, -0.5, -1.5, 0.3);
    EXPECT_NEAR(v, detail::jacobi_explicit_sum(2, -0.5, -1.5, 0.3), 1e-14);
}

TEST(Hyp2F1, ZeroArgument) { EXPECT_EQ(hyp2f1_terminating(5, 1.3, 2.7, 0.0), 1.0); }

TEST(Hyp2F1, DegreeOne) { EXPECT_NEAR(hyp2f1_terminating(1, 2.0, 4.0, 1.0), 0.5, 1e-15); }

TEST(Hyp2F1, DegreeTwoFiniteSum) { EXPECT_NEAR(hyp2f1_terminating(2, 3.0, 2.0, 0.5), 0.0, 1e-15); }

TEST(Hyp2F1, VanishingDenominator) {
    EXPECT_THROW(hyp2f1_terminating(3, 1.0, -1.0, 0.2), parameter_error);
    EXPECT_THROW(hyp2f1_terminating(1, 1.0, 0.0, 0.2), parameter_error);
    // c = -3 with n = 3 stays clear: the sum stops at k = 2
    EXPECT_NO_THROW(hyp2f1_terminating(3, 1.0, -3.0, 0.2));
}

TEST(Hyp2F1, RejectsNegativeDegree) { EXPECT_THROW(hyp2f1_terminating(-1, 1.0, 1.0, 0.0), domain_error); }

// P_n^{(a,b)}(1 - 2z) = binom(n + a, n) 2F1(-n, n + a + b + 1; a + 1; z)
TEST(Property, JacobiHypergeometricBridge) {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> zdist(-5.0, 0.0);
    double const box[] = {0.0, 0.5, 1.0, 2.3};
    for (int n = 0; n <= 10; ++n)
        for (double a : box)
            for (double b : box)
                for (int draw = 0; draw < 25; ++draw) {
                    double const z = draw == 0 ? 0.0 : (draw == 1 ? -5.0 : zdist(rng));
                    double const lhs = jacobi_p(n, a, b, 1 - 2 * z);
                    double const rhs = binomial(double(n) + a, n) * hyp2f1_terminating(n, double(n) + a + b + 1, a + 1, z);
                    EXPECT_LE(std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)), 1e-12)
                        << "n=" << n << " a=" << a << " b=" << b << " z=" << z;
                }
}

// P_n^{(a,b)}(-x) = (-1)^n P_n^{(b,a)}(x)
TEST(Property, ReflectionSymmetry) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> idx(-0.9, 3.0);
    std::uniform_real_distribution<double> xs(-4.0, 4.0);
    for (int draw = 0; draw < 400; ++draw) {
        int const n = draw % 9;
        double const a = idx(rng), b = idx(rng), x = xs(rng);
        double const left = jacobi_p(n, a, b, -x);
        double const right = (n % 2 ? -1.0 : 1.0) * jacobi_p(n, b, a, x);
        EXPECT_LE(std::abs(left - right) / std::max(1.0, std::abs(right)), 1e-12) << n << " " << a << " " << b << " " << x;
    }
}

#pragma once

// Special functions for the radial eigenfunctions: log-gamma, Pochhammer symbols,
// Jacobi polynomials P_n^{(a,b)}(x) and the terminating Gauss series 2F1(-n, b; c; z).
//
// Jacobi values come from the three-term recurrence in n. The terminating 2F1 sum is an
// independent route to the same numbers through
//     P_n^{(a,b)}(1 - 2z) = binom(n + a, n) 2F1(-n, n + a + b + 1; a + 1; z),
// which the tests use as a cross-check.

#include <cmath>
#include <concepts>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "errors.hpp"

namespace gupdirac::specfun {

template <std::floating_point Real>
struct JacobiParams {
    int n = 0;
    Real a = 0;
    Real b = 0;
};

template <std::floating_point Real>
Real ln_gamma(Real x) {
    if (!(x > 0)) throw domain_error("ln_gamma: argument must be > 0, got " + std::to_string(double(x)));
    return boost::math::lgamma(x);
}

// (x)_k = x (x+1) ... (x+k-1), (x)_0 = 1
template <std::floating_point Real>
Real pochhammer(Real x, int k) {
    if (k < 0) throw domain_error("pochhammer: negative count");
    Real prod = 1;
    for (int i = 0; i < k; ++i) prod *= x + Real(i);
    return prod;
}

// binom(top, k) for real top. Uses ln_gamma while every gamma argument is positive,
// the falling product otherwise.
template <std::floating_point Real>
Real binomial(Real top, int k) {
    if (k < 0) throw domain_error("binomial: negative k");
    if (top + 1 > 0 && top - Real(k) + 1 > 0) {
        return std::exp(ln_gamma(top + 1) - ln_gamma(Real(k) + 1) - ln_gamma(top - Real(k) + 1));
    }
    Real prod = 1;
    for (int i = 0; i < k; ++i) prod *= (top - Real(i)) / Real(i + 1);
    return prod;
}

// 2F1(-n, b; c; z) as the exact finite sum of n + 1 terms.
template <std::floating_point Real>
Real hyp2f1_terminating(int n, Real b, Real c, Real z) {
    if (n < 0) throw domain_error("hyp2f1_terminating: n must be >= 0");
    for (int k = 0; k < n; ++k) {
        if (c + Real(k) == 0)
            throw parameter_error("hyp2f1_terminating: c = " + std::to_string(double(c)) +
                                  " makes a denominator Pochhammer vanish");
    }
    Real term = 1;
    Real sum = 1;
    for (int k = 0; k < n; ++k) {
        term *= (Real(k - n) * (b + Real(k))) / ((c + Real(k)) * Real(k + 1)) * z;
        sum += term;
    }
    return sum;
}

namespace detail {

// explicit binomial expansion; holds for every real a, b
template <std::floating_point Real>
Real jacobi_explicit_sum(int n, Real a, Real b, Real x) {
    Real const u = (x - 1) / 2;
    Real const v = (x + 1) / 2;
    Real sum = 0;
    for (int k = 0; k <= n; ++k)
        sum += binomial(Real(n) + a, n - k) * binomial(Real(n) + b, k) * std::pow(u, Real(k)) *
               std::pow(v, Real(n - k));
    return sum;
}

} // namespace detail

// P_n^{(a,b)}(x) by the upward three-term recurrence. x may lie anywhere on the real line.
template <std::floating_point Real>
Real jacobi_p(JacobiParams<Real> const& params, Real x) {
    int const n = params.n;
    Real const a = params.a;
    Real const b = params.b;
    if (n < 0) throw domain_error("jacobi_p: degree must be >= 0");
    if (n == 0) return 1;
    Real const p1 = (a + 1) + (a + b + 2) * (x - 1) / 2;
    if (n == 1) return p1;

    Real const ab = a + b;
    Real prev = 1;
    Real curr = p1;
    for (int k = 2; k <= n; ++k) {
        Real const kk = Real(k);
        Real const s = 2 * kk + ab;
        Real const denom = 2 * kk * (kk + ab) * (s - 2);
        if (denom == 0) return detail::jacobi_explicit_sum(n, a, b, x);
        Real const next = ((s - 1) * (s * (s - 2) * x + a * a - b * b) * curr -
                           2 * (kk + a - 1) * (kk + b - 1) * s * prev) /
                          denom;
        prev = curr;
        curr = next;
    }
    return curr;
}

template <std::floating_point Real>
Real jacobi_p(int n, Real a, Real b, Real x) {
    return jacobi_p(JacobiParams<Real>{n, a, b}, x);
}

} // namespace gupdirac::specfun

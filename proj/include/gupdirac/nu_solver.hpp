#pragma once

// Parametric Nikiforov-Uvarov method for
//
//     psi'' + (a1 - a2 s) / (s (1 - a3 s)) psi' + (-xi1 s^2 + xi2 s - xi3) / [s (1 - a3 s)]^2 psi = 0.
//
// derive_parameters() builds alpha4..alpha13 and k. The two KBranch values differ only in
// the sign carried by sqrt(alpha9); every downstream formula is written in terms of that
// signed root so both branches share one code path.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <limits>

#include "errors.hpp"
#include "specfun.hpp"
#include "types.hpp"

namespace gupdirac::nu {

template <std::floating_point Real>
struct NUProblem {
    Real alpha1 = 0;
    Real alpha2 = 0;
    Real alpha3 = 1;
    Real xi1 = 0;
    Real xi2 = 0;
    Real xi3 = 0;

    template <std::floating_point Other>
    NUProblem<Other> cast() const {
        return {Other(alpha1), Other(alpha2), Other(alpha3), Other(xi1), Other(xi2), Other(xi3)};
    }
};

template <std::floating_point Real>
struct NUDerived {
    Real alpha4 = 0, alpha5 = 0, alpha6 = 0, alpha7 = 0, alpha8 = 0, alpha9 = 0;
    Real alpha10 = 0, alpha11 = 0, alpha12 = 0, alpha13 = 0;
    Real k = 0;
    KBranch branch = KBranch::minus;
    Real sqrt8 = 0; // sqrt(alpha8)
    Real root9 = 0; // +sqrt(alpha9) on the minus branch, -sqrt(alpha9) on the plus branch

    // sqrt(a9) + a3 sqrt(a8) with the branch sign applied
    Real slope(Real alpha3) const { return root9 + alpha3 * sqrt8; }
};

template <std::floating_point Real>
NUDerived<Real> derive_parameters(NUProblem<Real> const& p, KBranch branch = KBranch::minus) {
    if (!(p.alpha3 > 0)) throw domain_error("derive_parameters: alpha3 must be > 0");
    NUDerived<Real> d;
    d.branch = branch;
    d.alpha4 = (1 - p.alpha1) / 2;
    d.alpha5 = (p.alpha2 - 2 * p.alpha3) / 2;
    d.alpha6 = d.alpha5 * d.alpha5 + p.xi1;
    d.alpha7 = 2 * d.alpha4 * d.alpha5 - p.xi2;
    d.alpha8 = d.alpha4 * d.alpha4 + p.xi3;
    d.alpha9 = p.alpha3 * d.alpha7 + p.alpha3 * p.alpha3 * d.alpha8 + d.alpha6;
    if (d.alpha8 < 0) throw complex_branch_error("alpha8", double(d.alpha8));
    if (d.alpha9 < 0) throw complex_branch_error("alpha9", double(d.alpha9));

    d.sqrt8 = std::sqrt(d.alpha8);
    d.root9 = branch == KBranch::minus ? std::sqrt(d.alpha9) : -std::sqrt(d.alpha9);
    Real const slope = d.slope(p.alpha3);

    d.k = -(d.alpha7 + 2 * p.alpha3 * d.alpha8) - 2 * d.sqrt8 * d.root9;
    d.alpha10 = p.alpha1 + 2 * d.alpha4 + 2 * d.sqrt8;
    d.alpha11 = p.alpha2 - 2 * d.alpha5 + 2 * slope;
    d.alpha12 = d.alpha4 + d.sqrt8;
    d.alpha13 = d.alpha5 - slope;
    return d;
}

// Left-hand side of the quantization condition; eigenstates are its roots.
template <std::floating_point Real>
Real quantization_residual(NUProblem<Real> const& p, int n, KBranch branch = KBranch::minus) {
    if (n < 0) throw domain_error("quantization_residual: n must be >= 0");
    auto const d = derive_parameters(p, branch);
    Real const nn = Real(n);
    return p.alpha2 * nn - (2 * nn + 1) * d.alpha5 + (2 * nn + 1) * d.slope(p.alpha3) +
           nn * (nn - 1) * p.alpha3 + d.alpha7 + 2 * p.alpha3 * d.alpha8 + 2 * d.sqrt8 * d.root9;
}

template <std::floating_point Real>
struct JacobiIndices {
    Real a = 0;
    Real b = 0;
};

template <std::floating_point Real>
JacobiIndices<Real> jacobi_indices(NUProblem<Real> const& p, NUDerived<Real> const& d) {
    return {d.alpha10 - 1, d.alpha11 / p.alpha3 - d.alpha10 - 1};
}

// |s|^{a12} |1 - a3 s|^{-a12 - a13/a3} P_n^{(a10-1, a11/a3-a10-1)}(1 - 2 a3 s), unnormalized.
// Absolute values make the prefactors real on s < 0; they differ from s^{a12} only by a
// constant phase, which the ODE does not see.
template <std::floating_point Real>
Real eigenfunction(NUDerived<Real> const& d, NUProblem<Real> const& p, int n, Real s) {
    auto const ji = jacobi_indices(p, d);
    Real const left = d.alpha12 == 0 ? Real(1) : std::pow(std::abs(s), d.alpha12);
    Real const right_exp = -d.alpha12 - d.alpha13 / p.alpha3;
    Real const right = right_exp == 0 ? Real(1) : std::pow(std::abs(1 - p.alpha3 * s), right_exp);
    return left * right * specfun::jacobi_p(specfun::JacobiParams<Real>{n, ji.a, ji.b}, 1 - 2 * p.alpha3 * s);
}

template <std::floating_point Real>
Real eigenfunction(NUProblem<Real> const& p, int n, Real s, KBranch branch = KBranch::minus) {
    if (n < 0) throw domain_error("eigenfunction: n must be >= 0");
    return eigenfunction(derive_parameters(p, branch), p, n, s);
}

template <std::floating_point Real>
struct AuxiliaryValues {
    Real pi_val = 0;
    Real tau_val = 0;
    Real rho_val = 0;
};

template <std::floating_point Real>
AuxiliaryValues<Real> auxiliary_functions(NUProblem<Real> const& p, Real s, KBranch branch = KBranch::minus) {
    auto const d = derive_parameters(p, branch);
    Real const bracket = d.slope(p.alpha3) * s - d.sqrt8;
    AuxiliaryValues<Real> out;
    out.pi_val = d.alpha4 + d.alpha5 * s - bracket;
    out.tau_val = p.alpha1 + 2 * d.alpha4 - (p.alpha2 - 2 * d.alpha5) * s - bracket;
    Real const e1 = d.alpha10 - 1;
    Real const e2 = d.alpha11 / p.alpha3 - d.alpha10 - 1;
    Real const f1 = e1 == 0 ? Real(1) : std::pow(std::abs(s), e1);
    Real const f2 = e2 == 0 ? Real(1) : std::pow(std::abs(1 - p.alpha3 * s), e2);
    out.rho_val = f1 * f2;
    return out;
}

// Large-|s| exponent of the eigenfunction: psi ~ |s|^{n - a13/a3}.
template <std::floating_point Real>
Real asymptotic_exponent(NUDerived<Real> const& d, NUProblem<Real> const& p, int n) {
    return Real(n) - d.alpha13 / p.alpha3;
}

// Plugs the eigenfunction back into the NU equation at s using a 5-point central stencil
// evaluated in long double. Returns |residual| scaled by the magnitude of the terms, so an
// exact eigenpair gives a number near rounding level independent of the overall scale.
// h <= 0 selects 1e-3 times the shortest local length scale of psi: the distance to 0 or 1/a3
// over the exponent of the matching factor, or (|s| + 1/a3) / (n + 1) for the polynomial.
template <std::floating_point Real>
Real nu_ode_residual(NUProblem<Real> const& p, int n, Real s, Real h = 0, KBranch branch = KBranch::minus) {
    using LD = long double;
    if (n < 0) throw domain_error("nu_ode_residual: n must be >= 0");
    auto const q = p.template cast<LD>();
    LD const x = s;
    LD const sing = 1 / q.alpha3;
    LD const dist = std::min(std::abs(x), std::abs(sing - x));
    if (dist == 0) throw singular_point_error("nu_ode_residual: s is a singular point of the NU equation");
    auto const d = derive_parameters(q, branch);
    // length over which psi changes: each power-law factor near its own singular point, and the
    // polynomial on the scale of its argument
    LD const near_zero = std::abs(x) / (1 + std::abs(d.alpha12));
    LD const near_sing = std::abs(sing - x) / (1 + std::abs(d.alpha12 + d.alpha13 / q.alpha3));
    LD const poly = (std::abs(x) + sing) / (1 + LD(n));
    LD const step = h > 0 ? LD(h) : LD(1e-3) * std::min({near_zero, near_sing, poly});
    if (2 * step >= dist) throw singular_point_error("nu_ode_residual: stencil crosses a singular point");

    std::array<LD, 5> f{};
    for (int i = 0; i < 5; ++i) f[i] = eigenfunction(d, q, n, x + LD(i - 2) * step);

    LD const psi = f[2];
    LD const d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * step);
    LD const d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * step * step);

    LD const sigma = x * (1 - q.alpha3 * x);
    LD const first = (q.alpha1 - q.alpha2 * x) / sigma * d1;
    LD const zeroth = (-q.xi1 * x * x + q.xi2 * x - q.xi3) / (sigma * sigma) * psi;
    LD const residual = d2 + first + zeroth;
    LD const scale = std::max(std::abs(d2) + std::abs(first) + std::abs(zeroth), std::abs(psi) / (dist * dist));
    if (scale == 0) return 0;
    return Real(std::abs(residual) / scale);
}

} // namespace gupdirac::nu

#pragma once

// Minimal-length Dirac oscillator in a constant magnetic field, reduced to the NU form.
//
// With z = -beta p^2 the decoupled radial equation becomes
//     U'' + (1 - tau z)/(z(1-z)) U' + (zeta z^2 + nu z + eta)/[z(1-z)]^2 U = 0
// whose coefficients depend on the trial energy through W = E + s_c M. Energies are the roots
// of the NU quantization residual in E.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "errors.hpp"
#include "nu_solver.hpp"
#include "oracle.hpp"
#include "specfun.hpp"
#include "types.hpp"

namespace gupdirac {

// Smallest position uncertainty allowed by [x, p] = i(1 + beta p^2), hbar = 1.
inline double minimal_length(double beta) {
    if (!(beta >= 0)) throw domain_error("minimal_length: beta must be >= 0");
    return std::sqrt(beta);
}

template <std::floating_point Real = double>
struct ReducedCoefficients {
    Real mu = 0;
    Real tau = 0;
    Real zeta = 0;
    Real nu = 0;
    Real eta = 0;
};

template <std::floating_point Real = double>
ReducedCoefficients<Real> reduced_coefficients(PhysicalParams const& p, CouplingCase cc, int lambda, Real E) {
    Real const M = p.M, V0 = p.V0, b = p.beta;
    Real const W = E + Real(case_sign(cc)) * M;
    Real const eb2 = Real(p.e) * Real(p.e) * Real(p.B) * Real(p.B) / (Real(p.c) * Real(p.c));
    Real const l = Real(lambda);
    Real const l2 = l * l;
    Real const ebc = Real(p.e) * Real(p.B) / Real(p.c);

    ReducedCoefficients<Real> rc;
    rc.mu = eb2 * b + 8 * b * V0 * W;
    if (!(rc.mu > 0)) throw degeneracy_error(double(W), double(rc.mu));
    Real const mu = rc.mu;
    rc.tau = 2 * eb2 * b / mu + 16 * b * V0 * W / mu;
    rc.zeta = -1 / (mu * b) + ebc * l / (2 * mu) - eb2 * l2 * b / (4 * mu) - 2 * V0 * l2 * b * W / mu;
    rc.nu = -ebc * l / (2 * mu) + eb2 * l2 * b / (2 * mu) + 4 * V0 * l2 * b * W / mu + (M * M) / mu - (E * E) / mu;
    rc.eta = -eb2 * l2 * b / (4 * mu) - 2 * V0 * l2 * b * W / mu;
    return rc;
}

template <std::floating_point Real>
nu::NUProblem<Real> to_nu_problem(ReducedCoefficients<Real> const& rc) {
    return {1, rc.tau, 1, -rc.zeta, rc.nu, -rc.eta};
}

template <std::floating_point Real = double>
Real energy_residual(PhysicalParams const& p, CouplingCase cc, QuantumNumbers qn, Real E,
                     KBranch branch = KBranch::minus) {
    return nu::quantization_residual(to_nu_problem(reduced_coefficients(p, cc, qn.lambda, E)), qn.n, branch);
}

// A double cannot always carry a root of a steep residual; this re-brackets the sign change
// within a few ulps of E in long double. Returns E unchanged when no sign change lies that close.
inline long double polish_root(PhysicalParams const& p, CouplingCase cc, QuantumNumbers qn, double E,
                               KBranch branch) {
    using LD = long double;
    auto f = [&](LD x) { return energy_residual<LD>(p, cc, qn, x, branch); };
    LD const h = 8 * (std::nextafter(E, std::numeric_limits<double>::infinity()) - E);
    LD lo = LD(E) - h, hi = LD(E) + h;
    LD flo, fhi;
    try {
        flo = f(lo);
        fhi = f(hi);
    } catch (std::domain_error const&) {
        return E;
    }
    if (flo == 0) return lo;
    if (fhi == 0) return hi;
    if ((flo < 0) == (fhi < 0)) return E;
    for (int it = 0; it < 64; ++it) {
        LD const mid = (lo + hi) / 2;
        if (mid == lo || mid == hi) break;
        LD const fm = f(mid);
        if (fm == 0) return mid;
        ((fm < 0) == (flo < 0) ? lo : hi) = mid;
    }
    return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

// Variant quantization condition whose last term is 2 sqrt(-eta) * alpha9 instead of
// 2 sqrt(-eta) * sqrt(alpha9). Only the audit evaluates it.
inline double printed_quantization_residual(PhysicalParams const& p, CouplingCase cc, QuantumNumbers qn,
                                            double E) {
    auto const rc = reduced_coefficients(p, cc, qn.lambda, E);
    double const half = rc.tau / 2 - 1;
    double const a9 = half * half - rc.zeta - rc.nu - rc.eta;
    if (a9 < 0) throw complex_branch_error("alpha9", a9);
    double const l = std::sqrt(std::max(0.0, -rc.eta));
    double const n = qn.n;
    return rc.tau * n - (2 * n + 1) * half + (2 * n + 1) * (std::sqrt(a9) + l) + n * (n - 1) - rc.nu - 2 * rc.eta +
           2 * l * a9;
}

// Default search interval: from just above the mu = 0 edge to M + 20 max(sqrt V0, eB/2Mc).
inline EnergyWindow default_window(PhysicalParams const& p, CouplingCase cc) {
    double const hi = p.M + 20 * std::max(std::sqrt(p.V0), p.e * p.B / (2 * p.M * p.c));
    if (cc == CouplingCase::delta_zero) return {-p.M * (1 - 1e-9), hi};
    double const edge = oracle::lower_energy_bound(p, cc);
    return {edge + 1e-9 * std::max(1.0, std::abs(edge)), hi};
}

struct SolveReport {
    std::vector<EnergyLevel> levels; // ascending in E
    std::vector<std::string> notes;
};

namespace detail {

struct ResidualSample {
    double E;
    bool ok;
    double value;
};

inline ResidualSample residual_sample(PhysicalParams const& p, CouplingCase cc, QuantumNumbers qn, double E,
                                      KBranch branch) {
    try {
        return {E, true, energy_residual(p, cc, qn, E, branch)};
    } catch (degeneracy_error const&) {
    } catch (complex_branch_error const&) {
    }
    return {E, false, 0};
}

inline EnergyLevel make_level(PhysicalParams const& p, CouplingCase cc, QuantumNumbers qn, double E, double residual,
                              KBranch branch) {
    EnergyLevel lvl;
    lvl.E = E;
    lvl.qn = qn;
    lvl.coupling = cc;
    lvl.residual = residual;
    lvl.method = SolveMethod::closed_form;
    lvl.branch = branch;
    auto const problem = to_nu_problem(reduced_coefficients(p, cc, qn.lambda, E));
    auto const d = nu::derive_parameters(problem, branch);
    // |U|^2 p ~ p^{4x + 1} with x the large-|z| exponent; integrable iff x < -1/2
    lvl.normalizable = nu::asymptotic_exponent(d, problem, qn.n) < -0.5;
    return lvl;
}

} // namespace detail

// Uniform scan of the window, bracketing every sign change of the residual and refining it by
// bisection. Brackets with an endpoint outside the real NU branch are skipped with a note.
inline SolveReport solve_energy_report(PhysicalParams const& p, CouplingCase cc, QuantumNumbers qn,
                                       EnergyWindow window, int grid_points = 4000,
                                       KBranch branch = KBranch::plus) {
    p.validate();
    if (qn.n < 0) throw configuration_error("solve_energy: n must be >= 0");
    if (grid_points < 16) throw configuration_error("solve_energy: grid_points must be >= 16");
    if (!(window.lo < window.hi) || !std::isfinite(window.lo) || !std::isfinite(window.hi))
        throw configuration_error("solve_energy: window must be a finite, non-empty interval");
    double const floor = oracle::lower_energy_bound(p, cc);
    if (window.hi <= floor)
        throw configuration_error("solve_energy: window lies entirely outside the mu > 0 domain");

    SolveReport out;
    std::vector<detail::ResidualSample> grid;
    grid.reserve(grid_points);
    for (int i = 0; i < grid_points; ++i) {
        double const E = window.lo + (window.hi - window.lo) * double(i) / double(grid_points - 1);
        grid.push_back(detail::residual_sample(p, cc, qn, E, branch));
    }

    auto f = [&](double E) { return energy_residual(p, cc, qn, E, branch); };
    auto tol = [](double a, double b) {
        return std::abs(b - a) <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(a));
    };

    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto const& a = grid[i];
        if (a.ok && a.value == 0) {
            out.levels.push_back(detail::make_level(p, cc, qn, a.E, 0.0, branch));
            continue;
        }
        if (i + 1 == grid.size()) break;
        auto const& b = grid[i + 1];
        if (!a.ok || !b.ok) {
            if (a.ok != b.ok)
                out.notes.push_back("cell [" + std::to_string(a.E) + ", " + std::to_string(b.E) +
                                    "] has an endpoint outside the real NU branch; not searched");
            continue;
        }
        if (b.value == 0 || (a.value < 0) == (b.value < 0)) continue;
        auto const [lo, hi] = boost::math::tools::bisect(f, a.E, b.E, tol);
        double const rlo = f(lo);
        double const rhi = f(hi);
        double const E = std::abs(rlo) <= std::abs(rhi) ? lo : hi;
        double const r = std::min(std::abs(rlo), std::abs(rhi));
        if (r > 1e-10)
            out.notes.push_back("root near E = " + std::to_string(E) + " converged to |residual| = " + std::to_string(r));
        out.levels.push_back(detail::make_level(p, cc, qn, E, f(E), branch));
    }
    std::sort(out.levels.begin(), out.levels.end(), [](auto const& x, auto const& y) { return x.E < y.E; });
    return out;
}

inline std::vector<EnergyLevel> solve_energy(PhysicalParams const& p, CouplingCase cc, QuantumNumbers qn,
                                             EnergyWindow window, int grid_points = 4000,
                                             KBranch branch = KBranch::plus) {
    return solve_energy_report(p, cc, qn, window, grid_points, branch).levels;
}

// (beta p^2)^{sqrt(-eta)} (1 + beta p^2)^{-tau/2 + 1 + r} 2F1(-n, n + 2 sqrt(-eta) + 2r + 1; 2 sqrt(-eta) + 1; -beta p^2)
// with r = +sqrt((tau/2-1)^2 - zeta - nu - eta) on the minus branch and -sqrt(...) on the plus branch.
inline double radial_wavefunction(PhysicalParams const& p, CouplingCase cc, QuantumNumbers qn, double E,
                                  double momentum, KBranch branch = KBranch::minus) {
    if (!(momentum >= 0)) throw domain_error("radial_wavefunction: momentum must be >= 0");
    if (qn.n < 0) throw domain_error("radial_wavefunction: n must be >= 0");
    auto const rc = reduced_coefficients(p, cc, qn.lambda, E);
    if (rc.eta > 0) throw complex_branch_error("-eta", -rc.eta);
    double const half = rc.tau / 2 - 1;
    double const a9 = half * half - rc.zeta - rc.nu - rc.eta;
    if (a9 < 0) throw complex_branch_error("alpha9", a9);
    double const l = std::sqrt(-rc.eta);
    double const r = branch == KBranch::minus ? std::sqrt(a9) : -std::sqrt(a9);
    double const x = p.beta * momentum * momentum;
    double const pre = (l == 0 ? 1.0 : std::pow(x, l)) * std::pow(1 + x, -rc.tau / 2 + 1 + r);
    return pre * specfun::hyp2f1_terminating(qn.n, double(qn.n) + 2 * l + 2 * r + 1, 2 * l + 1, -x);
}

inline double radial_wavefunction(PhysicalParams const& p, EnergyLevel const& level, double momentum) {
    return radial_wavefunction(p, level.coupling, level.qn, level.E, momentum, level.branch);
}

enum class Measure { plain, deformed };

inline std::string_view to_string(Measure m) { return m == Measure::plain ? "plain" : "deformed"; }

inline Measure parse_measure(std::string_view s) {
    if (s == "plain") return Measure::plain;
    if (s == "deformed") return Measure::deformed;
    throw configuration_error("unknown measure '" + std::string(s) + "' (expected plain|deformed)");
}

struct WavefunctionTable {
    std::vector<double> momentum;
    std::vector<double> values;
    double beta = 0;               // needed by the deformed measure
    Measure measure = Measure::plain;
    double norm_constant = 1.0;    // accumulated factor applied to the raw samples
};

// Trapezoidal sum of |U|^2 p w over the grid, w = 1 or 1/(1 + beta p^2).
inline double quadrature_norm(WavefunctionTable const& t, Measure m) {
    double sum = 0;
    for (std::size_t i = 0; i + 1 < t.momentum.size(); ++i) {
        auto integrand = [&](std::size_t j) {
            double const pj = t.momentum[j];
            double const w = m == Measure::plain ? 1.0 : 1.0 / (1 + t.beta * pj * pj);
            return t.values[j] * t.values[j] * pj * w;
        };
        sum += 0.5 * (integrand(i) + integrand(i + 1)) * (t.momentum[i + 1] - t.momentum[i]);
    }
    return sum;
}

inline WavefunctionTable normalize(WavefunctionTable samples, Measure measure) {
    auto const& p = samples.momentum;
    auto const& u = samples.values;
    if (p.size() != u.size() || p.size() < 2) throw normalization_error("normalize: need matching grids of >= 2 points");
    for (std::size_t i = 0; i + 1 < p.size(); ++i)
        if (!(p[i + 1] > p[i])) throw normalization_error("normalize: momentum grid must be strictly increasing");
    double peak = 0;
    for (double v : u) peak = std::max(peak, std::abs(v));
    if (!(peak > 0)) throw normalization_error("normalize: zero norm");
    if (std::abs(u.back()) >= 1e-6 * peak)
        throw normalization_error("normalize: grid truncated before decay (|U(p_max)| / max|U| = " +
                                  std::to_string(std::abs(u.back()) / peak) + ")");
    double const norm = quadrature_norm(samples, measure);
    if (!(norm > 0)) throw normalization_error("normalize: zero norm");
    double const factor = 1 / std::sqrt(norm);
    for (double& v : samples.values) v *= factor;
    samples.measure = measure;
    samples.norm_constant *= factor;
    return samples;
}

struct AuditPoint {
    double momentum = 0;
    double z = 0;
    double first_chain = 0;  // U_z coefficient / U_zz coefficient from the physical ODE
    double first_closed = 0; // (a1 - a2 z) / (z(1 - a3 z))
    double zeroth_chain = 0;
    double zeroth_closed = 0; // (-xi1 z^2 + xi2 z - xi3) / [z(1 - a3 z)]^2
    double abs_first = 0, rel_first = 0;
    double abs_zeroth = 0, rel_zeroth = 0;
    bool flagged = false;
};

struct PrintedVariantRow {
    int n = 0;
    double canonical = 0; // quantization residual with 2 sqrt(a8 a9)
    double printed = 0;   // with 2 sqrt(-eta) a9
    double difference = 0;
};

struct AuditReport {
    std::vector<AuditPoint> points;
    std::vector<PrintedVariantRow> printed_variant;
    double max_rel_discrepancy = 0;
    bool passed = true;
};

inline double audit_tolerance() { return 1e-10; }

// Pushes the physical ODE through z = -beta p^2 by the chain rule and compares the resulting
// canonical-form ratios with those implied by reduced_coefficients + to_nu_problem.
inline AuditReport reduction_audit(PhysicalParams const& p, CouplingCase cc, int lambda, double E,
                                   std::span<double const> sample_p, int printed_n_max = 3) {
    AuditReport report;
    auto const problem = to_nu_problem(reduced_coefficients(p, cc, lambda, E));
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };

    for (double pm : sample_p) {
        AuditPoint pt;
        pt.momentum = pm;
        auto const k = oracle::physical_ode_coefficients(p, cc, lambda, E, pm);
        double const z = -p.beta * pm * pm;
        double const dz = -2 * p.beta * pm;
        double const d2z = -2 * p.beta;
        double const second = k.c2 * dz * dz;
        double const first = k.c2 * d2z + k.c1 * dz;
        pt.z = z;
        pt.first_chain = first / second;
        pt.zeroth_chain = k.c0 / second;
        double const sig = z * (1 - problem.alpha3 * z);
        pt.first_closed = (problem.alpha1 - problem.alpha2 * z) / sig;
        pt.zeroth_closed = (-problem.xi1 * z * z + problem.xi2 * z - problem.xi3) / (sig * sig);
        pt.abs_first = std::abs(pt.first_chain - pt.first_closed);
        pt.abs_zeroth = std::abs(pt.zeroth_chain - pt.zeroth_closed);
        pt.rel_first = rel(pt.first_chain, pt.first_closed);
        pt.rel_zeroth = rel(pt.zeroth_chain, pt.zeroth_closed);
        pt.flagged = pt.rel_first > audit_tolerance() || pt.rel_zeroth > audit_tolerance();
        report.max_rel_discrepancy = std::max({report.max_rel_discrepancy, pt.rel_first, pt.rel_zeroth});
        report.passed = report.passed && !pt.flagged;
        report.points.push_back(pt);
    }

    for (int n = 0; n <= printed_n_max; ++n) {
        PrintedVariantRow row;
        row.n = n;
        try {
            row.canonical = energy_residual(p, cc, {n, lambda}, E, KBranch::minus);
            row.printed = printed_quantization_residual(p, cc, {n, lambda}, E);
            row.difference = row.printed - row.canonical;
        } catch (complex_branch_error const&) {
            row.canonical = row.printed = row.difference = std::numeric_limits<double>::quiet_NaN();
        }
        report.printed_variant.push_back(row);
    }
    return report;
}

} // namespace gupdirac

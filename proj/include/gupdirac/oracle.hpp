#pragma once

// Independent eigensolver for the momentum-space radial equation
//
//     c2(p) U'' + c1(p) U' + c0(p) U = 0,
//
// by two-sided shooting. Nothing here touches the NU construction: the only shared pieces are
// the parameter and label types.
//
// The ODE is integrated in t = ln p, where both ends are power laws (U ~ p^|lambda| at the
// origin, U ~ p^-sigma at large momentum). The state is rescaled after every accepted step
// so neither the growing outward solution nor the inward one can overflow.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint.hpp>

#include "errors.hpp"
#include "types.hpp"

namespace gupdirac::oracle {

struct ShootingConfig {
    double p_min = 1e-6;
    std::optional<double> p_max;       // default: far enough out that U has decayed by e^-40
    int steps = 2000;                  // caps the step: dt <= (ln p_max - ln p_min) / steps
    std::optional<double> match_point; // default: outer classical turning point
    double e_tolerance = 1e-10;        // relative, for the energy refinement
    int node_cap = 12;                 // edge refinement stops once the Sturm count exceeds this

    void validate() const {
        if (!(p_min > 0)) throw configuration_error("ShootingConfig: p_min must be > 0");
        if (steps < 1000) throw configuration_error("ShootingConfig: steps must be >= 1000");
        if (!(e_tolerance >= 1e-12)) throw configuration_error("ShootingConfig: e_tolerance must be >= 1e-12");
        if (node_cap < 0) throw configuration_error("ShootingConfig: node_cap must be >= 0");
        if (p_max && !(*p_max > p_min)) throw configuration_error("ShootingConfig: p_max must exceed p_min");
        if (match_point && !(*match_point > p_min && (!p_max || *match_point < *p_max)))
            throw configuration_error("ShootingConfig: match_point must lie in (p_min, p_max)");
    }

    // local error target handed to the adaptive stepper
    double ode_tolerance() const { return std::clamp(1e-2 * e_tolerance, 1e-13, 1e-9); }
};

struct OdeCoefficients {
    double c2;
    double c1;
    double c0;
};

// g = 1 + beta p^2, W = E + s_c M, F = e^2 B^2 / 4c^2:
//   c2 = -(F + 2 W V0) g^2
//   c1 = -2 F g beta p - F g^2 / p - 4 W V0 g beta p - 2 W V0 g^2 / p
//   c0 = p^2 - (eB/2c) g lambda + F g^2 lambda^2 / p^2 + 2 lambda^2 W V0 g^2 / p^2 + M^2 - E^2
inline OdeCoefficients physical_ode_coefficients(PhysicalParams const& p, CouplingCase cc, int lambda, double E,
                                                 double momentum) {
    if (!(momentum > 0)) throw domain_error("physical_ode_coefficients: momentum must be > 0");
    double const g = 1 + p.beta * momentum * momentum;
    double const W = p.mass_energy(cc, E);
    double const F = p.field_term();
    double const wv = W * p.V0;
    double const l2 = double(lambda) * double(lambda);
    double const bp = p.beta * momentum;
    OdeCoefficients out;
    out.c2 = -F * g * g - 2 * wv * g * g;
    out.c1 = -2 * F * g * bp - F * g * g / momentum - 4 * wv * g * bp - 2 * wv * g * g / momentum;
    out.c0 = momentum * momentum - p.e * p.B / (2 * p.c) * g * lambda + F * g * g * l2 / (momentum * momentum) +
             2 * l2 * wv * g * g / (momentum * momentum) + p.M * p.M - E * E;
    return out;
}

struct ShotResult {
    double mismatch = 0;  // normalized Wronskian of the two sweeps at the match point, in [-1, 1]
    int nodes = 0;        // sign changes: outward on [p_min, match] + inward on [match, p_max]
    int sturm_nodes = 0;  // sign changes of the outward solution carried on to p_max
    bool turning_point = false; // c0 changes sign somewhere below the match point
    double match_point = 0;
    double p_max = 0;
};

namespace detail {

using State = std::array<double, 2>;

// Euler-type local exponent: U ~ p^-sigma with the coefficients frozen at p.
inline double local_decay_exponent(OdeCoefficients const& k, double p) {
    double const b = 1 - k.c1 * p / k.c2;
    double const c = k.c0 * p * p / k.c2;
    double const disc = b * b - 4 * c;
    if (disc < 0) return 0;
    return std::max(0.0, (-b + std::sqrt(disc)) / 2);
}

struct Sweep {
    PhysicalParams const& params;
    CouplingCase cc;
    int lambda;
    double E;
    double dir; // +1 integrates toward larger p, -1 toward smaller

    // x = (U, V), V = dU/dt, t = ln p; independent variable is dir * t
    void operator()(State const& x, State& dxdt, double s) const {
        double const t = dir * s;
        double const p = std::exp(t);
        auto const k = physical_ode_coefficients(params, cc, lambda, E, p);
        double const dv = x[1] - (k.c1 * p * x[1] + k.c0 * p * p * x[0]) / k.c2;
        dxdt[0] = dir * x[1];
        dxdt[1] = dir * dv;
    }
};

inline int sign_of(double v) { return (v > 0) - (v < 0); }

// Advances x from t0 to t1 (t1 may be below t0). Returns the number of sign changes of U.
inline int integrate(Sweep const& sys, State& x, double t0, double t1, double dt_max, double tol) {
    namespace odeint = boost::numeric::odeint;
    auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State>());
    double s = sys.dir * t0;
    double const s_end = sys.dir * t1;
    double dt = std::min(dt_max, 1e-3);
    int last_sign = sign_of(x[0]);
    int zeros = 0;
    constexpr long max_steps = 400000;
    for (long it = 0; s < s_end; ++it) {
        if (it > max_steps) throw integration_error("shoot: step budget exhausted", std::exp(sys.dir * s));
        double const h = std::min({dt, dt_max, s_end - s});
        double trial = h;
        double s_try = s;
        State x_try = x;
        auto const res = stepper.try_step(sys, x_try, s_try, trial);
        if (res == odeint::success) {
            s = s_try;
            x = x_try;
            if (!std::isfinite(x[0]) || !std::isfinite(x[1]))
                throw integration_error("shoot: non-finite state", std::exp(sys.dir * s));
            int const sg = sign_of(x[0]);
            if (sg != 0 && last_sign != 0 && sg != last_sign) ++zeros;
            if (sg != 0) last_sign = sg;
            double const big = std::max(std::abs(x[0]), std::abs(x[1]));
            if (big > 1e50 || (big < 1e-50 && big > 0)) {
                x[0] /= big;
                x[1] /= big;
                stepper.reset(); // dopri5 caches dxdt of the unscaled state
            }
            dt = trial; // grown step suggestion
        } else {
            dt = trial; // shrunk step
        }
        if (dt < 1e-14) throw integration_error("shoot: step size underflow", std::exp(sys.dir * s));
    }
    return zeros;
}

struct Geometry {
    double match;
    double p_max;
    double sigma_max; // decay exponent used for the inward start
    bool turning_point = false;
};

inline Geometry choose_geometry(PhysicalParams const& p, CouplingCase cc, int lambda, double E,
                                ShootingConfig const& cfg) {
    double match = 0;
    bool turning = false;
    if (cfg.match_point) {
        match = *cfg.match_point;
    } else {
        // outermost sign change of c0 from allowed (c0 < 0) to forbidden (c0 > 0)
        constexpr int n_scan = 1600;
        double const t_lo = std::log(cfg.p_min);
        double const t_hi = std::log(std::max(1e8, 1e3 / std::sqrt(p.beta)));
        double const dt = (t_hi - t_lo) / n_scan;
        int last_allowed = -1;
        int best = 0;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= n_scan; ++i) {
            double const pm = std::exp(t_lo + i * dt);
            auto const k = physical_ode_coefficients(p, cc, lambda, E, pm);
            if (k.c0 < 0) last_allowed = i;
            double const ratio = k.c0 / -k.c2;
            if (ratio < best_ratio) {
                best_ratio = ratio;
                best = i;
            }
        }
        if (last_allowed == n_scan) {
            // c0 < 0 all the way out, yet the tail may still fall off as a power law
            double const top = std::exp(t_hi);
            if (!(local_decay_exponent(physical_ode_coefficients(p, cc, lambda, E, top), top) > 0))
                throw integration_error("shoot: no decaying solution at large momentum", top);
            turning = true;
            match = std::exp(t_lo + best * dt);
        } else if (last_allowed >= 0) {
            turning = true;
            double const ta = t_lo + last_allowed * dt;
            double const pa = std::exp(ta);
            double const pb = std::exp(ta + dt);
            double const ca = physical_ode_coefficients(p, cc, lambda, E, pa).c0;
            double const cb = physical_ode_coefficients(p, cc, lambda, E, pb).c0;
            match = std::exp(ta + dt * ca / (ca - cb));
        } else {
            match = std::exp(t_lo + best * dt);
        }
        match = std::max(match, cfg.p_min * 10);
    }

    double p_max = 0;
    double sigma = 0;
    if (cfg.p_max) {
        p_max = *cfg.p_max;
        sigma = local_decay_exponent(physical_ode_coefficients(p, cc, lambda, E, p_max), p_max);
    } else {
        constexpr double decay_target = 40.0; // |U(p_max) / U(match)| ~ e^-40
        constexpr double dt = 0.01;
        double t = std::log(match);
        double const t_cap = t + 60.0;
        double acc = 0;
        while (acc < decay_target && t < t_cap) {
            t += dt;
            sigma = local_decay_exponent(physical_ode_coefficients(p, cc, lambda, E, std::exp(t)), std::exp(t));
            acc += sigma * dt;
        }
        p_max = std::exp(t);
    }
    if (!(sigma > 0)) throw integration_error("shoot: no decaying solution at p_max", p_max);
    if (!(cfg.p_min < match && match < p_max))
        throw integration_error("shoot: match point outside (p_min, p_max)", match);
    return {match, p_max, sigma, turning};
}

} // namespace detail

// With with_sturm = false the outward sweep stops at the match point and sturm_nodes is left 0.
inline ShotResult shoot(PhysicalParams const& p, CouplingCase cc, int lambda, double E, ShootingConfig const& cfg,
                        bool with_sturm = true) {
    cfg.validate();
    double const W = p.mass_energy(cc, E);
    if (!(p.field_term() + 2 * W * p.V0 > 0))
        throw integration_error("shoot: c2 changes sign (leading coefficient is not negative)", cfg.p_min);

    auto const geo = detail::choose_geometry(p, cc, lambda, E, cfg);
    double const t_min = std::log(cfg.p_min);
    double const t_match = std::log(geo.match);
    double const t_max = std::log(geo.p_max);
    double const dt_max = (t_max - t_min) / cfg.steps;
    double const tol = cfg.ode_tolerance();

    detail::Sweep const out_sys{p, cc, lambda, E, +1.0};
    detail::State out{1.0, double(std::abs(lambda))};
    int const zeros_out = detail::integrate(out_sys, out, t_min, t_match, dt_max, tol);
    detail::State const at_match = out;

    detail::Sweep const in_sys{p, cc, lambda, E, -1.0};
    detail::State in{1.0, -geo.sigma_max};
    int const zeros_in = detail::integrate(in_sys, in, t_max, t_match, dt_max, tol);

    int const zeros_tail = with_sturm ? detail::integrate(out_sys, out, t_match, t_max, dt_max, tol) : 0;

    ShotResult r;
    double const wr = at_match[0] * in[1] - at_match[1] * in[0];
    r.mismatch = wr / (std::hypot(at_match[0], at_match[1]) * std::hypot(in[0], in[1]));
    r.nodes = zeros_out + zeros_in;
    r.sturm_nodes = zeros_out + zeros_tail;
    r.turning_point = geo.turning_point;
    r.match_point = geo.match;
    r.p_max = geo.p_max;
    return r;
}

// Lowest energy where the leading coefficient stays negative (mu > 0 on the closed-form side).
inline double lower_energy_bound(PhysicalParams const& p, CouplingCase cc) {
    return -case_sign(cc) * p.M - p.field_term() / (2 * p.V0);
}

struct OracleScan {
    std::vector<EnergyLevel> levels; // ascending in E
    std::vector<std::string> notes;
};

namespace detail {

struct Sample {
    double E;
    bool ok;
    double mismatch;
    int sturm;
    bool turning;
    bool forbidden = false; // c0 >= 0 on the whole scan: no bound state, not integrated
};

// In self-adjoint form (P U')' = (c0 / -c2) P U with P > 0, so c0 >= 0 everywhere makes every
// solution that starts regular grow monotonically.
inline bool forbidden_everywhere(PhysicalParams const& p, CouplingCase cc, int lambda, double E,
                                 ShootingConfig const& cfg) {
    if (cfg.match_point) return false;
    if (!(p.field_term() + 2 * p.mass_energy(cc, E) * p.V0 > 0)) return false;
    try {
        return !choose_geometry(p, cc, lambda, E, cfg).turning_point;
    } catch (integration_error const&) {
        return false;
    }
}

inline Sample sample(PhysicalParams const& p, CouplingCase cc, int lambda, double E, ShootingConfig const& cfg,
                     bool with_sturm = true) {
    if (forbidden_everywhere(p, cc, lambda, E, cfg))
        return {E, true, std::numeric_limits<double>::quiet_NaN(), 0, false, true};
    try {
        auto const r = shoot(p, cc, lambda, E, cfg, with_sturm);
        return {E, true, r.mismatch, r.sturm_nodes, r.turning_point};
    } catch (integration_error const&) {
        return {E, false, 0, 0, false};
    }
}

// Sample at the edge of the classically forbidden region between a forbidden and an allowed energy.
inline Sample threshold_sample(PhysicalParams const& p, CouplingCase cc, int lambda, Sample const& forbidden,
                               Sample const& allowed, ShootingConfig const& cfg) {
    double f = forbidden.E, a = allowed.E;
    for (int it = 0; it < 60 && std::abs(f - a) > 1e-12 * std::max(1.0, std::abs(a)); ++it) {
        double const m = (f + a) / 2;
        (forbidden_everywhere(p, cc, lambda, m, cfg) ? f : a) = m;
    }
    return sample(p, cc, lambda, a, cfg);
}

inline std::optional<double> refine_mismatch(PhysicalParams const& p, CouplingCase cc, int lambda, double a,
                                             double b, ShootingConfig const& cfg) {
    auto f = [&](double E) { return shoot(p, cc, lambda, E, cfg, false).mismatch; };
    auto tol = [&](double lo, double hi) {
        return std::abs(hi - lo) <= cfg.e_tolerance * std::max(1.0, std::abs(lo + hi) / 2);
    };
    try {
        std::uintmax_t iterations = 200;
        auto const [lo, hi] = boost::math::tools::toms748_solve(f, a, b, tol, iterations);
        return (lo + hi) / 2;
    } catch (integration_error const&) {
        return std::nullopt;
    } catch (boost::math::evaluation_error const&) {
        return std::nullopt;
    }
}

inline void examine_cell(PhysicalParams const& p, CouplingCase cc, int lambda, Sample const& a, Sample const& b,
                         ShootingConfig const& cfg, int depth, int max_nodes,
                         std::vector<std::pair<double, double>>& brackets) {
    if (a.forbidden && b.forbidden) return;
    if (a.forbidden || b.forbidden) {
        auto const edge = threshold_sample(p, cc, lambda, a.forbidden ? a : b, a.forbidden ? b : a, cfg);
        if (!edge.ok || edge.forbidden) return;
        if (a.forbidden)
            examine_cell(p, cc, lambda, edge, b, cfg, depth, max_nodes, brackets);
        else
            examine_cell(p, cc, lambda, a, edge, cfg, depth, max_nodes, brackets);
        return;
    }
    bool const sign_change = sign_of(a.mismatch) != sign_of(b.mismatch);
    if (std::abs(b.sturm - a.sturm) >= 2 && depth < 10) {
        auto const mid = sample(p, cc, lambda, (a.E + b.E) / 2, cfg);
        if (mid.ok) {
            examine_cell(p, cc, lambda, a, mid, cfg, depth + 1, max_nodes, brackets);
            examine_cell(p, cc, lambda, mid, b, cfg, depth + 1, max_nodes, brackets);
            return;
        }
    }
    if (sign_change && std::min(a.sturm, b.sturm) <= max_nodes) brackets.emplace_back(a.E, b.E);
}

} // namespace detail

// All oracle eigenvalues for one angular label inside the window, each labelled by its node
// count and carrying the energy shift seen when the step cap is halved. With max_nodes set,
// brackets whose Sturm counts both exceed it are not refined.
inline OracleScan oracle_scan(PhysicalParams const& p, CouplingCase cc, int lambda, EnergyWindow window,
                              ShootingConfig const& cfg, int grid_points = 400,
                              std::optional<int> max_nodes = std::nullopt) {
    p.validate();
    cfg.validate();
    if (!(window.lo < window.hi) || !std::isfinite(window.lo) || !std::isfinite(window.hi))
        throw configuration_error("oracle_scan: window must be a finite, non-empty interval");
    if (grid_points < 16) throw configuration_error("oracle_scan: grid_points must be >= 16");
    if (max_nodes && *max_nodes < 0) throw configuration_error("oracle_scan: max_nodes must be >= 0");
    int const node_limit = max_nodes ? *max_nodes : std::numeric_limits<int>::max();
    int const cap = std::min(cfg.node_cap, node_limit);
    double const floor = lower_energy_bound(p, cc);
    if (window.hi <= floor) throw configuration_error("oracle_scan: window lies entirely below the admissible energies");
    double const lo = std::max(window.lo, floor + 1e-9 * std::max(1.0, std::abs(floor)));

    OracleScan scan;
    std::vector<detail::Sample> grid;
    grid.reserve(grid_points);
    double const cell = (window.hi - lo) / double(grid_points - 1);
    for (int i = 0; i < grid_points; ++i) grid.push_back(detail::sample(p, cc, lambda, lo + cell * double(i), cfg));

    // Levels can crowd against the mu = 0 edge (the kinetic coefficient vanishes there) and against
    // energies where the large-momentum tail stops decaying. Both show up as a window end or a
    // failed sample next to a good one; march geometrically from the good sample toward it.
    std::vector<detail::Sample> extra;
    auto walk = [&](detail::Sample const& good, double boundary) -> bool {
        constexpr double ratio = 1.5;
        double const span = good.E - boundary;
        double const stop = 1e-9 * std::max(1.0, std::abs(boundary));
        // nothing to find if even the limiting energy has no classically allowed region
        if (good.sturm == 0 && !good.turning) {
            double const E_lim = boundary + (span > 0 ? stop : -stop);
            bool limit_turns = false;
            try {
                limit_turns = detail::choose_geometry(p, cc, lambda, E_lim, cfg).turning_point;
            } catch (integration_error const&) {
                limit_turns = true;
            }
            if (!limit_turns) return false;
        }
        int misses = 0;
        for (double d = span / ratio; std::abs(d) > stop; d /= ratio) {
            auto const s = detail::sample(p, cc, lambda, boundary + d, cfg);
            if (!s.ok) {
                if (++misses > 3) break;
                continue;
            }
            misses = 0;
            extra.push_back(s);
            if (s.sturm > cap) {
                scan.notes.push_back("levels above " + std::to_string(cap) + " nodes accumulating at E = " +
                                     std::to_string(boundary) + " are not resolved");
                return true;
            }
        }
        return false;
    };
    auto boundary_between = [&](detail::Sample const& good, detail::Sample const& bad) {
        double g = good.E, b = bad.E;
        for (int it = 0; it < 40 && std::abs(g - b) > 1e-12 * std::max(1.0, std::abs(g)); ++it) {
            double const m = (g + b) / 2;
            (detail::sample(p, cc, lambda, m, cfg, false).ok ? g : b) = m;
        }
        return b;
    };
    if (lo - floor < cell && grid[1].ok && walk(grid[1], floor)) grid.erase(grid.begin());
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (grid[i].ok == grid[i + 1].ok) continue;
        auto const& good = grid[i].ok ? grid[i] : grid[i + 1];
        auto const& bad = grid[i].ok ? grid[i + 1] : grid[i];
        walk(good, boundary_between(good, bad));
    }
    grid.insert(grid.end(), extra.begin(), extra.end());
    std::sort(grid.begin(), grid.end(), [](auto const& x, auto const& y) { return x.E < y.E; });

    std::vector<std::pair<double, double>> brackets;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (!grid[i].ok || !grid[i + 1].ok) continue;
        detail::examine_cell(p, cc, lambda, grid[i], grid[i + 1], cfg, 0, node_limit, brackets);
    }

    ShootingConfig fine = cfg;
    fine.steps = cfg.steps * 2;
    for (auto const& [a, b] : brackets) {
        auto const root = detail::refine_mismatch(p, cc, lambda, a, b, cfg);
        if (!root) {
            scan.notes.push_back("bracket [" + std::to_string(a) + ", " + std::to_string(b) +
                                 "] dropped: integration failed during refinement");
            continue;
        }
        ShotResult at;
        try {
            at = shoot(p, cc, lambda, *root, cfg, false);
        } catch (integration_error const& err) {
            scan.notes.push_back(std::string("root dropped: ") + err.what());
            continue;
        }
        // a sign flip without a zero crossing (normalization jump) is not an eigenvalue
        if (std::abs(at.mismatch) > 1e-5) {
            scan.notes.push_back("bracket near E = " + std::to_string(*root) + " is a discontinuity, not a root");
            continue;
        }

        EnergyLevel lvl;
        lvl.E = *root;
        lvl.qn = {at.nodes, lambda};
        lvl.coupling = cc;
        lvl.residual = at.mismatch;
        lvl.method = SolveMethod::oracle;
        lvl.normalizable = true;
        lvl.nodes = at.nodes;

        // mesh refinement: same root with twice the step budget
        double delta = std::max(1e-7 * std::abs(*root), 1e-6);
        for (int attempt = 0; attempt < 4; ++attempt, delta *= 10) {
            double const ea = std::max(*root - delta, lo);
            double const eb = *root + delta;
            auto const sa = detail::sample(p, cc, lambda, ea, fine, false);
            auto const sb = detail::sample(p, cc, lambda, eb, fine, false);
            if (!sa.ok || !sb.ok || detail::sign_of(sa.mismatch) == detail::sign_of(sb.mismatch)) continue;
            if (auto const r2 = detail::refine_mismatch(p, cc, lambda, ea, eb, fine)) {
                lvl.mesh_delta = std::abs(*r2 - *root);
                break;
            }
        }
        scan.levels.push_back(lvl);
    }
    std::sort(scan.levels.begin(), scan.levels.end(), [](auto const& x, auto const& y) { return x.E < y.E; });
    return scan;
}

inline EnergyLevel oracle_energy(PhysicalParams const& p, CouplingCase cc, QuantumNumbers qn, EnergyWindow window,
                                 ShootingConfig const& cfg, int grid_points = 400) {
    if (qn.n < 0) throw configuration_error("oracle_energy: n must be >= 0");
    auto const scan = oracle_scan(p, cc, qn.lambda, window, cfg, grid_points, qn.n);
    for (auto const& lvl : scan.levels)
        if (lvl.nodes == qn.n) return lvl;
    throw not_found_error("oracle_energy: no state with " + std::to_string(qn.n) + " nodes (lambda = " +
                          std::to_string(qn.lambda) + ") in [" + std::to_string(window.lo) + ", " +
                          std::to_string(window.hi) + "]");
}

} // namespace gupdirac::oracle

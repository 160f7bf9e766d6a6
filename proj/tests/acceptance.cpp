// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include <gupdirac/cli.hpp>

using namespace gupdirac;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, char const* title, bool pass, double elapsed, double limit, std::string const& detail) {
    bool const in_time = limit <= 0 || elapsed < limit;
    bool const ok = pass && in_time;
    if (!ok) ++failures;
    std::printf("%s criterion %d (%s): %s; %.2f s", ok ? "PASS" : "FAIL", id, title, detail.c_str(), elapsed);
    if (limit > 0) std::printf(" (limit %.0f s)", limit);
    std::printf("\n");
    std::fflush(stdout);
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

constexpr CouplingCase both_cases[] = {CouplingCase::delta_zero, CouplingCase::sigma_zero};

struct GridPoint {
    PhysicalParams p;
    CouplingCase cc;
    int lambda;
};

std::vector<GridPoint> consistency_grid() {
    std::vector<GridPoint> g;
    for (double beta : {0.01, 0.1, 0.5})
        for (double B : {0.0, 1.0, 5.0})
            for (double V0 : {0.5, 1.0})
                for (auto cc : both_cases)
                    for (int l = -2; l <= 2; ++l) g.push_back({{1, V0, B, 1, 1, beta}, cc, l});
    return g;
}

char const* label(CouplingCase cc) { return cc == CouplingCase::delta_zero ? "delta_zero" : "sigma_zero"; }

void criterion_identities() {
    auto const t0 = Clock::now();
    std::mt19937_64 rng(1000);
    std::uniform_real_distribution<double> u(0, 1);
    double tau = 0, eta = 0, comb = 0;
    int draws = 0;
    while (draws < 1000) {
        PhysicalParams p{0.5 + 1.5 * u(rng), 0.1 + 1.9 * u(rng), 5 * u(rng), 1, 1, std::pow(10.0, -3 + 3 * u(rng))};
        int const l = int(std::floor(7 * u(rng))) - 3;
        auto const cc = both_cases[draws % 2];
        double const E = oracle::lower_energy_bound(p, cc) + 0.01 * std::pow(2000.0, u(rng));
        ReducedCoefficients<> rc;
        try {
            rc = reduced_coefficients(p, cc, l, E);
        } catch (degeneracy_error const&) {
            continue;
        }
        ++draws;
        tau = std::max(tau, std::abs(rc.tau - 2));
        eta = std::max(eta, std::abs(rc.eta + double(l) * l / 4));
        double const half = rc.tau / 2 - 1;
        double const lhs = half * half - rc.zeta - rc.nu - rc.eta;
        double const rhs = (1 / p.beta + E * E - p.M * p.M) / rc.mu;
        comb = std::max(comb, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
    bool const pass = tau <= 1e-12 && eta <= 1e-12 && comb <= 1e-12;
    report(1, "structural identities", pass, seconds_since(t0), 1,
           std::to_string(draws) + " draws, max |tau-2| " + sci(tau) + ", |eta+l^2/4| " + sci(eta) +
               ", combination " + sci(comb));
}

void criterion_consistency() {
    auto const t0 = Clock::now();
    int levels = 0, bad = 0;
    double worst_q = 0, worst_ode = 0;
    for (auto const& g : consistency_grid())
        for (int n = 0; n <= 3; ++n)
            for (auto const& lvl : solve_energy(g.p, g.cc, {n, g.lambda}, default_window(g.p, g.cc), 4000,
                                                KBranch::plus)) {
                ++levels;
                double q = NAN, ode = NAN;
                try {
                    long double const root = polish_root(g.p, g.cc, lvl.qn, lvl.E, KBranch::plus);
                    q = double(std::abs(energy_residual<long double>(g.p, g.cc, lvl.qn, root, KBranch::plus)));
                    ode = cli::max_ode_residual(g.p, g.cc, lvl.qn, root, KBranch::plus);
                } catch (std::exception const& e) {
                    std::printf("  criterion 2: %s beta=%g B=%g V0=%g l=%d n=%d: %s\n", label(g.cc), g.p.beta, g.p.B,
                                g.p.V0, g.lambda, n, e.what());
                }
                if (!(q <= 1e-10 && ode <= 1e-8)) {
                    ++bad;
                    std::printf("  criterion 2: %s beta=%g B=%g V0=%g l=%d n=%d E=%.15g residual %s ode %s\n",
                                label(g.cc), g.p.beta, g.p.B, g.p.V0, g.lambda, n, lvl.E, sci(q).c_str(),
                                sci(ode).c_str());
                }
                if (std::isfinite(q)) worst_q = std::max(worst_q, q);
                if (std::isfinite(ode)) worst_ode = std::max(worst_ode, ode);
            }
    report(2, "NU internal consistency", bad == 0 && levels > 0, seconds_since(t0), 30,
           std::to_string(levels) + " levels, " + std::to_string(bad) + " over tolerance, max residual " +
               sci(worst_q) + ", max ODE residual " + sci(worst_ode));
}

struct Mismatch {
    int cells = 0;
    int bad = 0;
    double worst = 0;
};

Mismatch compare(GridPoint const& g, EnergyWindow w, KBranch branch, std::vector<EnergyLevel> const& oracle_levels,
                 bool log) {
    Mismatch m;
    for (auto const& c : cli::agreement_cells(g.p, g.cc, g.lambda, 2, w, branch, oracle_levels)) {
        ++m.cells;
        m.worst = std::max(m.worst, c.max_rel);
        if (c.pass) continue;
        ++m.bad;
        if (!log) continue;
        std::printf("  criterion 3 discrepancy: %s beta=%g B=%g V0=%g l=%d n=%d closed-form", label(g.cc), g.p.beta,
                    g.p.B, g.p.V0, g.lambda, c.n);
        for (double e : c.closed) std::printf(" %.10g", e);
        std::printf(" oracle");
        for (double e : c.oracle) std::printf(" %.10g", e);
        std::printf("\n");
    }
    return m;
}

void criterion_oracle() {
    auto const t0 = Clock::now();
    Mismatch plus, minus;
    int errors = 0;
    for (auto const& g : consistency_grid()) {
        auto const w = default_window(g.p, g.cc);
        std::vector<EnergyLevel> levels;
        try {
            levels = cli::oracle_levels_for(g.p, g.cc, g.lambda, w, 2);
        } catch (std::exception const& e) {
            ++errors;
            std::printf("  criterion 3: %s beta=%g B=%g V0=%g l=%d: oracle error %s\n", label(g.cc), g.p.beta, g.p.B,
                        g.p.V0, g.lambda, e.what());
        }
        auto const a = compare(g, w, KBranch::plus, levels, true);
        plus.cells += a.cells;
        plus.bad += a.bad;
        plus.worst = std::max(plus.worst, a.worst);
        auto const b = compare(g, w, KBranch::minus, levels, false);
        minus.cells += b.cells;
        minus.bad += b.bad;
    }
    double const elapsed = seconds_since(t0);
    report(3, "oracle agreement", plus.bad == 0 && errors == 0, elapsed, 120,
           std::to_string(plus.cells) + " (n, lambda) cells, " + std::to_string(plus.bad) + " mismatched, max rel diff " +
               sci(plus.worst));
    std::printf("NOTE criterion 3: the minus k branch (growing eigenfunctions) disagrees with the oracle in %d of %d cells "
                "(documented discrepancy)\n",
                minus.bad, minus.cells);
}

void criterion_bridge() {
    auto const t0 = Clock::now();
    double const err = cli::bridge_max_error();
    report(4, "Jacobi/2F1 bridge", err <= 1e-12, seconds_since(t0), 1, "max rel error " + sci(err));
}

void criterion_audit() {
    auto const t0 = Clock::now();
    double const momenta[] = {0.5, 1.0, 2.0};
    int points = 0, flagged = 0, printed_rows = 0;
    double worst = 0, widest_gap = 0;
    for (auto const& g : consistency_grid()) {
        auto const w = default_window(g.p, g.cc);
        std::vector<double> energies;
        for (int n = 0; n <= 3; ++n)
            for (auto const& lvl : solve_energy(g.p, g.cc, {n, g.lambda}, w, 4000, KBranch::plus))
                energies.push_back(lvl.E);
        if (energies.empty()) energies.push_back(w.lo + 0.5 * (w.hi - w.lo));
        for (double E : energies) {
            auto const a = reduction_audit(g.p, g.cc, g.lambda, E, momenta);
            for (auto const& pt : a.points) {
                ++points;
                flagged += pt.flagged;
            }
            worst = std::max(worst, a.max_rel_discrepancy);
            for (auto const& row : a.printed_variant) {
                ++printed_rows;
                if (std::isfinite(row.difference)) widest_gap = std::max(widest_gap, std::abs(row.difference));
            }
        }
    }
    report(5, "reduction audit", flagged == 0 && points > 0 && printed_rows > 0, seconds_since(t0), 0,
           std::to_string(points) + " points, " + std::to_string(flagged) + " flagged, max rel " + sci(worst));
    std::printf("NOTE criterion 5: printed quantization variant evaluated on %d rows, max |printed - canonical| %s "
                "(documented discrepancy)\n",
                printed_rows, sci(widest_gap).c_str());
}

void criterion_beta_limit() {
    auto const t0 = Clock::now();
    int checked = 0, bad = 0;
    for (double B : {0.0, 1.0})
        for (int l : {0, 1})
            for (int n : {0, 1}) {
                double e[3];
                int i = 0;
                try {
                    for (double beta : {1e-4, 1e-3, 1e-2}) {
                        PhysicalParams const p{1, 1, B, 1, 1, beta};
                        e[i++] = oracle::oracle_energy(p, CouplingCase::delta_zero, {n, l}, {-1 + 1e-9, 12},
                                                       oracle::ShootingConfig{}, 200)
                                     .E;
                    }
                } catch (std::exception const& ex) {
                    ++bad;
                    std::printf("  criterion 6: B=%g l=%d n=%d: %s\n", B, l, n, ex.what());
                    continue;
                }
                ++checked;
                double const near = std::abs(e[0] - e[1]), far = std::abs(e[1] - e[2]);
                if (!(near < far)) {
                    ++bad;
                    std::printf("  criterion 6: B=%g l=%d n=%d: %s !< %s\n", B, l, n, sci(near).c_str(), sci(far).c_str());
                }
            }
    report(6, "beta -> 0 continuity", bad == 0 && checked == 8, seconds_since(t0), 60,
           std::to_string(checked) + " (B, lambda, n) triples, " + std::to_string(bad) + " failing");
}

std::string slurp(std::filesystem::path const& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void criterion_determinism() {
    auto const t0 = Clock::now();
    cli::RunConfig cfg;
    cfg.params = {1, 1, 1, 1, 1, 0.1};
    cfg.coupling = CouplingCase::sigma_zero;
    cfg.lambda_lo = -2;
    cfg.lambda_hi = 2;
    cfg.oracle = true;
    auto const dir = std::filesystem::temp_directory_path() / "gupdirac_acceptance";
    std::filesystem::create_directories(dir);
    std::filesystem::path const files[] = {dir / "first.csv", dir / "second.csv"};
    for (auto const& f : files) {
        auto c = cfg;
        c.output_path = f.string();
        cli::write_output(c.output_path, cli::render_spectrum(cli::run_spectrum(c)));
    }
    auto const a = slurp(files[0]), b = slurp(files[1]);
    report(7, "determinism", !a.empty() && a == b, seconds_since(t0), 0,
           std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "different"));
}

} // namespace

int main() {
    criterion_identities();
    criterion_consistency();
    criterion_oracle();
    criterion_bridge();
    criterion_audit();
    criterion_beta_limit();
    criterion_determinism();
    std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}

#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace gupdirac {

// Which square-root branch of the NU polynomial k the construction follows.
//   minus: k = -(a7 + 2 a3 a8) - 2 sqrt(a8 a9); the textbook choice.
//   plus:  k = -(a7 + 2 a3 a8) + 2 sqrt(a8 a9); equivalent to sqrt(a9) -> -sqrt(a9) everywhere.
// On the GUP domain s = -beta p^2 <= 0 only the plus branch produces eigenfunctions that
// decay at large momentum.
enum class KBranch { minus, plus };

inline std::string_view to_string(KBranch b) { return b == KBranch::minus ? "minus" : "plus"; }

inline KBranch parse_branch(std::string_view s) {
    if (s == "minus") return KBranch::minus;
    if (s == "plus") return KBranch::plus;
    throw configuration_error("unknown branch '" + std::string(s) + "' (expected minus|plus)");
}

// Delta(r) = V - S = 0 couples through W = E + M; Sigma(r) = V + S = 0 through W = E - M.
enum class CouplingCase { delta_zero, sigma_zero };

constexpr int case_sign(CouplingCase c) noexcept { return c == CouplingCase::delta_zero ? +1 : -1; }

inline std::string_view to_string(CouplingCase c) {
    return c == CouplingCase::delta_zero ? "delta_zero" : "sigma_zero";
}

inline CouplingCase parse_case(std::string_view s) {
    if (s == "delta_zero") return CouplingCase::delta_zero;
    if (s == "sigma_zero") return CouplingCase::sigma_zero;
    throw configuration_error("unknown case '" + std::string(s) + "' (expected delta_zero|sigma_zero)");
}

// Natural units, hbar = 1. c is kept explicit because the field terms carry e/c.
struct PhysicalParams {
    double M = 1.0;    // rest mass
    double V0 = 1.0;   // harmonic strength
    double B = 0.0;    // field magnitude, A = (-B y/2, B x/2, 0)
    double e = 1.0;
    double c = 1.0;
    double beta = 0.1; // GUP deformation, [x, p] = i (1 + beta p^2)

    void validate() const {
        auto finite = [](double v) { return std::isfinite(v); };
        if (!(finite(M) && finite(V0) && finite(B) && finite(e) && finite(c) && finite(beta)))
            throw configuration_error("physical parameters must be finite");
        if (!(M > 0)) throw configuration_error("M must be > 0");
        if (!(V0 > 0)) throw configuration_error("V0 must be > 0");
        if (!(B >= 0)) throw configuration_error("B must be >= 0");
        if (!(e > 0)) throw configuration_error("e must be > 0");
        if (!(c > 0)) throw configuration_error("c must be > 0");
        if (!(beta > 0 && beta <= 1)) throw configuration_error("beta must lie in (0, 1]");
    }

    // W = E + s_c M
    double mass_energy(CouplingCase cc, double E) const noexcept { return E + case_sign(cc) * M; }

    // e^2 B^2 / (4 c^2)
    double field_term() const noexcept { return e * e * B * B / (4.0 * c * c); }

    bool operator==(PhysicalParams const&) const = default;
};

struct QuantumNumbers {
    int n = 0;      // polynomial degree / radial nodes
    int lambda = 0; // angular label of exp(i lambda theta)
    bool operator==(QuantumNumbers const&) const = default;
};

struct EnergyWindow {
    double lo = 0.0;
    double hi = 0.0;
    bool operator==(EnergyWindow const&) const = default;
};

enum class SolveMethod { closed_form, oracle };

inline std::string_view to_string(SolveMethod m) { return m == SolveMethod::closed_form ? "closed-form" : "oracle"; }

struct EnergyLevel {
    double E = std::numeric_limits<double>::quiet_NaN();
    QuantumNumbers qn{};
    CouplingCase coupling = CouplingCase::delta_zero;
    double residual = std::numeric_limits<double>::quiet_NaN();
    SolveMethod method = SolveMethod::closed_form;
    KBranch branch = KBranch::plus;  // closed-form only
    bool normalizable = true;        // closed-form: large-momentum exponent check; oracle: always true
    int nodes = -1;                  // oracle only
    double mesh_delta = std::numeric_limits<double>::quiet_NaN(); // oracle only: |E(2 steps) - E(steps)|
};

} // namespace gupdirac

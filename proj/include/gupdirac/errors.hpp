#pragma once

#include <stdexcept>
#include <string>

namespace gupdirac {

// Argument outside the mathematical domain of a function (x <= 0 for ln_gamma, negative beta, ...).
class domain_error : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// A parameter combination that makes a formula undefined (zero Pochhammer denominator).
class parameter_error : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// alpha8 or alpha9 went negative: the real NU branch does not exist at these inputs.
class complex_branch_error : public std::domain_error {
  public:
    complex_branch_error(std::string const& parameter, double value)
        : std::domain_error("complex NU branch: " + parameter + " = " + std::to_string(value) + " < 0"),
          parameter_(parameter), value_(value) {}
    std::string const& parameter() const noexcept { return parameter_; }
    double value() const noexcept { return value_; }

  private:
    std::string parameter_;
    double value_;
};

// mu <= 0: the reduced equation degenerates.
class degeneracy_error : public std::domain_error {
  public:
    degeneracy_error(double W, double mu)
        : std::domain_error("coefficient degeneracy: W = " + std::to_string(W) + ", mu = " + std::to_string(mu)),
          W_(W), mu_(mu) {}
    double W() const noexcept { return W_; }
    double mu() const noexcept { return mu_; }

  private:
    double W_;
    double mu_;
};

// Finite-difference stencil touches a singular point of the NU equation.
class singular_point_error : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

class configuration_error : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Sampled wavefunction has zero norm or has not decayed at the end of the grid.
class normalization_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class integration_error : public std::runtime_error {
  public:
    integration_error(std::string const& what, double momentum)
        : std::runtime_error(what + " (p = " + std::to_string(momentum) + ")"), momentum_(momentum) {}
    double momentum() const noexcept { return momentum_; }

  private:
    double momentum_;
};

// No state with the requested node count inside the search window.
class not_found_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace gupdirac

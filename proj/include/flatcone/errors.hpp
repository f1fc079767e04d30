#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace flatcone {

// Invalid construction or precondition violation (bad divisor, malformed
// path, inconsistent angle data, ...).
class validation_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Evaluation requested at a cone point where the differential has a pole
// or a zero.
class pole_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A path segment comes closer to a cone point than its clearance allows.
class clearance_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Improper integral with a nonpositive cone parameter at the endpoint:
// the cone point sits at infinite metric distance.
class divergent_integral_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Numerical differentiation at a point where the map is not locally
// univalent (derivative vanishes).
class non_univalent_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Adaptive refinement or iteration hit its limit before reaching the
// requested tolerance.
class convergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Least-squares fit of a local normal form failed its residual gate.
class fit_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The Frobenius recursion hit h(s+m) = 0 with a nonzero accumulated term
// R_m, so no pure power series with the requested exponent exists.
class resonance_obstruction : public std::runtime_error {
public:
    resonance_obstruction(int index, std::complex<double> obstruction)
        : std::runtime_error("resonance obstruction at term " + std::to_string(index) +
                             ": |R_m| = " + std::to_string(std::abs(obstruction))),
          index_(index),
          obstruction_(obstruction) {}

    int index() const { return index_; }
    std::complex<double> obstruction() const { return obstruction_; }

private:
    int index_;
    std::complex<double> obstruction_;
};

} // namespace flatcone

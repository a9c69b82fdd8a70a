// linalg.hpp — dense complex linear algebra used throughout the engine:
// state vectors, operators, density matrices, Hermitian eigendecomposition,
// Kronecker and outer products.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace siwf {

using cplx = std::complex<double>;
using StateVector = Eigen::VectorXcd;
using Operator = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr cplx I_unit{0.0, 1.0};

// ------------------------------------------------------------------ errors --

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// Carries the size of the violation (e.g. max |m - m^dagger|).
class HermiticityError : public Error {
public:
    HermiticityError(const std::string& what, double violation)
        : Error(what), violation_(violation) {}
    double violation() const noexcept { return violation_; }

private:
    double violation_;
};

class NormError : public Error {
public:
    NormError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// ------------------------------------------------------------- tolerances --

struct Tolerances {
    double hermiticity = 1e-10;
    double trace = 1e-8;
    double psd = 1e-8;
    double ortho = 1e-10;
    double reconstruction = 1e-9;
    double norm = 1e-8;
};

// Truncated Hilbert-space dimension, always >= 1.
class HilbertDim {
public:
    explicit HilbertDim(Eigen::Index d) : d_(d) {
        if (d < 1) throw DimensionError("HilbertDim: dimension must be >= 1");
    }
    Eigen::Index value() const noexcept { return d_; }
    friend bool operator==(HilbertDim, HilbertDim) = default;

private:
    Eigen::Index d_;
};

// ---------------------------------------------------------- density matrix --

struct DensityDiagnostics {
    double hermiticity_residual = 0.0;
    double trace_residual = 0.0;
    double min_eigenvalue = 0.0;
    bool valid = false;
};

// Hermitian, positive semidefinite, unit-trace matrix. Construction through
// `checked` enforces the invariants; `unchecked` is for intermediate integrator
// states that are validated elsewhere.
class DensityMatrix {
public:
    DensityMatrix() = default;

    static DensityMatrix checked(Operator m, const Tolerances& tol = {});
    static DensityMatrix unchecked(Operator m) { return DensityMatrix(std::move(m)); }

    const Operator& matrix() const noexcept { return m_; }
    Eigen::Index dim() const noexcept { return m_.rows(); }
    double trace() const { return m_.trace().real(); }
    double purity() const;
    // Re Tr(rho A)
    double expectation(const Operator& a) const;

    DensityDiagnostics diagnose(const Tolerances& tol = {}) const;

private:
    explicit DensityMatrix(Operator m) : m_(std::move(m)) {}
    Operator m_;
};

// --------------------------------------------------------------- operations --

Operator outer(const StateVector& x, const StateVector& y);

Operator kron(const Operator& a, const Operator& b);

struct HermitianEigen {
    std::vector<double> values;        // descending
    std::vector<StateVector> vectors;  // orthonormal, phase-normalized
};

// Throws HermiticityError when max |m - m^dagger| exceeds tol.hermiticity.
HermitianEigen hermitian_eig(const Operator& m, const Tolerances& tol = {});

double hermiticity_residual(const Operator& m);
double max_abs(const Operator& m);

// Rescales v so that its first component with |c| > 1e-12 is real positive.
StateVector phase_normalized(const StateVector& v);

Operator identity(Eigen::Index d);

}  // namespace siwf

#include "siwf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace siwf {

double hermiticity_residual(const Operator& m) {
    if (m.rows() != m.cols()) throw DimensionError("hermiticity_residual: matrix is not square");
    if (m.size() == 0) return 0.0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double max_abs(const Operator& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

Operator identity(Eigen::Index d) {
    return Operator::Identity(d, d);
}

Operator outer(const StateVector& x, const StateVector& y) {
    if (x.size() != y.size()) {
        std::ostringstream os;
        os << "outer: dimension mismatch (" << x.size() << " vs " << y.size() << ")";
        throw DimensionError(os.str());
    }
    return x * y.adjoint();
}

Operator kron(const Operator& a, const Operator& b) {
    Operator out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

StateVector phase_normalized(const StateVector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-12) {
            const cplx phase = v(i) / std::abs(v(i));
            return v * std::conj(phase);
        }
    }
    return v;
}

namespace {

// Lexicographic "greater" on (re, im) pairs, with a small slack so rounding
// noise does not flip the order.
bool lex_greater(const StateVector& a, const StateVector& b) {
    constexpr double slack = 1e-10;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a(i).real() > b(i).real() + slack) return true;
        if (a(i).real() < b(i).real() - slack) return false;
        if (a(i).imag() > b(i).imag() + slack) return true;
        if (a(i).imag() < b(i).imag() - slack) return false;
    }
    return false;
}

}  // namespace

HermitianEigen hermitian_eig(const Operator& m, const Tolerances& tol) {
    if (m.rows() != m.cols()) throw DimensionError("hermitian_eig: matrix is not square");
    if (m.rows() == 0) throw DimensionError("hermitian_eig: empty matrix");
    const double herm = hermiticity_residual(m);
    if (herm > tol.hermiticity) {
        std::ostringstream os;
        os << "hermitian_eig: input is not Hermitian (max |m - m^dagger| = " << herm << ")";
        throw HermiticityError(os.str(), herm);
    }
    const Operator sym = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Operator> solver(sym);
    if (solver.info() != Eigen::Success) throw Error("hermitian_eig: eigensolver did not converge");

    const auto n = static_cast<std::size_t>(m.rows());
    std::vector<double> vals(n);
    std::vector<StateVector> vecs(n);
    for (std::size_t k = 0; k < n; ++k) {
        vals[k] = solver.eigenvalues()(static_cast<Eigen::Index>(k));
        vecs[k] = phase_normalized(solver.eigenvectors().col(static_cast<Eigen::Index>(k)));
    }

    const double scale = std::max(1.0, max_abs(sym));
    const double tie = 1e-12 * scale;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        if (std::abs(vals[i] - vals[j]) > tie) return vals[i] > vals[j];
        return lex_greater(vecs[i], vecs[j]);
    });

    HermitianEigen out;
    out.values.reserve(n);
    out.vectors.reserve(n);
    for (std::size_t k : order) {
        out.values.push_back(vals[k]);
        out.vectors.push_back(std::move(vecs[k]));
    }
    return out;
}

// ---------------------------------------------------------- DensityMatrix --

DensityMatrix DensityMatrix::checked(Operator m, const Tolerances& tol) {
    DensityMatrix rho(std::move(m));
    const auto diag = rho.diagnose(tol);
    if (!diag.valid) {
        std::ostringstream os;
        os << "DensityMatrix: invalid state (hermiticity residual " << diag.hermiticity_residual
           << ", trace residual " << diag.trace_residual << ", min eigenvalue " << diag.min_eigenvalue
           << ")";
        if (diag.hermiticity_residual > tol.hermiticity)
            throw HermiticityError(os.str(), diag.hermiticity_residual);
        throw NormError(os.str(), diag.trace_residual);
    }
    return rho;
}

double DensityMatrix::purity() const {
    // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return m_.cwiseAbs2().sum();
}

double DensityMatrix::expectation(const Operator& a) const {
    if (a.rows() != m_.rows() || a.cols() != m_.cols())
        throw DimensionError("DensityMatrix::expectation: dimension mismatch");
    // Tr(rho A) = sum_ij rho_ij A_ji
    return (m_.array() * a.transpose().array()).sum().real();
}

DensityDiagnostics DensityMatrix::diagnose(const Tolerances& tol) const {
    DensityDiagnostics d;
    if (m_.rows() == 0 || m_.rows() != m_.cols()) return d;
    d.hermiticity_residual = hermiticity_residual(m_);
    d.trace_residual = std::abs(m_.trace() - 1.0);
    Eigen::SelfAdjointEigenSolver<Operator> solver(0.5 * (m_ + m_.adjoint()), Eigen::EigenvaluesOnly);
    d.min_eigenvalue = solver.eigenvalues()(0);
    d.valid = d.hermiticity_residual <= tol.hermiticity && d.trace_residual <= tol.trace &&
              d.min_eigenvalue >= -tol.psd;
    return d;
}

}  // namespace siwf

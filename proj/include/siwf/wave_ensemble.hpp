// wave_ensemble.hpp — the stack (psi^n) of interacting wave functions whose
// outer-product sum is the conditioned density matrix.

#pragma once

#include "siwf/linalg.hpp"

#include <vector>

namespace siwf {

class WaveEnsemble {
public:
    WaveEnsemble() = default;
    // Columns of `components` are the wave functions psi^n.
    explicit WaveEnsemble(Eigen::MatrixXcd components);
    explicit WaveEnsemble(const std::vector<StateVector>& components);

    Eigen::Index dim() const noexcept { return psi_.rows(); }
    Eigen::Index size() const noexcept { return psi_.cols(); }
    bool empty() const noexcept { return psi_.cols() == 0; }

    const Eigen::MatrixXcd& components() const noexcept { return psi_; }
    StateVector component(Eigen::Index n) const { return psi_.col(n); }

    // sum_n ||psi^n||^2
    double total_norm2() const { return psi_.squaredNorm(); }
    // ||psi^n||^2 per component; these are the time-dependent weights p_n(t).
    std::vector<double> weights() const;
    // Number of components that are not identically zero.
    Eigen::Index n_active() const;

private:
    Eigen::MatrixXcd psi_;
};

}  // namespace siwf

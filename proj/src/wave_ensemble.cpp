#include "siwf/wave_ensemble.hpp"

namespace siwf {

WaveEnsemble::WaveEnsemble(Eigen::MatrixXcd components) : psi_(std::move(components)) {}

WaveEnsemble::WaveEnsemble(const std::vector<StateVector>& components) {
    if (components.empty()) return;
    const Eigen::Index d = components.front().size();
    psi_.resize(d, static_cast<Eigen::Index>(components.size()));
    for (std::size_t n = 0; n < components.size(); ++n) {
        if (components[n].size() != d) throw DimensionError("WaveEnsemble: components differ in dimension");
        psi_.col(static_cast<Eigen::Index>(n)) = components[n];
    }
}

std::vector<double> WaveEnsemble::weights() const {
    std::vector<double> w(static_cast<std::size_t>(size()));
    for (Eigen::Index n = 0; n < size(); ++n) w[static_cast<std::size_t>(n)] = psi_.col(n).squaredNorm();
    return w;
}

Eigen::Index WaveEnsemble::n_active() const {
    Eigen::Index count = 0;
    for (Eigen::Index n = 0; n < size(); ++n)
        if (!psi_.col(n).isZero(0.0)) ++count;
    return count;
}

}  // namespace siwf

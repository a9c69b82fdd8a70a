// Shared helpers for the unit tests.
#pragma once

#include "siwf/ensemble.hpp"
#include "siwf/model.hpp"

#include <complex>
#include <random>

namespace testutil {

using namespace siwf;

inline StateVector e(Eigen::Index d, Eigen::Index i) {
    StateVector v = StateVector::Zero(d);
    v(i) = 1.0;
    return v;
}

inline StateVector random_unit(Eigen::Index d, std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    StateVector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = cplx(n(rng), n(rng));
    return v / v.norm();
}

inline Operator random_operator(Eigen::Index d, std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Operator m(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = cplx(n(rng), n(rng));
    return m;
}

inline Operator random_hermitian(Eigen::Index d, std::mt19937_64& rng) {
    const Operator a = random_operator(d, rng);
    return 0.5 * (a + a.adjoint());
}

inline NoisePath fixed_noise(int m, double dt, std::vector<double> increments) {
    const long n = static_cast<long>(increments.size()) / (m > 0 ? m : 1);
    return NoisePath(0, 0, m, dt, n, std::move(increments));
}

inline RabiParams acceptance_rabi() {
    RabiParams p;
    p.omega1 = 1.0;
    p.omega2 = 1.2;
    p.g = 0.1;
    p.alpha = 0.5;
    p.psi = 0.0;
    p.n_fock = 3;
    return p;
}

// sigma_z-monitored, sigma_x-driven qubit
inline ModelSpec monitored_qubit() { return qubit_model({1.0, 0.0, 1.0, 0.0}); }

inline ModelSpec amplitude_damping(double gamma = 1.0) { return qubit_model({0.0, 0.0, 0.0, gamma}); }

inline InitialDecomposition pure(const StateVector& v) { return {{1.0}, {v}}; }

}  // namespace testutil

// model.hpp — physical models on a truncated Hilbert space: Hamiltonian,
// measurement (Lindblad) channels and the derived drift generator
//     G = -i H - 1/2 sum_l L_l^dagger L_l.

#pragma once

#include "siwf/linalg.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace siwf {

// Builds -i h - 1/2 sum ls[l]^dagger ls[l]. Throws HermiticityError for a
// non-Hermitian h and DimensionError on mismatched sizes.
Operator build_gksl_generator(const Operator& h, const std::vector<Operator>& ls,
                              const Tolerances& tol = {});

// Immutable autonomous model. The drift generator is derived on construction.
class ModelSpec {
public:
    ModelSpec(Operator hamiltonian, std::vector<Operator> lindblads, const Tolerances& tol = {});

    // Bypasses derivation of G; only for building deliberately inconsistent
    // models (negative controls). Dimensions are still checked.
    static ModelSpec with_drift_generator(Operator hamiltonian, std::vector<Operator> lindblads,
                                          Operator drift_generator);

    HilbertDim dim() const noexcept { return dim_; }
    Eigen::Index d() const noexcept { return dim_.value(); }
    const Operator& hamiltonian() const noexcept { return h_; }
    const std::vector<Operator>& lindblads() const noexcept { return ls_; }
    std::size_t n_channels() const noexcept { return ls_.size(); }
    const Operator& drift_generator() const noexcept { return g_; }

    // Named Hermitian operators that presets register for readout
    // (e.g. "sigma_z", "number", "position").
    const std::map<std::string, Operator>& observables() const noexcept { return observables_; }
    ModelSpec& add_observable(const std::string& name, Operator a);

private:
    ModelSpec(HilbertDim dim, Operator h, std::vector<Operator> ls, Operator g);

    HilbertDim dim_;
    Operator h_;
    std::vector<Operator> ls_;
    Operator g_;
    std::map<std::string, Operator> observables_;
};

// ------------------------------------------------------------ diagnostics --

struct ModelReport {
    double dissipativity_residual = 0.0;  // max_x |2 Re<x,Gx> + sum ||L x||^2|
    double hermiticity_residual = 0.0;    // max |H - H^dagger|
    double threshold = 1e-10;
    bool passed = false;
};

// |2 Re<x, G x> + sum_l ||L_l x||^2| for one vector.
double dissipativity_residual(const ModelSpec& m, const StateVector& x);

// Checks the dissipativity identity on every canonical basis vector.
ModelReport validate_model(const ModelSpec& m, double threshold = 1e-10);

// ---------------------------------------------------------- building blocks --

namespace ops {
Operator sigma_x();
Operator sigma_y();
Operator sigma_z();
Operator sigma_minus();  // |e2><e1|; e1 is the excited level
Operator sigma_plus();
Operator annihilation(Eigen::Index n_levels);
Operator creation(Eigen::Index n_levels);
Operator number(Eigen::Index n_levels);
}  // namespace ops

// ------------------------------------------------------------------ presets --

// Driven, monitored qubit:
//   H = omega_z/2 sigma_z + omega_x/2 sigma_x
//   channels: sqrt(kappa) sigma_z (if kappa > 0), sqrt(gamma) sigma_minus (if gamma > 0)
struct QubitParams {
    double omega_x = 0.0;
    double omega_z = 0.0;
    double kappa = 1.0;
    double gamma = 0.0;
};
ModelSpec qubit_model(const QubitParams& p);

// Qubit coupled to a truncated cavity mode, cavity quadrature monitored.
// Space ordering is Fock (x) qubit.
struct RabiParams {
    double omega1 = 1.0;  // qubit frequency, > 0
    double omega2 = 1.0;  // cavity frequency, > 0
    double g = 0.0;       // coupling, >= 0
    double alpha = 1.0;   // measurement rate, > 0
    double psi = 0.0;     // quadrature phase, >= 0
    int n_fock = 2;       // >= 2

    // Throws siwf::Error naming the violated constraint.
    void validate() const;
};
Operator rabi_hamiltonian(const RabiParams& p);
Operator rabi_measurement_operator(const RabiParams& p);
ModelSpec rabi_model(const RabiParams& p);

// Particle in a box [x_min, x_max] with Dirichlet walls, position monitored.
//   H = -alpha_kin D2 + diag(V(x_i)),  L = gamma diag(x_i)
struct BoxParams {
    double alpha_kin = 1.0;
    double gamma = 1.0;
    std::function<double(double)> potential = [](double) { return 0.0; };
    double x_min = 0.0;
    double x_max = 1.0;
    int n_grid = 16;

    void validate() const;
    double spacing() const { return (x_max - x_min) / (n_grid + 1); }
    std::vector<double> grid() const;
};
ModelSpec box_model(const BoxParams& p);

}  // namespace siwf

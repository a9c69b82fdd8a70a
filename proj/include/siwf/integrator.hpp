// integrator.hpp — one-step kernels for the linear and non-linear stochastic
// Schroedinger equations, the interacting wave-function system, the diffusive
// stochastic master equation and the deterministic GKSL equation.
//
// Every stepper is a pure function of (context, state, dW).

#pragma once

#include "siwf/linalg.hpp"
#include "siwf/model.hpp"
#include "siwf/wave_ensemble.hpp"

#include <memory>
#include <span>
#include <string>

namespace siwf {

enum class SchemeId {
    euler_maruyama,
    exponential_em,  // drift flow exp(G dt) applied exactly, remaining terms explicit
};

std::string to_string(SchemeId s);
SchemeId scheme_from_string(const std::string& s);

class StepContext {
public:
    StepContext(ModelSpec model, SchemeId scheme, double dt, bool renormalize, Tolerances tol = {});
    StepContext(std::shared_ptr<const ModelSpec> model, SchemeId scheme, double dt, bool renormalize,
                Tolerances tol = {});

    const ModelSpec& model() const noexcept { return *model_; }
    const std::shared_ptr<const ModelSpec>& model_ptr() const noexcept { return model_; }
    SchemeId scheme() const noexcept { return scheme_; }
    double dt() const noexcept { return dt_; }
    bool renormalize() const noexcept { return renormalize_; }
    const Tolerances& tolerances() const noexcept { return tol_; }

    // exp(G dt); computed once per context, only for exponential_em.
    const Operator& propagator() const noexcept { return propagator_; }

    // Same model and scheme, different renormalization setting.
    StepContext with_renormalize(bool on) const;

private:
    std::shared_ptr<const ModelSpec> model_;
    SchemeId scheme_;
    double dt_;
    bool renormalize_;
    Tolerances tol_;
    Operator propagator_;
};

// Unnormalized linear SSE; the norm carries the change-of-measure weight, so
// this step never renormalizes. Applies column-wise to a stack of vectors.
StateVector step_linear_sse(const StepContext& ctx, const StateVector& phi, std::span<const double> dw);
Eigen::MatrixXcd step_linear_sse(const StepContext& ctx, const Eigen::MatrixXcd& phis,
                                 std::span<const double> dw);

// Non-linear SSE for a pure state; throws NormError on a zero vector.
StateVector step_nonlinear_sse(const StepContext& ctx, const StateVector& phi_hat,
                               std::span<const double> dw);

// Interacting wave functions. The coupling wp_l = sum_n Re<psi^n, L_l psi^n>
// is taken from the pre-step ensemble; renormalization (if on) is one global
// factor for the whole stack.
WaveEnsemble step_siwf(const StepContext& ctx, const WaveEnsemble& ens, std::span<const double> dw);

// Coupling coefficients wp_l of an ensemble.
std::vector<double> ensemble_coupling(const ModelSpec& model, const WaveEnsemble& ens);

// Diffusive stochastic master equation, followed by Hermitization.
DensityMatrix step_belavkin(const StepContext& ctx, const DensityMatrix& rho, std::span<const double> dw);

// Deterministic GKSL equation, one classical RK4 step, followed by Hermitization.
DensityMatrix step_gksl(const StepContext& ctx, const DensityMatrix& rho);

// G rho + rho G^dagger + sum_l L_l rho L_l^dagger
Operator gksl_rhs(const ModelSpec& model, const Operator& rho);

}  // namespace siwf

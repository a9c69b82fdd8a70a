#include "siwf/integrator.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace siwf {

std::string to_string(SchemeId s) {
    switch (s) {
        case SchemeId::euler_maruyama: return "euler_maruyama";
        case SchemeId::exponential_em: return "exponential_em";
    }
    return "unknown";
}

SchemeId scheme_from_string(const std::string& s) {
    if (s == "euler_maruyama") return SchemeId::euler_maruyama;
    if (s == "exponential_em") return SchemeId::exponential_em;
    throw Error("unknown scheme '" + s + "' (expected euler_maruyama or exponential_em)");
}

// ---------------------------------------------------------- StepContext --

StepContext::StepContext(ModelSpec model, SchemeId scheme, double dt, bool renormalize, Tolerances tol)
    : StepContext(std::make_shared<const ModelSpec>(std::move(model)), scheme, dt, renormalize, tol) {}

StepContext::StepContext(std::shared_ptr<const ModelSpec> model, SchemeId scheme, double dt,
                         bool renormalize, Tolerances tol)
    : model_(std::move(model)), scheme_(scheme), dt_(dt), renormalize_(renormalize), tol_(tol) {
    if (!model_) throw Error("StepContext: null model");
    if (!(dt > 0.0)) throw Error("StepContext: dt must be positive");
    if (scheme_ == SchemeId::exponential_em) {
        // Pade approximant with scaling and squaring
        const Operator gdt = model_->drift_generator() * dt_;
        propagator_ = gdt.exp();
    }
}

StepContext StepContext::with_renormalize(bool on) const {
    StepContext copy = *this;
    copy.renormalize_ = on;
    return copy;
}

namespace {

void check_noise(const StepContext& ctx, std::span<const double> dw, const char* who) {
    if (dw.size() != ctx.model().n_channels()) {
        std::ostringstream os;
        os << who << ": expected " << ctx.model().n_channels() << " noise increments, got " << dw.size();
        throw DimensionError(os.str());
    }
}

void check_dim(const StepContext& ctx, Eigen::Index d, const char* who) {
    if (d != ctx.model().d()) {
        std::ostringstream os;
        os << who << ": state dimension " << d << " does not match model dimension " << ctx.model().d();
        throw DimensionError(os.str());
    }
}

// Shared kernel of the non-linear SSE and the interacting system: every column
// is advanced with the same coupling coefficients wp.
Eigen::MatrixXcd advance_coupled(const StepContext& ctx, const Eigen::MatrixXcd& psi,
                                 const std::vector<double>& wp, std::span<const double> dw) {
    const auto& m = ctx.model();
    const double dt = ctx.dt();
    Eigen::MatrixXcd explicit_part = psi;
    for (std::size_t l = 0; l < m.n_channels(); ++l) {
        const Eigen::MatrixXcd lpsi = m.lindblads()[l] * psi;
        explicit_part.noalias() += (wp[l] * dt + dw[l]) * lpsi;
        explicit_part -= (0.5 * wp[l] * wp[l] * dt + wp[l] * dw[l]) * psi;
    }
    if (ctx.scheme() == SchemeId::exponential_em) return ctx.propagator() * explicit_part;
    explicit_part.noalias() += dt * (m.drift_generator() * psi);
    return explicit_part;
}

}  // namespace

// -------------------------------------------------------------- linear --

Eigen::MatrixXcd step_linear_sse(const StepContext& ctx, const Eigen::MatrixXcd& phis,
                                 std::span<const double> dw) {
    check_noise(ctx, dw, "step_linear_sse");
    check_dim(ctx, phis.rows(), "step_linear_sse");
    const auto& m = ctx.model();
    Eigen::MatrixXcd noise_part = phis;
    for (std::size_t l = 0; l < m.n_channels(); ++l) noise_part.noalias() += dw[l] * (m.lindblads()[l] * phis);
    if (ctx.scheme() == SchemeId::exponential_em) return ctx.propagator() * noise_part;
    noise_part.noalias() += ctx.dt() * (m.drift_generator() * phis);
    return noise_part;
}

StateVector step_linear_sse(const StepContext& ctx, const StateVector& phi, std::span<const double> dw) {
    const Eigen::MatrixXcd out = step_linear_sse(ctx, Eigen::MatrixXcd(phi), dw);
    return out.col(0);
}

// ----------------------------------------------------------- non-linear --

StateVector step_nonlinear_sse(const StepContext& ctx, const StateVector& phi_hat,
                               std::span<const double> dw) {
    check_noise(ctx, dw, "step_nonlinear_sse");
    check_dim(ctx, phi_hat.size(), "step_nonlinear_sse");
    const double n2 = phi_hat.squaredNorm();
    if (n2 == 0.0) throw NormError("step_nonlinear_sse: zero-norm state", 1.0);

    const auto& m = ctx.model();
    std::vector<double> mean(m.n_channels());
    for (std::size_t l = 0; l < m.n_channels(); ++l) mean[l] = phi_hat.dot(m.lindblads()[l] * phi_hat).real();

    const Eigen::MatrixXcd next = advance_coupled(ctx, Eigen::MatrixXcd(phi_hat), mean, dw);
    StateVector out = next.col(0);
    if (ctx.renormalize()) {
        const double norm = out.norm();
        if (norm == 0.0) throw NormError("step_nonlinear_sse: state collapsed to zero", 1.0);
        out /= norm;
    }
    return out;
}

// ------------------------------------------------------------------ SIWF --

std::vector<double> ensemble_coupling(const ModelSpec& model, const WaveEnsemble& ens) {
    std::vector<double> wp(model.n_channels());
    const auto& psi = ens.components();
    for (std::size_t l = 0; l < model.n_channels(); ++l) {
        // sum_n Re <psi^n, L psi^n> = Re Tr(Psi^dagger L Psi)
        wp[l] = (psi.conjugate().array() * (model.lindblads()[l] * psi).array()).sum().real();
    }
    return wp;
}

WaveEnsemble step_siwf(const StepContext& ctx, const WaveEnsemble& ens, std::span<const double> dw) {
    check_noise(ctx, dw, "step_siwf");
    if (ens.empty()) throw Error("step_siwf: empty ensemble");
    check_dim(ctx, ens.dim(), "step_siwf");
    if (ctx.renormalize()) {
        const double residual = std::abs(ens.total_norm2() - 1.0);
        if (residual > 10.0 * ctx.tolerances().norm) {
            std::ostringstream os;
            os << "step_siwf: ensemble norm violation " << residual << " exceeds 10 x norm_tol";
            throw NormError(os.str(), residual);
        }
    }
    const auto wp = ensemble_coupling(ctx.model(), ens);
    Eigen::MatrixXcd next = advance_coupled(ctx, ens.components(), wp, dw);
    if (ctx.renormalize()) {
        const double total = next.squaredNorm();
        if (total == 0.0) throw NormError("step_siwf: ensemble collapsed to zero", 1.0);
        next /= std::sqrt(total);
    }
    return WaveEnsemble(std::move(next));
}

// ------------------------------------------------------------- Belavkin --

Operator gksl_rhs(const ModelSpec& model, const Operator& rho) {
    Operator out = model.drift_generator() * rho;
    out.noalias() += rho * model.drift_generator().adjoint();
    for (const auto& l : model.lindblads()) out.noalias() += l * rho * l.adjoint();
    return out;
}

DensityMatrix step_belavkin(const StepContext& ctx, const DensityMatrix& rho, std::span<const double> dw) {
    check_noise(ctx, dw, "step_belavkin");
    check_dim(ctx, rho.dim(), "step_belavkin");
    const auto& m = ctx.model();
    const Operator& r = rho.matrix();
    const double dt = ctx.dt();

    Operator next = r;
    for (std::size_t l = 0; l < m.n_channels(); ++l) {
        const Operator& lop = m.lindblads()[l];
        const Operator lr = lop * r;
        const double twice_mean = 2.0 * lr.trace().real();
        next.noalias() += dt * (lr * lop.adjoint());
        next += dw[l] * (lr + lr.adjoint() - twice_mean * r);
    }
    if (ctx.scheme() == SchemeId::exponential_em) {
        next = ctx.propagator() * next * ctx.propagator().adjoint();
    } else {
        const Operator gr = m.drift_generator() * r;
        next += dt * (gr + gr.adjoint());
    }

    const double tr = next.trace().real();
    if (ctx.renormalize()) {
        if (tr <= 0.0) throw NormError("step_belavkin: non-positive trace", std::abs(tr - 1.0));
        next /= tr;
    } else if (std::abs(tr - 1.0) > 10.0 * ctx.tolerances().trace) {
        std::ostringstream os;
        os << "step_belavkin: trace drifted to " << tr << " with renormalization disabled";
        throw NormError(os.str(), std::abs(tr - 1.0));
    }
    return DensityMatrix::unchecked(0.5 * (next + next.adjoint()));
}

// ----------------------------------------------------------------- GKSL --

DensityMatrix step_gksl(const StepContext& ctx, const DensityMatrix& rho) {
    check_dim(ctx, rho.dim(), "step_gksl");
    const auto& m = ctx.model();
    const double dt = ctx.dt();
    const Operator& r = rho.matrix();
    const Operator k1 = gksl_rhs(m, r);
    const Operator k2 = gksl_rhs(m, r + 0.5 * dt * k1);
    const Operator k3 = gksl_rhs(m, r + 0.5 * dt * k2);
    const Operator k4 = gksl_rhs(m, r + dt * k3);
    const Operator next = r + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return DensityMatrix::unchecked(0.5 * (next + next.adjoint()));
}

}  // namespace siwf

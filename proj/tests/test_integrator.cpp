#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "siwf/ensemble.hpp"
#include "siwf/integrator.hpp"
#include "test_util.hpp"

#include <cmath>
#include <vector>

using namespace siwf;
using testutil::e;

namespace {

std::span<const double> span_of(const std::vector<double>& v) { return {v.data(), v.size()}; }

const ModelSpec sz_monitor(Operator::Zero(2, 2), {ops::sigma_z()});

}  // namespace

// ------------------------------------------------------------ linear SSE --

TEST_CASE("linear SSE: zero generator leaves the state unchanged") {
    const ModelSpec m(Operator::Zero(2, 2), {});
    for (auto scheme : {SchemeId::euler_maruyama, SchemeId::exponential_em}) {
        const StepContext ctx(m, scheme, 0.01, false);
        StateVector phi(2);
        phi << 0.6, cplx(0.0, 0.8);
        CHECK((step_linear_sse(ctx, phi, {}) - phi).norm() == 0.0);
    }
}

TEST_CASE("linear SSE: Schroedinger drift for H = sigma_z") {
    const ModelSpec m(ops::sigma_z(), {});
    const StepContext ctx(m, SchemeId::euler_maruyama, 0.01, false);
    const StateVector out = step_linear_sse(ctx, e(2, 0), {});
    CHECK(std::abs(out(0) - cplx(1.0, -0.01)) < 1e-15);
    CHECK(std::abs(out(1)) == 0.0);
}

TEST_CASE("linear SSE: sigma_z channel, single step by hand") {
    const StepContext ctx(sz_monitor, SchemeId::euler_maruyama, 0.01, false);
    const std::vector<double> dw = {0.1};
    const StateVector out = step_linear_sse(ctx, e(2, 0), span_of(dw));
    CHECK(std::abs(out(0) - cplx(1.095, 0.0)) < 1e-15);
    CHECK(std::abs(out(1)) == 0.0);
}

TEST_CASE("linear SSE: exponential scheme applies exp(G dt) to the explicit part") {
    const ModelSpec m(ops::sigma_x(), {0.5 * ops::sigma_z()});
    const StepContext ctx(m, SchemeId::exponential_em, 0.02, false);
    const std::vector<double> dw = {0.05};
    StateVector phi(2);
    phi << 0.8, 0.6;
    // exp(G dt) with G = -i sigma_x - 1/8 I, by the closed form for Pauli exponentials
    const double dt = 0.02;
    const Operator expg = std::exp(-0.125 * dt) * (std::cos(dt) * identity(2) - I_unit * std::sin(dt) * ops::sigma_x());
    const StateVector expected = expg * (phi + 0.5 * ops::sigma_z() * phi * 0.05);
    CHECK((step_linear_sse(ctx, phi, span_of(dw)) - expected).norm() < 1e-14);
    CHECK((ctx.propagator() - expg).norm() < 1e-14);
}

TEST_CASE("linear SSE: column-wise stack matches per-vector steps and never renormalizes") {
    const ModelSpec m = testutil::monitored_qubit();
    const StepContext ctx(m, SchemeId::euler_maruyama, 0.01, true);
    const std::vector<double> dw = {0.3};
    Eigen::MatrixXcd stack(2, 2);
    stack << 0.6, 0.0, 0.0, 0.8;
    const Eigen::MatrixXcd out = step_linear_sse(ctx, stack, span_of(dw));
    CHECK((out.col(0) - step_linear_sse(ctx, StateVector(stack.col(0)), span_of(dw))).norm() == 0.0);
    CHECK((out.col(1) - step_linear_sse(ctx, StateVector(stack.col(1)), span_of(dw))).norm() == 0.0);
    CHECK(std::abs(out.squaredNorm() - 1.0) > 1e-3);
}

TEST_CASE("steppers reject a noise vector of the wrong length") {
    const StepContext ctx(sz_monitor, SchemeId::euler_maruyama, 0.01, true);
    const std::vector<double> dw = {0.1, 0.2};
    CHECK_THROWS_AS(step_linear_sse(ctx, e(2, 0), span_of(dw)), DimensionError);
    CHECK_THROWS_AS(step_nonlinear_sse(ctx, e(2, 0), span_of(dw)), DimensionError);
    CHECK_THROWS_AS(step_siwf(ctx, WaveEnsemble(std::vector<StateVector>{e(2, 0)}), span_of(dw)), DimensionError);
    CHECK_THROWS_AS(step_belavkin(ctx, DensityMatrix::checked(outer(e(2, 0), e(2, 0))), span_of(dw)), DimensionError);
}

// --------------------------------------------------------- nonlinear SSE --

TEST_CASE("nonlinear SSE: zero generator is a fixed point") {
    const ModelSpec m(Operator::Zero(2, 2), {});
    const StepContext ctx(m, SchemeId::euler_maruyama, 0.01, true);
    StateVector phi(2);
    phi << 0.6, 0.8;
    CHECK((step_nonlinear_sse(ctx, phi, {}) - phi).norm() < 1e-15);
}

TEST_CASE("nonlinear SSE: eigenstate of the measured operator ignores the noise") {
    const StepContext ctx(sz_monitor, SchemeId::euler_maruyama, 0.01, false);
    const std::vector<double> a = {0.7}, b = {-1.3};
    CHECK((step_nonlinear_sse(ctx, e(2, 0), span_of(a)) - step_nonlinear_sse(ctx, e(2, 0), span_of(b))).norm() <
          1e-15);
}

TEST_CASE("nonlinear SSE: single step from (e1 + e2)/sqrt2 against a scalar-arithmetic oracle") {
    // Oracle: m = 0, drift -phi/2, diffusion sigma_z phi dW, evaluated in 30-digit arithmetic.
    const StepContext ctx(sz_monitor, SchemeId::euler_maruyama, 0.01, false);
    StateVector phi(2);
    phi << 1.0, 1.0;
    phi /= std::sqrt(2.0);
    const std::vector<double> dw = {0.1};
    const StateVector out = step_nonlinear_sse(ctx, phi, span_of(dw));
    CHECK(std::abs(out(0) - cplx(0.77428192539926953922, 0.0)) < 1e-15);
    CHECK(std::abs(out(1) - cplx(0.63286056916196003434, 0.0)) < 1e-15);
}

TEST_CASE("nonlinear SSE: renormalization and zero-norm input") {
    const StepContext ctx(sz_monitor, SchemeId::euler_maruyama, 0.01, true);
    StateVector phi(2);
    phi << 1.0, 1.0;
    phi /= std::sqrt(2.0);
    const std::vector<double> dw = {0.1};
    CHECK(step_nonlinear_sse(ctx, phi, span_of(dw)).norm() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(step_nonlinear_sse(ctx, StateVector::Zero(2), span_of(dw)), NormError);
}

// ------------------------------------------------------------------ SIWF --

TEST_CASE("siwf: single component equals the nonlinear SSE") {
    const ModelSpec m = rabi_model(testutil::acceptance_rabi());
    std::mt19937_64 rng(17);
    for (bool renorm : {false, true}) {
        const StepContext ctx(m, SchemeId::euler_maruyama, 1e-3, renorm);
        const StateVector phi = testutil::random_unit(m.d(), rng);
        const std::vector<double> dw = {0.031};
        const WaveEnsemble out = step_siwf(ctx, WaveEnsemble(std::vector<StateVector>{phi}), span_of(dw));
        CHECK((out.component(0) - step_nonlinear_sse(ctx, phi, span_of(dw))).norm() <= 1e-12);
    }
}

TEST_CASE("siwf: coupling cancels for e1/sqrt2, e2/sqrt2 under sigma_z") {
    const StepContext ctx(sz_monitor, SchemeId::euler_maruyama, 0.01, false);
    const WaveEnsemble ens(std::vector<StateVector>{e(2, 0) / std::sqrt(2.0), e(2, 1) / std::sqrt(2.0)});
    CHECK(ensemble_coupling(sz_monitor, ens)[0] == doctest::Approx(0.0));
    const std::vector<double> dw = {0.1};
    const WaveEnsemble out = step_siwf(ctx, ens, span_of(dw));
    // Independent linear-drift steps; values from the 30-digit oracle.
    CHECK(std::abs(out.component(0)(0) - cplx(0.77428192539926953922, 0.0)) < 1e-15);
    CHECK(std::abs(out.component(1)(1) - cplx(0.63286056916196003434, 0.0)) < 1e-15);
    CHECK(std::abs(out.component(0)(1)) == 0.0);
    CHECK(std::abs(out.component(1)(0)) == 0.0);
    CHECK((out.component(0) - step_linear_sse(ctx, ens.component(0), span_of(dw))).norm() < 1e-15);
}

TEST_CASE("siwf: zero components stay exactly zero") {
    const ModelSpec m = rabi_model(testutil::acceptance_rabi());
    const StepContext ctx(m, SchemeId::euler_maruyama, 1e-3, true);
    std::mt19937_64 rng(4);
    WaveEnsemble ens(std::vector<StateVector>{testutil::random_unit(m.d(), rng), StateVector::Zero(m.d())});
    const auto noise = generate_noise(3, 1, 1e-3, 200);
    for (long k = 0; k < 200; ++k) ens = step_siwf(ctx, ens, noise.step(k));
    CHECK(ens.component(1).norm() == 0.0);
    CHECK(ens.n_active() == 1);
}

TEST_CASE("siwf: renormalization is one global factor") {
    const ModelSpec m = testutil::monitored_qubit();
    const StepContext on(m, SchemeId::euler_maruyama, 0.01, true);
    const StepContext off(m, SchemeId::euler_maruyama, 0.01, false);
    const WaveEnsemble ens(std::vector<StateVector>{std::sqrt(0.7) * e(2, 0), std::sqrt(0.3) * e(2, 1)});
    const std::vector<double> dw = {0.2};
    const WaveEnsemble a = step_siwf(on, ens, span_of(dw));
    const WaveEnsemble b = step_siwf(off, ens, span_of(dw));
    CHECK(a.total_norm2() == doctest::Approx(1.0).epsilon(1e-15));
    const double factor = 1.0 / std::sqrt(b.total_norm2());
    CHECK((a.components() - factor * b.components()).norm() < 1e-15);
}

TEST_CASE("siwf: errors on empty ensemble and on norm violations") {
    const StepContext ctx(sz_monitor, SchemeId::euler_maruyama, 0.01, true);
    const std::vector<double> dw = {0.1};
    CHECK_THROWS_AS(step_siwf(ctx, WaveEnsemble{}, span_of(dw)), Error);
    const WaveEnsemble off_norm(std::vector<StateVector>{1.01 * e(2, 0)});
    CHECK_THROWS_AS(step_siwf(ctx, off_norm, span_of(dw)), NormError);
}

TEST_CASE("siwf: renormalization factor stays 1 + O(dt) on the Rabi model with small alpha") {
    RabiParams p = testutil::acceptance_rabi();
    p.alpha = 0.05;
    const ModelSpec m = rabi_model(p);
    const double dt = 1e-3;
    const StepContext off(m, SchemeId::euler_maruyama, dt, false);
    const StepContext on(m, SchemeId::euler_maruyama, dt, true);
    const auto noise = generate_noise(12, 1, dt, 1000);
    WaveEnsemble ens = init_ensemble(decompose_density(DensityMatrix::checked(identity(m.d()) / 6.0)));
    double worst = 0.0;
    for (long k = 0; k < 1000; ++k) {
        worst = std::max(worst, std::abs(1.0 - step_siwf(off, ens, noise.step(k)).total_norm2()));
        ens = step_siwf(on, ens, noise.step(k));
    }
    CHECK(worst <= 50.0 * dt);
}

// -------------------------------------------------------------- Belavkin --

TEST_CASE("belavkin: zero generator leaves rho unchanged") {
    const ModelSpec m(Operator::Zero(2, 2), {});
    const StepContext ctx(m, SchemeId::euler_maruyama, 0.01, true);
    Operator r(2, 2);
    r << 0.6, cplx(0.1, 0.2), cplx(0.1, -0.2), 0.4;
    const auto rho = DensityMatrix::checked(r);
    CHECK(max_abs(step_belavkin(ctx, rho, {}).matrix() - r) < 1e-16);
}

TEST_CASE("belavkin: half identity has zero drift under sigma_z monitoring") {
    const StepContext ctx(sz_monitor, SchemeId::euler_maruyama, 0.01, false);
    const auto rho = DensityMatrix::checked(0.5 * identity(2));
    const std::vector<double> zero = {0.0};
    CHECK(max_abs(step_belavkin(ctx, rho, span_of(zero)).matrix() - rho.matrix()) < 1e-16);
    // Tr(L rho) = 0, so the innovation term is (L rho + rho L) dW = sigma_z dW.
    const std::vector<double> dw = {0.37};
    CHECK(max_abs(step_belavkin(ctx, rho, span_of(dw)).matrix() - (rho.matrix() + 0.37 * ops::sigma_z())) < 1e-16);
}

TEST_CASE("belavkin: eigenstate of L is stationary under noise") {
    const StepContext ctx(sz_monitor, SchemeId::euler_maruyama, 0.01, true);
    const auto rho = DensityMatrix::checked(outer(e(2, 0), e(2, 0)));
    const std::vector<double> dw = {-0.8};
    CHECK(max_abs(step_belavkin(ctx, rho, span_of(dw)).matrix() - rho.matrix()) < 1e-16);
}

TEST_CASE("belavkin: Hermitian output, unit trace with renormalization, trace drift error without") {
    const ModelSpec m = rabi_model(testutil::acceptance_rabi());
    const StepContext on(m, SchemeId::euler_maruyama, 1e-3, true);
    const StepContext off(m, SchemeId::euler_maruyama, 1e-3, false);
    DensityMatrix rho = DensityMatrix::checked(identity(m.d()) / 6.0);
    const auto noise = generate_noise(8, 1, 1e-3, 300);
    for (long k = 0; k < 300; ++k) {
        rho = step_belavkin(on, rho, noise.step(k));
        CHECK(hermiticity_residual(rho.matrix()) == 0.0);
        CHECK(std::abs(rho.trace() - 1.0) < 1e-13);
    }
    const auto drifted = DensityMatrix::unchecked(1.01 * rho.matrix());
    CHECK_THROWS_AS(step_belavkin(off, drifted, noise.step(0)), Error);
}

TEST_CASE("belavkin and SIWF differ in one step by sum_n b_n b_n^dagger (dW^2 - dt)") {
    // Assembling the SIWF step gives rho + (G rho + rho G^dagger) dt + diffusion dW + sum_n b_n b_n^dagger dW^2
    // with b_n = (L - p) psi_n; the master equation carries L rho L^dagger dt instead of the last term.
    const ModelSpec m = rabi_model(testutil::acceptance_rabi());
    std::mt19937_64 rng(21);
    const WaveEnsemble ens(std::vector<StateVector>{std::sqrt(0.6) * testutil::random_unit(m.d(), rng),
                                                    std::sqrt(0.4) * testutil::random_unit(m.d(), rng)});
    const double p = ensemble_coupling(m, ens)[0];
    Operator bb = Operator::Zero(m.d(), m.d());
    for (Eigen::Index n = 0; n < ens.size(); ++n) {
        const StateVector b = m.lindblads()[0] * ens.component(n) - p * ens.component(n);
        bb += outer(b, b);
    }
    double prev = 0.0;
    for (double dt : {1e-2, 5e-3, 2.5e-3, 1.25e-3}) {
        const StepContext ctx(m, SchemeId::euler_maruyama, dt, false);
        const std::vector<double> dw = {0.7 * std::sqrt(dt)};
        const Operator a = assemble_density(step_siwf(ctx, ens, span_of(dw))).matrix();
        const Operator b = step_belavkin(ctx, assemble_density(ens), span_of(dw)).matrix();
        const double rest = max_abs(a - b - (dw[0] * dw[0] - dt) * bb);
        if (prev > 0.0) CHECK(prev / rest > 2.5);  // O(dt^{3/2}) remainder
        prev = rest;
    }
}

// ------------------------------------------------------------------ GKSL --

TEST_CASE("gksl: empty model keeps rho constant") {
    const ModelSpec m(Operator::Zero(2, 2), {});
    const StepContext ctx(m, SchemeId::euler_maruyama, 0.1, true);
    const auto rho = DensityMatrix::checked(0.5 * identity(2));
    CHECK(max_abs(step_gksl(ctx, rho).matrix() - rho.matrix()) == 0.0);
}

TEST_CASE("gksl: amplitude damping decays as e^{-t}") {
    const ModelSpec m = testutil::amplitude_damping(1.0);
    const StepContext ctx(m, SchemeId::euler_maruyama, 1e-2, true);
    DensityMatrix rho = DensityMatrix::checked(outer(e(2, 0), e(2, 0)));
    for (int k = 0; k < 100; ++k) rho = step_gksl(ctx, rho);
    CHECK(std::abs(rho.matrix()(0, 0).real() - std::exp(-1.0)) < 1e-10);
    CHECK(std::abs(rho.trace() - 1.0) < 1e-14);
}

TEST_CASE("gksl: trace preserved over 10^3 steps, rhs traceless") {
    const ModelSpec m = rabi_model(testutil::acceptance_rabi());
    const StepContext ctx(m, SchemeId::euler_maruyama, 1e-3, true);
    std::mt19937_64 rng(6);
    const StateVector v = testutil::random_unit(m.d(), rng);
    DensityMatrix rho = DensityMatrix::checked(outer(v, v));
    for (int k = 0; k < 1000; ++k) {
        CHECK(std::abs(gksl_rhs(m, rho.matrix()).trace()) < 1e-12);
        rho = step_gksl(ctx, rho);
    }
    CHECK(std::abs(rho.trace() - 1.0) < 1e-10);
}

// -------------------------------------------------------- scheme relations --

TEST_CASE("exponential and Euler-Maruyama linear SSE agree to O(dt)") {
    const ModelSpec m = testutil::monitored_qubit();
    const double g_norm = m.drift_generator().operatorNorm();
    std::mt19937_64 rng(9);
    for (double dt : {1e-2, 1e-3}) {
        const StepContext em(m, SchemeId::euler_maruyama, dt, false);
        const StepContext ex(m, SchemeId::exponential_em, dt, false);
        const long n = step_count(1.0, dt);
        const auto noise = generate_noise(77, 1, dt, n);
        StateVector a = testutil::random_unit(2, rng), b = a;
        double worst = 0.0;
        for (long k = 0; k < n; ++k) {
            a = step_linear_sse(em, a, noise.step(k));
            b = step_linear_sse(ex, b, noise.step(k));
            worst = std::max(worst, (a - b).norm());
        }
        CHECK(worst <= 10.0 * g_norm * dt);
    }
}

TEST_CASE("siwf strong convergence: refinement error shrinks by >= 1.3 per halving") {
    const ModelSpec m = testutil::monitored_qubit();
    const InitialDecomposition dec{{0.7, 0.3}, {e(2, 0), e(2, 1)}};
    const double dt = 1e-2;
    const long n = step_count(1.0, dt);
    double coarse_sum = 0.0, fine_sum = 0.0;
    RecordOptions opts;
    opts.save_stride = n;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const NoisePath finest = generate_noise(seed, 1, dt / 4, 4 * n);
        const NoisePath mid = finest.coarsen(2);
        const NoisePath coarse = mid.coarsen(2);
        auto final_state = [&](double h, const NoisePath& noise) {
            const StepContext ctx(m, SchemeId::euler_maruyama, h, true);
            return run_siwf_trajectory(ctx, dec, noise, opts).densities.back().matrix();
        };
        const Operator r1 = final_state(dt, coarse), r2 = final_state(dt / 2, mid), r4 = final_state(dt / 4, finest);
        coarse_sum += max_abs(r1 - r2);
        fine_sum += max_abs(r2 - r4);
    }
    CHECK(coarse_sum / fine_sum >= 1.3);
}

TEST_CASE("scheme names round-trip") {
    CHECK(scheme_from_string("euler_maruyama") == SchemeId::euler_maruyama);
    CHECK(scheme_from_string("exponential_em") == SchemeId::exponential_em);
    CHECK(to_string(SchemeId::exponential_em) == "exponential_em");
    CHECK_THROWS(scheme_from_string("milstein"));
}

TEST_CASE("StepContext rejects non-positive dt") {
    CHECK_THROWS(StepContext(sz_monitor, SchemeId::euler_maruyama, 0.0, true));
    CHECK_THROWS(StepContext(sz_monitor, SchemeId::euler_maruyama, -1e-3, true));
}

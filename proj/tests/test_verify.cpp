#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "siwf/stats.hpp"
#include "siwf/verify.hpp"
#include "test_util.hpp"

#include <cmath>
#include <limits>

using namespace siwf;
using testutil::e;

namespace {

RunSettings quick(double dt = 1e-2, double t_final = 1.0, std::uint64_t seed = 3) {
    RunSettings r;
    r.dt = dt;
    r.t_final = t_final;
    r.seed = seed;
    r.threads = 2;
    return r;
}

Operator diag2(double a, double b) {
    Operator m = Operator::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

}  // namespace

TEST_CASE("CheckReport: passed iff statistic <= threshold") {
    CHECK(CheckReport::make("a", CheckKind::exact, 1.0, 1.0, "").passed);
    CHECK_FALSE(CheckReport::make("a", CheckKind::exact, 1.0 + 1e-15, 1.0, "").passed);
    CHECK_FALSE(CheckReport::make("a", CheckKind::statistical, std::numeric_limits<double>::quiet_NaN(), 1.0, "")
                    .passed);
    CHECK(to_string(CheckKind::exact) == "exact");
    CHECK(to_string(CheckKind::statistical) == "statistical");
}

TEST_CASE("stride_for puts every requested time on the saved grid") {
    CHECK(stride_for({0.25, 0.5, 1.0}, 1e-3) == 250);
    CHECK(stride_for({0.5, 1.0}, 1e-3) == 500);
    CHECK(stride_for({0.3, 1.0}, 1e-2) == 10);
}

TEST_CASE("ks_critical_value at alpha = 0.01") {
    // c(0.01) = sqrt(ln(200) / 2) = 1.627624
    CHECK(ks_critical_value(0.01, 100, 100) == doctest::Approx(1.6276236 * std::sqrt(0.02)).epsilon(1e-6));
    CHECK(ks_statistic({0.1, 0.2, 0.3}, {0.1, 0.2, 0.3}) == 0.0);
    CHECK(ks_statistic({0.0, 0.1}, {1.0, 2.0}) == 1.0);
}

TEST_CASE("check_model: presets pass, perturbed generator fails") {
    CHECK(check_model(testutil::monitored_qubit()).passed);
    CHECK(check_model(rabi_model(testutil::acceptance_rabi())).passed);
    const ModelSpec q = testutil::monitored_qubit();
    const ModelSpec bad =
        ModelSpec::with_drift_generator(q.hamiltonian(), q.lindblads(), q.drift_generator() + 0.01 * identity(2));
    const auto r = check_model(bad);
    CHECK_FALSE(r.passed);
    CHECK(r.statistic == doctest::Approx(0.02).epsilon(1e-10));
}

TEST_CASE("check_norm_conservation on a closed system is at rounding level") {
    const StepContext ctx(ModelSpec(ops::sigma_x(), {}), SchemeId::exponential_em, 1e-2, false);
    const auto rec = run_siwf_trajectory(ctx, testutil::pure(e(2, 0)), generate_noise(1, 0, 1e-2, 100));
    const auto r = check_norm_conservation(rec, true);
    CHECK(r.passed);
    CHECK(r.statistic <= 1e-12);
}

TEST_CASE("check_norm_conservation thresholds follow the renormalization flag") {
    const StepContext ctx(testutil::monitored_qubit(), SchemeId::euler_maruyama, 1e-3, false);
    const auto rec = run_siwf_trajectory(ctx, testutil::pure(e(2, 0)), generate_noise(2, 1, 1e-3, 1000));
    const auto r = check_norm_conservation(rec, false);
    CHECK(r.threshold == doctest::Approx(0.1));
    CHECK(r.statistic > 0.0);
    CHECK(check_norm_conservation(rec, true).threshold == doctest::Approx(1e-8));
}

TEST_CASE("check_records passes on every driver and flags a corrupted record") {
    const ModelSpec m = testutil::monitored_qubit();
    const StepContext ctx(m, SchemeId::euler_maruyama, 1e-3, true);
    auto rec = run_siwf_trajectory(ctx, testutil::pure(e(2, 0)), generate_noise(4, 1, 1e-3, 1000));
    CHECK(check_records(rec, m).passed);
    rec.records[3][0] += 0.05;
    CHECK_FALSE(check_records(rec, m).passed);
}

TEST_CASE("check_gksl_mean: closed system has no statistical error at all") {
    const ModelSpec m(ops::sigma_x(), {});
    RunSettings run = quick();
    run.scheme = SchemeId::exponential_em;
    const auto r = check_gksl_mean(m, testutil::pure(e(2, 0)), 100, {0.5, 1.0}, run);
    CHECK(r.passed);
}

TEST_CASE("check_gksl_mean: amplitude damping passes") {
    const auto r = check_gksl_mean(testutil::amplitude_damping(), testutil::pure(e(2, 0)), 2000, {0.5, 1.0},
                                   quick(1e-3));
    CHECK(r.passed);
}

TEST_CASE("check_gksl_mean: perturbed generator is detected") {
    const ModelSpec m = testutil::amplitude_damping();
    const ModelSpec bad =
        ModelSpec::with_drift_generator(m.hamiltonian(), m.lindblads(), m.drift_generator() + 0.2 * identity(2));
    const auto r = check_gksl_mean(bad, decompose_density(DensityMatrix::checked(diag2(0.5, 0.5))), 1000,
                                   {0.5, 1.0}, quick(1e-3));
    CHECK_FALSE(r.passed);
}

TEST_CASE("check_gksl_mean needs at least 100 trajectories") {
    CHECK_THROWS(check_gksl_mean(testutil::amplitude_damping(), testutil::pure(e(2, 0)), 10, {1.0}, quick()));
}

TEST_CASE("check_siwf_vs_belavkin: eigenstate of a QND measurement agrees exactly") {
    const ModelSpec m(Operator::Zero(2, 2), {ops::sigma_z()});
    const auto r = check_siwf_vs_belavkin(m, testutil::pure(e(2, 0)), 3, quick());
    CHECK(r.passed);
    CHECK(r.statistic <= 1.0 / 1.5);
}

TEST_CASE("check_siwf_vs_belavkin: box model discrepancy shrinks under refinement") {
    BoxParams p;
    p.alpha_kin = 0.05;
    p.x_min = -1.0;
    p.x_max = 1.0;
    p.n_grid = 16;
    p.potential = [](double x) { return 0.5 * x * x; };
    const ModelSpec m = box_model(p);
    const InitialDecomposition dec{{0.5, 0.5}, {e(16, 7), e(16, 8)}};
    const auto r = check_siwf_vs_belavkin(m, dec, 20, quick(1e-3));
    CHECK(r.passed);
}

TEST_CASE("check_martingale: no channels and an exact unitary step keep w = 1") {
    const ModelSpec m(ops::sigma_x(), {});
    RunSettings run = quick();
    run.scheme = SchemeId::exponential_em;
    const auto r = check_martingale(m, testutil::pure(e(2, 0)), 100, {0.5, 1.0}, run);
    CHECK(r.passed);
    CHECK(r.statistic <= 1e-2);
}

TEST_CASE("check_martingale: monitored qubit") {
    const auto r = check_martingale(testutil::monitored_qubit(), testutil::pure(e(2, 0)), 4000, {0.25, 0.5, 1.0},
                                    quick(1e-3));
    CHECK(r.passed);
}

TEST_CASE("check_distribution_match: identical decompositions") {
    const ModelSpec m = testutil::monitored_qubit();
    const auto dec = decompose_density(DensityMatrix::checked(diag2(0.5, 0.5)));
    const auto r =
        check_distribution_match(m, dec, dec, 500, 0.5, resolve_observable(m, "sigma_z"), quick(1e-2));
    CHECK(r.passed);
    CHECK(r.threshold == doctest::Approx(ks_critical_value(0.01, 500, 500)));
}

TEST_CASE("check_distribution_match: different initial states are told apart") {
    const ModelSpec m = testutil::monitored_qubit();
    const auto a = decompose_density(DensityMatrix::checked(diag2(0.95, 0.05)));
    const auto b = decompose_density(DensityMatrix::checked(diag2(0.05, 0.95)));
    const auto r = check_distribution_match(m, a, b, 500, 0.2, resolve_observable(m, "sigma_z"), quick(1e-2));
    CHECK_FALSE(r.passed);
}

TEST_CASE("check_decomposition_invariance: rotated decomposition of I/2") {
    const ModelSpec m = testutil::monitored_qubit();
    const auto rho0 = DensityMatrix::checked(diag2(0.5, 0.5));
    const double s = 1.0 / std::sqrt(2.0);
    StateVector plus(2), minus(2);
    plus << s, s;
    minus << s, -s;
    const auto r = check_decomposition_invariance(m, rho0, decompose_density(rho0), {{0.5, 0.5}, {plus, minus}},
                                                  1000, 0.5, resolve_observable(m, "sigma_z"), quick(1e-2));
    CHECK(r.passed);
}

TEST_CASE("check_decomposition_invariance rejects a non-reconstructing decomposition") {
    const ModelSpec m = testutil::monitored_qubit();
    const auto rho0 = DensityMatrix::checked(diag2(0.5, 0.5));
    CHECK_THROWS_AS(check_decomposition_invariance(m, rho0, decompose_density(rho0), {{0.7, 0.3}, {e(2, 0), e(2, 1)}},
                                                   100, 0.5, resolve_observable(m, "sigma_z"), quick()),
                    NormError);
}

TEST_CASE("check_linear_route_equivalence: closed system gives identical estimates") {
    const ModelSpec m = qubit_model({1.0, 0.0, 0.0, 0.0});
    RunSettings run = quick();
    run.scheme = SchemeId::exponential_em;
    const auto r = check_linear_route_equivalence(m, testutil::pure(e(2, 0)), 50, {0.5, 1.0},
                                                  {resolve_observable(m, "sigma_z")}, run);
    CHECK(r.passed);
    CHECK(r.statistic <= 1e-2);
}

TEST_CASE("check_linear_route_equivalence: monitored qubit") {
    const ModelSpec m = testutil::monitored_qubit();
    const auto r = check_linear_route_equivalence(
        m, decompose_density(DensityMatrix::checked(diag2(0.7, 0.3))), 3000, {0.25, 0.5, 1.0},
        {resolve_observable(m, "sigma_z"), resolve_observable(m, "purity")}, quick(1e-3));
    CHECK(r.passed);
}

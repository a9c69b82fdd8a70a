#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "siwf/model.hpp"
#include "test_util.hpp"

#include <cmath>
#include <string>

using namespace siwf;
using testutil::e;

TEST_CASE("gksl generator: sigma_z Hamiltonian, sigma_x channel") {
    const Operator g = build_gksl_generator(ops::sigma_z(), {ops::sigma_x()});
    const Operator expected = -I_unit * ops::sigma_z() - 0.5 * identity(2);
    CHECK(max_abs(g - expected) < 1e-15);
}

TEST_CASE("gksl generator: empty model is zero") {
    const Operator g = build_gksl_generator(Operator::Zero(2, 2), {});
    CHECK(max_abs(g) == 0.0);
}

TEST_CASE("gksl generator: amplitude damping with gamma = 2") {
    const Operator g = build_gksl_generator(Operator::Zero(2, 2), {std::sqrt(2.0) * ops::sigma_minus()});
    Operator expected = Operator::Zero(2, 2);
    expected(0, 0) = -1.0;
    CHECK(max_abs(g - expected) < 1e-15);
}

TEST_CASE("gksl generator: errors") {
    Operator h = Operator::Zero(2, 2);
    h(0, 1) = 1.0;
    CHECK_THROWS_AS(build_gksl_generator(h, {}), HermiticityError);
    CHECK_THROWS_AS(build_gksl_generator(ops::sigma_z(), {identity(3)}), DimensionError);
}

TEST_CASE("ModelSpec derives G and checks dimensions") {
    const ModelSpec m(ops::sigma_z(), {ops::sigma_x()});
    CHECK(max_abs(m.drift_generator() - build_gksl_generator(ops::sigma_z(), {ops::sigma_x()})) == 0.0);
    CHECK(m.d() == 2);
    CHECK(m.n_channels() == 1);
    CHECK_THROWS_AS(ModelSpec(ops::sigma_z(), {identity(3)}), DimensionError);
}

TEST_CASE("rabi: n_fock = 2, g = 0, psi = 0, alpha = 1 measurement operator") {
    RabiParams p;
    p.omega1 = 1.0;
    p.omega2 = 1.0;
    p.g = 0.0;
    p.alpha = 1.0;
    p.psi = 0.0;
    p.n_fock = 2;
    const Operator l = rabi_measurement_operator(p);
    Operator expected = Operator::Zero(4, 4);
    // (a + a^dagger) on the Fock factor, identity on the qubit.
    expected(0, 2) = expected(2, 0) = 1.0;
    expected(1, 3) = expected(3, 1) = 1.0;
    CHECK(max_abs(l - expected) < 1e-15);
    const ModelSpec m = rabi_model(p);
    CHECK(m.d() == 4);
    REQUIRE(m.n_channels() == 1);
    CHECK(max_abs(m.lindblads()[0] - expected) < 1e-15);
}

TEST_CASE("rabi: qubit term alone, omega1 = 2, omega2 = 0") {
    RabiParams p;
    p.omega1 = 2.0;
    p.omega2 = 0.0;
    p.g = 0.0;
    p.n_fock = 2;
    Operator expected = Operator::Zero(4, 4);
    expected.diagonal() << 1.0, -1.0, 1.0, -1.0;
    CHECK(max_abs(rabi_hamiltonian(p) - expected) < 1e-15);
    // omega2 = 0 is outside the model's parameter domain.
    CHECK_THROWS_AS(rabi_model(p), Error);
}

TEST_CASE("rabi: quadrature phase enters as e^{i psi} a^dagger + e^{-i psi} a") {
    RabiParams p;
    p.alpha = 0.25;
    p.psi = 0.3;
    p.n_fock = 3;
    const Operator a = ops::annihilation(3);
    const Operator expected = kron(std::sqrt(0.25) * (std::exp(I_unit * 0.3) * a.adjoint() +
                                                      std::exp(-I_unit * 0.3) * a),
                                   identity(2));
    CHECK(max_abs(rabi_measurement_operator(p) - expected) < 1e-15);
}

TEST_CASE("rabi: parameter validation names the constraint") {
    RabiParams p;
    p.omega1 = -1.0;
    try {
        rabi_model(p);
        FAIL("expected an error");
    } catch (const Error& err) {
        const std::string what = err.what();
        CHECK(what.find("omega1") != std::string::npos);
        CHECK(what.find("omega1, omega2, alpha > 0") != std::string::npos);
    }
    RabiParams q;
    q.g = -0.1;
    CHECK_THROWS_AS(rabi_model(q), Error);
    RabiParams r;
    r.n_fock = 1;
    CHECK_THROWS_AS(rabi_model(r), Error);
}

TEST_CASE("rabi: Hermitian H and canonical commutator below the truncation level") {
    RabiParams p = testutil::acceptance_rabi();
    p.n_fock = 5;
    const ModelSpec m = rabi_model(p);
    CHECK(hermiticity_residual(m.hamiltonian()) == 0.0);
    const Operator a = ops::annihilation(p.n_fock);
    const Operator comm = a * a.adjoint() - a.adjoint() * a;
    const Eigen::Index k = p.n_fock - 1;
    CHECK(max_abs(comm.topLeftCorner(k, k) - identity(k)) < 1e-14);
    CHECK(std::abs(comm(k, k) - cplx(1.0, 0.0)) > 0.5);  // truncation artifact
}

TEST_CASE("box: three-point Laplacian on [0, 4]") {
    BoxParams p;
    p.alpha_kin = 1.0;
    p.gamma = 2.0;
    p.x_min = 0.0;
    p.x_max = 4.0;
    p.n_grid = 3;
    CHECK(p.spacing() == doctest::Approx(1.0));
    const ModelSpec m = box_model(p);
    Operator h(3, 3);
    h << 2, -1, 0, -1, 2, -1, 0, -1, 2;
    CHECK(max_abs(m.hamiltonian() - h) < 1e-14);
    Operator l = Operator::Zero(3, 3);
    l.diagonal() << 2.0, 4.0, 6.0;
    REQUIRE(m.n_channels() == 1);
    CHECK(max_abs(m.lindblads()[0] - l) < 1e-14);
}

TEST_CASE("box: gamma = 0 gives a zero channel (closed dynamics)") {
    BoxParams p;
    p.gamma = 0.0;
    const ModelSpec m = box_model(p);
    CHECK(max_abs(m.lindblads()[0]) == 0.0);
    CHECK(max_abs(m.drift_generator() + I_unit * m.hamiltonian()) < 1e-15);
}

TEST_CASE("box: real symmetric H, real diagonal L, potential on the grid") {
    BoxParams p;
    p.alpha_kin = 0.05;
    p.x_min = -1.0;
    p.x_max = 1.0;
    p.n_grid = 16;
    p.potential = [](double x) { return 0.5 * x * x; };
    const ModelSpec m = box_model(p);
    CHECK(m.hamiltonian().imag().norm() == 0.0);
    CHECK(max_abs(m.hamiltonian() - m.hamiltonian().transpose()) == 0.0);
    const Operator& l = m.lindblads()[0];
    CHECK(l.imag().norm() == 0.0);
    CHECK(max_abs(l - Operator(l.diagonal().asDiagonal())) == 0.0);
    const auto x = p.grid();
    const double h2 = p.spacing() * p.spacing();
    CHECK(m.hamiltonian()(4, 4).real() == doctest::Approx(2.0 * 0.05 / h2 + 0.5 * x[4] * x[4]));
}

TEST_CASE("box: parameter validation") {
    BoxParams p;
    p.x_min = 1.0;
    p.x_max = 0.0;
    CHECK_THROWS_AS(box_model(p), Error);
    BoxParams q;
    q.n_grid = 2;
    CHECK_THROWS_AS(box_model(q), Error);
}

TEST_CASE("validate_model: built models pass, perturbed generator fails with residual 0.02") {
    CHECK(validate_model(testutil::monitored_qubit()).passed);
    CHECK(validate_model(rabi_model(testutil::acceptance_rabi())).passed);
    CHECK(validate_model(box_model(BoxParams{})).passed);

    const ModelSpec good = testutil::monitored_qubit();
    const ModelSpec bad = ModelSpec::with_drift_generator(good.hamiltonian(), good.lindblads(),
                                                          good.drift_generator() + 0.01 * identity(2));
    const auto report = validate_model(bad);
    CHECK_FALSE(report.passed);
    CHECK(report.dissipativity_residual == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("validate_model: closed system has zero residual") {
    const ModelSpec m(ops::sigma_x(), {});
    const auto r = validate_model(m);
    CHECK(r.passed);
    CHECK(r.dissipativity_residual == 0.0);
}

TEST_CASE("dissipativity identity on random unit vectors for every preset") {
    std::mt19937_64 rng(2024);
    std::vector<ModelSpec> models = {testutil::monitored_qubit(), testutil::amplitude_damping(),
                                     qubit_model({0.3, 0.7, 0.5, 0.2}), rabi_model(testutil::acceptance_rabi())};
    BoxParams b;
    b.potential = [](double x) { return x * x; };
    models.push_back(box_model(b));
    for (const auto& m : models) {
        for (Eigen::Index i = 0; i < m.d(); ++i) CHECK(dissipativity_residual(m, e(m.d(), i)) <= 1e-10);
        for (int k = 0; k < 20; ++k) CHECK(dissipativity_residual(m, testutil::random_unit(m.d(), rng)) <= 1e-10);
    }
}

TEST_CASE("ladder operators and Pauli conventions") {
    const Operator a = ops::annihilation(4);
    for (int n = 1; n < 4; ++n) CHECK(a(n - 1, n).real() == doctest::Approx(std::sqrt(n)));
    CHECK(max_abs(ops::creation(4) - a.adjoint()) == 0.0);
    CHECK(max_abs(ops::number(4) - a.adjoint() * a) < 1e-14);
    Operator pp = Operator::Zero(2, 2);
    pp(0, 0) = 1.0;
    CHECK(max_abs(ops::sigma_plus() * ops::sigma_minus() - pp) == 0.0);
    CHECK(max_abs(ops::sigma_x() * ops::sigma_y() - I_unit * ops::sigma_z()) < 1e-15);
}

TEST_CASE("presets register their readout observables") {
    const ModelSpec q = testutil::monitored_qubit();
    for (const char* name : {"sigma_x", "sigma_y", "sigma_z"}) CHECK(q.observables().count(name) == 1);
    const ModelSpec r = rabi_model(testutil::acceptance_rabi());
    CHECK(r.observables().count("number") == 1);
    CHECK(r.observables().count("sigma_z") == 1);
    const ModelSpec b = box_model(BoxParams{});
    CHECK(b.observables().count("position") == 1);
    CHECK(b.observables().count("momentum") == 1);
}

#include "siwf/model.hpp"

#include <cmath>
#include <sstream>

namespace siwf {

Operator build_gksl_generator(const Operator& h, const std::vector<Operator>& ls,
                              const Tolerances& tol) {
    if (h.rows() != h.cols()) throw DimensionError("build_gksl_generator: Hamiltonian is not square");
    if (h.rows() == 0) throw DimensionError("build_gksl_generator: empty Hamiltonian");
    const double herm = hermiticity_residual(h);
    if (herm > tol.hermiticity) {
        std::ostringstream os;
        os << "build_gksl_generator: Hamiltonian is not Hermitian (residual " << herm << ")";
        throw HermiticityError(os.str(), herm);
    }
    Operator g = -I_unit * h;
    for (std::size_t l = 0; l < ls.size(); ++l) {
        if (ls[l].rows() != h.rows() || ls[l].cols() != h.cols()) {
            std::ostringstream os;
            os << "build_gksl_generator: channel " << l + 1 << " has shape " << ls[l].rows() << "x"
               << ls[l].cols() << ", expected " << h.rows() << "x" << h.cols();
            throw DimensionError(os.str());
        }
        g.noalias() -= 0.5 * ls[l].adjoint() * ls[l];
    }
    return g;
}

ModelSpec::ModelSpec(Operator hamiltonian, std::vector<Operator> lindblads, const Tolerances& tol)
    : dim_(hamiltonian.rows()), h_(std::move(hamiltonian)), ls_(std::move(lindblads)) {
    g_ = build_gksl_generator(h_, ls_, tol);
}

ModelSpec::ModelSpec(HilbertDim dim, Operator h, std::vector<Operator> ls, Operator g)
    : dim_(dim), h_(std::move(h)), ls_(std::move(ls)), g_(std::move(g)) {}

ModelSpec ModelSpec::with_drift_generator(Operator hamiltonian, std::vector<Operator> lindblads,
                                          Operator drift_generator) {
    const auto d = hamiltonian.rows();
    auto square_of = [d](const Operator& m) { return m.rows() == d && m.cols() == d; };
    if (!square_of(hamiltonian) || !square_of(drift_generator))
        throw DimensionError("ModelSpec: operator dimensions disagree");
    for (const auto& l : lindblads)
        if (!square_of(l)) throw DimensionError("ModelSpec: operator dimensions disagree");
    return ModelSpec(HilbertDim(d), std::move(hamiltonian), std::move(lindblads),
                     std::move(drift_generator));
}

ModelSpec& ModelSpec::add_observable(const std::string& name, Operator a) {
    if (a.rows() != d() || a.cols() != d())
        throw DimensionError("ModelSpec: observable '" + name + "' has wrong dimension");
    observables_[name] = std::move(a);
    return *this;
}

double dissipativity_residual(const ModelSpec& m, const StateVector& x) {
    if (x.size() != m.d()) throw DimensionError("dissipativity_residual: dimension mismatch");
    double acc = 2.0 * x.dot(m.drift_generator() * x).real();
    for (const auto& l : m.lindblads()) acc += (l * x).squaredNorm();
    return std::abs(acc);
}

ModelReport validate_model(const ModelSpec& m, double threshold) {
    ModelReport r;
    r.threshold = threshold;
    for (Eigen::Index i = 0; i < m.d(); ++i) {
        r.dissipativity_residual =
            std::max(r.dissipativity_residual, dissipativity_residual(m, StateVector::Unit(m.d(), i)));
    }
    r.hermiticity_residual = hermiticity_residual(m.hamiltonian());
    r.passed = r.dissipativity_residual <= threshold && r.hermiticity_residual <= threshold;
    return r;
}

// ---------------------------------------------------------------- ops --

namespace ops {

Operator sigma_x() {
    Operator m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

Operator sigma_y() {
    Operator m(2, 2);
    m << 0.0, -I_unit, I_unit, 0.0;
    return m;
}

Operator sigma_z() {
    Operator m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

Operator sigma_minus() {
    Operator m = Operator::Zero(2, 2);
    m(1, 0) = 1.0;
    return m;
}

Operator sigma_plus() {
    return sigma_minus().adjoint();
}

Operator annihilation(Eigen::Index n_levels) {
    Operator a = Operator::Zero(n_levels, n_levels);
    for (Eigen::Index n = 1; n < n_levels; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

Operator creation(Eigen::Index n_levels) {
    return annihilation(n_levels).adjoint();
}

Operator number(Eigen::Index n_levels) {
    Operator m = Operator::Zero(n_levels, n_levels);
    for (Eigen::Index n = 0; n < n_levels; ++n) m(n, n) = static_cast<double>(n);
    return m;
}

}  // namespace ops

// -------------------------------------------------------------- presets --

ModelSpec qubit_model(const QubitParams& p) {
    if (p.kappa < 0.0 || p.gamma < 0.0) throw Error("qubit: kappa and gamma must be >= 0");
    const Operator h = 0.5 * p.omega_z * ops::sigma_z() + 0.5 * p.omega_x * ops::sigma_x();
    std::vector<Operator> ls;
    if (p.kappa > 0.0) ls.push_back(std::sqrt(p.kappa) * ops::sigma_z());
    if (p.gamma > 0.0) ls.push_back(std::sqrt(p.gamma) * ops::sigma_minus());
    ModelSpec m(h, std::move(ls));
    m.add_observable("sigma_x", ops::sigma_x());
    m.add_observable("sigma_y", ops::sigma_y());
    m.add_observable("sigma_z", ops::sigma_z());
    m.add_observable("excited_population", 0.5 * (identity(2) + ops::sigma_z()));
    return m;
}

void RabiParams::validate() const {
    auto fail = [](const std::string& what) {
        throw Error("rabi: " + what +
                    " (the model requires omega1, omega2, alpha > 0 and g, psi >= 0)");
    };
    if (!(omega1 > 0.0)) fail("omega1 must be > 0");
    if (!(omega2 > 0.0)) fail("omega2 must be > 0");
    if (!(alpha > 0.0)) fail("alpha must be > 0");
    if (!(g >= 0.0)) fail("g must be >= 0");
    if (!(psi >= 0.0)) fail("psi must be >= 0");
    if (n_fock < 2) throw Error("rabi: n_fock must be >= 2");
}

Operator rabi_hamiltonian(const RabiParams& p) {
    const Eigen::Index n = p.n_fock;
    const Operator a = ops::annihilation(n);
    const Operator ad = ops::creation(n);
    const Operator id_f = identity(n);
    const Operator id_q = identity(2);
    return 0.5 * p.omega1 * kron(id_f, ops::sigma_z()) + p.omega2 * kron(ad * a, id_q) +
           p.g * kron(ad + a, ops::sigma_x());
}

Operator rabi_measurement_operator(const RabiParams& p) {
    const Eigen::Index n = p.n_fock;
    const cplx phase = std::exp(I_unit * p.psi);
    const Operator quad = phase * ops::creation(n) + std::conj(phase) * ops::annihilation(n);
    return std::sqrt(p.alpha) * kron(quad, identity(2));
}

ModelSpec rabi_model(const RabiParams& p) {
    p.validate();
    const Eigen::Index n = p.n_fock;
    ModelSpec m(rabi_hamiltonian(p), {rabi_measurement_operator(p)});
    const Operator id_f = identity(n);
    const cplx phase = std::exp(I_unit * p.psi);
    m.add_observable("sigma_x", kron(id_f, ops::sigma_x()));
    m.add_observable("sigma_y", kron(id_f, ops::sigma_y()));
    m.add_observable("sigma_z", kron(id_f, ops::sigma_z()));
    m.add_observable("number", kron(ops::number(n), identity(2)));
    m.add_observable("quadrature",
                     kron(phase * ops::creation(n) + std::conj(phase) * ops::annihilation(n),
                          identity(2)));
    return m;
}

void BoxParams::validate() const {
    if (!(x_min < x_max)) throw Error("box: x_min must be < x_max");
    if (n_grid < 3) throw Error("box: n_grid must be >= 3");
    if (!potential) throw Error("box: potential is not set");
}

std::vector<double> BoxParams::grid() const {
    std::vector<double> x(static_cast<std::size_t>(n_grid));
    const double h = spacing();
    for (int i = 0; i < n_grid; ++i) x[static_cast<std::size_t>(i)] = x_min + (i + 1) * h;
    return x;
}

ModelSpec box_model(const BoxParams& p) {
    p.validate();
    const Eigen::Index n = p.n_grid;
    const double h = p.spacing();
    const auto x = p.grid();

    Operator d2 = Operator::Zero(n, n);
    Operator momentum = Operator::Zero(n, n);
    Operator position = Operator::Zero(n, n);
    Operator potential = Operator::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double xi = x[static_cast<std::size_t>(i)];
        d2(i, i) = -2.0 / (h * h);
        if (i + 1 < n) {
            d2(i, i + 1) = d2(i + 1, i) = 1.0 / (h * h);
            momentum(i, i + 1) = -I_unit / (2.0 * h);
            momentum(i + 1, i) = I_unit / (2.0 * h);
        }
        position(i, i) = xi;
        potential(i, i) = p.potential(xi);
    }
    ModelSpec m(-p.alpha_kin * d2 + potential, {p.gamma * position});
    m.add_observable("position", position);
    m.add_observable("momentum", momentum);
    m.add_observable("position_squared", position * position);
    return m;
}

}  // namespace siwf

#include "siwf/ensemble.hpp"

#include "siwf/parallel.hpp"
#include "siwf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace siwf {

// ---------------------------------------------------------- decomposition --

void InitialDecomposition::validate() const {
    if (weights.empty()) throw Error("InitialDecomposition: no components");
    if (weights.size() != vectors.size())
        throw DimensionError("InitialDecomposition: weights and vectors differ in length");
    double total = 0.0;
    for (std::size_t n = 0; n < weights.size(); ++n) {
        if (weights[n] < 0.0) throw Error("InitialDecomposition: negative weight");
        total += weights[n];
        if (vectors[n].size() != vectors.front().size())
            throw DimensionError("InitialDecomposition: vectors differ in dimension");
        const double norm_residual = std::abs(vectors[n].norm() - 1.0);
        if (norm_residual > 1e-12) {
            std::ostringstream os;
            os << "InitialDecomposition: vector " << n << " is not normalized (residual " << norm_residual << ")";
            throw NormError(os.str(), norm_residual);
        }
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "InitialDecomposition: weights sum to " << total;
        throw NormError(os.str(), std::abs(total - 1.0));
    }
}

Operator InitialDecomposition::reconstruct() const {
    if (vectors.empty()) throw Error("InitialDecomposition: no components");
    const auto d = vectors.front().size();
    Operator rho = Operator::Zero(d, d);
    for (std::size_t n = 0; n < weights.size(); ++n) rho += weights[n] * outer(vectors[n], vectors[n]);
    return rho;
}

InitialDecomposition decompose_density(const DensityMatrix& rho0, const Tolerances& tol) {
    const auto eig = hermitian_eig(rho0.matrix(), tol);
    InitialDecomposition dec;
    double total = 0.0;
    for (std::size_t k = 0; k < eig.values.size(); ++k) {
        const double p = std::max(0.0, eig.values[k]);
        if (p <= 1e-12) continue;
        dec.weights.push_back(p);
        dec.vectors.push_back(eig.vectors[k]);
        total += p;
    }
    if (dec.weights.empty()) throw Error("decompose_density: density matrix has no positive eigenvalue");
    for (auto& p : dec.weights) p /= total;
    return dec;
}

InitialDecomposition decompose_density(const DensityMatrix& rho0, InitialDecomposition given) {
    given.validate();
    if (given.vectors.front().size() != rho0.dim())
        throw DimensionError("decompose_density: decomposition dimension does not match rho0");
    const double residual = max_abs(given.reconstruct() - rho0.matrix());
    if (residual > 1e-8) {
        std::ostringstream os;
        os << "decompose_density: given decomposition does not reconstruct rho0 (residual " << residual << ")";
        throw NormError(os.str(), residual);
    }
    return given;
}

WaveEnsemble init_ensemble(const InitialDecomposition& dec) {
    std::vector<StateVector> comps;
    comps.reserve(dec.weights.size());
    for (std::size_t n = 0; n < dec.weights.size(); ++n) comps.push_back(std::sqrt(dec.weights[n]) * dec.vectors[n]);
    return WaveEnsemble(comps);
}

DensityMatrix assemble_density(const WaveEnsemble& ens) {
    const auto& psi = ens.components();
    const Operator rho = psi * psi.adjoint();
    return DensityMatrix::unchecked(0.5 * (rho + rho.adjoint()));
}

// ------------------------------------------------------------ observables --

double Observable::evaluate(const DensityMatrix& rho) const {
    return purity ? rho.purity() : rho.expectation(op);
}

Observable resolve_observable(const ModelSpec& model, const std::string& name) {
    if (name == "purity") return Observable{name, Operator{}, true};
    const auto it = model.observables().find(name);
    if (it == model.observables().end()) throw Error("unknown observable '" + name + "' for this model");
    return Observable{name, it->second, false};
}

// ---------------------------------------------------------------- drivers --

long step_count(double t_final, double dt) {
    if (!(dt > 0.0)) throw Error("step_count: dt must be positive");
    const double ratio = t_final / dt;
    return std::max(1L, static_cast<long>(std::ceil(ratio - 1e-9)));
}

namespace {

void check_noise_path(const StepContext& ctx, const NoisePath& noise) {
    if (std::abs(noise.dt() - ctx.dt()) > 1e-12 * ctx.dt())
        throw Error("noise path time step does not match the step context");
    if (static_cast<std::size_t>(noise.n_channels()) < ctx.model().n_channels())
        throw DimensionError("noise path has fewer channels than the model has Lindblad operators");
}

std::span<const double> channel_slice(const NoisePath& noise, long k, std::size_t m) {
    return noise.step(k).subspan(0, m);
}

// 2 Re Tr(L_l rho) for every channel
std::vector<double> record_drift(const ModelSpec& model, const Operator& rho) {
    std::vector<double> f(model.n_channels());
    for (std::size_t l = 0; l < f.size(); ++l)
        f[l] = 2.0 * (model.lindblads()[l].array() * rho.transpose().array()).sum().real();
    return f;
}

// Tracks cumulative W and B and appends saved rows.
class Recorder {
public:
    Recorder(const StepContext& ctx, const RecordOptions& opts, long n_steps, bool stochastic = true)
        : opts_(opts), n_steps_(n_steps), dt_(ctx.dt()), m_(ctx.model().n_channels()),
          stochastic_(stochastic), w_(m_, 0.0), b_(m_, 0.0) {
        if (opts.save_stride < 1) throw Error("save_stride must be >= 1");
        rec_.dt = dt_;
        rec_.save_stride = opts.save_stride;
        for (const auto& o : opts.observables) rec_.observables[o.name];
    }

    bool due(long k) const { return k % opts_.save_stride == 0 || k == n_steps_; }

    // Innovation-driven routes: dB = dW + trapezoid(f).
    void advance_from_innovation(std::span<const double> dw, const std::vector<double>& f_prev,
                                 const std::vector<double>& f_next) {
        for (std::size_t l = 0; l < m_; ++l) {
            w_[l] += dw[l];
            b_[l] += dw[l] + 0.5 * dt_ * (f_prev[l] + f_next[l]);
        }
    }

    // Record-driven route: dW = dB - trapezoid(f).
    void advance_from_record(std::span<const double> db, const std::vector<double>& f_prev,
                             const std::vector<double>& f_next) {
        for (std::size_t l = 0; l < m_; ++l) {
            b_[l] += db[l];
            w_[l] += db[l] - 0.5 * dt_ * (f_prev[l] + f_next[l]);
        }
    }

    void save(long k, const DensityMatrix& rho, const WaveEnsemble* ens) {
        rec_.times.push_back(static_cast<double>(k) * dt_);
        if (stochastic_) {
            rec_.innovations.push_back(w_);
            rec_.records.push_back(b_);
        }
        if (opts_.keep_densities) rec_.densities.push_back(rho);
        if (ens != nullptr && opts_.keep_ensembles) rec_.ensembles.push_back(*ens);
        for (const auto& o : opts_.observables) rec_.observables[o.name].push_back(o.evaluate(rho));
    }

    void save_weight(double w) { rec_.girsanov_weights.push_back(w); }

    TrajectoryRecord take() { return std::move(rec_); }

private:
    const RecordOptions& opts_;
    long n_steps_;
    double dt_;
    std::size_t m_;
    bool stochastic_;
    std::vector<double> w_, b_;
    TrajectoryRecord rec_;
};

template <typename Fn>
auto at_step(long k, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StepFailure&) {
        throw;
    } catch (const std::exception& e) {
        std::ostringstream os;
        os << "step " << k << ": " << e.what();
        throw StepFailure(os.str(), k);
    }
}

}  // namespace

TrajectoryRecord run_siwf_trajectory(const StepContext& ctx, const InitialDecomposition& dec,
                                     const NoisePath& noise, const RecordOptions& opts) {
    dec.validate();
    check_noise_path(ctx, noise);
    const auto& model = ctx.model();
    const std::size_t m = model.n_channels();
    const long n_steps = noise.n_steps();
    Recorder recorder(ctx, opts, n_steps);

    WaveEnsemble ens = init_ensemble(dec);
    if (ens.dim() != model.d()) throw DimensionError("run_siwf_trajectory: state dimension mismatch");
    auto to_drift = [](std::vector<double> wp) {
        for (auto& x : wp) x *= 2.0;
        return wp;
    };
    std::vector<double> f = to_drift(ensemble_coupling(model, ens));
    recorder.save(0, assemble_density(ens), &ens);
    for (long k = 0; k < n_steps; ++k) {
        const auto dw = channel_slice(noise, k, m);
        ens = at_step(k, [&] { return step_siwf(ctx, ens, dw); });
        std::vector<double> f_next = to_drift(ensemble_coupling(model, ens));
        recorder.advance_from_innovation(dw, f, f_next);
        f = std::move(f_next);
        if (recorder.due(k + 1)) recorder.save(k + 1, assemble_density(ens), &ens);
    }
    return recorder.take();
}

TrajectoryRecord run_nonlinear_trajectory(const StepContext& ctx, const StateVector& phi0,
                                          const NoisePath& noise, const RecordOptions& opts) {
    check_noise_path(ctx, noise);
    const auto& model = ctx.model();
    if (phi0.size() != model.d()) throw DimensionError("run_nonlinear_trajectory: state dimension mismatch");
    const std::size_t m = model.n_channels();
    const long n_steps = noise.n_steps();
    Recorder recorder(ctx, opts, n_steps);

    auto density_of = [](const StateVector& v) { return DensityMatrix::unchecked(outer(v, v)); };
    StateVector phi = phi0;
    std::vector<double> f = record_drift(model, outer(phi, phi));
    WaveEnsemble ens(std::vector<StateVector>{phi});
    recorder.save(0, density_of(phi), &ens);
    for (long k = 0; k < n_steps; ++k) {
        const auto dw = channel_slice(noise, k, m);
        phi = at_step(k, [&] { return step_nonlinear_sse(ctx, phi, dw); });
        std::vector<double> f_next = record_drift(model, outer(phi, phi));
        recorder.advance_from_innovation(dw, f, f_next);
        f = std::move(f_next);
        if (recorder.due(k + 1)) {
            ens = WaveEnsemble(std::vector<StateVector>{phi});
            recorder.save(k + 1, density_of(phi), &ens);
        }
    }
    return recorder.take();
}

TrajectoryRecord run_belavkin_trajectory(const StepContext& ctx, const DensityMatrix& rho0,
                                         const NoisePath& noise, const RecordOptions& opts) {
    check_noise_path(ctx, noise);
    const auto& model = ctx.model();
    if (rho0.dim() != model.d()) throw DimensionError("run_belavkin_trajectory: state dimension mismatch");
    const std::size_t m = model.n_channels();
    const long n_steps = noise.n_steps();
    Recorder recorder(ctx, opts, n_steps);

    DensityMatrix rho = rho0;
    std::vector<double> f = record_drift(model, rho.matrix());
    recorder.save(0, rho, nullptr);
    for (long k = 0; k < n_steps; ++k) {
        const auto dw = channel_slice(noise, k, m);
        rho = at_step(k, [&] { return step_belavkin(ctx, rho, dw); });
        std::vector<double> f_next = record_drift(model, rho.matrix());
        recorder.advance_from_innovation(dw, f, f_next);
        f = std::move(f_next);
        if (recorder.due(k + 1)) recorder.save(k + 1, rho, nullptr);
    }
    return recorder.take();
}

TrajectoryRecord run_gksl(const StepContext& ctx, const DensityMatrix& rho0, long n_steps,
                          const RecordOptions& opts) {
    if (rho0.dim() != ctx.model().d()) throw DimensionError("run_gksl: state dimension mismatch");
    Recorder recorder(ctx, opts, n_steps, /*stochastic=*/false);
    DensityMatrix rho = rho0;
    recorder.save(0, rho, nullptr);
    for (long k = 0; k < n_steps; ++k) {
        rho = at_step(k, [&] { return step_gksl(ctx, rho); });
        if (recorder.due(k + 1)) recorder.save(k + 1, rho, nullptr);
    }
    return recorder.take();
}

TrajectoryRecord run_linear_route(const StepContext& ctx, const InitialDecomposition& dec,
                                  const NoisePath& noise, const RecordOptions& opts) {
    dec.validate();
    check_noise_path(ctx, noise);
    const auto& model = ctx.model();
    const std::size_t m = model.n_channels();
    const long n_steps = noise.n_steps();
    Recorder recorder(ctx, opts, n_steps);

    Eigen::MatrixXcd phis = init_ensemble(dec).components();
    if (phis.rows() != model.d()) throw DimensionError("run_linear_route: state dimension mismatch");

    // Normalized ensemble psi^n = phi^n / sqrt(w) and its density.
    auto normalized = [&](long k) {
        const double w = phis.squaredNorm();
        if (!(w >= kExtinctionThreshold)) {
            std::ostringstream os;
            os << "step " << k << ": trajectory numerically extinct (weight " << w << ")";
            throw StepFailure(os.str(), k);
        }
        return std::pair{WaveEnsemble(phis / std::sqrt(w)), w};
    };

    auto [ens, w] = normalized(0);
    DensityMatrix rho = assemble_density(ens);
    std::vector<double> f = record_drift(model, rho.matrix());
    recorder.save(0, rho, &ens);
    recorder.save_weight(w);
    for (long k = 0; k < n_steps; ++k) {
        const auto db = channel_slice(noise, k, m);
        phis = at_step(k, [&] { return step_linear_sse(ctx, phis, db); });
        std::tie(ens, w) = normalized(k + 1);
        rho = assemble_density(ens);
        std::vector<double> f_next = record_drift(model, rho.matrix());
        recorder.advance_from_record(db, f, f_next);
        f = std::move(f_next);
        if (recorder.due(k + 1)) {
            recorder.save(k + 1, rho, &ens);
            recorder.save_weight(w);
        }
    }
    return recorder.take();
}

// ------------------------------------------------------------ Monte Carlo --

std::string to_string(Equation e) {
    switch (e) {
        case Equation::siwf: return "siwf";
        case Equation::nonlinear: return "nonlinear";
        case Equation::linear: return "linear";
        case Equation::belavkin: return "belavkin";
        case Equation::gksl: return "gksl";
    }
    return "unknown";
}

Equation equation_from_string(const std::string& s) {
    if (s == "siwf") return Equation::siwf;
    if (s == "nonlinear") return Equation::nonlinear;
    if (s == "linear") return Equation::linear;
    if (s == "belavkin") return Equation::belavkin;
    if (s == "gksl") return Equation::gksl;
    throw Error("unknown equation '" + s + "' (expected siwf, nonlinear, linear, belavkin or gksl)");
}

TrajectoryRecord run_trajectory(const TrajectorySpec& spec, std::uint64_t index) {
    const long n_steps = step_count(spec.t_final, spec.ctx.dt());
    if (spec.equation == Equation::gksl) {
        return run_gksl(spec.ctx, DensityMatrix::unchecked(spec.dec.reconstruct()), n_steps, spec.opts);
    }
    const int m = static_cast<int>(spec.ctx.model().n_channels());
    const NoisePath noise = generate_noise(spec.seed, index, m, spec.ctx.dt(), n_steps);
    switch (spec.equation) {
        case Equation::siwf: return run_siwf_trajectory(spec.ctx, spec.dec, noise, spec.opts);
        case Equation::nonlinear: {
            if (spec.dec.weights.size() != 1)
                throw Error("the non-linear SSE needs a pure initial state (single component)");
            return run_nonlinear_trajectory(spec.ctx, spec.dec.vectors.front(), noise, spec.opts);
        }
        case Equation::linear: return run_linear_route(spec.ctx, spec.dec, noise, spec.opts);
        case Equation::belavkin:
            return run_belavkin_trajectory(spec.ctx, DensityMatrix::unchecked(spec.dec.reconstruct()), noise,
                                           spec.opts);
        case Equation::gksl: break;
    }
    throw Error("run_trajectory: unsupported equation");
}

namespace {

constexpr std::size_t kBlockSize = 64;

// Runs trajectories in fixed blocks of kBlockSize; each block accumulates in
// index order and blocks merge pairwise, so the result is thread-count free.
template <typename Sample>
WeightedAccumulator reduce_trajectories(const TrajectorySpec& spec, std::size_t n_traj, int threads,
                                        std::size_t width, Sample&& sample, const TrajectoryVisitor& visit = {}) {
    if (n_traj == 0) throw Error("Monte Carlo needs at least one trajectory");
    const std::size_t n_blocks = (n_traj + kBlockSize - 1) / kBlockSize;
    std::vector<WeightedAccumulator> blocks(n_blocks, WeightedAccumulator(width));
    parallel_for(n_blocks, resolve_threads(threads), [&](std::size_t b) {
        const std::size_t end = std::min(n_traj, (b + 1) * kBlockSize);
        for (std::size_t i = b * kBlockSize; i < end; ++i) {
            const TrajectoryRecord rec = run_trajectory(spec, i);
            const double weight = spec.equation == Equation::linear ? rec.girsanov_weights.back() : 1.0;
            blocks[b].add(sample(rec), weight);
            if (visit) visit(i, rec);
        }
    });
    return pairwise_merge(std::move(blocks));
}

std::vector<double> saved_times(const TrajectorySpec& spec) {
    const long n_steps = step_count(spec.t_final, spec.ctx.dt());
    std::vector<double> t;
    for (long k = 0; k <= n_steps; ++k)
        if (k % spec.opts.save_stride == 0 || k == n_steps) t.push_back(static_cast<double>(k) * spec.ctx.dt());
    return t;
}

}  // namespace

MeanSeries monte_carlo_mean(const TrajectorySpec& spec, std::size_t n_traj, int threads) {
    TrajectorySpec local = spec;
    local.opts.keep_densities = true;
    local.opts.keep_ensembles = false;
    local.opts.observables.clear();
    const auto times = saved_times(local);
    const Eigen::Index d = spec.ctx.model().d();
    const std::size_t per_time = static_cast<std::size_t>(2 * d * d);
    const std::size_t width = per_time * times.size();

    const auto acc = reduce_trajectories(local, n_traj, threads, width, [&](const TrajectoryRecord& rec) {
        std::vector<double> x(width);
        std::size_t pos = 0;
        for (const auto& rho : rec.densities)
            for (Eigen::Index j = 0; j < d; ++j)
                for (Eigen::Index i = 0; i < d; ++i) {
                    x[pos++] = rho.matrix()(i, j).real();
                    x[pos++] = rho.matrix()(i, j).imag();
                }
        return x;
    });

    const auto mean = acc.mean();
    const auto se = acc.standard_error();
    MeanSeries out;
    out.times = times;
    out.n_traj = n_traj;
    std::size_t pos = 0;
    for (std::size_t t = 0; t < times.size(); ++t) {
        Operator m(d, d);
        RealMatrix sr(d, d), si(d, d);
        for (Eigen::Index j = 0; j < d; ++j)
            for (Eigen::Index i = 0; i < d; ++i) {
                m(i, j) = cplx(mean[pos], mean[pos + 1]);
                sr(i, j) = se[pos];
                si(i, j) = se[pos + 1];
                pos += 2;
            }
        out.mean.push_back(std::move(m));
        out.se_re.push_back(std::move(sr));
        out.se_im.push_back(std::move(si));
    }
    return out;
}

ObservableSeries monte_carlo_observables(const TrajectorySpec& spec, std::size_t n_traj, int threads,
                                         const TrajectoryVisitor& visit) {
    TrajectorySpec local = spec;
    if (!visit) {
        local.opts.keep_densities = false;
        local.opts.keep_ensembles = false;
    }
    const auto times = saved_times(local);
    const std::size_t n_obs = local.opts.observables.size();
    const std::size_t width = n_obs * times.size();

    const auto acc = reduce_trajectories(local, n_traj, threads, width, [&](const TrajectoryRecord& rec) {
        std::vector<double> x;
        x.reserve(width);
        for (const auto& o : local.opts.observables) {
            const auto& series = rec.observables.at(o.name);
            x.insert(x.end(), series.begin(), series.end());
        }
        return x;
    }, visit);

    const auto mean = acc.mean();
    const auto se = acc.standard_error();
    ObservableSeries out;
    out.times = times;
    out.n_traj = n_traj;
    for (std::size_t o = 0; o < n_obs; ++o) {
        out.names.push_back(local.opts.observables[o].name);
        const auto first = static_cast<std::ptrdiff_t>(o * times.size());
        const auto last = first + static_cast<std::ptrdiff_t>(times.size());
        out.mean.emplace_back(mean.begin() + first, mean.begin() + last);
        out.se.emplace_back(se.begin() + first, se.begin() + last);
    }
    return out;
}

std::vector<double> sample_observable(const TrajectorySpec& spec, std::size_t n_traj, const Observable& obs,
                                      double t, int threads) {
    TrajectorySpec local = spec;
    local.opts.keep_densities = false;
    local.opts.keep_ensembles = false;
    local.opts.observables = {obs};
    const auto times = saved_times(local);
    const auto nearest = static_cast<std::size_t>(
        std::min_element(times.begin(), times.end(),
                         [t](double a, double b) { return std::abs(a - t) < std::abs(b - t); }) -
        times.begin());
    std::vector<double> out(n_traj);
    parallel_for(n_traj, resolve_threads(threads), [&](std::size_t i) {
        out[i] = run_trajectory(local, i).observables.at(obs.name)[nearest];
    });
    return out;
}

std::vector<std::vector<double>> sample_weights(const TrajectorySpec& spec, std::size_t n_traj, int threads) {
    if (spec.equation != Equation::linear) throw Error("sample_weights: only the linear route carries weights");
    TrajectorySpec local = spec;
    local.opts.keep_densities = false;
    local.opts.keep_ensembles = false;
    local.opts.observables.clear();
    std::vector<std::vector<double>> out(n_traj);
    parallel_for(n_traj, resolve_threads(threads),
                 [&](std::size_t i) { out[i] = run_trajectory(local, i).girsanov_weights; });
    return out;
}

// ------------------------------------------------------------ consistency --

RecordConsistency check_record_consistency(const TrajectoryRecord& rec, const ModelSpec& model) {
    RecordConsistency out;
    const std::size_t m = model.n_channels();
    if (m == 0 || rec.times.empty() || rec.records.empty()) {
        out.passed = true;
        return out;
    }
    if (rec.densities.size() != rec.times.size())
        throw Error("check_record_consistency: record does not carry densities at every saved time");

    std::vector<std::vector<double>> f;
    f.reserve(rec.times.size());
    double max_tr = 0.0;
    for (const auto& rho : rec.densities) {
        f.push_back(record_drift(model, rho.matrix()));
        for (double v : f.back()) max_tr = std::max(max_tr, 0.5 * std::abs(v));
    }
    double spacing = rec.dt;
    for (std::size_t j = 1; j < rec.times.size(); ++j) spacing = std::max(spacing, rec.times[j] - rec.times[j - 1]);

    std::vector<double> quad(m, 0.0);
    double max_abs_b = 0.0;
    for (std::size_t j = 0; j < rec.times.size(); ++j) {
        if (j > 0) {
            const double h = rec.times[j] - rec.times[j - 1];
            for (std::size_t l = 0; l < m; ++l) quad[l] += 0.5 * h * (f[j - 1][l] + f[j][l]);
        }
        for (std::size_t l = 0; l < m; ++l) {
            const double residual = std::abs(rec.records[j][l] - rec.innovations[j][l] - quad[l]);
            out.max_residual = std::max(out.max_residual, residual);
            max_abs_b = std::max(max_abs_b, std::abs(rec.records[j][l]));
        }
    }
    out.tolerance = 10.0 * spacing * max_tr;
    // floating-point floor for the cumulative sums
    out.passed = out.max_residual <= out.tolerance + 1e-12 * (1.0 + max_abs_b);
    return out;
}

}  // namespace siwf

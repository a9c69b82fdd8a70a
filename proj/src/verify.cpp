#include "siwf/verify.hpp"

#include "siwf/parallel.hpp"
#include "siwf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace siwf {

std::string to_string(CheckKind k) {
    return k == CheckKind::exact ? "exact" : "statistical";
}

CheckReport CheckReport::make(std::string name, CheckKind kind, double statistic, double threshold,
                              std::string details) {
    CheckReport r;
    r.name = std::move(name);
    r.kind = kind;
    r.statistic = statistic;
    r.threshold = threshold;
    r.passed = statistic <= threshold;
    r.details = std::move(details);
    return r;
}

long stride_for(const std::vector<double>& t_grid, double dt) {
    long stride = 0;
    for (double t : t_grid) {
        const long k = std::lround(t / dt);
        if (k > 0) stride = std::gcd(stride, k);
    }
    return stride > 0 ? stride : 1;
}

namespace {

constexpr double kRoundingFloor = 1e-12;

std::size_t nearest_index(const std::vector<double>& times, double t) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < times.size(); ++i)
        if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
    return best;
}

// Deviation in units of `scale`; a zero scale (no statistical spread, as in
// closed systems) is floored at rounding level.
double scaled(double diff, double scale) {
    if (diff == 0.0) return 0.0;
    return diff / std::max(scale, kRoundingFloor);
}

TrajectorySpec make_spec(const ModelSpec& model, const InitialDecomposition& dec, Equation eq,
                         const RunSettings& run, std::uint64_t seed, long stride) {
    TrajectorySpec spec{StepContext(model, run.scheme, run.dt, run.renormalize, run.tol), eq, dec, run.t_final,
                        seed, RecordOptions{}};
    spec.opts.save_stride = stride;
    return spec;
}

}  // namespace

CheckReport check_norm_conservation(const TrajectoryRecord& record, bool renormalized) {
    if (record.times.empty()) throw Error("check_norm_conservation: empty record");
    double worst = 0.0;
    if (!record.ensembles.empty()) {
        for (const auto& e : record.ensembles) worst = std::max(worst, std::abs(e.total_norm2() - 1.0));
    } else {
        for (const auto& rho : record.densities) worst = std::max(worst, std::abs(rho.trace() - 1.0));
    }
    const double threshold = renormalized ? 1e-8 : 100.0 * record.dt;
    std::ostringstream os;
    os << "max_t |sum ||psi||^2 - 1| over " << record.times.size() << " saved times"
       << (renormalized ? " (renormalized)" : " (no renormalization)");
    return CheckReport::make("norm_conservation", CheckKind::exact, worst, threshold, os.str());
}

CheckReport check_model(const ModelSpec& model) {
    const auto r = validate_model(model);
    std::ostringstream os;
    os << "dissipativity residual " << r.dissipativity_residual << ", Hamiltonian hermiticity residual "
       << r.hermiticity_residual;
    return CheckReport::make("model_dissipativity", CheckKind::exact,
                             std::max(r.dissipativity_residual, r.hermiticity_residual), r.threshold, os.str());
}

CheckReport check_records(const TrajectoryRecord& record, const ModelSpec& model) {
    const auto c = check_record_consistency(record, model);
    std::ostringstream os;
    os << "max |B - W - int 2 Re Tr(L rho) ds| = " << c.max_residual << ", tolerance " << c.tolerance;
    // the consistency verdict includes a rounding floor on top of the tolerance
    const double threshold = c.passed ? std::max(c.max_residual, c.tolerance) : c.tolerance;
    return CheckReport::make("record_consistency", CheckKind::exact, c.max_residual, threshold, os.str());
}

CheckReport check_gksl_mean(const ModelSpec& model, const InitialDecomposition& dec, std::size_t n_traj,
                            const std::vector<double>& t_grid, const RunSettings& run) {
    if (n_traj < 100) throw Error("check_gksl_mean: needs at least 100 trajectories");
    const long stride = stride_for(t_grid, run.dt);
    const auto spec = make_spec(model, dec, Equation::siwf, run, run.seed, stride);
    const MeanSeries mc = monte_carlo_mean(spec, n_traj, run.threads);

    // GKSL oracle at dt and dt/2; the difference estimates the RK4 error.
    const DensityMatrix rho0 = DensityMatrix::unchecked(dec.reconstruct());
    const long n_steps = step_count(run.t_final, run.dt);
    RecordOptions opts;
    opts.save_stride = stride;
    const auto coarse = run_gksl(StepContext(model, run.scheme, run.dt, true, run.tol), rho0, n_steps, opts);
    opts.save_stride = 2 * stride;
    const auto fine = run_gksl(StepContext(model, run.scheme, run.dt / 2, true, run.tol), rho0, 2 * n_steps, opts);

    double worst = 0.0;
    std::ostringstream os;
    for (double t : t_grid) {
        const std::size_t i = nearest_index(mc.times, t);
        const Operator& oracle = fine.densities[nearest_index(fine.times, t)].matrix();
        const double rk4_tol =
            max_abs(coarse.densities[nearest_index(coarse.times, t)].matrix() - oracle) * 16.0 / 15.0;
        double worst_t = 0.0, worst_diff = 0.0, worst_se = 0.0;
        Eigen::Index worst_r = 0, worst_c = 0;
        auto consider = [&](double diff, double se, Eigen::Index r, Eigen::Index c) {
            const double v = scaled(diff, 3.0 * se + rk4_tol);
            if (v > worst_t) {
                worst_t = v;
                worst_diff = diff;
                worst_se = se;
                worst_r = r;
                worst_c = c;
            }
        };
        for (Eigen::Index r = 0; r < oracle.rows(); ++r)
            for (Eigen::Index c = 0; c < oracle.cols(); ++c) {
                const cplx diff = mc.mean[i](r, c) - oracle(r, c);
                consider(std::abs(diff.real()), mc.se_re[i](r, c), r, c);
                consider(std::abs(diff.imag()), mc.se_im[i](r, c), r, c);
            }
        os << "t=" << mc.times[i] << ": max scaled deviation " << worst_t << " at (" << worst_r << "," << worst_c
           << "), |diff| " << worst_diff << ", SE " << worst_se << " (rk4_tol " << rk4_tol << "); ";
        worst = std::max(worst, worst_t);
    }
    os << n_traj << " trajectories";
    return CheckReport::make("gksl_mean", CheckKind::statistical, worst, 1.0, os.str());
}

CheckReport check_siwf_vs_belavkin(const ModelSpec& model, const InitialDecomposition& dec, std::size_t n_paths,
                                   const RunSettings& run) {
    if (n_paths == 0) throw Error("check_siwf_vs_belavkin: needs at least one noise path");
    const long n_coarse = step_count(run.t_final, run.dt);
    const int m = static_cast<int>(model.n_channels());
    const DensityMatrix rho0 = DensityMatrix::unchecked(dec.reconstruct());
    const auto shared = std::make_shared<const ModelSpec>(model);
    const StepContext coarse_ctx(shared, run.scheme, run.dt, run.renormalize, run.tol);
    const StepContext fine_ctx(shared, run.scheme, run.dt / 2, run.renormalize, run.tol);

    RecordOptions opts;
    opts.keep_ensembles = false;
    opts.save_stride = 1;

    struct Discrepancy {
        double coarse_final = 0.0, fine_final = 0.0, coarse_max = 0.0, fine_max = 0.0;
    };
    auto discrepancy = [&](const StepContext& ctx, const NoisePath& noise, double& final_out, double& max_out) {
        const auto a = run_siwf_trajectory(ctx, dec, noise, opts);
        const auto b = run_belavkin_trajectory(ctx, rho0, noise, opts);
        max_out = 0.0;
        for (std::size_t i = 0; i < a.densities.size(); ++i)
            max_out = std::max(max_out, max_abs(a.densities[i].matrix() - b.densities[i].matrix()));
        final_out = max_abs(a.densities.back().matrix() - b.densities.back().matrix());
    };

    std::vector<Discrepancy> per_path(n_paths);
    parallel_for(n_paths, resolve_threads(run.threads), [&](std::size_t p) {
        const NoisePath fine = generate_noise(run.seed, p, m, run.dt / 2, 2 * n_coarse);
        const NoisePath coarse = fine.coarsen(2);
        auto& d = per_path[p];
        discrepancy(coarse_ctx, coarse, d.coarse_final, d.coarse_max);
        discrepancy(fine_ctx, fine, d.fine_final, d.fine_max);
    });

    Discrepancy mean;
    for (const auto& d : per_path) {
        mean.coarse_final += d.coarse_final / static_cast<double>(n_paths);
        mean.fine_final += d.fine_final / static_cast<double>(n_paths);
        mean.coarse_max += d.coarse_max / static_cast<double>(n_paths);
        mean.fine_max += d.fine_max / static_cast<double>(n_paths);
    }
    const double ratio_stat = mean.coarse_final == 0.0 ? 0.0 : mean.fine_final / mean.coarse_final;
    std::ostringstream os;
    os << "discrepancy at T (mean over " << n_paths << " paths): dt=" << run.dt << " -> " << mean.coarse_final
       << ", dt/2 -> " << mean.fine_final << " (shrink factor "
       << (mean.fine_final == 0.0 ? std::numeric_limits<double>::infinity() : mean.coarse_final / mean.fine_final)
       << "); max over t: " << mean.coarse_max << " -> " << mean.fine_max;
    return CheckReport::make("siwf_vs_belavkin", CheckKind::exact, ratio_stat, 1.0 / 1.5, os.str());
}

CheckReport check_martingale(const ModelSpec& model, const InitialDecomposition& dec, std::size_t n_traj,
                             const std::vector<double>& t_grid, const RunSettings& run) {
    const long stride = stride_for(t_grid, run.dt);
    const auto spec = make_spec(model, dec, Equation::linear, run, run.seed, stride);
    const auto paths = sample_weights(spec, n_traj, run.threads);

    std::vector<double> times;
    for (std::size_t k = 0; k < paths.front().size(); ++k)
        times.push_back(std::min(static_cast<double>(k * static_cast<std::size_t>(stride)) * run.dt,
                                 static_cast<double>(step_count(run.t_final, run.dt)) * run.dt));

    double worst = 0.0;
    std::ostringstream os;
    for (double t : t_grid) {
        const std::size_t i = nearest_index(times, t);
        WeightedAccumulator acc(1);
        for (const auto& p : paths) acc.add({p[i]});
        const double mean = acc.mean()[0];
        const double se = acc.standard_error()[0];
        const double stat = scaled(std::abs(mean - 1.0), 3.0 * se);
        os << "t=" << times[i] << ": mean w = " << mean << " (SE " << se << "); ";
        worst = std::max(worst, stat);
    }
    os << n_traj << " paths";
    return CheckReport::make("martingale", CheckKind::statistical, worst, 1.0, os.str());
}

CheckReport check_distribution_match(const ModelSpec& model, const InitialDecomposition& dec_a,
                                     const InitialDecomposition& dec_b, std::size_t n_traj, double t,
                                     const Observable& readout, const RunSettings& run) {
    const long stride = stride_for({t}, run.dt);
    const auto a = sample_observable(make_spec(model, dec_a, Equation::siwf, run, derive_seed(run.seed, 1), stride),
                                     n_traj, readout, t, run.threads);
    const auto b = sample_observable(make_spec(model, dec_b, Equation::siwf, run, derive_seed(run.seed, 2), stride),
                                     n_traj, readout, t, run.threads);
    const double ks = ks_statistic(a, b);
    const double crit = ks_critical_value(0.01, a.size(), b.size());
    std::ostringstream os;
    os << "two-sample KS on " << readout.name << " at t=" << t << ", " << n_traj << " samples each";
    return CheckReport::make("decomposition_invariance", CheckKind::statistical, ks, crit, os.str());
}

CheckReport check_decomposition_invariance(const ModelSpec& model, const DensityMatrix& rho0,
                                           const InitialDecomposition& dec_a, const InitialDecomposition& dec_b,
                                           std::size_t n_traj, double t, const Observable& readout,
                                           const RunSettings& run) {
    const auto a = decompose_density(rho0, dec_a);
    const auto b = decompose_density(rho0, dec_b);
    return check_distribution_match(model, a, b, n_traj, t, readout, run);
}

CheckReport check_linear_route_equivalence(const ModelSpec& model, const InitialDecomposition& dec,
                                           std::size_t n_traj, const std::vector<double>& t_grid,
                                           const std::vector<Observable>& readouts, const RunSettings& run) {
    const long stride = stride_for(t_grid, run.dt);
    auto direct_spec = make_spec(model, dec, Equation::siwf, run, derive_seed(run.seed, 1), stride);
    auto linear_spec = make_spec(model, dec, Equation::linear, run, derive_seed(run.seed, 2), stride);
    direct_spec.opts.observables = readouts;
    linear_spec.opts.observables = readouts;
    const auto direct = monte_carlo_observables(direct_spec, n_traj, run.threads);
    const auto weighted = monte_carlo_observables(linear_spec, n_traj, run.threads);

    double worst = 0.0;
    std::ostringstream os;
    for (std::size_t o = 0; o < readouts.size(); ++o) {
        for (double t : t_grid) {
            const std::size_t i = nearest_index(direct.times, t);
            const double diff = std::abs(direct.mean[o][i] - weighted.mean[o][i]);
            const double se = std::hypot(direct.se[o][i], weighted.se[o][i]);
            const double stat = scaled(diff, 4.0 * se);
            os << readouts[o].name << "@t=" << direct.times[i] << ": " << direct.mean[o][i] << " vs "
               << weighted.mean[o][i] << " (combined SE " << se << "); ";
            worst = std::max(worst, stat);
        }
    }
    os << n_traj << " paths per route";
    return CheckReport::make("linear_route_equivalence", CheckKind::statistical, worst, 1.0, os.str());
}

}  // namespace siwf

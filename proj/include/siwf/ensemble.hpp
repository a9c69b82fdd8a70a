// ensemble.hpp — mixed-state machinery: decomposition of the initial density
// matrix, trajectory drivers for every equation, the change-of-measure
// (linear) route and Monte Carlo averaging.

#pragma once

#include "siwf/integrator.hpp"
#include "siwf/linalg.hpp"
#include "siwf/model.hpp"
#include "siwf/noise.hpp"
#include "siwf/wave_ensemble.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace siwf {

// rho0 = sum_n weights[n] |vectors[n]><vectors[n]|
struct InitialDecomposition {
    std::vector<double> weights;
    std::vector<StateVector> vectors;

    // Throws unless weights are >= 0 and sum to 1 and vectors are unit (1e-12).
    void validate() const;
    Operator reconstruct() const;
};

// Eigen mode: eigenvalues clipped at 0, renormalized, zero-weight tail dropped.
InitialDecomposition decompose_density(const DensityMatrix& rho0, const Tolerances& tol = {});

// Given mode: accepts the decomposition if it reconstructs rho0 within 1e-8.
InitialDecomposition decompose_density(const DensityMatrix& rho0, InitialDecomposition given);

// psi^n_0 = sqrt(p_n) phi^n_0
WaveEnsemble init_ensemble(const InitialDecomposition& dec);

// rho = sum_n |psi^n><psi^n|
DensityMatrix assemble_density(const WaveEnsemble& ens);

// ------------------------------------------------------------ observables --

// Readout Re Tr(rho A); `purity` evaluates Tr(rho^2) instead.
struct Observable {
    std::string name;
    Operator op;
    bool purity = false;

    double evaluate(const DensityMatrix& rho) const;
};

// Resolves a name from the model registry; "purity" is always available.
Observable resolve_observable(const ModelSpec& model, const std::string& name);

// ---------------------------------------------------------------- records --

struct RecordOptions {
    long save_stride = 1;
    bool keep_ensembles = true;
    bool keep_densities = true;
    std::vector<Observable> observables;
};

struct TrajectoryRecord {
    double dt = 0.0;
    long save_stride = 1;
    std::vector<double> times;
    std::vector<WaveEnsemble> ensembles;             // per saved time (wave-function routes)
    std::vector<DensityMatrix> densities;            // per saved time
    std::vector<std::vector<double>> innovations;    // W^l per saved time
    std::vector<std::vector<double>> records;        // B^l per saved time
    std::vector<double> girsanov_weights;            // linear route only
    std::map<std::string, std::vector<double>> observables;

    std::size_t n_saved() const noexcept { return times.size(); }
};

// Thrown when a stepper fails inside a driver; carries the step index.
class StepFailure : public Error {
public:
    StepFailure(const std::string& what, long step) : Error(what), step_(step) {}
    long step() const noexcept { return step_; }

private:
    long step_;
};

// Number of steps covering [0, t_final]; at least one.
long step_count(double t_final, double dt);

TrajectoryRecord run_siwf_trajectory(const StepContext& ctx, const InitialDecomposition& dec,
                                     const NoisePath& noise, const RecordOptions& opts = {});

TrajectoryRecord run_nonlinear_trajectory(const StepContext& ctx, const StateVector& phi0,
                                          const NoisePath& noise, const RecordOptions& opts = {});

TrajectoryRecord run_belavkin_trajectory(const StepContext& ctx, const DensityMatrix& rho0,
                                         const NoisePath& noise, const RecordOptions& opts = {});

TrajectoryRecord run_gksl(const StepContext& ctx, const DensityMatrix& rho0, long n_steps,
                          const RecordOptions& opts = {});

// Integrates the unnormalized linear SSE for every sqrt(p_n) phi^n_0 with the
// noise interpreted as the measurement record B. Emits the normalized state,
// the weight w_t = sum_k ||phi^k_t||^2 and the innovations W = B - int 2 Re Tr(L rho) ds.
// Throws StepFailure when w_t drops below 1e-12.
TrajectoryRecord run_linear_route(const StepContext& ctx, const InitialDecomposition& dec,
                                  const NoisePath& noise, const RecordOptions& opts = {});

inline constexpr double kExtinctionThreshold = 1e-12;

// -------------------------------------------------------------- Monte Carlo --

enum class Equation { siwf, nonlinear, linear, belavkin, gksl };
std::string to_string(Equation e);
Equation equation_from_string(const std::string& s);

struct TrajectorySpec {
    StepContext ctx;
    Equation equation = Equation::siwf;
    InitialDecomposition dec;
    double t_final = 1.0;
    std::uint64_t seed = 0;
    RecordOptions opts;
};

// Trajectory `index` uses noise substream `index` of spec.seed.
TrajectoryRecord run_trajectory(const TrajectorySpec& spec, std::uint64_t index);

// Mean and standard error per saved time. For the linear route the average is
// weighted by the final-time weight w_T (self-normalized).
struct MeanSeries {
    std::vector<double> times;
    std::vector<Operator> mean;
    std::vector<RealMatrix> se_re;
    std::vector<RealMatrix> se_im;
    std::size_t n_traj = 0;
};

struct ObservableSeries {
    std::vector<double> times;
    std::vector<std::string> names;
    std::vector<std::vector<double>> mean;  // [observable][time]
    std::vector<std::vector<double>> se;    // [observable][time]
    std::size_t n_traj = 0;
};

// `threads` <= 0 resolves via SIWF_THREADS or the hardware concurrency.
// Results do not depend on the thread count.
MeanSeries monte_carlo_mean(const TrajectorySpec& spec, std::size_t n_traj, int threads = 0);

// Called for every trajectory, from worker threads, as soon as it finishes.
using TrajectoryVisitor = std::function<void(std::size_t index, const TrajectoryRecord& rec)>;

// With a visitor the records keep whatever spec.opts asks for; otherwise only
// observables are retained.
ObservableSeries monte_carlo_observables(const TrajectorySpec& spec, std::size_t n_traj, int threads = 0,
                                         const TrajectoryVisitor& visit = {});

// Per-trajectory value of `obs` at the saved time nearest `t`, trajectories
// 0..n_traj-1 in order.
std::vector<double> sample_observable(const TrajectorySpec& spec, std::size_t n_traj, const Observable& obs,
                                      double t, int threads = 0);

// Per-trajectory Girsanov weight path at saved times (linear route).
std::vector<std::vector<double>> sample_weights(const TrajectorySpec& spec, std::size_t n_traj,
                                                int threads = 0);

// ------------------------------------------------------------ consistency --

struct RecordConsistency {
    double max_residual = 0.0;  // max_{t,l} |B - W - quadrature|
    double tolerance = 0.0;     // 10 * spacing * max |Tr(L rho)|
    bool passed = false;
};

// Recomputes int_0^t 2 Re Tr(L_l rho_s) ds by the trapezoidal rule on the saved
// densities and compares with B - W.
RecordConsistency check_record_consistency(const TrajectoryRecord& rec, const ModelSpec& model);

}  // namespace siwf

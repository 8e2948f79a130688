#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "gselab/grid.hpp"
#include "gselab/hamiltonian.hpp"
#include "gselab/weyl.hpp"

namespace gselab {

enum class Scheme { split_step, rk4_matrix_free };
enum class Refresh { per_step_predictor_corrector, per_step_frozen };

struct PropagationConfig {
    double lambda = 1.0;
    GeneratorMode mode = GeneratorMode::interpolating;
    double dt = 1e-3;
    Scheme scheme = Scheme::split_step;
    Refresh refresh = Refresh::per_step_predictor_corrector;
    std::size_t snapshot_stride = 100;

    bool operator==(const PropagationConfig&) const = default;
};

/// Per-step observables of a propagation, plus sparse state snapshots.
/// energy_classical is H_c(<q>,<p>,t); energy_quantal is <H_q(psi;lambda)>,
/// both measured from the evolved state.
struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<double> exp_q, exp_p;
    std::vector<double> norm;
    std::vector<double> energy_classical, energy_quantal;
    std::vector<double> sigma_q, sigma_p;
    std::vector<std::pair<double, GridState>> snapshots;
    bool boundary_warning = false;

    std::size_t size() const { return times.size(); }
};

/// One time step of the Generalized Schroedinger equation. split_step uses a
/// Strang splitting (half V, full K, half V) of the deformed generator built
/// at the predicted midpoint expectation values; scalar generator terms are
/// retained as global phase. rk4_matrix_free rebuilds the generator from each
/// stage state and applies it directly.
GridState step(const DrivenHamiltonian& H, const GridState& s, double t,
               const PropagationConfig& config, const ModelConstants& constants);

/// Steps from t0 = 0 to t_final (rounded to a whole number of steps),
/// recording observables every step and snapshots every snapshot_stride
/// steps. dt and t_final may both be negative for reversed runs.
TrajectoryRecord propagate(const DrivenHamiltonian& H, const GridState& s0, double t_final,
                           const PropagationConfig& config, const ModelConstants& constants,
                           double t0 = 0.0);

struct SuperpositionReport {
    std::vector<double> times;
    std::vector<double> l2_distance;  // || evolve(a s1 + b s2) - N[a evolve(s1) + b evolve(s2)] ||
    double final_distance = 0.0;
    double max_distance = 0.0;
};

/// Measures how far evolution is from acting linearly on a superposition.
SuperpositionReport superposition_probe(const DrivenHamiltonian& H, const GridState& s1,
                                        const GridState& s2, std::complex<double> alpha,
                                        std::complex<double> beta, double t_final,
                                        const PropagationConfig& config,
                                        const ModelConstants& constants);

}  // namespace gselab

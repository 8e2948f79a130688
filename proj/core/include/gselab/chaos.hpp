#pragma once

#include <optional>
#include <vector>

#include "gselab/grid.hpp"
#include "gselab/hamiltonian.hpp"

namespace gselab {

/// Finite-time Lyapunov exponent by the two-trajectory Benettin method:
/// evolve z0 and z0 + delta0 (offset on q[0]) with fixed-step rk4, renormalize
/// the separation to delta0 every renorm_every steps, and average the growth
/// logs over the total time. Trajectory escape beyond 1e6 times the initial
/// scale aborts with the escape time.
double ftle_benettin(const DrivenHamiltonian& H, const PhasePoint& z0, double T, double dt,
                     std::size_t renorm_every, double delta0, const ModelConstants& constants);

enum class DivergenceEngine { closed_form, pde_lambda0 };

struct DivergenceParams {
    EnvelopeSpec envelope;               // sigma is used by the analytic engine
    DivergenceEngine engine = DivergenceEngine::closed_form;
    std::optional<GridSpec> grid;        // required for pde_lambda0
    double pde_dt = 1e-3;                // required for pde_lambda0
};

/// Metric distance d(psi1(t), psi2(t)) between wavefunctions launched from
/// z0 and z0 + dz. The closed_form engine tracks the two classical
/// trajectories and evaluates the displaced-Gaussian overlap analytically
/// (any n_dof, Gaussian envelope); pde_lambda0 propagates both states with
/// the lambda = 0 wave equation on a grid (1 DOF).
std::vector<double> wavefunction_divergence(const DrivenHamiltonian& H, const PhasePoint& z0,
                                            const PhasePoint& dz,
                                            const std::vector<double>& t_grid,
                                            const ModelConstants& constants,
                                            const DivergenceParams& params);

/// Least-squares slope of log d over the time window [t_lo, t_hi], keeping
/// only samples with d in (0, 0.9).
double divergence_rate_fit(const std::vector<double>& d_series, const std::vector<double>& t_grid,
                           double t_lo, double t_hi);

}  // namespace gselab

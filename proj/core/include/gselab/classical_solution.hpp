#pragma once

#include <optional>
#include <vector>

#include "gselab/grid.hpp"
#include "gselab/hamiltonian.hpp"

namespace gselab {

/// Accumulated phase along a classical trajectory, split into the geometric
/// part (1/hbar) int 1/2 (p dq - q dp) and the dynamical part
/// -(1/hbar) int H dtau; total = geometric + dynamical pointwise.
struct PhaseRecord {
    std::vector<double> times;
    std::vector<double> total;
    std::vector<double> dynamical;
    std::vector<double> geometric;

    std::size_t size() const { return times.size(); }
};

/// Cumulative quadrature of the phase along a uniformly sampled trajectory.
/// Derivatives of <q>, <p> come from hamilton_rhs, not finite differences.
PhaseRecord phase_integral(const ClassicalTrajectory& traj, const DrivenHamiltonian& H,
                           const ModelConstants& constants);

/// Assembles the travelling-wave solution
///   e^{i phi} e^{-i <p><q>/2 hbar} e^{+i <p> q/hbar} psi0(q - <q>)
/// from a centered envelope. The translation is spectral.
GridState closed_form_state(const GridState& envelope, const PhasePoint& z, double phi,
                            const ModelConstants& constants);

struct ClosedFormResult {
    std::vector<GridState> states;  // empty for n_dof > 1 or when no envelope given
    ClassicalTrajectory trajectory;
    PhaseRecord phases;
};

/// Exact solution of the lambda = 0 wave equation for kinetic-plus-potential
/// Hamiltonians: integrates Hamilton's equations on t_grid (rk4, one step per
/// interval), accumulates the phase, and assembles the grid states at every
/// requested time. For n_dof > 1, or when envelope is absent, only the
/// trajectory and phase records are produced.
ClosedFormResult propagate_closed_form(const DrivenHamiltonian& H,
                                       const std::optional<GridState>& envelope,
                                       const PhasePoint& z0, const std::vector<double>& t_grid,
                                       const ModelConstants& constants);

/// L2 norm of the wave-equation residual per interior sample, with the time
/// derivative by centered differences and the space derivative spectral.
/// Returns one value per interior point of t_grid.
std::vector<double> verify_pde_residual(const std::vector<GridState>& states,
                                        const DrivenHamiltonian& H,
                                        const std::vector<double>& t_grid,
                                        const ModelConstants& constants);

/// Validates the closed-form preconditions: diagonal kinetic part matching the
/// masses, everything else a function of q alone. Throws otherwise.
void require_kinetic_plus_potential(const DrivenHamiltonian& H, const ModelConstants& constants);

/// The q-only part of H at frozen time t (the potential).
PolyObservable potential_part(const DrivenHamiltonian& H, double t);

}  // namespace gselab

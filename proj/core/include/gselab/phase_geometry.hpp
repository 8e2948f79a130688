#pragma once

#include <optional>

#include "gselab/hamiltonian.hpp"

namespace gselab {

/// A detected closed circuit on a sampled trajectory. The loop runs from
/// sample `start` to the point a fraction `end_fraction` of the way along the
/// segment [end, end+1]; `period` is the interpolated recurrence time.
struct LoopWindow {
    std::size_t start = 0;
    std::size_t end = 0;
    double end_fraction = 0.0;
    double period = 0.0;
};

/// Earliest return of the trajectory to its starting point within
/// tol * (phase-space diameter), requiring enough arc length to rule out the
/// initial neighborhood. The crossing is interpolated linearly.
std::optional<LoopWindow> detect_closure(const ClassicalTrajectory& traj, double tol = 1e-6);

/// Loop integral of sum_j p_j dq_j by trapezoid over the samples, with the
/// final partial segment interpolated to the closure point.
double loop_action(const ClassicalTrajectory& traj, const LoopWindow& loop);

/// (1/hbar) * loop_action: the geometric phase picked up around the circuit.
double geometric_phase_on_loop(const ClassicalTrajectory& traj, const LoopWindow& loop,
                               const ModelConstants& constants);

/// Integral of -H dt over the loop window (trapezoid, interpolated endpoint);
/// divided by hbar this is the dynamical phase over the circuit.
double loop_hamiltonian_integral(const ClassicalTrajectory& traj, const LoopWindow& loop);

struct BohrSommerfeld {
    long n = 0;
    double residual = 0.0;
};

/// n = round(gamma / 2 pi) and the residual gamma - 2 pi n.
BohrSommerfeld bohr_sommerfeld_residual(double gamma);

/// Linear interpolation of a sampled series at the loop closure time.
double interpolate_at_loop_end(const std::vector<double>& series,
                               const std::vector<double>& times, const LoopWindow& loop);

}  // namespace gselab

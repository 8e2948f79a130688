#include "gselab/phase_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gselab {

namespace {

double distance(const PhasePoint& a, const PhasePoint& b) {
    double acc = 0.0;
    for (std::size_t d = 0; d < a.n_dof(); ++d) {
        const double dq = a.q[d] - b.q[d];
        const double dp = a.p[d] - b.p[d];
        acc += dq * dq + dp * dp;
    }
    return std::sqrt(acc);
}

PhasePoint lerp(const PhasePoint& a, const PhasePoint& b, double u) {
    PhasePoint z = a;
    for (std::size_t d = 0; d < a.n_dof(); ++d) {
        z.q[d] += u * (b.q[d] - a.q[d]);
        z.p[d] += u * (b.p[d] - a.p[d]);
    }
    return z;
}

}  // namespace

std::optional<LoopWindow> detect_closure(const ClassicalTrajectory& traj, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("detect_closure: tol must be > 0");
    if (traj.size() < 3) return std::nullopt;
    const std::size_t n_dof = traj.points[0].n_dof();

    // Scale by the bounding-box diagonal of the sampled trajectory.
    std::vector<double> lo(2 * n_dof, std::numeric_limits<double>::infinity());
    std::vector<double> hi(2 * n_dof, -std::numeric_limits<double>::infinity());
    for (const auto& z : traj.points) {
        for (std::size_t d = 0; d < n_dof; ++d) {
            lo[d] = std::min(lo[d], z.q[d]);
            hi[d] = std::max(hi[d], z.q[d]);
            lo[n_dof + d] = std::min(lo[n_dof + d], z.p[d]);
            hi[n_dof + d] = std::max(hi[n_dof + d], z.p[d]);
        }
    }
    double diameter = 0.0;
    for (std::size_t d = 0; d < 2 * n_dof; ++d) {
        const double w = hi[d] - lo[d];
        diameter += w * w;
    }
    diameter = std::sqrt(diameter);
    if (diameter == 0.0) {
        // Fixed point: the degenerate loop closes immediately.
        return LoopWindow{0, 1, 0.0, traj.times[1] - traj.times[0]};
    }
    const double tol_abs = tol * diameter;
    const double arc_floor = 0.25 * diameter;

    const PhasePoint& z0 = traj.points[0];
    double arc = 0.0;
    for (std::size_t e = 1; e < traj.size(); ++e) {
        arc += distance(traj.points[e], traj.points[e - 1]);
        if (arc < arc_floor) continue;
        if (distance(traj.points[e], z0) >= tol_abs) continue;
        // Walk forward while still approaching, then project onto the two
        // neighboring segments and keep the closest point.
        std::size_t c = e;
        while (c + 1 < traj.size() &&
               distance(traj.points[c + 1], z0) < distance(traj.points[c], z0))
            ++c;
        double best_d = std::numeric_limits<double>::infinity();
        std::size_t best_i = c;
        double best_u = 0.0;
        for (std::size_t seg = (c > 0 ? c - 1 : c); seg <= c && seg + 1 < traj.size(); ++seg) {
            const PhasePoint& a = traj.points[seg];
            const PhasePoint& b = traj.points[seg + 1];
            double num = 0.0, den = 0.0;
            for (std::size_t d = 0; d < n_dof; ++d) {
                num += (z0.q[d] - a.q[d]) * (b.q[d] - a.q[d]) +
                       (z0.p[d] - a.p[d]) * (b.p[d] - a.p[d]);
                den += (b.q[d] - a.q[d]) * (b.q[d] - a.q[d]) +
                       (b.p[d] - a.p[d]) * (b.p[d] - a.p[d]);
            }
            const double u = (den > 0.0) ? std::clamp(num / den, 0.0, 1.0) : 0.0;
            const double dd = distance(lerp(a, b, u), z0);
            if (dd < best_d) {
                best_d = dd;
                best_i = seg;
                best_u = u;
            }
        }
        LoopWindow loop;
        loop.start = 0;
        loop.end = best_i;
        loop.end_fraction = best_u;
        loop.period = traj.times[best_i] + best_u * (traj.times[best_i + 1] - traj.times[best_i]) -
                      traj.times[0];
        return loop;
    }
    return std::nullopt;
}

namespace {

// Trapezoid accumulation of f over the loop polyline; integrand supplied as a
// per-segment contribution between two phase points.
template <typename Seg>
double loop_integral(const ClassicalTrajectory& traj, const LoopWindow& loop, Seg segment) {
    if (loop.end + 1 >= traj.size() || loop.start > loop.end)
        throw std::invalid_argument("loop integral: invalid loop indices");
    double acc = 0.0;
    for (std::size_t i = loop.start; i < loop.end; ++i)
        acc += segment(traj.points[i], traj.points[i + 1], traj.times[i], traj.times[i + 1]);
    if (loop.end_fraction > 0.0) {
        const PhasePoint zf =
            lerp(traj.points[loop.end], traj.points[loop.end + 1], loop.end_fraction);
        const double tf = traj.times[loop.end] +
                          loop.end_fraction * (traj.times[loop.end + 1] - traj.times[loop.end]);
        acc += segment(traj.points[loop.end], zf, traj.times[loop.end], tf);
    }
    return acc;
}

}  // namespace

double loop_action(const ClassicalTrajectory& traj, const LoopWindow& loop) {
    return loop_integral(traj, loop,
                         [](const PhasePoint& a, const PhasePoint& b, double, double) {
                             double acc = 0.0;
                             for (std::size_t d = 0; d < a.n_dof(); ++d)
                                 acc += 0.5 * (a.p[d] + b.p[d]) * (b.q[d] - a.q[d]);
                             return acc;
                         });
}

double geometric_phase_on_loop(const ClassicalTrajectory& traj, const LoopWindow& loop,
                               const ModelConstants& constants) {
    return loop_action(traj, loop) / constants.hbar;
}

double loop_hamiltonian_integral(const ClassicalTrajectory& traj, const LoopWindow& loop) {
    // Uses the recorded energies; assumes they line up with the samples.
    return loop_integral(traj, loop,
                         [&traj](const PhasePoint& a, const PhasePoint& b, double ta, double tb) {
                             // Locate energies by matching times against the grid.
                             (void)a;
                             (void)b;
                             const double h = traj.times[1] - traj.times[0];
                             const auto ia = static_cast<std::size_t>(
                                 std::llround((ta - traj.times[0]) / h));
                             const double ea = traj.energies[ia];
                             double eb;
                             const double ub = (tb - traj.times[0]) / h;
                             const auto ib = static_cast<std::size_t>(ub);
                             if (ib + 1 < traj.size()) {
                                 const double frac = ub - static_cast<double>(ib);
                                 eb = traj.energies[ib] +
                                      frac * (traj.energies[ib + 1] - traj.energies[ib]);
                             } else {
                                 eb = traj.energies.back();
                             }
                             return -0.5 * (ea + eb) * (tb - ta);
                         });
}

BohrSommerfeld bohr_sommerfeld_residual(double gamma) {
    BohrSommerfeld out;
    out.n = std::lround(gamma / (2.0 * M_PI));
    out.residual = gamma - 2.0 * M_PI * static_cast<double>(out.n);
    return out;
}

double interpolate_at_loop_end(const std::vector<double>& series,
                               const std::vector<double>& times, const LoopWindow& loop) {
    if (loop.end + 1 >= series.size() || series.size() != times.size())
        throw std::invalid_argument("interpolate_at_loop_end: loop does not fit series");
    return series[loop.end] + loop.end_fraction * (series[loop.end + 1] - series[loop.end]);
}

}  // namespace gselab

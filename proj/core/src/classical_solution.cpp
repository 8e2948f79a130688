#include "gselab/classical_solution.hpp"

#include <cmath>

#include "gselab/fft.hpp"

namespace gselab {

namespace {

// Integrand of the geometric part, summed over DOFs.
double geometric_integrand(const DrivenHamiltonian& H, const PhasePoint& z, double t) {
    auto [dq_dt, dp_dt] = hamilton_rhs(H, z, t);
    double g = 0.0;
    for (std::size_t d = 0; d < z.n_dof(); ++d)
        g += 0.5 * (z.p[d] * dq_dt[d] - z.q[d] * dp_dt[d]);
    return g;
}

// Cumulative 4th-order quadrature on a uniform grid: Simpson over interval
// pairs, with the three-point half-panel rule for odd endpoints.
std::vector<double> cumulative_quadrature(const std::vector<double>& f, double h) {
    const std::size_t n = f.size();
    std::vector<double> F(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        if (i % 2 == 0) {
            F[i] = F[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
        } else if (i + 1 < n) {
            F[i] = F[i - 1] + h / 12.0 * (5.0 * f[i - 1] + 8.0 * f[i] - f[i + 1]);
        } else {
            // Last point of an even-length grid: mirror of the half-panel rule.
            F[i] = F[i - 1] + h / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i]);
        }
    }
    return F;
}

}  // namespace

PhaseRecord phase_integral(const ClassicalTrajectory& traj, const DrivenHamiltonian& H,
                           const ModelConstants& constants) {
    if (traj.size() < 3) throw std::invalid_argument("phase_integral: need at least 3 samples");
    if (!traj.uniform())
        throw std::invalid_argument("phase_integral: trajectory must be uniformly sampled");
    const double h = traj.times[1] - traj.times[0];

    std::vector<double> fg(traj.size()), fd(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        fg[i] = geometric_integrand(H, traj.points[i], traj.times[i]) / constants.hbar;
        fd[i] = -H.evaluate(traj.points[i], traj.times[i]) / constants.hbar;
    }

    PhaseRecord rec;
    rec.times = traj.times;
    rec.geometric = cumulative_quadrature(fg, h);
    rec.dynamical = cumulative_quadrature(fd, h);
    rec.total.resize(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i)
        rec.total[i] = rec.geometric[i] + rec.dynamical[i];
    return rec;
}

GridState closed_form_state(const GridState& envelope, const PhasePoint& z, double phi,
                            const ModelConstants& constants) {
    if (z.n_dof() != 1)
        throw std::invalid_argument("closed_form_state: grid realization is 1-DOF only");
    const double qc = expectation_q(envelope);
    const double pc = expectation_p(envelope, constants);
    if (std::abs(qc) > 1e-8 || std::abs(pc) > 1e-8)
        throw std::invalid_argument("closed_form_state: envelope is not centered");

    GridState out = spectral_shift(envelope, z.q[0]);
    auto& amp = out.mutable_amplitudes();
    const double global = phi - z.p[0] * z.q[0] / (2.0 * constants.hbar);
    const std::complex<double> gphase(std::cos(global), std::sin(global));
    for (std::size_t i = 0; i < amp.size(); ++i) {
        const double ang = z.p[0] * out.spec().q_at(i) / constants.hbar;
        amp[i] *= gphase * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    return GridState(out.spec(), std::move(amp));
}

void require_kinetic_plus_potential(const DrivenHamiltonian& H, const ModelConstants& constants) {
    if (H.n_dof() != constants.masses.size())
        throw std::invalid_argument("closed form: constants mass count does not match H");
    for (const auto& [mono, c] : H.static_part().terms()) {
        unsigned pd = 0;
        for (std::size_t d = 0; d < H.n_dof(); ++d) pd += mono.p_pow[d];
        if (pd == 0) continue;  // potential term
        // Momentum terms must be exactly p_d^2 / (2 m_d).
        std::size_t which = 0;
        bool simple = (pd == 2);
        for (std::size_t d = 0; d < H.n_dof(); ++d) {
            if (mono.q_pow[d] != 0) simple = false;
            if (mono.p_pow[d] == 2) which = d;
            else if (mono.p_pow[d] != 0) simple = false;
        }
        if (!simple || std::abs(c * 2.0 * constants.masses[which] - 1.0) > 1e-12)
            throw std::invalid_argument(
                "closed form: unsupported kinetic form (need sum p_j^2/2m_j plus V(q))");
    }
    for (const auto& [spec, shape] : H.drives()) {
        for (const auto& [mono, c] : shape.terms()) {
            for (std::size_t d = 0; d < H.n_dof(); ++d)
                if (mono.p_pow[d] != 0)
                    throw std::invalid_argument(
                        "closed form: drive shapes must depend on q only");
        }
    }
}

PolyObservable potential_part(const DrivenHamiltonian& H, double t) {
    PolyObservable V(H.n_dof());
    auto take_q_only = [&V, &H](const PolyObservable& f, double w) {
        for (const auto& [mono, c] : f.terms()) {
            unsigned pd = 0;
            for (std::size_t d = 0; d < H.n_dof(); ++d) pd += mono.p_pow[d];
            if (pd == 0) V.add_term(mono, w * c);
        }
    };
    take_q_only(H.static_part(), 1.0);
    for (const auto& [spec, shape] : H.drives()) take_q_only(shape, spec.value(t));
    return V;
}

ClosedFormResult propagate_closed_form(const DrivenHamiltonian& H,
                                       const std::optional<GridState>& envelope,
                                       const PhasePoint& z0, const std::vector<double>& t_grid,
                                       const ModelConstants& constants) {
    require_kinetic_plus_potential(H, constants);

    ClosedFormResult result;
    result.trajectory = integrate_classical(H, z0, t_grid, IntegrationMethod::rk4_fixed, 0.0);
    result.phases = phase_integral(result.trajectory, H, constants);

    if (envelope.has_value() && H.n_dof() == 1) {
        result.states.reserve(t_grid.size());
        for (std::size_t i = 0; i < t_grid.size(); ++i)
            result.states.push_back(closed_form_state(*envelope, result.trajectory.points[i],
                                                      result.phases.total[i], constants));
    }
    return result;
}

std::vector<double> verify_pde_residual(const std::vector<GridState>& states,
                                        const DrivenHamiltonian& H,
                                        const std::vector<double>& t_grid,
                                        const ModelConstants& constants) {
    if (states.size() != t_grid.size())
        throw std::invalid_argument("verify_pde_residual: states and t_grid length mismatch");
    if (states.size() < 3)
        throw std::invalid_argument("verify_pde_residual: need at least 3 samples");
    require_kinetic_plus_potential(H, constants);
    if (H.n_dof() != 1)
        throw std::invalid_argument("verify_pde_residual: 1-DOF only");
    for (std::size_t i = 2; i < t_grid.size(); ++i) {
        const double h0 = t_grid[1] - t_grid[0];
        if (std::abs((t_grid[i] - t_grid[i - 1]) - h0) > 1e-9 * std::max(1.0, std::abs(h0)))
            throw std::invalid_argument("verify_pde_residual: t_grid must be uniform");
    }

    const double hbar = constants.hbar;
    const double m = constants.masses[0];
    const double dt = t_grid[1] - t_grid[0];
    const auto& spec = states[0].spec();
    const std::size_t n = spec.n_points;

    std::vector<double> out;
    out.reserve(states.size() - 2);
    for (std::size_t i = 1; i + 1 < states.size(); ++i) {
        const GridState& s = states[i];
        const double qb = expectation_q(s);
        const double pb = expectation_p(s, constants);
        const PolyObservable V = potential_part(H, t_grid[i]);
        const PolyObservable Vp = V.derivative(0, Coordinate::q);
        const double v0 = V.evaluate(PhasePoint(qb, 0.0));
        const double v1 = Vp.evaluate(PhasePoint(qb, 0.0));

        // Spectral d/dq.
        auto ft = s.amplitudes();
        fft::forward(ft);
        for (std::size_t j = 0; j < n; ++j) ft[j] *= std::complex<double>(0.0, spec.k_at(j));
        fft::inverse(ft);

        double acc = 0.0;
        const std::complex<double> ih(0.0, hbar);
        for (std::size_t j = 0; j < n; ++j) {
            const std::complex<double> dpsi_dt =
                (states[i + 1].amplitudes()[j] - states[i - 1].amplitudes()[j]) / (2.0 * dt);
            const std::complex<double> lhs = ih * (dpsi_dt + (pb / m) * ft[j]);
            const double coef = v0 + v1 * (spec.q_at(j) - qb) - pb * pb / (2.0 * m);
            const std::complex<double> rhs = coef * s.amplitudes()[j];
            acc += std::norm(lhs - rhs);
        }
        out.push_back(std::sqrt(acc * spec.dq()));
    }
    return out;
}

}  // namespace gselab

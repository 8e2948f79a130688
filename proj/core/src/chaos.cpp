#include "gselab/chaos.hpp"

#include <cmath>

#include "gselab/classical_solution.hpp"
#include "gselab/propagator.hpp"

namespace gselab {

namespace {

std::vector<double> pack(const PhasePoint& z) {
    std::vector<double> s(z.q);
    s.insert(s.end(), z.p.begin(), z.p.end());
    return s;
}

PhasePoint unpack(const std::vector<double>& s) {
    const std::size_t n = s.size() / 2;
    return PhasePoint(std::vector<double>(s.begin(), s.begin() + n),
                      std::vector<double>(s.begin() + n, s.end()));
}

std::vector<double> rk4_step(const DrivenHamiltonian& H, const std::vector<double>& s, double t,
                             double h) {
    auto rhs = [&H](const std::vector<double>& y, double ty) {
        auto [dq, dp] = hamilton_rhs(H, unpack(y), ty);
        std::vector<double> out(std::move(dq));
        out.insert(out.end(), dp.begin(), dp.end());
        return out;
    };
    const auto k1 = rhs(s, t);
    auto add = [&s](double h2, const std::vector<double>& k) {
        std::vector<double> y(s);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += h2 * k[i];
        return y;
    };
    const auto k2 = rhs(add(h / 2, k1), t + h / 2);
    const auto k3 = rhs(add(h / 2, k2), t + h / 2);
    const auto k4 = rhs(add(h, k3), t + h);
    std::vector<double> out(s);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

double sep_norm(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
}

}  // namespace

double ftle_benettin(const DrivenHamiltonian& H, const PhasePoint& z0, double T, double dt,
                     std::size_t renorm_every, double delta0, const ModelConstants& constants) {
    (void)constants;
    if (!(delta0 > 0.0)) throw std::invalid_argument("ftle_benettin: delta0 must be > 0");
    if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("ftle_benettin: T, dt must be > 0");
    if (renorm_every == 0) throw std::invalid_argument("ftle_benettin: renorm_every must be > 0");

    auto s1 = pack(z0);
    auto s2 = s1;
    s2[0] += delta0;

    double scale0 = 0.0;
    for (double v : s1) scale0 = std::max(scale0, std::abs(v));
    const double escape = 1e6 * std::max(scale0, 1.0);

    const auto n_steps = static_cast<long long>(std::llround(T / dt));
    double log_sum = 0.0;
    double t = 0.0;
    for (long long k = 0; k < n_steps; ++k) {
        s1 = rk4_step(H, s1, t, dt);
        s2 = rk4_step(H, s2, t, dt);
        t += dt;
        for (double v : s1)
            if (!std::isfinite(v) || std::abs(v) > escape)
                throw NumericalError("ftle_benettin: trajectory escape", t);
        if ((k + 1) % static_cast<long long>(renorm_every) == 0) {
            const double d = sep_norm(s1, s2);
            log_sum += std::log(d / delta0);
            const double f = delta0 / d;
            for (std::size_t i = 0; i < s2.size(); ++i) s2[i] = s1[i] + (s2[i] - s1[i]) * f;
        }
    }
    return log_sum / t;
}

namespace {

// -log |<psi1|psi2>|^2 for two travelling-wave Gaussian packets of common
// width sigma displaced by (dq, dp) per DOF; phases cancel in the magnitude.
double gaussian_overlap_exponent(const PhasePoint& z1, const PhasePoint& z2, double sigma,
                                 double hbar) {
    double expo = 0.0;
    for (std::size_t d = 0; d < z1.n_dof(); ++d) {
        const double dq = z2.q[d] - z1.q[d];
        const double dp = z2.p[d] - z1.p[d];
        expo += dq * dq / (4.0 * sigma * sigma) + sigma * sigma * dp * dp / (hbar * hbar);
    }
    return expo;
}

}  // namespace

std::vector<double> wavefunction_divergence(const DrivenHamiltonian& H, const PhasePoint& z0,
                                            const PhasePoint& dz,
                                            const std::vector<double>& t_grid,
                                            const ModelConstants& constants,
                                            const DivergenceParams& params) {
    if (dz.n_dof() != z0.n_dof())
        throw std::invalid_argument("wavefunction_divergence: dz DOF mismatch");
    PhasePoint z0b = z0;
    for (std::size_t d = 0; d < z0.n_dof(); ++d) {
        z0b.q[d] += dz.q[d];
        z0b.p[d] += dz.p[d];
    }

    if (params.engine == DivergenceEngine::closed_form) {
        if (params.envelope.kind != EnvelopeSpec::Kind::gaussian)
            throw std::invalid_argument(
                "wavefunction_divergence: analytic engine needs a Gaussian envelope");
        const auto t1 = integrate_classical(H, z0, t_grid, IntegrationMethod::rk4_fixed, 0.0);
        const auto t2 = integrate_classical(H, z0b, t_grid, IntegrationMethod::rk4_fixed, 0.0);
        std::vector<double> d(t_grid.size());
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            const double expo = gaussian_overlap_exponent(t1.points[i], t2.points[i],
                                                          params.envelope.sigma, constants.hbar);
            d[i] = -std::expm1(-expo);
        }
        return d;
    }

    // pde_lambda0: evolve both grid states with the lambda = 0 equation.
    if (H.n_dof() != 1)
        throw std::invalid_argument("wavefunction_divergence: pde engine is 1-DOF only");
    if (!params.grid.has_value())
        throw std::invalid_argument("wavefunction_divergence: pde engine needs a grid");
    const GridState env = make_envelope(params.envelope, *params.grid, constants);
    const GridState s1 = closed_form_state(env, z0, 0.0, constants);
    const GridState s2 = closed_form_state(env, z0b, 0.0, constants);

    PropagationConfig config;
    config.lambda = 0.0;
    config.mode = GeneratorMode::interpolating;
    config.scheme = Scheme::split_step;
    config.refresh = Refresh::per_step_predictor_corrector;
    config.dt = params.pde_dt;

    // Sample at the t_grid points: t_grid must be uniform multiples of dt.
    const double t_final = t_grid.back();
    const double stride_t = t_grid[1] - t_grid[0];
    const auto stride = static_cast<std::size_t>(std::llround(stride_t / config.dt));
    if (stride == 0 || std::abs(stride_t - static_cast<double>(stride) * config.dt) > 1e-9 * stride_t)
        throw std::invalid_argument(
            "wavefunction_divergence: t_grid spacing must be a multiple of pde_dt");
    config.snapshot_stride = stride;

    const auto r1 = propagate(H, s1, t_final, config, constants);
    const auto r2 = propagate(H, s2, t_final, config, constants);

    std::vector<double> d;
    d.reserve(t_grid.size());
    d.push_back(metric_distance(s1, s2));
    const std::size_t n_snap = std::min(r1.snapshots.size(), r2.snapshots.size());
    for (std::size_t i = 0; i < n_snap; ++i)
        d.push_back(metric_distance(r1.snapshots[i].second, r2.snapshots[i].second));
    return d;
}

double divergence_rate_fit(const std::vector<double>& d_series, const std::vector<double>& t_grid,
                           double t_lo, double t_hi) {
    if (d_series.size() != t_grid.size())
        throw std::invalid_argument("divergence_rate_fit: series and grid length mismatch");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < d_series.size(); ++i) {
        if (t_grid[i] < t_lo || t_grid[i] > t_hi) continue;
        if (!(d_series[i] > 0.0) || d_series[i] >= 0.9) continue;
        const double x = t_grid[i];
        const double y = std::log(d_series[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) throw std::invalid_argument("divergence_rate_fit: empty window after filtering");
    const double den = static_cast<double>(n) * sxx - sx * sx;
    return (static_cast<double>(n) * sxy - sx * sy) / den;
}

}  // namespace gselab

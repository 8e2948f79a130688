#include "gselab/propagator.hpp"

#include <algorithm>
#include <cmath>

#include "gselab/fft.hpp"

namespace gselab {

namespace {

using CVec = std::vector<std::complex<double>>;

// q-only and p-only coefficient stacks of a separable generator, by power.
struct SplitParts {
    std::vector<double> v;  // position polynomial, v[0] the scalar part
    std::vector<double> k;  // momentum polynomial
};

SplitParts split_parts(const CanonicalOperatorPoly& G, double hbar) {
    SplitParts parts;
    const double scale = std::max(1.0, G.max_abs_coefficient());
    for (const auto& [idx, coef] : G.terms()) {
        const unsigned a = idx.q_pow[0], b = idx.p_pow[0];
        if (a > 0 && b > 0)
            throw std::invalid_argument(
                "split_step requires a separable Hamiltonian (no mixed q p terms)");
        const std::complex<double> c = coef.value(hbar);
        if (std::abs(c.imag()) > 1e-9 * std::max(scale, std::abs(c.real())))
            throw std::invalid_argument("split_step: generator term has a complex coefficient");
        if (b == 0) {
            if (parts.v.size() <= a) parts.v.resize(a + 1, 0.0);
            parts.v[a] += c.real();
        } else {
            if (parts.k.size() <= b) parts.k.resize(b + 1, 0.0);
            parts.k[b] += c.real();
        }
    }
    return parts;
}

double horner(const std::vector<double>& c, double x) {
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
    return v;
}

// phase[i] = exp(-i * poly(x_i) * w), x_i supplied by a callable.
template <typename XAt>
void apply_phase(CVec& a, const std::vector<double>& poly, double w, XAt x_at) {
    if (poly.empty()) return;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double ang = -w * horner(poly, x_at(i));
        a[i] *= std::complex<double>(std::cos(ang), std::sin(ang));
    }
}

struct Moments {
    double norm = 0.0;
    double exp_q = 0.0, exp_p = 0.0;
    double sig_q = 0.0, sig_p = 0.0;
    std::vector<double> q_raw, p_raw;  // raw moments <q^a>, <p^b>, index = power
};

// Raw position moments up to max_a from the position density.
void position_moments(const CVec& a, const GridSpec& spec, unsigned max_a, Moments& m) {
    const unsigned top = std::max(2u, max_a);
    m.q_raw.assign(top + 1, 0.0);
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double w = std::norm(a[i]);
        const double q = spec.q_at(i);
        double x = w;
        m.q_raw[0] += w;
        for (unsigned r = 1; r <= top; ++r) {
            x *= q;
            m.q_raw[r] += x;
        }
        den += w;
    }
    m.norm = std::sqrt(den * spec.dq());
    for (auto& v : m.q_raw) v /= den;
    m.exp_q = m.q_raw[1];
    m.sig_q = std::sqrt(std::max(0.0, m.q_raw[2] - m.exp_q * m.exp_q));
}

// Raw momentum moments up to max_b from the transform magnitudes.
void momentum_moments(const CVec& ft, const GridSpec& spec, double hbar, unsigned max_b,
                      Moments& m) {
    const unsigned top = std::max(2u, max_b);
    m.p_raw.assign(top + 1, 0.0);
    double den = 0.0;
    for (std::size_t i = 0; i < ft.size(); ++i) {
        const double w = std::norm(ft[i]);
        const double p = hbar * spec.k_at(i);
        double x = w;
        m.p_raw[0] += w;
        for (unsigned r = 1; r <= top; ++r) {
            x *= p;
            m.p_raw[r] += x;
        }
        den += w;
    }
    for (auto& v : m.p_raw) v /= den;
    m.exp_p = m.p_raw[1];
    m.sig_p = std::sqrt(std::max(0.0, m.p_raw[2] - m.exp_p * m.exp_p));
}

// <G> for a separable generator from raw moments.
double separable_expectation(const CanonicalOperatorPoly& G, double hbar, const Moments& m) {
    double e = 0.0;
    for (const auto& [idx, coef] : G.terms()) {
        const unsigned a = idx.q_pow[0], b = idx.p_pow[0];
        const double c = coef.value(hbar).real();
        if (a == 0 && b == 0)
            e += c;
        else if (b == 0)
            e += c * m.q_raw[a];
        else
            e += c * m.p_raw[b];
    }
    return e;
}

class SplitStepper {
public:
    SplitStepper(const DrivenHamiltonian& H, GridSpec spec, const PropagationConfig& config,
                 const ModelConstants& constants)
        : H_(H), spec_(spec), config_(config), constants_(constants) {
        if (H.n_dof() != 1)
            throw std::invalid_argument("split_step: grid propagation is 1-DOF only");
        if (!H.static_part().separable())
            throw std::invalid_argument(
                "split_step requires a separable Hamiltonian (no mixed q p terms)");
        for (const auto& [drv, shape] : H.drives())
            if (!shape.separable())
                throw std::invalid_argument(
                    "split_step requires separable drive shapes (no mixed q p terms)");
        hk_.resize(spec.n_points);
        for (std::size_t i = 0; i < spec.n_points; ++i) hk_[i] = constants.hbar * spec.k_at(i);
    }

    // Advances amp by one step of size config.dt starting at time t. The
    // incoming transform ft and moments m belong to amp; all three are
    // replaced by end-of-step values.
    void advance(CVec& amp, CVec& ft, Moments& m, double t) {
        const double dt = config_.dt;
        PhasePoint zstar(m.exp_q, m.exp_p);
        double t_build = t;
        if (config_.refresh == Refresh::per_step_predictor_corrector) {
            const auto g0 = deformed_generator(H_, zstar, t, config_.lambda, config_.mode);
            const auto parts0 = split_parts(g0, constants_.hbar);
            CVec pred = amp;
            strang(pred, parts0, dt / 2.0);
            // After the closing half-V the position density is already in
            // place and the momentum shift of that half-V is analytic, so the
            // midpoint expectations come free of an extra transform.
            Moments mp;
            position_moments(pred, spec_, 1, mp);
            double vp_mean = 0.0;  // <dV/dq> of the predicted density
            if (parts0.v.size() > 1) {
                std::vector<double> dv(parts0.v.size() - 1);
                for (std::size_t r = 1; r < parts0.v.size(); ++r)
                    dv[r - 1] = parts0.v[r] * static_cast<double>(r);
                double num = 0.0, den = 0.0;
                for (std::size_t i = 0; i < pred.size(); ++i) {
                    const double w = std::norm(pred[i]);
                    num += horner(dv, spec_.q_at(i)) * w;
                    den += w;
                }
                vp_mean = num / den;
            }
            zstar = PhasePoint(mp.exp_q, p_mid_ + (-dt / 4.0) * vp_mean);
            t_build = t + dt / 2.0;
        }
        const auto g = deformed_generator(H_, zstar, t_build, config_.lambda, config_.mode);
        const auto parts = split_parts(g, constants_.hbar);
        strang(amp, parts, dt);
        refresh_measurements(amp, ft, m);
    }

    void refresh_measurements(const CVec& amp, CVec& ft, Moments& m) {
        const unsigned max_a = std::max(2u, max_q_power());
        const unsigned max_b = std::max(2u, max_p_power());
        position_moments(amp, spec_, max_a, m);
        ft = amp;
        fft::forward(ft);
        momentum_moments(ft, spec_, constants_.hbar, max_b, m);
    }

    // Generator at the current expectations, for the record energies.
    CanonicalOperatorPoly generator_at(const Moments& m, double t) const {
        return deformed_generator(H_, PhasePoint(m.exp_q, m.exp_p), t, config_.lambda,
                                  config_.mode);
    }

private:
    unsigned max_q_power() const {
        unsigned mx = H_.static_part().max_power(0, Coordinate::q);
        for (const auto& [drv, shape] : H_.drives()) mx = std::max(mx, shape.max_power(0, Coordinate::q));
        return mx;
    }
    unsigned max_p_power() const {
        unsigned mx = H_.static_part().max_power(0, Coordinate::p);
        for (const auto& [drv, shape] : H_.drives()) mx = std::max(mx, shape.max_power(0, Coordinate::p));
        return mx;
    }

    void strang(CVec& a, const SplitParts& parts, double dt) {
        const double w_half = dt / (2.0 * constants_.hbar);
        apply_phase(a, parts.v, w_half, [this](std::size_t i) { return spec_.q_at(i); });
        fft::forward(a);
        // Track <p> mid-stream; the K factor is unimodular and leaves it unchanged.
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double w = std::norm(a[i]);
            num += hk_[i] * w;
            den += w;
        }
        p_mid_ = num / den;
        if (!parts.k.empty())
            apply_phase(a, parts.k, dt / constants_.hbar,
                        [this](std::size_t i) { return hk_[i]; });
        fft::inverse(a);
        apply_phase(a, parts.v, w_half, [this](std::size_t i) { return spec_.q_at(i); });
    }

    const DrivenHamiltonian& H_;
    GridSpec spec_;
    PropagationConfig config_;
    ModelConstants constants_;
    std::vector<double> hk_;
    double p_mid_ = 0.0;
};

CVec rk4_matrix_free_step(const DrivenHamiltonian& H, const GridState& s, double t,
                          const PropagationConfig& config, const ModelConstants& constants) {
    const auto deriv = [&](const GridState& y, double ty) {
        const PhasePoint z(expectation_q(y), expectation_p(y, constants));
        const auto g = deformed_generator(H, z, ty, config.lambda, config.mode);
        GridState gy = apply_operator(g, y, constants);
        CVec d = std::move(gy.mutable_amplitudes());
        const std::complex<double> f(0.0, -1.0 / constants.hbar);
        for (auto& v : d) v *= f;
        return d;
    };
    const double dt = config.dt;
    const auto& a0 = s.amplitudes();
    auto combine = [&](const CVec& base, double h, const CVec& dir) {
        CVec out(base);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += h * dir[i];
        return out;
    };
    const CVec k1 = deriv(s, t);
    const CVec k2 = deriv(GridState(s.spec(), combine(a0, dt / 2, k1)), t + dt / 2);
    const CVec k3 = deriv(GridState(s.spec(), combine(a0, dt / 2, k2)), t + dt / 2);
    const CVec k4 = deriv(GridState(s.spec(), combine(a0, dt, k3)), t + dt);
    CVec out(a0);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

bool finite(const CVec& a) {
    for (const auto& v : a)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

}  // namespace

GridState step(const DrivenHamiltonian& H, const GridState& s, double t,
               const PropagationConfig& config, const ModelConstants& constants) {
    if (config.dt == 0.0) throw std::invalid_argument("step: dt must be nonzero");
    if (config.scheme == Scheme::rk4_matrix_free) {
        CVec out = rk4_matrix_free_step(H, s, t, config, constants);
        if (!finite(out)) throw NumericalError("rk4_matrix_free produced a non-finite state", t);
        return GridState(s.spec(), std::move(out));
    }
    SplitStepper stepper(H, s.spec(), config, constants);
    CVec amp = s.amplitudes();
    CVec ft;
    Moments m;
    stepper.refresh_measurements(amp, ft, m);
    stepper.advance(amp, ft, m, t);
    if (!finite(amp)) throw NumericalError("split_step produced a non-finite state", t);
    return GridState(s.spec(), std::move(amp));
}

TrajectoryRecord propagate(const DrivenHamiltonian& H, const GridState& s0, double t_final,
                           const PropagationConfig& config, const ModelConstants& constants,
                           double t0) {
    if (config.dt == 0.0) throw std::invalid_argument("propagate: dt must be nonzero");
    const double span = t_final - t0;
    const auto n_steps = static_cast<long long>(std::llround(span / config.dt));
    if (n_steps < 1)
        throw std::invalid_argument("propagate: t_final and dt must give at least one step");

    TrajectoryRecord rec;
    rec.times.reserve(n_steps + 1);

    if (config.scheme == Scheme::rk4_matrix_free) {
        GridState s = s0;
        auto record = [&](double t, const GridState& st) {
            rec.times.push_back(t);
            const PhasePoint z(expectation_q(st), expectation_p(st, constants));
            rec.exp_q.push_back(z.q[0]);
            rec.exp_p.push_back(z.p[0]);
            rec.norm.push_back(norm(st));
            rec.energy_classical.push_back(H.evaluate(z, t));
            const auto g = deformed_generator(H, z, t, config.lambda, config.mode);
            rec.energy_quantal.push_back(expectation_operator(g, st, constants).real());
            rec.sigma_q.push_back(sigma_q(st));
            rec.sigma_p.push_back(sigma_p(st, constants));
            if (boundary_density(st) > 1e-10) rec.boundary_warning = true;
        };
        record(t0, s);
        for (long long k = 0; k < n_steps; ++k) {
            const double t = t0 + static_cast<double>(k) * config.dt;
            CVec out = rk4_matrix_free_step(H, s, t, config, constants);
            if (!finite(out))
                throw NumericalError("rk4_matrix_free produced a non-finite state", t);
            s = GridState(s.spec(), std::move(out));
            record(t0 + static_cast<double>(k + 1) * config.dt, s);
            if (config.snapshot_stride > 0 && (k + 1) % config.snapshot_stride == 0)
                rec.snapshots.emplace_back(rec.times.back(), s);
        }
        return rec;
    }

    SplitStepper stepper(H, s0.spec(), config, constants);
    CVec amp = s0.amplitudes();
    CVec ft;
    Moments m;
    stepper.refresh_measurements(amp, ft, m);

    auto record = [&](double t) {
        rec.times.push_back(t);
        rec.exp_q.push_back(m.exp_q);
        rec.exp_p.push_back(m.exp_p);
        rec.norm.push_back(m.norm);
        const PhasePoint z(m.exp_q, m.exp_p);
        rec.energy_classical.push_back(H.evaluate(z, t));
        rec.energy_quantal.push_back(
            separable_expectation(stepper.generator_at(m, t), constants.hbar, m));
        rec.sigma_q.push_back(m.sig_q);
        rec.sigma_p.push_back(m.sig_p);
    };

    record(t0);
    for (long long k = 0; k < n_steps; ++k) {
        const double t = t0 + static_cast<double>(k) * config.dt;
        stepper.advance(amp, ft, m, t);
        if (!finite(amp)) throw NumericalError("split_step produced a non-finite state", t);
        record(t0 + static_cast<double>(k + 1) * config.dt);
        if (config.snapshot_stride > 0 && (k + 1) % config.snapshot_stride == 0) {
            GridState snap(s0.spec(), amp);
            if (boundary_density(snap) > 1e-10) rec.boundary_warning = true;
            rec.snapshots.emplace_back(rec.times.back(), std::move(snap));
        }
    }
    return rec;
}

SuperpositionReport superposition_probe(const DrivenHamiltonian& H, const GridState& s1,
                                        const GridState& s2, std::complex<double> alpha,
                                        std::complex<double> beta, double t_final,
                                        const PropagationConfig& config,
                                        const ModelConstants& constants) {
    if (!(s1.spec() == s2.spec()))
        throw std::invalid_argument("superposition_probe: grid spec mismatch");
    const auto n_steps = static_cast<long long>(std::llround(t_final / config.dt));
    if (config.snapshot_stride == 0 ||
        static_cast<long long>(config.snapshot_stride) > n_steps)
        throw std::invalid_argument("superposition_probe: snapshot_stride yields no samples");
    CVec combo(s1.size());
    for (std::size_t i = 0; i < combo.size(); ++i)
        combo[i] = alpha * s1.amplitudes()[i] + beta * s2.amplitudes()[i];
    const GridState s12 = normalize(GridState(s1.spec(), std::move(combo)));

    const auto r12 = propagate(H, s12, t_final, config, constants);
    const auto r1 = propagate(H, s1, t_final, config, constants);
    const auto r2 = propagate(H, s2, t_final, config, constants);

    SuperpositionReport rep;
    const double dq = s1.spec().dq();
    auto distance_at = [&](const GridState& a, const GridState& b1, const GridState& b2) {
        CVec lin(a.size());
        for (std::size_t i = 0; i < lin.size(); ++i)
            lin[i] = alpha * b1.amplitudes()[i] + beta * b2.amplitudes()[i];
        const GridState linn = normalize(GridState(a.spec(), std::move(lin)));
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            acc += std::norm(a.amplitudes()[i] - linn.amplitudes()[i]);
        return std::sqrt(acc * dq);
    };

    const std::size_t n_snap = std::min({r12.snapshots.size(), r1.snapshots.size(),
                                         r2.snapshots.size()});
    for (std::size_t i = 0; i < n_snap; ++i) {
        rep.times.push_back(r12.snapshots[i].first);
        rep.l2_distance.push_back(distance_at(r12.snapshots[i].second, r1.snapshots[i].second,
                                              r2.snapshots[i].second));
        rep.max_distance = std::max(rep.max_distance, rep.l2_distance.back());
    }
    if (!rep.l2_distance.empty()) rep.final_distance = rep.l2_distance.back();
    return rep;
}

}  // namespace gselab

#include "gselab/hamiltonian.hpp"

#include <algorithm>
#include <cmath>

namespace gselab {

DriveSpec DriveSpec::constant(double value) {
    DriveSpec d;
    d.kind = Kind::constant;
    d.amplitude = value;
    return d;
}

DriveSpec DriveSpec::cosine(double amplitude, double angular_frequency, double phase_offset) {
    DriveSpec d;
    d.kind = Kind::cosine;
    d.amplitude = amplitude;
    d.angular_frequency = angular_frequency;
    d.phase_offset = phase_offset;
    d.validate();
    return d;
}

DriveSpec DriveSpec::periodic_kick(double strength, double period, double width) {
    DriveSpec d;
    d.kind = Kind::periodic_kick;
    d.strength = strength;
    d.period = period;
    d.width = width;
    d.validate();
    return d;
}

void DriveSpec::validate() const {
    switch (kind) {
        case Kind::constant:
            break;
        case Kind::cosine:
            if (!(angular_frequency > 0.0))
                throw std::invalid_argument("DriveSpec: cosine angular_frequency must be > 0");
            break;
        case Kind::periodic_kick:
            if (!(period > 0.0)) throw std::invalid_argument("DriveSpec: kick period must be > 0");
            if (width < 0.0) throw std::invalid_argument("DriveSpec: kick width must be >= 0");
            break;
    }
}

double DriveSpec::value(double t) const {
    switch (kind) {
        case Kind::constant:
            return amplitude;
        case Kind::cosine:
            return amplitude * std::cos(angular_frequency * t + phase_offset);
        case Kind::periodic_kick: {
            const double sigma = (width > 0.0) ? width : period / 100.0;
            const double dt = t - period * std::round(t / period);
            const double norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
            return strength * norm * std::exp(-0.5 * (dt / sigma) * (dt / sigma));
        }
    }
    return 0.0;
}

DrivenHamiltonian::DrivenHamiltonian(PolyObservable static_part,
                                     std::vector<std::pair<DriveSpec, PolyObservable>> drives)
    : static_part_(std::move(static_part)), drives_(std::move(drives)) {
    const std::size_t n = static_part_.n_dof();
    for (const auto& [spec, shape] : drives_) {
        spec.validate();
        if (shape.n_dof() != n)
            throw std::invalid_argument("DrivenHamiltonian: drive shape DOF mismatch");
    }
    gradients_.reserve(drives_.size() + 1);
    auto grads_of = [n](const PolyObservable& f) {
        std::vector<PolyObservable> g;
        g.reserve(2 * n);
        for (std::size_t d = 0; d < n; ++d) g.push_back(f.derivative(d, Coordinate::q));
        for (std::size_t d = 0; d < n; ++d) g.push_back(f.derivative(d, Coordinate::p));
        return g;
    };
    gradients_.push_back(grads_of(static_part_));
    for (const auto& [spec, shape] : drives_) gradients_.push_back(grads_of(shape));
}

double DrivenHamiltonian::evaluate(const PhasePoint& z, double t) const {
    double v = static_part_.evaluate(z);
    for (const auto& [spec, shape] : drives_) v += spec.value(t) * shape.evaluate(z);
    return v;
}

double DrivenHamiltonian::dq(std::size_t dof, const PhasePoint& z, double t) const {
    double v = gradients_[0][dof].evaluate(z);
    for (std::size_t k = 0; k < drives_.size(); ++k)
        v += drives_[k].first.value(t) * gradients_[k + 1][dof].evaluate(z);
    return v;
}

double DrivenHamiltonian::dp(std::size_t dof, const PhasePoint& z, double t) const {
    const std::size_t n = n_dof();
    double v = gradients_[0][n + dof].evaluate(z);
    for (std::size_t k = 0; k < drives_.size(); ++k)
        v += drives_[k].first.value(t) * gradients_[k + 1][n + dof].evaluate(z);
    return v;
}

PolyObservable DrivenHamiltonian::frozen(double t) const {
    PolyObservable f = static_part_;
    for (const auto& [spec, shape] : drives_) f += spec.value(t) * shape;
    return f;
}

std::pair<std::vector<double>, std::vector<double>> hamilton_rhs(const DrivenHamiltonian& H,
                                                                 const PhasePoint& z, double t) {
    if (z.n_dof() != H.n_dof())
        throw std::invalid_argument("hamilton_rhs: phase point DOF mismatch");
    const std::size_t n = H.n_dof();
    std::vector<double> dq_dt(n), dp_dt(n);
    for (std::size_t d = 0; d < n; ++d) {
        dq_dt[d] = H.dp(d, z, t);
        dp_dt[d] = -H.dq(d, z, t);
    }
    return {std::move(dq_dt), std::move(dp_dt)};
}

bool ClassicalTrajectory::uniform(double rel_tol) const {
    if (times.size() < 3) return true;
    const double h = times[1] - times[0];
    for (std::size_t i = 2; i < times.size(); ++i)
        if (std::abs((times[i] - times[i - 1]) - h) > rel_tol * std::max(1.0, std::abs(h)))
            return false;
    return true;
}

std::vector<double> linspace(double t0, double t1, std::size_t n_samples) {
    if (n_samples < 2) throw std::invalid_argument("linspace: need at least 2 samples");
    std::vector<double> t(n_samples);
    const double h = (t1 - t0) / static_cast<double>(n_samples - 1);
    for (std::size_t i = 0; i < n_samples; ++i) t[i] = t0 + h * static_cast<double>(i);
    t.back() = t1;
    return t;
}

namespace {

using State = std::vector<double>;  // packed (q..., p...)

State pack(const PhasePoint& z) {
    State s(z.q);
    s.insert(s.end(), z.p.begin(), z.p.end());
    return s;
}

PhasePoint unpack(const State& s) {
    const std::size_t n = s.size() / 2;
    return PhasePoint(std::vector<double>(s.begin(), s.begin() + n),
                      std::vector<double>(s.begin() + n, s.end()));
}

State rhs(const DrivenHamiltonian& H, const State& s, double t) {
    auto [dq, dp] = hamilton_rhs(H, unpack(s), t);
    State out(std::move(dq));
    out.insert(out.end(), dp.begin(), dp.end());
    return out;
}

State axpy(const State& a, double h, const State& b) {
    State out(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += h * b[i];
    return out;
}

State rk4_step(const DrivenHamiltonian& H, const State& s, double t, double h) {
    const State k1 = rhs(H, s, t);
    const State k2 = rhs(H, axpy(s, h / 2, k1), t + h / 2);
    const State k3 = rhs(H, axpy(s, h / 2, k2), t + h / 2);
    const State k4 = rhs(H, axpy(s, h, k3), t + h);
    State out(s);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Dopri45Result {
    State y;
    double err_norm;  // scaled max error
};

Dopri45Result dopri45_step(const DrivenHamiltonian& H, const State& s, double t, double h,
                           double tol) {
    const State k1 = rhs(H, s, t);
    const State k2 = rhs(H, axpy(s, h * a21, k1), t + c2 * h);
    State y(s);
    auto acc = [&y, &s](double h1, const State& v1, double h2, const State& v2,
                        double h3 = 0, const State* v3 = nullptr, double h4 = 0,
                        const State* v4 = nullptr, double h5 = 0, const State* v5 = nullptr) {
        for (std::size_t i = 0; i < y.size(); ++i) {
            double d = h1 * v1[i] + h2 * v2[i];
            if (v3) d += h3 * (*v3)[i];
            if (v4) d += h4 * (*v4)[i];
            if (v5) d += h5 * (*v5)[i];
            y[i] = s[i] + d;
        }
    };
    acc(h * a31, k1, h * a32, k2);
    const State k3 = rhs(H, y, t + c3 * h);
    acc(h * a41, k1, h * a42, k2, h * a43, &k3);
    const State k4 = rhs(H, y, t + c4 * h);
    acc(h * a51, k1, h * a52, k2, h * a53, &k3, h * a54, &k4);
    const State k5 = rhs(H, y, t + c5 * h);
    acc(h * a61, k1, h * a62, k2, h * a63, &k3, h * a64, &k4, h * a65, &k5);
    const State k6 = rhs(H, y, t + h);
    State y5(s);
    for (std::size_t i = 0; i < y5.size(); ++i)
        y5[i] += h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    const State k7 = rhs(H, y5, t + h);

    double err = 0.0;
    for (std::size_t i = 0; i < y5.size(); ++i) {
        const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                              e7 * k7[i]);
        const double scale = tol * (1.0 + std::max(std::abs(s[i]), std::abs(y5[i])));
        err = std::max(err, std::abs(e) / scale);
    }
    return {std::move(y5), err};
}

}  // namespace

ClassicalTrajectory integrate_classical(const DrivenHamiltonian& H, const PhasePoint& z0,
                                        const std::vector<double>& t_grid,
                                        IntegrationMethod method, double tol) {
    if (z0.n_dof() != H.n_dof())
        throw std::invalid_argument("integrate_classical: initial point DOF mismatch");
    if (!z0.finite()) throw std::invalid_argument("integrate_classical: non-finite initial point");
    if (t_grid.size() < 2)
        throw std::invalid_argument("integrate_classical: t_grid needs at least 2 points");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1]))
            throw std::invalid_argument("integrate_classical: t_grid must be strictly increasing");
    if (method == IntegrationMethod::rk45_adaptive && !(tol > 0.0))
        throw std::invalid_argument("integrate_classical: adaptive method needs tol > 0");

    ClassicalTrajectory traj;
    traj.declared_tol = tol;
    traj.times = t_grid;
    traj.points.reserve(t_grid.size());
    traj.energies.reserve(t_grid.size());

    State s = pack(z0);
    traj.points.push_back(z0);
    traj.energies.push_back(H.evaluate(z0, t_grid[0]));

    if (method == IntegrationMethod::rk4_fixed) {
        for (std::size_t i = 1; i < t_grid.size(); ++i) {
            s = rk4_step(H, s, t_grid[i - 1], t_grid[i] - t_grid[i - 1]);
            PhasePoint z = unpack(s);
            if (!z.finite()) throw NumericalError("integrate_classical: non-finite state", t_grid[i]);
            traj.energies.push_back(H.evaluate(z, t_grid[i]));
            traj.points.push_back(std::move(z));
        }
        return traj;
    }

    double t = t_grid[0];
    double h = (t_grid[1] - t_grid[0]) / 8.0;
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        const double t_target = t_grid[i];
        while (t < t_target) {
            const double h_try = std::min(h, t_target - t);
            const auto r = dopri45_step(H, s, t, h_try, tol);
            if (r.err_norm <= 1.0) {
                s = r.y;
                t += h_try;
                const double grow = 0.9 * std::pow(std::max(r.err_norm, 1e-10), -0.2);
                h = h_try * std::min(5.0, grow);
            } else {
                h = h_try * std::max(0.1, 0.9 * std::pow(r.err_norm, -0.25));
            }
            if (h < 1e-14 * std::max(1.0, std::abs(t)))
                throw NumericalError("integrate_classical: step size underflow", t);
        }
        PhasePoint z = unpack(s);
        if (!z.finite()) throw NumericalError("integrate_classical: non-finite state", t);
        traj.energies.push_back(H.evaluate(z, t_target));
        traj.points.push_back(std::move(z));
    }
    return traj;
}

}  // namespace gselab

#pragma once

#include <utility>
#include <vector>

#include "gselab/poly.hpp"
#include "gselab/types.hpp"

namespace gselab {

/// Scalar time-dependence multiplying a polynomial drive shape.
struct DriveSpec {
    enum class Kind { constant, cosine, periodic_kick };

    Kind kind = Kind::constant;
    double amplitude = 1.0;          // constant value, or cosine amplitude
    double angular_frequency = 0.0;  // cosine
    double phase_offset = 0.0;       // cosine
    double strength = 0.0;           // periodic_kick: area of one pulse
    double period = 0.0;             // periodic_kick
    double width = 0.0;              // periodic_kick: Gaussian sigma; 0 selects period/100

    static DriveSpec constant(double value);
    static DriveSpec cosine(double amplitude, double angular_frequency, double phase_offset = 0.0);
    static DriveSpec periodic_kick(double strength, double period, double width = 0.0);

    void validate() const;

    /// Drive value at time t. Kicks are unit-area Gaussian pulses scaled by
    /// strength, centered on integer multiples of the period.
    double value(double t) const;

    bool operator==(const DriveSpec&) const = default;
};

/// H(q,p,t) = static part + sum of drive(t) * shape(q,p). Partial derivatives
/// of all parts are precomputed on construction; instances are immutable.
class DrivenHamiltonian {
public:
    DrivenHamiltonian() : DrivenHamiltonian(PolyObservable(1)) {}
    explicit DrivenHamiltonian(PolyObservable static_part,
                               std::vector<std::pair<DriveSpec, PolyObservable>> drives = {});

    std::size_t n_dof() const { return static_part_.n_dof(); }
    const PolyObservable& static_part() const { return static_part_; }
    const std::vector<std::pair<DriveSpec, PolyObservable>>& drives() const { return drives_; }
    bool time_dependent() const { return !drives_.empty(); }

    double evaluate(const PhasePoint& z, double t) const;

    /// dH/dq_d and dH/dp_d at (z, t), using the cached symbolic gradients.
    double dq(std::size_t dof, const PhasePoint& z, double t) const;
    double dp(std::size_t dof, const PhasePoint& z, double t) const;

    /// The full classical function at a frozen time: static + drive(t)*shape.
    PolyObservable frozen(double t) const;

    bool operator==(const DrivenHamiltonian& o) const {
        return static_part_ == o.static_part_ && drives_ == o.drives_;
    }

private:
    PolyObservable static_part_;
    std::vector<std::pair<DriveSpec, PolyObservable>> drives_;
    // gradients_[k] holds {dq_0..dq_{n-1}, dp_0..dp_{n-1}} of part k
    // (k = 0 is the static part, k >= 1 the drive shapes).
    std::vector<std::vector<PolyObservable>> gradients_;
};

/// Hamilton's equations right-hand side: (dq/dt, dp/dt) = (dH/dp, -dH/dq).
std::pair<std::vector<double>, std::vector<double>> hamilton_rhs(const DrivenHamiltonian& H,
                                                                 const PhasePoint& z, double t);

enum class IntegrationMethod { rk4_fixed, rk45_adaptive };

/// Sampled solution of Hamilton's equations with the energy along the way.
struct ClassicalTrajectory {
    std::vector<double> times;
    std::vector<PhasePoint> points;
    std::vector<double> energies;
    double declared_tol = 0.0;

    std::size_t size() const { return times.size(); }
    bool uniform(double rel_tol = 1e-9) const;
};

/// Integrates Hamilton's equations, sampling exactly at t_grid. rk4_fixed takes
/// one step per grid interval; rk45_adaptive (Dormand-Prince) controls the local
/// error against tol and lands on every grid point.
ClassicalTrajectory integrate_classical(const DrivenHamiltonian& H, const PhasePoint& z0,
                                        const std::vector<double>& t_grid,
                                        IntegrationMethod method, double tol);

/// Uniform grid helper: n_samples points from t0 to t1 inclusive.
std::vector<double> linspace(double t0, double t1, std::size_t n_samples);

}  // namespace gselab

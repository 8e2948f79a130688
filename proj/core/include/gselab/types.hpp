#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace gselab {

/// Physical constants of a model: hbar plus one mass per degree of freedom.
struct ModelConstants {
    double hbar = 1.0;
    std::vector<double> masses = {1.0};

    std::size_t n_dof() const { return masses.size(); }

    void validate() const {
        if (!(hbar > 0.0)) throw std::invalid_argument("ModelConstants: hbar must be > 0");
        if (masses.empty()) throw std::invalid_argument("ModelConstants: at least one mass required");
        for (double m : masses)
            if (!(m > 0.0)) throw std::invalid_argument("ModelConstants: every mass must be > 0");
    }
};

/// A point (q, p) in phase space. Entries must be finite.
struct PhasePoint {
    std::vector<double> q;
    std::vector<double> p;

    PhasePoint() = default;
    PhasePoint(std::vector<double> q_, std::vector<double> p_) : q(std::move(q_)), p(std::move(p_)) {
        if (q.size() != p.size())
            throw std::invalid_argument("PhasePoint: q and p must have equal length");
    }
    /// 1-DOF convenience.
    PhasePoint(double q0, double p0) : q{q0}, p{p0} {}

    std::size_t n_dof() const { return q.size(); }

    bool finite() const {
        for (double v : q)
            if (!std::isfinite(v)) return false;
        for (double v : p)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const PhasePoint&) const = default;
};

/// Thrown when a numerical method fails mid-run; carries the simulation time.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double time)
        : std::runtime_error(what + " (at t = " + std::to_string(time) + ")"), time_(time) {}

    double time() const { return time_; }

private:
    double time_;
};

/// Thrown by config parsing; the message names the offending key.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

}  // namespace detail

}  // namespace gselab

#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "gselab/types.hpp"

namespace gselab {

enum class Coordinate { q, p };

/// Sparse real-coefficient polynomial on phase space: a finite map from
/// per-DOF (q-power, p-power) multi-indices to coefficients. Zero coefficients
/// are never stored, so equality of term maps is polynomial equality.
class PolyObservable {
public:
    struct Monomial {
        std::vector<std::uint8_t> q_pow;
        std::vector<std::uint8_t> p_pow;

        auto operator<=>(const Monomial&) const = default;

        unsigned total_degree() const {
            unsigned d = 0;
            for (auto v : q_pow) d += v;
            for (auto v : p_pow) d += v;
            return d;
        }
    };

    using TermMap = std::map<Monomial, double>;

    explicit PolyObservable(std::size_t n_dof = 1) : n_dof_(n_dof) {
        if (n_dof == 0) throw std::invalid_argument("PolyObservable: n_dof must be positive");
    }

    static PolyObservable constant(std::size_t n_dof, double c);
    static PolyObservable monomial(std::vector<unsigned> q_pow, std::vector<unsigned> p_pow,
                                   double coeff);
    /// 1-DOF convenience: coeff * q^m p^k.
    static PolyObservable term1d(unsigned m, unsigned k, double coeff);

    std::size_t n_dof() const { return n_dof_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(const Monomial& mono, double coeff);

    PolyObservable& operator+=(const PolyObservable& rhs);
    PolyObservable& operator-=(const PolyObservable& rhs);
    PolyObservable& operator*=(double s);

    friend PolyObservable operator+(PolyObservable a, const PolyObservable& b) { return a += b; }
    friend PolyObservable operator-(PolyObservable a, const PolyObservable& b) { return a -= b; }
    friend PolyObservable operator*(PolyObservable a, double s) { return a *= s; }
    friend PolyObservable operator*(double s, PolyObservable a) { return a *= s; }
    PolyObservable operator*(const PolyObservable& rhs) const;

    bool operator==(const PolyObservable&) const = default;

    /// Exact symbolic partial derivative of the given order.
    PolyObservable derivative(std::size_t dof, Coordinate which, unsigned order = 1) const;

    double evaluate(const PhasePoint& z) const;

    /// Largest q-power (resp. p-power) appearing on the given DOF.
    unsigned max_power(std::size_t dof, Coordinate which) const;

    /// True when every monomial is a pure q-power or a pure p-power.
    bool separable() const;

private:
    std::size_t n_dof_;
    TermMap terms_;
};

}  // namespace gselab

#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gselab/poly.hpp"

namespace gselab {

/// Coefficient graded by powers of hbar: sum_j c_j * hbar^j with complex c_j.
/// Zero entries are never stored.
class HbarSeries {
public:
    using Map = std::map<unsigned, std::complex<double>>;

    HbarSeries() = default;
    HbarSeries(std::complex<double> c, unsigned hbar_pow = 0) { add(hbar_pow, c); }

    const Map& entries() const { return entries_; }
    bool is_zero() const { return entries_.empty(); }

    void add(unsigned hbar_pow, std::complex<double> c);

    HbarSeries& operator+=(const HbarSeries& rhs);
    HbarSeries& operator*=(std::complex<double> s);
    /// Multiply by s * hbar^shift.
    HbarSeries shifted(std::complex<double> s, unsigned shift) const;
    HbarSeries conj() const;
    HbarSeries operator-() const;

    friend HbarSeries operator+(HbarSeries a, const HbarSeries& b) { return a += b; }
    friend HbarSeries operator*(HbarSeries a, std::complex<double> s) { return a *= s; }

    /// Numeric value with hbar substituted.
    std::complex<double> value(double hbar) const;

    bool operator==(const HbarSeries&) const = default;

    double max_abs() const;

private:
    Map entries_;
};

/// Canonically ordered operator polynomial: each term q^a p^b per degree of
/// freedom (all q-hat factors left of all p-hat factors; distinct DOFs
/// commute), with an hbar-graded complex coefficient.
class CanonicalOperatorPoly {
public:
    using Index = PolyObservable::Monomial;  // a = q-powers, b = p-powers
    using TermMap = std::map<Index, HbarSeries>;

    explicit CanonicalOperatorPoly(std::size_t n_dof = 1) : n_dof_(n_dof) {
        if (n_dof == 0) throw std::invalid_argument("CanonicalOperatorPoly: n_dof must be positive");
    }

    std::size_t n_dof() const { return n_dof_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add(const Index& idx, const HbarSeries& c);
    void add(const Index& idx, std::complex<double> c, unsigned hbar_pow = 0);

    CanonicalOperatorPoly& operator+=(const CanonicalOperatorPoly& rhs);
    CanonicalOperatorPoly& operator*=(std::complex<double> s);
    friend CanonicalOperatorPoly operator+(CanonicalOperatorPoly a, const CanonicalOperatorPoly& b) {
        return a += b;
    }
    friend CanonicalOperatorPoly operator*(CanonicalOperatorPoly a, std::complex<double> s) {
        return a *= s;
    }

    bool operator==(const CanonicalOperatorPoly&) const = default;

    /// Coefficient lookup; zero when absent.
    std::complex<double> coefficient(const Index& idx, unsigned hbar_pow) const;
    /// 1-DOF convenience.
    std::complex<double> coefficient1d(unsigned a, unsigned b, unsigned hbar_pow) const;

    /// True when the term is scalar (identity operator component).
    static bool is_identity_index(const Index& idx);

    /// True when every term is a pure q-power or pure p-power.
    bool separable() const;

    /// Largest coefficient magnitude over all terms and hbar powers.
    double max_abs_coefficient() const;

    /// Coefficient-wise comparison with absolute tolerance scaled by the
    /// largest coefficient of either operand.
    static bool approx_equal(const CanonicalOperatorPoly& x, const CanonicalOperatorPoly& y,
                             double rel_tol);

    /// Stable text form, e.g. "q^1 p^1 (1) + 1 (-0.5i hbar)". Terms are sorted
    /// by descending total degree, then descending index; hbar powers ascend
    /// inside the parentheses.
    std::string to_string() const;

private:
    std::size_t n_dof_;
    TermMap terms_;
};

}  // namespace gselab

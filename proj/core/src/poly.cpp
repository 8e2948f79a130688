#include "gselab/poly.hpp"

#include <cstdio>
#include <cstdlib>

namespace gselab {

namespace detail {

std::string format_double(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

}  // namespace detail

PolyObservable PolyObservable::constant(std::size_t n_dof, double c) {
    PolyObservable f(n_dof);
    Monomial m;
    m.q_pow.assign(n_dof, 0);
    m.p_pow.assign(n_dof, 0);
    f.add_term(m, c);
    return f;
}

PolyObservable PolyObservable::monomial(std::vector<unsigned> q_pow, std::vector<unsigned> p_pow,
                                        double coeff) {
    if (q_pow.size() != p_pow.size() || q_pow.empty())
        throw std::invalid_argument("PolyObservable::monomial: power vectors must be nonempty and equal length");
    PolyObservable f(q_pow.size());
    Monomial m;
    m.q_pow.assign(q_pow.begin(), q_pow.end());
    m.p_pow.assign(p_pow.begin(), p_pow.end());
    f.add_term(m, coeff);
    return f;
}

PolyObservable PolyObservable::term1d(unsigned m, unsigned k, double coeff) {
    return monomial({m}, {k}, coeff);
}

void PolyObservable::add_term(const Monomial& mono, double coeff) {
    if (mono.q_pow.size() != n_dof_ || mono.p_pow.size() != n_dof_)
        throw std::invalid_argument("PolyObservable::add_term: monomial DOF mismatch");
    if (coeff == 0.0) return;
    auto [it, inserted] = terms_.emplace(mono, coeff);
    if (!inserted) {
        it->second += coeff;
        if (it->second == 0.0) terms_.erase(it);
    }
}

PolyObservable& PolyObservable::operator+=(const PolyObservable& rhs) {
    if (rhs.n_dof_ != n_dof_)
        throw std::invalid_argument("PolyObservable: DOF mismatch in +=");
    for (const auto& [mono, c] : rhs.terms_) add_term(mono, c);
    return *this;
}

PolyObservable& PolyObservable::operator-=(const PolyObservable& rhs) {
    if (rhs.n_dof_ != n_dof_)
        throw std::invalid_argument("PolyObservable: DOF mismatch in -=");
    for (const auto& [mono, c] : rhs.terms_) add_term(mono, -c);
    return *this;
}

PolyObservable& PolyObservable::operator*=(double s) {
    if (s == 0.0) {
        terms_.clear();
        return *this;
    }
    for (auto& [mono, c] : terms_) c *= s;
    return *this;
}

PolyObservable PolyObservable::operator*(const PolyObservable& rhs) const {
    if (rhs.n_dof_ != n_dof_)
        throw std::invalid_argument("PolyObservable: DOF mismatch in *");
    PolyObservable out(n_dof_);
    for (const auto& [ma, ca] : terms_) {
        for (const auto& [mb, cb] : rhs.terms_) {
            Monomial m = ma;
            for (std::size_t d = 0; d < n_dof_; ++d) {
                m.q_pow[d] = static_cast<std::uint8_t>(m.q_pow[d] + mb.q_pow[d]);
                m.p_pow[d] = static_cast<std::uint8_t>(m.p_pow[d] + mb.p_pow[d]);
            }
            out.add_term(m, ca * cb);
        }
    }
    return out;
}

PolyObservable PolyObservable::derivative(std::size_t dof, Coordinate which, unsigned order) const {
    if (dof >= n_dof_)
        throw std::invalid_argument("PolyObservable::derivative: dof index out of range");
    PolyObservable out = *this;
    for (unsigned rep = 0; rep < order; ++rep) {
        PolyObservable next(n_dof_);
        for (const auto& [mono, c] : out.terms_) {
            unsigned pw = (which == Coordinate::q) ? mono.q_pow[dof] : mono.p_pow[dof];
            if (pw == 0) continue;
            Monomial m = mono;
            if (which == Coordinate::q)
                m.q_pow[dof] = static_cast<std::uint8_t>(pw - 1);
            else
                m.p_pow[dof] = static_cast<std::uint8_t>(pw - 1);
            next.add_term(m, c * static_cast<double>(pw));
        }
        out = std::move(next);
    }
    return out;
}

double PolyObservable::evaluate(const PhasePoint& z) const {
    if (z.n_dof() != n_dof_)
        throw std::invalid_argument("PolyObservable::evaluate: phase point DOF mismatch");
    double sum = 0.0;
    for (const auto& [mono, c] : terms_) {
        double v = c;
        for (std::size_t d = 0; d < n_dof_; ++d) {
            for (unsigned i = 0; i < mono.q_pow[d]; ++i) v *= z.q[d];
            for (unsigned i = 0; i < mono.p_pow[d]; ++i) v *= z.p[d];
        }
        sum += v;
    }
    return sum;
}

unsigned PolyObservable::max_power(std::size_t dof, Coordinate which) const {
    unsigned mx = 0;
    for (const auto& [mono, c] : terms_) {
        unsigned pw = (which == Coordinate::q) ? mono.q_pow[dof] : mono.p_pow[dof];
        if (pw > mx) mx = pw;
    }
    return mx;
}

bool PolyObservable::separable() const {
    for (const auto& [mono, c] : terms_) {
        unsigned qd = 0, pd = 0;
        for (std::size_t d = 0; d < n_dof_; ++d) {
            qd += mono.q_pow[d];
            pd += mono.p_pow[d];
        }
        if (qd > 0 && pd > 0) return false;
    }
    return true;
}

}  // namespace gselab

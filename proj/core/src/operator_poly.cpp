#include "gselab/operator_poly.hpp"

#include <algorithm>
#include <sstream>

namespace gselab {

void HbarSeries::add(unsigned hbar_pow, std::complex<double> c) {
    if (c == std::complex<double>(0.0, 0.0)) return;
    auto [it, inserted] = entries_.emplace(hbar_pow, c);
    if (!inserted) {
        it->second += c;
        if (it->second == std::complex<double>(0.0, 0.0)) entries_.erase(it);
    }
}

HbarSeries& HbarSeries::operator+=(const HbarSeries& rhs) {
    for (const auto& [pw, c] : rhs.entries_) add(pw, c);
    return *this;
}

HbarSeries& HbarSeries::operator*=(std::complex<double> s) {
    if (s == std::complex<double>(0.0, 0.0)) {
        entries_.clear();
        return *this;
    }
    for (auto& [pw, c] : entries_) c *= s;
    return *this;
}

HbarSeries HbarSeries::shifted(std::complex<double> s, unsigned shift) const {
    HbarSeries out;
    for (const auto& [pw, c] : entries_) out.add(pw + shift, c * s);
    return out;
}

HbarSeries HbarSeries::conj() const {
    HbarSeries out;
    for (const auto& [pw, c] : entries_) out.add(pw, std::conj(c));
    return out;
}

HbarSeries HbarSeries::operator-() const {
    HbarSeries out(*this);
    out *= -1.0;
    return out;
}

std::complex<double> HbarSeries::value(double hbar) const {
    std::complex<double> v = 0.0;
    for (const auto& [pw, c] : entries_) v += c * std::pow(hbar, static_cast<double>(pw));
    return v;
}

double HbarSeries::max_abs() const {
    double m = 0.0;
    for (const auto& [pw, c] : entries_) m = std::max(m, std::abs(c));
    return m;
}

void CanonicalOperatorPoly::add(const Index& idx, const HbarSeries& c) {
    if (idx.q_pow.size() != n_dof_ || idx.p_pow.size() != n_dof_)
        throw std::invalid_argument("CanonicalOperatorPoly::add: index DOF mismatch");
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.emplace(idx, c);
    if (!inserted) {
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

void CanonicalOperatorPoly::add(const Index& idx, std::complex<double> c, unsigned hbar_pow) {
    add(idx, HbarSeries(c, hbar_pow));
}

CanonicalOperatorPoly& CanonicalOperatorPoly::operator+=(const CanonicalOperatorPoly& rhs) {
    if (rhs.n_dof_ != n_dof_)
        throw std::invalid_argument("CanonicalOperatorPoly: DOF mismatch in +=");
    for (const auto& [idx, c] : rhs.terms_) add(idx, c);
    return *this;
}

CanonicalOperatorPoly& CanonicalOperatorPoly::operator*=(std::complex<double> s) {
    if (s == std::complex<double>(0.0, 0.0)) {
        terms_.clear();
        return *this;
    }
    for (auto& [idx, c] : terms_) c *= s;
    return *this;
}

std::complex<double> CanonicalOperatorPoly::coefficient(const Index& idx, unsigned hbar_pow) const {
    auto it = terms_.find(idx);
    if (it == terms_.end()) return 0.0;
    auto jt = it->second.entries().find(hbar_pow);
    return (jt == it->second.entries().end()) ? std::complex<double>(0.0) : jt->second;
}

std::complex<double> CanonicalOperatorPoly::coefficient1d(unsigned a, unsigned b,
                                                          unsigned hbar_pow) const {
    Index idx;
    idx.q_pow = {static_cast<std::uint8_t>(a)};
    idx.p_pow = {static_cast<std::uint8_t>(b)};
    return coefficient(idx, hbar_pow);
}

bool CanonicalOperatorPoly::is_identity_index(const Index& idx) {
    return idx.total_degree() == 0;
}

bool CanonicalOperatorPoly::separable() const {
    for (const auto& [idx, c] : terms_) {
        unsigned qd = 0, pd = 0;
        for (std::size_t d = 0; d < n_dof_; ++d) {
            qd += idx.q_pow[d];
            pd += idx.p_pow[d];
        }
        if (qd > 0 && pd > 0) return false;
    }
    return true;
}

double CanonicalOperatorPoly::max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& [idx, c] : terms_) m = std::max(m, c.max_abs());
    return m;
}

bool CanonicalOperatorPoly::approx_equal(const CanonicalOperatorPoly& x,
                                         const CanonicalOperatorPoly& y, double rel_tol) {
    if (x.n_dof_ != y.n_dof_) return false;
    const double scale = std::max({x.max_abs_coefficient(), y.max_abs_coefficient(), 1.0});
    const double tol = rel_tol * scale;
    auto within = [tol](const CanonicalOperatorPoly& a, const CanonicalOperatorPoly& b) {
        for (const auto& [idx, c] : a.terms_) {
            for (const auto& [pw, v] : c.entries()) {
                if (std::abs(v - b.coefficient(idx, pw)) > tol) return false;
            }
        }
        return true;
    };
    return within(x, y) && within(y, x);
}

namespace {

std::string format_complex(std::complex<double> c) {
    const double re = c.real(), im = c.imag();
    if (im == 0.0) return detail::format_double(re);
    if (re == 0.0) return detail::format_double(im) + "i";
    std::string s = detail::format_double(re);
    s += (im < 0.0) ? "-" : "+";
    s += detail::format_double(std::abs(im));
    s += "i";
    return s;
}

std::string format_index(const CanonicalOperatorPoly::Index& idx) {
    const std::size_t n = idx.q_pow.size();
    std::string s;
    auto append = [&s, n](const char* sym, const std::vector<std::uint8_t>& pows) {
        for (std::size_t d = 0; d < n; ++d) {
            if (pows[d] == 0) continue;
            if (!s.empty()) s += ' ';
            s += sym;
            if (n > 1) s += std::to_string(d + 1);
            s += '^';
            s += std::to_string(static_cast<unsigned>(pows[d]));
        }
    };
    append("q", idx.q_pow);
    append("p", idx.p_pow);
    if (s.empty()) s = "1";
    return s;
}

}  // namespace

std::string CanonicalOperatorPoly::to_string() const {
    if (terms_.empty()) return "0";
    std::vector<const TermMap::value_type*> sorted;
    sorted.reserve(terms_.size());
    for (const auto& kv : terms_) sorted.push_back(&kv);
    std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
        const unsigned da = a->first.total_degree(), db = b->first.total_degree();
        if (da != db) return da > db;
        return b->first < a->first;
    });
    std::string out;
    for (const auto* kv : sorted) {
        if (!out.empty()) out += " + ";
        out += format_index(kv->first);
        out += " (";
        bool first = true;
        for (const auto& [pw, c] : kv->second.entries()) {
            if (!first) out += " + ";
            first = false;
            out += format_complex(c);
            if (pw == 1) out += " hbar";
            if (pw >= 2) out += " hbar^" + std::to_string(pw);
        }
        out += ")";
    }
    return out;
}

}  // namespace gselab

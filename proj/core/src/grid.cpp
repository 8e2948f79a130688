#include "gselab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gselab/fft.hpp"

namespace gselab {

void GridSpec::validate() const {
    if (!fft::is_pow2(n_points))
        throw std::invalid_argument("GridSpec: n_points must be a power of two");
    if (!(q_min < q_max)) throw std::invalid_argument("GridSpec: q_min must be < q_max");
}

double GridSpec::dk() const { return 2.0 * M_PI / length(); }

double GridSpec::k_at(std::size_t i) const {
    const auto n = static_cast<std::ptrdiff_t>(n_points);
    auto f = static_cast<std::ptrdiff_t>(i);
    if (f >= n / 2) f -= n;
    return 2.0 * M_PI * static_cast<double>(f) / length();
}

GridState::GridState(GridSpec spec, std::vector<std::complex<double>> amplitudes)
    : spec_(spec), amp_(std::move(amplitudes)) {
    spec_.validate();
    if (amp_.size() != spec_.n_points)
        throw std::invalid_argument("GridState: amplitude count does not match grid");
}

double norm(const GridState& s) {
    double n2 = 0.0;
    for (const auto& a : s.amplitudes()) n2 += std::norm(a);
    return std::sqrt(n2 * s.spec().dq());
}

GridState normalize(const GridState& s) {
    const double n = norm(s);
    if (!(n > 0.0)) throw std::invalid_argument("normalize: zero state");
    auto amp = s.amplitudes();
    const double inv = 1.0 / n;
    for (auto& a : amp) a *= inv;
    return GridState(s.spec(), std::move(amp));
}

std::complex<double> inner_product(const GridState& s1, const GridState& s2) {
    if (!(s1.spec() == s2.spec()))
        throw std::invalid_argument("inner_product: grid spec mismatch");
    std::complex<double> acc = 0.0;
    const auto& a = s1.amplitudes();
    const auto& b = s2.amplitudes();
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc * s1.spec().dq();
}

double metric_distance(const GridState& s1, const GridState& s2) {
    const std::complex<double> ov = inner_product(s1, s2);
    const double d = 1.0 - std::norm(ov);
    return std::clamp(d, 0.0, 1.0);
}

double expectation_q(const GridState& s) {
    const auto& a = s.amplitudes();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double w = std::norm(a[i]);
        num += s.spec().q_at(i) * w;
        den += w;
    }
    return num / den;
}

namespace {

std::vector<std::complex<double>> transform_of(const GridState& s) {
    auto ft = s.amplitudes();
    fft::forward(ft);
    return ft;
}

}  // namespace

double expectation_p(const GridState& s, const ModelConstants& constants) {
    const auto ft = transform_of(s);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ft.size(); ++i) {
        const double w = std::norm(ft[i]);
        num += s.spec().k_at(i) * w;
        den += w;
    }
    return constants.hbar * num / den;
}

double central_moment(const GridState& s, unsigned order) {
    const double qbar = expectation_q(s);
    const auto& a = s.amplitudes();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double w = std::norm(a[i]);
        double x = 1.0;
        const double dqi = s.spec().q_at(i) - qbar;
        for (unsigned r = 0; r < order; ++r) x *= dqi;
        num += x * w;
        den += w;
    }
    return num / den;
}

double sigma_q(const GridState& s) { return std::sqrt(central_moment(s, 2)); }

double sigma_p(const GridState& s, const ModelConstants& constants) {
    const auto ft = transform_of(s);
    double num = 0.0, den = 0.0, pbar_num = 0.0;
    for (std::size_t i = 0; i < ft.size(); ++i) {
        const double w = std::norm(ft[i]);
        pbar_num += s.spec().k_at(i) * w;
        den += w;
    }
    const double kbar = pbar_num / den;
    for (std::size_t i = 0; i < ft.size(); ++i) {
        const double w = std::norm(ft[i]);
        const double dk = s.spec().k_at(i) - kbar;
        num += dk * dk * w;
    }
    return constants.hbar * std::sqrt(num / den);
}

double uncertainty_product(const GridState& s, const ModelConstants& constants) {
    const double sq = sigma_q(s);
    const double sp = sigma_p(s, constants);
    return sq * sq * sp * sp;
}

namespace {

double hermite_poly(unsigned n, double x) {
    double h0 = 1.0;
    if (n == 0) return h0;
    double h1 = 2.0 * x;
    for (unsigned k = 1; k < n; ++k) {
        const double h2 = 2.0 * x * h1 - 2.0 * static_cast<double>(k) * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

}  // namespace

GridState make_envelope(const EnvelopeSpec& env, const GridSpec& spec,
                        const ModelConstants& constants) {
    (void)constants;
    spec.validate();
    if (!(env.sigma > 0.0)) throw std::invalid_argument("make_envelope: sigma must be > 0");
    const double extent = (env.kind == EnvelopeSpec::Kind::symmetric_double_gaussian)
                              ? std::abs(env.separation) / 2.0
                              : 0.0;
    const double margin = 6.0 * env.sigma + extent;
    if (spec.q_max < margin || -spec.q_min < margin)
        throw std::invalid_argument("make_envelope: envelope too wide for box (need 6 sigma margin)");

    std::vector<std::complex<double>> amp(spec.n_points);
    const double s2 = env.sigma * env.sigma;
    for (std::size_t i = 0; i < spec.n_points; ++i) {
        const double q = spec.q_at(i);
        double v = 0.0;
        switch (env.kind) {
            case EnvelopeSpec::Kind::gaussian:
                v = std::exp(-q * q / (4.0 * s2));
                break;
            case EnvelopeSpec::Kind::hermite:
                v = hermite_poly(env.hermite_n, q / (env.sigma * std::sqrt(2.0))) *
                    std::exp(-q * q / (4.0 * s2));
                break;
            case EnvelopeSpec::Kind::symmetric_double_gaussian: {
                const double l = q - env.separation / 2.0;
                const double r = q + env.separation / 2.0;
                v = std::exp(-l * l / (4.0 * s2)) + std::exp(-r * r / (4.0 * s2));
                break;
            }
        }
        amp[i] = v;
    }
    return normalize(GridState(spec, std::move(amp)));
}

GridState spectral_shift(const GridState& s, double shift) {
    auto ft = transform_of(s);
    for (std::size_t i = 0; i < ft.size(); ++i) {
        const double ang = -s.spec().k_at(i) * shift;
        ft[i] *= std::complex<double>(std::cos(ang), std::sin(ang));
    }
    fft::inverse(ft);
    return GridState(s.spec(), std::move(ft));
}

GridState center_envelope(const GridState& s, const ModelConstants& constants) {
    const double qbar = expectation_q(s);
    const double pbar = expectation_p(s, constants);
    const double dq = s.spec().dq();
    const auto n = static_cast<std::ptrdiff_t>(s.size());

    // psi(q + qbar): integer roll first, spectral shift for the remainder.
    const auto m = static_cast<std::ptrdiff_t>(std::llround(qbar / dq));
    auto amp = s.amplitudes();
    if (m != 0) {
        std::vector<std::complex<double>> rolled(amp.size());
        for (std::ptrdiff_t i = 0; i < n; ++i) rolled[i] = amp[((i + m) % n + n) % n];
        amp = std::move(rolled);
    }
    GridState shifted(s.spec(), std::move(amp));
    const double frac = qbar - static_cast<double>(m) * dq;
    if (frac != 0.0) shifted = spectral_shift(shifted, -frac);

    auto out = std::move(shifted.mutable_amplitudes());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double ang = -pbar * s.spec().q_at(i) / constants.hbar;
        out[i] *= std::complex<double>(std::cos(ang), std::sin(ang));
    }
    return GridState(s.spec(), std::move(out));
}

GridState apply_operator(const CanonicalOperatorPoly& X, const GridState& s,
                         const ModelConstants& constants) {
    if (X.n_dof() != 1)
        throw std::invalid_argument("apply_operator: only 1-DOF operators act on grid states");
    const std::size_t n = s.size();
    std::vector<std::complex<double>> result(n, 0.0);

    // Group terms by p-power so each power needs one inverse transform.
    std::vector<std::vector<std::pair<unsigned, std::complex<double>>>> by_p;
    for (const auto& [idx, coef] : X.terms()) {
        const unsigned b = idx.p_pow[0];
        if (by_p.size() <= b) by_p.resize(b + 1);
        by_p[b].emplace_back(idx.q_pow[0], coef.value(constants.hbar));
    }

    const auto ft0 = transform_of(s);
    for (unsigned b = 0; b < by_p.size(); ++b) {
        if (by_p[b].empty()) continue;
        std::vector<std::complex<double>> branch;
        if (b == 0) {
            branch = s.amplitudes();
        } else {
            branch = ft0;
            for (std::size_t i = 0; i < n; ++i) {
                double f = 1.0;
                const double hk = constants.hbar * s.spec().k_at(i);
                for (unsigned r = 0; r < b; ++r) f *= hk;
                branch[i] *= f;
            }
            fft::inverse(branch);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double q = s.spec().q_at(i);
            std::complex<double> c = 0.0;
            for (const auto& [a, coef] : by_p[b]) {
                double qa = 1.0;
                for (unsigned r = 0; r < a; ++r) qa *= q;
                c += coef * qa;
            }
            result[i] += c * branch[i];
        }
    }
    return GridState(s.spec(), std::move(result));
}

std::complex<double> expectation_operator(const CanonicalOperatorPoly& X, const GridState& s,
                                          const ModelConstants& constants) {
    return inner_product(s, apply_operator(X, s, constants));
}

void write_state(std::ostream& os, const GridState& s) {
    os << "gselab-state 1\n";
    os << "n_points " << s.spec().n_points << "\n";
    os << "q_min " << detail::format_double(s.spec().q_min) << "\n";
    os << "q_max " << detail::format_double(s.spec().q_max) << "\n";
    for (const auto& a : s.amplitudes())
        os << detail::format_double(a.real()) << " " << detail::format_double(a.imag()) << "\n";
}

GridState read_state(std::istream& is) {
    std::string magic;
    int version = 0;
    is >> magic >> version;
    if (magic != "gselab-state" || version != 1)
        throw std::invalid_argument("read_state: unrecognized header");
    GridSpec spec;
    std::string key;
    is >> key >> spec.n_points;
    if (key != "n_points") throw std::invalid_argument("read_state: expected n_points");
    is >> key >> spec.q_min;
    if (key != "q_min") throw std::invalid_argument("read_state: expected q_min");
    is >> key >> spec.q_max;
    if (key != "q_max") throw std::invalid_argument("read_state: expected q_max");
    std::vector<std::complex<double>> amp(spec.n_points);
    for (auto& a : amp) {
        double re, im;
        if (!(is >> re >> im)) throw std::invalid_argument("read_state: truncated sample data");
        a = {re, im};
    }
    return GridState(spec, std::move(amp));
}

void save_state(const std::string& path, const GridState& s) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_state: cannot open " + path);
    write_state(os, s);
}

GridState load_state(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_state: cannot open " + path);
    return read_state(is);
}

double boundary_density(const GridState& s) {
    const auto& a = s.amplitudes();
    const std::size_t n = a.size();
    double mx = 0.0;
    for (std::size_t i = 0; i < 3 && i < n; ++i) {
        mx = std::max(mx, std::norm(a[i]));
        mx = std::max(mx, std::norm(a[n - 1 - i]));
    }
    return mx;
}

}  // namespace gselab

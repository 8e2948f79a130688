#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include "gselab/operator_poly.hpp"
#include "gselab/types.hpp"

namespace gselab {

/// Uniform periodic 1-D coordinate grid. The momentum grid uses the unitary
/// Fourier convention with signed-integer frequency layout:
///   psi~_j = dq / sqrt(2 pi) * sum_i psi_i exp(-i k_j q_i),
///   k_j = 2 pi f_j / L, f_j = j for j < n/2, j - n otherwise,
/// so that sum |psi_i|^2 dq = sum |psi~_j|^2 dk with dk = 2 pi / L.
struct GridSpec {
    std::size_t n_points = 0;
    double q_min = 0.0;
    double q_max = 0.0;

    void validate() const;

    double length() const { return q_max - q_min; }
    double dq() const { return length() / static_cast<double>(n_points); }
    double dk() const;
    double q_at(std::size_t i) const { return q_min + dq() * static_cast<double>(i); }
    double k_at(std::size_t i) const;

    bool operator==(const GridSpec&) const = default;
};

/// Complex wavefunction samples on a GridSpec. Values are immutable in spirit:
/// operations return fresh states.
class GridState {
public:
    GridState(GridSpec spec, std::vector<std::complex<double>> amplitudes);

    const GridSpec& spec() const { return spec_; }
    const std::vector<std::complex<double>>& amplitudes() const { return amp_; }
    std::vector<std::complex<double>>& mutable_amplitudes() { return amp_; }
    std::size_t size() const { return amp_.size(); }

private:
    GridSpec spec_;
    std::vector<std::complex<double>> amp_;
};

struct EnvelopeSpec {
    enum class Kind { gaussian, hermite, symmetric_double_gaussian };
    Kind kind = Kind::gaussian;
    double sigma = 1.0;
    unsigned hermite_n = 1;     // hermite only
    double separation = 0.0;    // symmetric_double_gaussian only

    bool operator==(const EnvelopeSpec&) const = default;
};

double norm(const GridState& s);
GridState normalize(const GridState& s);

std::complex<double> inner_product(const GridState& s1, const GridState& s2);

/// d(psi1, psi2) = 1 - |<psi1|psi2>|^2; both states must be unit norm.
double metric_distance(const GridState& s1, const GridState& s2);

double expectation_q(const GridState& s);
double expectation_p(const GridState& s, const ModelConstants& constants);

/// j-th central moment of position.
double central_moment(const GridState& s, unsigned order);
double sigma_q(const GridState& s);
double sigma_p(const GridState& s, const ModelConstants& constants);
/// sigma_q^2 * sigma_p^2.
double uncertainty_product(const GridState& s, const ModelConstants& constants);

/// Unit-norm envelope with <q> = <p> = 0. Throws when the envelope does not
/// fit the box with a 6 sigma margin.
GridState make_envelope(const EnvelopeSpec& env, const GridSpec& spec,
                        const ModelConstants& constants);

/// exp(-i <p> q / hbar) * psi(q + <q>), realized as an integer grid roll plus
/// a spectral fractional shift. Result is centered to high accuracy.
GridState center_envelope(const GridState& s, const ModelConstants& constants);

/// Translate: result(q) = psi(q - shift), computed spectrally.
GridState spectral_shift(const GridState& s, double shift);

/// Applies a canonically ordered operator polynomial: p-hat powers act
/// spectrally, q-hat powers pointwise, hbar substituted numerically.
GridState apply_operator(const CanonicalOperatorPoly& X, const GridState& s,
                         const ModelConstants& constants);

std::complex<double> expectation_operator(const CanonicalOperatorPoly& X, const GridState& s,
                                          const ModelConstants& constants);

/// Textual state serialization (documented, stable layout).
void write_state(std::ostream& os, const GridState& s);
GridState read_state(std::istream& is);
void save_state(const std::string& path, const GridState& s);
GridState load_state(const std::string& path);

/// max |psi|^2 over the 3 grid points nearest each box edge.
double boundary_density(const GridState& s);

}  // namespace gselab

#pragma once

#include <vector>

#include "gselab/hamiltonian.hpp"
#include "gselab/operator_poly.hpp"

namespace gselab {

enum class OpKind : std::uint8_t { Q, P };

struct OpLetter {
    std::uint32_t dof = 0;
    OpKind kind = OpKind::Q;
    bool operator==(const OpLetter&) const = default;
};

/// A weighted word over the alphabet {Q_k, P_k}.
struct OpWord {
    HbarSeries coeff;
    std::vector<OpLetter> letters;
};

/// Rewrites every word into canonical order (q-hat factors left of p-hat
/// factors within each DOF; distinct DOFs commute freely) by repeated
/// application of P_k Q_k -> Q_k P_k - i hbar, combining like terms.
CanonicalOperatorPoly normal_order_reduce(std::size_t n_dof, const std::vector<OpWord>& words);

/// The Weyl-symmetrized quantization of a real phase-space polynomial:
/// every monomial maps to the average over all interleavings of its q-hat
/// and p-hat factors, reduced to canonical order. Uses the closed-form
/// canonical expansion; exact for dyadic-rational inputs.
CanonicalOperatorPoly weyl_quantize(const PolyObservable& f);

/// Adjoint: reverses each term's word to p^b q^a, conjugates coefficients,
/// and reduces back to canonical order.
CanonicalOperatorPoly adjoint(const CanonicalOperatorPoly& x);

/// True when adjoint(x) equals x. Comparison is exact for exactly-representable
/// coefficients, with a tiny relative tolerance absorbing roundoff from
/// irrational inputs.
bool hermitian_check(const CanonicalOperatorPoly& x, double rel_tol = 1e-12);

enum class GeneratorMode { raw, interpolating };

/// Builds the lambda-deformed dynamical generator at expectation point zbar
/// and time t. Layer k collects the Weyl-symmetrized k-th order fluctuation
/// terms of H about zbar. raw mode weights layer k by lambda^k; interpolating
/// mode by lambda^(k-1) for k >= 1 (layer 0 unweighted), which matches raw at
/// lambda = 1 and keeps the first-order transport terms alive at lambda = 0.
CanonicalOperatorPoly deformed_generator(const DrivenHamiltonian& H, const PhasePoint& zbar,
                                         double t, double lambda, GeneratorMode mode);

/// Generators for each lambda in the list; the coefficients of any fixed term
/// are polynomials in lambda.
std::vector<CanonicalOperatorPoly> lambda_smoothness_probe(const DrivenHamiltonian& H,
                                                           const PhasePoint& zbar, double t,
                                                           GeneratorMode mode,
                                                           const std::vector<double>& lambdas);

}  // namespace gselab

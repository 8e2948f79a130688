#include "gselab/weyl.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace gselab {

namespace {

// Letters sort by DOF, then Q before P.
bool in_order(const OpLetter& a, const OpLetter& b) {
    if (a.dof != b.dof) return a.dof < b.dof;
    return !(a.kind == OpKind::P && b.kind == OpKind::Q);
}

CanonicalOperatorPoly::Index index_of_sorted_word(std::size_t n_dof,
                                                  const std::vector<OpLetter>& letters) {
    CanonicalOperatorPoly::Index idx;
    idx.q_pow.assign(n_dof, 0);
    idx.p_pow.assign(n_dof, 0);
    for (const OpLetter& l : letters) {
        if (l.kind == OpKind::Q)
            ++idx.q_pow[l.dof];
        else
            ++idx.p_pow[l.dof];
    }
    return idx;
}

// Binomial coefficients as exact integers in double.
double binom(unsigned n, unsigned k) {
    static constexpr unsigned N = 34;
    static const auto table = [] {
        std::array<std::array<double, N>, N> t{};
        for (unsigned i = 0; i < N; ++i) {
            t[i][0] = 1.0;
            for (unsigned j = 1; j <= i; ++j)
                t[i][j] = t[i - 1][j - 1] + ((j <= i - 1) ? t[i - 1][j] : 0.0);
        }
        return t;
    }();
    if (k > n) return 0.0;
    if (n >= N) throw std::invalid_argument("binom: order too large");
    return table[n][k];
}

double factorial(unsigned n) {
    double f = 1.0;
    for (unsigned i = 2; i <= n; ++i) f *= static_cast<double>(i);
    return f;
}

// (-i)^k
std::complex<double> minus_i_pow(unsigned k) {
    switch (k % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, -1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, 1.0};
    }
}

// Canonical expansion of the Weyl-symmetrized monomial on one DOF:
//   W(q^m p^n) = sum_k (-i/2)^k hbar^k k! C(m,k) C(n,k) q^(m-k) p^(n-k).
// Returned as (q_pow, p_pow, coeff) triples.
struct McCoyTerm {
    unsigned a, b;
    HbarSeries coeff;
};

std::vector<McCoyTerm> mccoy_expand(unsigned m, unsigned n) {
    std::vector<McCoyTerm> out;
    const unsigned kmax = std::min(m, n);
    out.reserve(kmax + 1);
    for (unsigned k = 0; k <= kmax; ++k) {
        const double mag = factorial(k) * binom(m, k) * binom(n, k) / std::ldexp(1.0, k);
        out.push_back({m - k, n - k, HbarSeries(minus_i_pow(k) * mag, k)});
    }
    return out;
}

}  // namespace

CanonicalOperatorPoly normal_order_reduce(std::size_t n_dof, const std::vector<OpWord>& words) {
    CanonicalOperatorPoly result(n_dof);
    std::vector<OpWord> stack(words);
    while (!stack.empty()) {
        OpWord w = std::move(stack.back());
        stack.pop_back();
        if (w.coeff.is_zero()) continue;

        bool branched = false;
        while (!branched) {
            bool swapped_any = false;
            for (std::size_t i = 0; i + 1 < w.letters.size(); ++i) {
                if (in_order(w.letters[i], w.letters[i + 1])) continue;
                if (w.letters[i].dof != w.letters[i + 1].dof) {
                    std::swap(w.letters[i], w.letters[i + 1]);
                    swapped_any = true;
                    continue;
                }
                // Same DOF with P left of Q: p q = q p - i hbar.
                OpWord contracted;
                contracted.coeff = w.coeff.shifted({0.0, -1.0}, 1);
                contracted.letters.reserve(w.letters.size() - 2);
                contracted.letters.insert(contracted.letters.end(), w.letters.begin(),
                                          w.letters.begin() + static_cast<std::ptrdiff_t>(i));
                contracted.letters.insert(contracted.letters.end(),
                                          w.letters.begin() + static_cast<std::ptrdiff_t>(i) + 2,
                                          w.letters.end());
                std::swap(w.letters[i], w.letters[i + 1]);
                stack.push_back(std::move(contracted));
                stack.push_back(std::move(w));
                branched = true;
                break;
            }
            if (branched || swapped_any) continue;
            result.add(index_of_sorted_word(n_dof, w.letters), w.coeff);
            break;
        }
    }
    return result;
}

CanonicalOperatorPoly weyl_quantize(const PolyObservable& f) {
    const std::size_t n = f.n_dof();
    CanonicalOperatorPoly out(n);
    for (const auto& [mono, c] : f.terms()) {
        // Convolve the per-DOF canonical expansions.
        std::vector<std::pair<CanonicalOperatorPoly::Index, HbarSeries>> acc;
        CanonicalOperatorPoly::Index id0;
        id0.q_pow.assign(n, 0);
        id0.p_pow.assign(n, 0);
        acc.emplace_back(id0, HbarSeries(1.0));
        for (std::size_t d = 0; d < n; ++d) {
            if (mono.q_pow[d] == 0 && mono.p_pow[d] == 0) continue;
            const auto expansion = mccoy_expand(mono.q_pow[d], mono.p_pow[d]);
            std::vector<std::pair<CanonicalOperatorPoly::Index, HbarSeries>> next;
            next.reserve(acc.size() * expansion.size());
            for (const auto& [idx, coef] : acc) {
                for (const auto& term : expansion) {
                    auto idx2 = idx;
                    idx2.q_pow[d] = static_cast<std::uint8_t>(term.a);
                    idx2.p_pow[d] = static_cast<std::uint8_t>(term.b);
                    HbarSeries c2;
                    for (const auto& [pw, v] : coef.entries()) {
                        for (const auto& [pw2, v2] : term.coeff.entries()) c2.add(pw + pw2, v * v2);
                    }
                    next.emplace_back(std::move(idx2), std::move(c2));
                }
            }
            acc = std::move(next);
        }
        for (auto& [idx, coef] : acc) {
            coef *= c;
            out.add(idx, coef);
        }
    }
    return out;
}

CanonicalOperatorPoly adjoint(const CanonicalOperatorPoly& x) {
    const std::size_t n = x.n_dof();
    std::vector<OpWord> words;
    words.reserve(x.terms().size());
    for (const auto& [idx, coef] : x.terms()) {
        OpWord w;
        w.coeff = coef.conj();
        for (std::size_t d = 0; d < n; ++d) {
            for (unsigned i = 0; i < idx.p_pow[d]; ++i)
                w.letters.push_back({static_cast<std::uint32_t>(d), OpKind::P});
            for (unsigned i = 0; i < idx.q_pow[d]; ++i)
                w.letters.push_back({static_cast<std::uint32_t>(d), OpKind::Q});
        }
        words.push_back(std::move(w));
    }
    return normal_order_reduce(n, words);
}

bool hermitian_check(const CanonicalOperatorPoly& x, double rel_tol) {
    const CanonicalOperatorPoly adj = adjoint(x);
    if (adj == x) return true;
    return CanonicalOperatorPoly::approx_equal(adj, x, rel_tol);
}

namespace {

// Canonical expansion of W[(q - qbar)^i (p - pbar)^j] on one DOF.
std::vector<McCoyTerm> fluctuation_expand(unsigned i, unsigned j, double qbar, double pbar) {
    // Power tables keep repeated products consistent.
    std::vector<double> qe(i + 1, 1.0), pe(j + 1, 1.0);
    for (unsigned r = 1; r <= i; ++r) qe[r] = qe[r - 1] * (-qbar);
    for (unsigned s = 1; s <= j; ++s) pe[s] = pe[s - 1] * (-pbar);
    std::vector<McCoyTerm> out;
    for (unsigned r = 0; r <= i; ++r) {
        for (unsigned s = 0; s <= j; ++s) {
            const double w = binom(i, r) * qe[i - r] * binom(j, s) * pe[j - s];
            if (w == 0.0) continue;
            for (auto& term : mccoy_expand(r, s)) {
                bool merged = false;
                HbarSeries scaled = term.coeff;
                scaled *= w;
                for (auto& existing : out) {
                    if (existing.a == term.a && existing.b == term.b) {
                        existing.coeff += scaled;
                        merged = true;
                        break;
                    }
                }
                if (!merged) out.push_back({term.a, term.b, std::move(scaled)});
            }
        }
    }
    return out;
}

void accumulate_monomial_layers(CanonicalOperatorPoly& out, const PolyObservable::Monomial& mono,
                                double scale, const PhasePoint& zbar, double lambda,
                                GeneratorMode mode) {
    const std::size_t n = zbar.n_dof();
    // Per-DOF expectation-value power tables.
    std::vector<std::vector<double>> qb(n), pb(n);
    for (std::size_t d = 0; d < n; ++d) {
        qb[d].assign(mono.q_pow[d] + 1u, 1.0);
        for (unsigned e = 1; e <= mono.q_pow[d]; ++e) qb[d][e] = qb[d][e - 1] * zbar.q[d];
        pb[d].assign(mono.p_pow[d] + 1u, 1.0);
        for (unsigned e = 1; e <= mono.p_pow[d]; ++e) pb[d][e] = pb[d][e - 1] * zbar.p[d];
    }

    // Enumerate fluctuation orders (i_d, j_d) per DOF; the lambda weight
    // depends on the total order across DOFs.
    struct Frag {
        CanonicalOperatorPoly::Index idx;
        HbarSeries coeff;
        unsigned order;
    };
    CanonicalOperatorPoly::Index id0;
    id0.q_pow.assign(n, 0);
    id0.p_pow.assign(n, 0);
    std::vector<Frag> acc{{id0, HbarSeries(1.0), 0}};
    for (std::size_t d = 0; d < n; ++d) {
        std::vector<Frag> next;
        for (unsigned i = 0; i <= mono.q_pow[d]; ++i) {
            for (unsigned j = 0; j <= mono.p_pow[d]; ++j) {
                const double w =
                    binom(mono.q_pow[d], i) * qb[d][mono.q_pow[d] - i] *
                    binom(mono.p_pow[d], j) * pb[d][mono.p_pow[d] - j];
                if (w == 0.0) continue;
                const auto expansion = fluctuation_expand(i, j, zbar.q[d], zbar.p[d]);
                for (const Frag& f : acc) {
                    for (const auto& term : expansion) {
                        Frag g;
                        g.idx = f.idx;
                        g.idx.q_pow[d] = static_cast<std::uint8_t>(term.a);
                        g.idx.p_pow[d] = static_cast<std::uint8_t>(term.b);
                        g.order = f.order + i + j;
                        for (const auto& [pw, v] : f.coeff.entries())
                            for (const auto& [pw2, v2] : term.coeff.entries())
                                g.coeff.add(pw + pw2, v * v2 * w);
                        if (!g.coeff.is_zero()) next.push_back(std::move(g));
                    }
                }
            }
        }
        acc = std::move(next);
    }

    auto ipow = [](double x, unsigned e) {
        double v = 1.0;
        for (unsigned r = 0; r < e; ++r) v *= x;
        return v;
    };
    for (auto& f : acc) {
        const double lw = (mode == GeneratorMode::raw)
                              ? ipow(lambda, f.order)
                              : ((f.order == 0) ? 1.0 : ipow(lambda, f.order - 1));
        if (lw == 0.0) continue;
        f.coeff *= scale * lw;
        out.add(f.idx, f.coeff);
    }
}

}  // namespace

CanonicalOperatorPoly deformed_generator(const DrivenHamiltonian& H, const PhasePoint& zbar,
                                         double t, double lambda, GeneratorMode mode) {
    if (zbar.n_dof() != H.n_dof())
        throw std::invalid_argument("deformed_generator: zbar DOF mismatch");
    if (!zbar.finite() || !std::isfinite(lambda))
        throw std::invalid_argument("deformed_generator: non-finite input");

    CanonicalOperatorPoly out(H.n_dof());
    for (const auto& [mono, c] : H.static_part().terms())
        accumulate_monomial_layers(out, mono, c, zbar, lambda, mode);
    for (const auto& [spec, shape] : H.drives()) {
        const double w = spec.value(t);
        if (w == 0.0) continue;
        for (const auto& [mono, c] : shape.terms())
            accumulate_monomial_layers(out, mono, c * w, zbar, lambda, mode);
    }
    return out;
}

std::vector<CanonicalOperatorPoly> lambda_smoothness_probe(const DrivenHamiltonian& H,
                                                           const PhasePoint& zbar, double t,
                                                           GeneratorMode mode,
                                                           const std::vector<double>& lambdas) {
    std::vector<CanonicalOperatorPoly> out;
    out.reserve(lambdas.size());
    for (double lam : lambdas) out.push_back(deformed_generator(H, zbar, t, lam, mode));
    return out;
}

}  // namespace gselab

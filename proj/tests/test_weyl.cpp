#include <doctest.h>

#include <algorithm>
#include <random>

#include "gselab/weyl.hpp"

using namespace gselab;

namespace {

using Index = CanonicalOperatorPoly::Index;

Index idx1d(unsigned a, unsigned b) {
    Index i;
    i.q_pow = {static_cast<std::uint8_t>(a)};
    i.p_pow = {static_cast<std::uint8_t>(b)};
    return i;
}

// Independent ordering oracle: average the reductions of every distinct
// interleaving of m Q's and n P's (single DOF). The final division happens
// once per coefficient, after the exact integer-weighted accumulation.
CanonicalOperatorPoly brute_force_weyl_1d(unsigned m, unsigned n, double coeff = 1.0) {
    std::vector<int> word(m, 0);
    word.insert(word.end(), n, 1);
    std::vector<OpWord> words;
    double count = 0.0;
    do {
        OpWord w;
        w.coeff = HbarSeries(1.0);
        for (int c : word) w.letters.push_back({0, c == 0 ? OpKind::Q : OpKind::P});
        words.push_back(std::move(w));
        count += 1.0;
    } while (std::next_permutation(word.begin(), word.end()));
    const CanonicalOperatorPoly sum = normal_order_reduce(1, words);
    CanonicalOperatorPoly out(1);
    for (const auto& [idx, series] : sum.terms()) {
        HbarSeries scaled;
        for (const auto& [pw, v] : series.entries()) scaled.add(pw, v / count * coeff);
        out.add(idx, scaled);
    }
    return out;
}

// Dyadic rationals keep every comparison in this file bit-exact.
double random_dyadic(std::mt19937& rng) {
    std::uniform_int_distribution<int> num(-128, 128);
    return static_cast<double>(num(rng)) / 256.0;
}

PolyObservable random_poly_1d(std::mt19937& rng, unsigned max_degree) {
    std::uniform_int_distribution<unsigned> deg(0, max_degree);
    PolyObservable f(1);
    for (int t = 0; t < 5; ++t) {
        const unsigned dq = deg(rng);
        const unsigned dp = deg(rng) % (max_degree - dq + 1);
        f += PolyObservable::term1d(dq, dp, random_dyadic(rng));
    }
    return f;
}

}  // namespace

TEST_SUITE("weyl") {

TEST_CASE("normal_order_reduce hand examples") {
    // P Q -> q p - i hbar
    {
        OpWord w;
        w.coeff = HbarSeries(1.0);
        w.letters = {{0, OpKind::P}, {0, OpKind::Q}};
        const auto r = normal_order_reduce(1, {w});
        CHECK(r.coefficient1d(1, 1, 0) == std::complex<double>(1.0, 0.0));
        CHECK(r.coefficient1d(0, 0, 1) == std::complex<double>(0.0, -1.0));
        CHECK(r.terms().size() == 2);
    }
    // Q P already canonical
    {
        OpWord w;
        w.coeff = HbarSeries(1.0);
        w.letters = {{0, OpKind::Q}, {0, OpKind::P}};
        const auto r = normal_order_reduce(1, {w});
        CHECK(r.coefficient1d(1, 1, 0) == std::complex<double>(1.0, 0.0));
        CHECK(r.terms().size() == 1);
    }
    // (QP + PQ)/2 -> q p - i hbar / 2
    {
        OpWord w1, w2;
        w1.coeff = HbarSeries(0.5);
        w1.letters = {{0, OpKind::Q}, {0, OpKind::P}};
        w2.coeff = HbarSeries(0.5);
        w2.letters = {{0, OpKind::P}, {0, OpKind::Q}};
        const auto r = normal_order_reduce(1, {w1, w2});
        CHECK(r.coefficient1d(1, 1, 0) == std::complex<double>(1.0, 0.0));
        CHECK(r.coefficient1d(0, 0, 1) == std::complex<double>(0.0, -0.5));
    }
}

TEST_CASE("normal_order_reduce commutes distinct DOFs freely") {
    // P_2 Q_1 has no contraction: reorders to Q_1 P_2.
    OpWord w;
    w.coeff = HbarSeries(1.0);
    w.letters = {{1, OpKind::P}, {0, OpKind::Q}};
    const auto r = normal_order_reduce(2, {w});
    Index idx;
    idx.q_pow = {1, 0};
    idx.p_pow = {0, 1};
    CHECK(r.coefficient(idx, 0) == std::complex<double>(1.0, 0.0));
    CHECK(r.terms().size() == 1);
}

TEST_CASE("weyl_quantize generalized harmonic oscillator example") {
    std::mt19937 rng(42);
    for (int rep = 0; rep < 3; ++rep) {
        const double a = random_dyadic(rng), b = random_dyadic(rng), c = random_dyadic(rng);
        PolyObservable H = PolyObservable::term1d(0, 2, 0.5 * a);
        H += PolyObservable::term1d(1, 1, 0.5 * b);
        H += PolyObservable::term1d(2, 0, 0.5 * c);
        const auto op = weyl_quantize(H);
        CHECK(op.coefficient1d(0, 2, 0) == std::complex<double>(0.5 * a, 0.0));
        CHECK(op.coefficient1d(2, 0, 0) == std::complex<double>(0.5 * c, 0.0));
        CHECK(op.coefficient1d(1, 1, 0) == std::complex<double>(0.5 * b, 0.0));
        CHECK(op.coefficient1d(0, 0, 1) == std::complex<double>(0.0, -0.25 * b));
    }
}

TEST_CASE("weyl_quantize pure powers stay untouched") {
    const auto op = weyl_quantize(PolyObservable::term1d(3, 0, 1.0));
    CHECK(op.terms().size() == 1);
    CHECK(op.coefficient1d(3, 0, 0) == std::complex<double>(1.0, 0.0));
}

TEST_CASE("weyl_quantize q^2 p^2 frozen values") {
    // Frozen from the interleaving oracle: 6 words QQPP..PPQQ averaged.
    const auto oracle = brute_force_weyl_1d(2, 2);
    CHECK(oracle.coefficient1d(2, 2, 0) == std::complex<double>(1.0, 0.0));
    CHECK(oracle.coefficient1d(1, 1, 1) == std::complex<double>(0.0, -2.0));
    CHECK(oracle.coefficient1d(0, 0, 2) == std::complex<double>(-0.5, 0.0));

    const auto fast = weyl_quantize(PolyObservable::term1d(2, 2, 1.0));
    CHECK(fast == oracle);
}

TEST_CASE("ordering oracle equivalence for all monomials up to degree 6") {
    for (unsigned m = 0; m <= 6; ++m) {
        for (unsigned n = 0; m + n <= 6; ++n) {
            const auto fast = weyl_quantize(PolyObservable::term1d(m, n, 1.0));
            const auto slow = brute_force_weyl_1d(m, n);
            CHECK_MESSAGE(fast == slow, "m=", m, " n=", n);
        }
    }
}

TEST_CASE("multi-DOF quantization factorizes over commuting DOFs") {
    // (q1 p1)(q2 p2): each factor symmetrizes independently.
    const auto op = weyl_quantize(PolyObservable::monomial({1, 1}, {1, 1}, 1.0));
    Index full;
    full.q_pow = {1, 1};
    full.p_pow = {1, 1};
    CHECK(op.coefficient(full, 0) == std::complex<double>(1.0, 0.0));
    Index half1;
    half1.q_pow = {0, 1};
    half1.p_pow = {0, 1};
    CHECK(op.coefficient(half1, 1) == std::complex<double>(0.0, -0.5));
    Index none;
    none.q_pow = {0, 0};
    none.p_pow = {0, 0};
    CHECK(op.coefficient(none, 2) == std::complex<double>(-0.25, 0.0));
}

TEST_CASE("hbar grading vanishes above min(m,n)") {
    for (unsigned m = 0; m <= 6; ++m) {
        for (unsigned n = 0; m + n <= 6; ++n) {
            const auto op = weyl_quantize(PolyObservable::term1d(m, n, 1.0));
            for (const auto& [idx, series] : op.terms())
                for (const auto& [pw, v] : series.entries()) CHECK(pw <= std::min(m, n));
        }
    }
}

TEST_CASE("hermitian_check examples") {
    CanonicalOperatorPoly sym(1);
    sym.add(idx1d(1, 1), 1.0);
    sym.add(idx1d(0, 0), std::complex<double>(0.0, -0.5), 1);
    CHECK(hermitian_check(sym));

    CanonicalOperatorPoly qp(1);
    qp.add(idx1d(1, 1), 1.0);
    CHECK_FALSE(hermitian_check(qp));
}

TEST_CASE("adjoint is an involution and weyl outputs are Hermitian") {
    std::mt19937 rng(7);
    for (int rep = 0; rep < 100; ++rep) {
        const auto f = random_poly_1d(rng, 6);
        const auto op = weyl_quantize(f);
        CHECK(hermitian_check(op));
        CHECK(adjoint(adjoint(op)) == op);
    }
}

TEST_CASE("deformed_generator matches the explicit lambda=0 classical form") {
    // H = p^2/2m + q^4/4 at dyadic zbar.
    const double m = 1.0;
    PolyObservable H = PolyObservable::term1d(0, 2, 0.5 / m);
    H += PolyObservable::term1d(4, 0, 0.25);
    const DrivenHamiltonian dh(H);
    const PhasePoint zbar(0.75, -0.5);
    const auto g = deformed_generator(dh, zbar, 0.0, 0.0, GeneratorMode::interpolating);

    const double qb = zbar.q[0], pb = zbar.p[0];
    const double v = qb * qb * qb * qb / 4.0;
    const double vp = qb * qb * qb;
    CHECK(g.coefficient1d(0, 1, 0).real() == doctest::Approx(pb / m).epsilon(1e-15));
    CHECK(g.coefficient1d(1, 0, 0).real() == doctest::Approx(vp).epsilon(1e-15));
    CHECK(g.coefficient1d(0, 0, 0).real() ==
          doctest::Approx(v - vp * qb - pb * pb / (2.0 * m)).epsilon(1e-14));
    // No fluctuation terms of order >= 2 at lambda = 0.
    for (const auto& [idx, series] : g.terms()) CHECK(idx.total_degree() <= 1);
}

TEST_CASE("deformed_generator raw mode at lambda=0 collapses to a scalar") {
    PolyObservable H = PolyObservable::term1d(0, 2, 0.5);
    H += PolyObservable::term1d(2, 0, 0.5);
    const DrivenHamiltonian dh(H);
    const PhasePoint zbar(0.5, 0.25);
    const auto g = deformed_generator(dh, zbar, 0.0, 0.0, GeneratorMode::raw);
    CHECK(g.terms().size() == 1);
    CHECK(g.coefficient1d(0, 0, 0).real() ==
          doctest::Approx(dh.evaluate(zbar, 0.0)).epsilon(1e-15));
}

TEST_CASE("lambda=1 generators are zbar-independent and equal weyl_quantize") {
    std::mt19937 rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const auto f = random_poly_1d(rng, 6);
        const DrivenHamiltonian dh(f);
        const PhasePoint z1(random_dyadic(rng), random_dyadic(rng));
        const PhasePoint z2(random_dyadic(rng), random_dyadic(rng));
        const auto g1 = deformed_generator(dh, z1, 0.0, 1.0, GeneratorMode::raw);
        const auto g2 = deformed_generator(dh, z2, 0.0, 1.0, GeneratorMode::interpolating);
        const auto w = weyl_quantize(f);
        CHECK(g1 == w);
        CHECK(g2 == w);
    }
}

TEST_CASE("deformed_generator is Hermitian in both modes") {
    std::mt19937 rng(13);
    for (int rep = 0; rep < 50; ++rep) {
        const auto f = random_poly_1d(rng, 6);
        const DrivenHamiltonian dh(f);
        const PhasePoint z(random_dyadic(rng), random_dyadic(rng));
        const double lam = 0.25 * static_cast<double>(rep % 5);
        CHECK(hermitian_check(deformed_generator(dh, z, 0.0, lam, GeneratorMode::raw)));
        CHECK(hermitian_check(deformed_generator(dh, z, 0.0, lam, GeneratorMode::interpolating)));
    }
}

TEST_CASE("deformed_generator is linear in H") {
    std::mt19937 rng(17);
    const auto f1 = random_poly_1d(rng, 5);
    const auto f2 = random_poly_1d(rng, 5);
    const double alpha = 0.5, beta = -0.25;
    const PhasePoint z(0.375, 0.125);
    const double lam = 0.5;
    const auto mode = GeneratorMode::interpolating;
    const auto lhs = deformed_generator(DrivenHamiltonian(alpha * f1 + beta * f2), z, 0.0, lam, mode);
    auto rhs = deformed_generator(DrivenHamiltonian(f1), z, 0.0, lam, mode) * alpha;
    rhs += deformed_generator(DrivenHamiltonian(f2), z, 0.0, lam, mode) * beta;
    CHECK(CanonicalOperatorPoly::approx_equal(lhs, rhs, 1e-14));
}

TEST_CASE("harmonic oscillator quadratic layer scales linearly in lambda") {
    PolyObservable H = PolyObservable::term1d(0, 2, 0.5);
    H += PolyObservable::term1d(2, 0, 0.5);
    const DrivenHamiltonian dh(H);
    const PhasePoint z(0.5, -0.25);
    for (double lam : {0.0, 0.5, 1.0}) {
        const auto g = deformed_generator(dh, z, 0.0, lam, GeneratorMode::interpolating);
        CHECK(g.coefficient1d(2, 0, 0).real() == lam / 2.0);
        CHECK(g.coefficient1d(0, 2, 0).real() == lam / 2.0);
    }
}

TEST_CASE("lambda_smoothness_probe coefficients are polynomials in lambda") {
    std::mt19937 rng(19);
    const auto f = random_poly_1d(rng, 6);
    const DrivenHamiltonian dh(f);
    const PhasePoint z(0.25, 0.5);
    const std::vector<double> lams{0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0};
    const auto gens = lambda_smoothness_probe(dh, z, 0.0, GeneratorMode::raw, lams);
    REQUIRE(gens.size() == lams.size());

    // Fit degree-6 polynomials through the first 7 samples, then check the
    // remaining samples are predicted exactly (Lagrange form).
    const unsigned fit_n = 7;
    auto lagrange = [&](const std::vector<double>& ys, double x) {
        double acc = 0.0;
        for (unsigned i = 0; i < fit_n; ++i) {
            double w = ys[i];
            for (unsigned j = 0; j < fit_n; ++j) {
                if (i == j) continue;
                w *= (x - lams[j]) / (lams[i] - lams[j]);
            }
            acc += w;
        }
        return acc;
    };
    for (const auto& [idx, series] : gens.back().terms()) {
        for (const auto& [pw, v] : series.entries()) {
            std::vector<double> re, im;
            for (const auto& g : gens) {
                re.push_back(g.coefficient(idx, pw).real());
                im.push_back(g.coefficient(idx, pw).imag());
            }
            for (std::size_t k = fit_n; k < lams.size(); ++k) {
                CHECK(lagrange(re, lams[k]) == doctest::Approx(re[k]).epsilon(1e-10));
                CHECK(lagrange(im, lams[k]) == doctest::Approx(im[k]).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("operator pretty printing is stable") {
    CanonicalOperatorPoly sym(1);
    sym.add(idx1d(1, 1), 1.0);
    sym.add(idx1d(0, 0), std::complex<double>(0.0, -0.5), 1);
    CHECK(sym.to_string() == "q^1 p^1 (1) + 1 (-0.5i hbar)");

    const auto ho = weyl_quantize(PolyObservable::term1d(2, 0, 0.5) +
                                  PolyObservable::term1d(0, 2, 0.5));
    CHECK(ho.to_string() == "q^2 (0.5) + p^2 (0.5)");

    CHECK(CanonicalOperatorPoly(1).to_string() == "0");
}

}  // TEST_SUITE

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <steerkit/qmat.hpp>
#include <steerkit/scenarios.hpp>
#include <steerkit/steering.hpp>

using namespace steerkit;

namespace {

std::vector<BellScenario> all_scenarios() {
    return {chsh_scenario(), tilted_chsh_scenario(0.5), elegant_scenario(), i3622_scenario()};
}

// Numeric localizing matrix [tr(S'_j^dag B S'_i rho_{a|x})] at a realization.
CMatrix localizing_at(const Realization& r, const std::vector<Word>& Sp, const WordPoly& poly,
                      int a, int x) {
    CMatrix B = poly_matrix(poly, r.generators, r.dim);
    int n = static_cast<int>(Sp.size());
    CMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            CMatrix w = word_matrix(adjoint(Sp[j]), r.generators, r.dim) * B *
                        word_matrix(Sp[i], r.generators, r.dim);
            m(i, j) = trace_prod(r.assemblage.element(a, x), w);
        }
    return m;
}

}  // namespace

TEST_CASE("sequence catalog sizes and containment") {
    BellScenario chsh = chsh_scenario(), tilted = tilted_chsh_scenario(0.5);
    BellScenario elegant = elegant_scenario(), i36 = i3622_scenario();
    CHECK(chsh.momentSequence.size() == 5);
    CHECK(tilted.momentSequence.size() == 29);
    CHECK(tilted.localizingSequence.size() == 11);
    CHECK(elegant.momentSequence.size() == 38);
    CHECK(elegant.localizingSequence.size() == 8);
    CHECK(i36.momentSequence.size() == 40);
    CHECK(i36.localizingSequence.size() == 10);
    for (const BellScenario& sc : all_scenarios()) {
        CHECK(sc.momentSequence[0].empty());  // starts with identity
        for (const Word& w : sc.localizingSequence) {
            bool in = std::find(sc.momentSequence.begin(), sc.momentSequence.end(), w) !=
                      sc.momentSequence.end();
            CHECK(in);  // S' subseteq S
        }
        for (const Word& w : sc.momentSequence) CHECK(canonicalize(w) == w);
    }
}

TEST_CASE("reference assemblage matches published kets and marginals") {
    for (const BellScenario& sc : all_scenarios()) {
        CHECK(sc.referenceAssemblage.is_valid(1e-12));
        for (int x = 0; x < sc.nSettings; ++x)
            for (int a = 0; a < sc.nOutcomes; ++a) {
                CMatrix expected =
                    sc.referenceAssemblage.marginal(a, x) * projector(sc.referenceKets[x][a]);
                CHECK((sc.referenceAssemblage.element(a, x) - expected).max_abs() < 1e-12);
            }
    }
    BellScenario tilted = tilted_chsh_scenario(1.0);
    double sin2t = std::sqrt(3.0 / 5.0);
    double theta = 0.5 * std::asin(sin2t);
    CHECK(tilted.referenceAssemblage.marginal(0, 0) ==
          doctest::Approx(std::cos(theta) * std::cos(theta)).epsilon(1e-12));
    CHECK(tilted.referenceAssemblage.marginal(0, 1) == doctest::Approx(0.5).epsilon(1e-12));

    // elegant/i3622 share the Pauli reference assemblage
    Assemblage pauli = pauli_reference_assemblage();
    for (const BellScenario& sc : {elegant_scenario(), i3622_scenario()})
        for (int x = 0; x < 3; ++x)
            for (int a = 0; a < 2; ++a)
                CHECK((sc.referenceAssemblage.element(a, x) - pauli.element(a, x)).max_abs() <
                      1e-12);
}

TEST_CASE("bell functional reaches the quantum bound at the reference") {
    for (const BellScenario& sc : all_scenarios()) {
        MomentMap m = exact_moments(sc);
        cplx bell = evaluate(sc.bellFunctional, m);
        CHECK(std::abs(bell.imag()) < 1e-12);
        CHECK(bell.real() == doctest::Approx(sc.quantumBound).epsilon(1e-10));
        CHECK(sc.localBound < sc.quantumBound);
    }
    CHECK(chsh_scenario().quantumBound == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(elegant_scenario().quantumBound == doctest::Approx(6.9282).epsilon(1e-4));
    CHECK(i3622_scenario().quantumBound == doctest::Approx(8.4853).epsilon(1e-4));
    CHECK(i3622_scenario().localBound == 6.0);
}

TEST_CASE("fidelity polynomial is 1 at the reference") {
    for (const BellScenario& sc : all_scenarios()) {
        MomentMap m = exact_moments(sc);
        cplx f = evaluate(sc.fidelityPolynomial, m);
        CHECK(std::abs(f.imag()) < 1e-12);
        CHECK(f.real() == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("exact reference moments") {
    BellScenario chsh = chsh_scenario();
    MomentMap m = exact_moments(chsh);
    CHECK(m[MomentKey{0, 0, {}}].real() == doctest::Approx(0.5).epsilon(1e-12));
    // <A1 B1> at the Tsirelson point
    cplx corr = m[MomentKey{0, 0, {0}}] - m[MomentKey{1, 0, {0}}];
    CHECK(corr.real() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    for (int x = 0; x < 2; ++x) {
        cplx tot = m[MomentKey{0, x, {}}] + m[MomentKey{1, x, {}}];
        CHECK(tot.real() == doctest::Approx(1.0).epsilon(1e-14));
    }

    // complex scenarios realize on the doubled space with all-real moments
    for (const BellScenario& sc : {elegant_scenario(), i3622_scenario()}) {
        for (const auto& [key, v] : exact_moments(sc)) CHECK(std::abs(v.imag()) < 1e-12);
    }
}

TEST_CASE("localizing data is PSD at the reference") {
    for (const BellScenario& sc : all_scenarios()) {
        Realization r = reference_realization(sc);
        for (const WordPoly& poly : sc.localizingPolynomials) {
            CMatrix B = poly_matrix(poly, r.generators, r.dim);
            CHECK(B.is_hermitian(1e-10));
            CHECK(min_eigenvalue(B) > -1e-10);
            for (int x = 0; x < sc.nSettings; ++x)
                for (int a = 0; a < sc.nOutcomes; ++a) {
                    CMatrix chiL = localizing_at(r, sc.localizingSequence, poly, a, x);
                    CHECK(min_eigenvalue(0.5 * (chiL + chiL.dagger())) > -1e-10);
                }
        }
    }
}

TEST_CASE("tilted family closed forms") {
    CHECK_THROWS(tilted_chsh_scenario(-0.1));
    CHECK_THROWS(tilted_chsh_scenario(2.0));
    BellScenario flat = tilted_chsh_scenario(0.0);
    CHECK(flat.quantumBound == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(flat.referenceAssemblage.marginal(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(tilted_chsh_scenario(1.0).quantumBound ==
          doctest::Approx(std::sqrt(10.0)).epsilon(1e-14));

    for (int k = 0; k < 50; ++k) {
        double alpha = 1.9 * k / 49.0;
        BellScenario sc = tilted_chsh_scenario(alpha);
        CHECK(sc.quantumBound ==
              doctest::Approx(std::sqrt(8.0 + 2.0 * alpha * alpha)).epsilon(1e-12));
        double sin2t = std::sqrt((4.0 - alpha * alpha) / (4.0 + alpha * alpha));
        double theta = 0.5 * std::asin(sin2t);
        CHECK(sc.referenceAssemblage.marginal(0, 0) ==
              doctest::Approx(std::cos(theta) * std::cos(theta)).epsilon(1e-12));
        MomentMap m = exact_moments(sc);
        CHECK(evaluate(sc.bellFunctional, m).real() ==
              doctest::Approx(sc.quantumBound).epsilon(1e-10));
        CHECK(evaluate(sc.fidelityPolynomial, m).real() == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("elegant fidelity stays below 1 for sign strategies") {
    BellScenario sc = elegant_scenario();
    // deterministic LHS assemblages with B_j = +-I: fidelity <= 1 always
    for (int signs = 0; signs < 8; ++signs) {
        for (int strat = 0; strat < 16; ++strat) {
            MomentMap m;
            std::mt19937_64 rng(strat * 8 + signs);
            std::uniform_real_distribution<double> u;
            double p[3];
            for (double& v : p) v = u(rng);
            for (int x = 0; x < 3; ++x) {
                double s5 = (signs >> 0 & 1) ? 1 : -1;
                double s6 = (signs >> 1 & 1) ? 1 : -1;
                double s7 = (signs >> 2 & 1) ? 1 : -1;
                m[MomentKey{0, x, {4}}] = p[x] * s5;
                m[MomentKey{1, x, {4}}] = (1 - p[x]) * s5;
                m[MomentKey{0, x, {5}}] = p[x] * s6;
                m[MomentKey{1, x, {5}}] = (1 - p[x]) * s6;
                m[MomentKey{0, x, {6}}] = p[x] * s7;
                m[MomentKey{1, x, {6}}] = (1 - p[x]) * s7;
            }
            CHECK(evaluate(sc.fidelityPolynomial, m).real() <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("word algebra") {
    CHECK(canonicalize({1, 1}) == Word{});
    CHECK(canonicalize({1, 2, 2, 1}) == Word{});
    CHECK(canonicalize({1, 2, 1}) == Word({1, 2, 1}));
    CHECK(concat({1, 2}, {2, 1}) == Word{});
    CHECK(adjoint({1, 2, 3}) == Word({3, 2, 1}));

    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> g(0, 3), len(0, 8);
    for (int t = 0; t < 10000; ++t) {
        Word w(len(rng));
        for (int& v : w) v = g(rng);
        Word c = canonicalize(w);
        CHECK(canonicalize(c) == c);  // idempotent
        CHECK(c.size() <= w.size());
        CHECK(canonicalize(adjoint(w)) == adjoint(canonicalize(w)));
    }

    // CHSH level-2 closure
    std::vector<Word> closure = moment_closure(chsh_scenario().momentSequence);
    for (const Word& w : {Word{}, Word{0}, Word{1}, Word{0, 1}, Word{1, 0}})
        CHECK(std::find(closure.begin(), closure.end(), w) != closure.end());
}

#pragma once

// Catalog of the four Bell scenarios: reference strategies, Bell
// functionals, bounds, symbolic CJ matrices, device-independent fidelity
// polynomials, and the hand-picked moment/localizing sequences.

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <steerkit/qmat.hpp>
#include <steerkit/steering.hpp>
#include <steerkit/words.hpp>

namespace steerkit {

/// Linear form in moments m(a, x, word) plus a constant.  Flagged Hermitian
/// forms evaluate to a real number on any concrete realization.
struct MomentTerm {
    int a = 0, x = 0;
    Word word;
    cplx coeff;
};

struct MomentPolynomial {
    std::vector<MomentTerm> terms;
    cplx constant;

    void add(int a, int x, Word w, cplx c) {
        w = canonicalize(w);
        for (MomentTerm& t : terms)
            if (t.a == a && t.x == x && t.word == w) {
                t.coeff += c;
                return;
            }
        terms.push_back(MomentTerm{a, x, std::move(w), c});
    }
};

struct MomentKey {
    int a = 0, x = 0;
    Word word;
    bool operator<(const MomentKey& o) const {
        if (a != o.a) return a < o.a;
        if (x != o.x) return x < o.x;
        return word < o.word;
    }
};

using MomentMap = std::map<MomentKey, cplx>;

inline cplx evaluate(const MomentPolynomial& p, const MomentMap& m) {
    cplx v = p.constant;
    for (const MomentTerm& t : p.terms) {
        auto it = m.find(MomentKey{t.a, t.x, t.word});
        if (it == m.end()) throw std::out_of_range("evaluate: moment not in table");
        v += t.coeff * it->second;
    }
    return v;
}

struct BellScenario {
    std::string name;
    int nGenerators = 0;  // Bob generator count, auxiliaries included
    int nSettings = 0;    // Alice settings |X|
    int nOutcomes = 2;
    double alpha = 0.0;  // tilt parameter (tilted scenario only)

    CMatrix referenceState;
    std::vector<CMatrix> aliceObservables;
    std::vector<CMatrix> bobObservables;  // optimal qubit B_y*, auxiliaries included
    Assemblage referenceAssemblage;
    std::vector<std::vector<CMatrix>> referenceKets;  // [x][a], column vectors

    MomentPolynomial bellFunctional;
    double localBound = 0.0, quantumBound = 0.0;

    bool hasCjExpression = false;
    std::array<std::array<WordPoly, 2>, 2> cjExpression;  // entries of Omega^T
    MomentPolynomial fidelityPolynomial;  // at observed marginals = reference marginals

    std::vector<Word> momentSequence, localizingSequence;
    std::vector<WordPoly> localizingPolynomials;
    bool complexValued = false;
};

namespace detail {

inline std::vector<CMatrix> dichotomic_povm(const CMatrix& obs) {
    CMatrix i2 = CMatrix::identity(2);
    return {0.5 * (i2 + obs), 0.5 * (i2 - obs)};
}

inline Assemblage steer_reference(BellScenario& sc) {
    std::vector<std::vector<CMatrix>> povms;
    for (const CMatrix& a : sc.aliceObservables) povms.push_back(dichotomic_povm(a));
    return steered_assemblage(projector(sc.referenceState), povms);
}

/// Fidelity polynomial of the real-valued (CJ-expression) pipeline:
///   F = (1/|X|) sum_{a,x} sqrt(P*(a|x)/P_obs(a|x))
///       <sigma*_{a|x}| sum_ij tr(rho_{a|x} M_ij) |i><j| |sigma*_{a|x}>
/// with M_ij the symbolic entries of Omega^T.
inline MomentPolynomial cj_fidelity_polynomial(const BellScenario& sc,
                                               const std::map<std::pair<int, int>, double>& pObs) {
    MomentPolynomial f;
    for (int x = 0; x < sc.nSettings; ++x)
        for (int a = 0; a < sc.nOutcomes; ++a) {
            double pStar = sc.referenceAssemblage.marginal(a, x);
            double w = std::sqrt(pStar / pObs.at({a, x})) / sc.nSettings;
            const CMatrix& ket = sc.referenceKets[x][a];
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    cplx amp = std::conj(ket(i, 0)) * ket(j, 0);
                    if (std::abs(amp) < 1e-15) continue;
                    for (const auto& [word, c] : sc.cjExpression[i][j])
                        f.add(a, x, word, w * amp * c);
                }
        }
    return f;
}

inline std::map<std::pair<int, int>, double> reference_marginals(const BellScenario& sc) {
    std::map<std::pair<int, int>, double> p;
    for (int x = 0; x < sc.nSettings; ++x)
        for (int a = 0; a < sc.nOutcomes; ++a) p[{a, x}] = sc.referenceAssemblage.marginal(a, x);
    return p;
}

inline void add_correlator(MomentPolynomial& f, int x, int y, double c) {
    f.add(0, x, Word{y}, c);
    f.add(1, x, Word{y}, -c);
}

}  // namespace detail

/// Rebuilds the fidelity objective for non-reference observed marginals.
/// The complex-valued scenarios use the q-independent objective, which does
/// not depend on the marginals.
inline MomentPolynomial fidelity_polynomial(const BellScenario& sc,
                                            const std::map<std::pair<int, int>, double>& pObs) {
    if (!sc.hasCjExpression) return sc.fidelityPolynomial;
    return detail::cj_fidelity_polynomial(sc, pObs);
}

inline BellScenario chsh_scenario() {
    BellScenario sc;
    sc.name = "chsh";
    sc.nGenerators = 2;
    sc.nSettings = 2;
    double c = std::cos(M_PI / 8), s = std::sin(M_PI / 8);
    double r = 1.0 / std::sqrt(2.0);
    sc.referenceState = CMatrix::ket({c * r, s * r, s * r, -c * r});
    sc.aliceObservables = {pauli_z(), pauli_x()};
    sc.bobObservables = {pauli_z(), pauli_x()};
    sc.referenceKets = {{CMatrix::ket({c, s}), CMatrix::ket({s, -c})},
                        {CMatrix::ket({-c, s}), CMatrix::ket({s, c})}};
    sc.referenceAssemblage = detail::steer_reference(sc);

    detail::add_correlator(sc.bellFunctional, 0, 0, 1);
    detail::add_correlator(sc.bellFunctional, 0, 1, 1);
    detail::add_correlator(sc.bellFunctional, 1, 0, 1);
    detail::add_correlator(sc.bellFunctional, 1, 1, -1);
    sc.localBound = 2.0;
    sc.quantumBound = 2.0 * std::sqrt(2.0);

    sc.hasCjExpression = true;
    poly_add(poly_add(sc.cjExpression[0][0], {}, 0.5), {0}, 0.5);
    poly_add(poly_add(sc.cjExpression[0][1], {1}, 0.5), {1, 0}, -0.5);
    poly_add(poly_add(sc.cjExpression[1][0], {1}, 0.5), {0, 1}, -0.5);
    poly_add(poly_add(sc.cjExpression[1][1], {}, 0.5), {0}, -0.5);
    sc.fidelityPolynomial = detail::cj_fidelity_polynomial(sc, detail::reference_marginals(sc));

    sc.momentSequence = {{}, {0}, {1}, {0, 1}, {1, 0}};
    return sc;
}

inline BellScenario tilted_chsh_scenario(double alpha) {
    if (alpha < 0.0 || alpha > 2.0 - 1e-6)
        throw std::invalid_argument("tilted_chsh_scenario: alpha outside [0, 2 - 1e-6]");
    if (alpha < 1e-12) {
        // untilted limit: locally-unitarily equivalent to the plain CHSH
        // construction, whose smaller relaxation is used verbatim so both
        // entry points produce the same bound curve
        BellScenario sc = chsh_scenario();
        sc.name = "tilted";
        return sc;
    }
    BellScenario sc;
    sc.name = "tilted";
    sc.alpha = alpha;
    sc.nGenerators = 4;
    sc.nSettings = 2;
    double sin2t = std::sqrt((4.0 - alpha * alpha) / (4.0 + alpha * alpha));
    double theta = 0.5 * std::asin(sin2t);
    double mu = std::atan(sin2t);
    double ct = std::cos(theta), st = std::sin(theta);
    sc.referenceState = CMatrix::ket({ct, 0.0, 0.0, st});
    sc.aliceObservables = {pauli_z(), pauli_x()};
    sc.bobObservables = {std::cos(mu) * pauli_z() + std::sin(mu) * pauli_x(),
                         std::cos(mu) * pauli_z() - std::sin(mu) * pauli_x(), pauli_z(), pauli_x()};
    sc.referenceKets = {{CMatrix::ket({1.0, 0.0}), CMatrix::ket({0.0, 1.0})},
                        {CMatrix::ket({ct, st}), CMatrix::ket({ct, -st})}};
    sc.referenceAssemblage = detail::steer_reference(sc);

    sc.bellFunctional.add(0, 0, {}, alpha);
    sc.bellFunctional.add(1, 0, {}, -alpha);
    detail::add_correlator(sc.bellFunctional, 0, 0, 1);
    detail::add_correlator(sc.bellFunctional, 0, 1, 1);
    detail::add_correlator(sc.bellFunctional, 1, 0, 1);
    detail::add_correlator(sc.bellFunctional, 1, 1, -1);
    sc.localBound = 2.0 + alpha;
    sc.quantumBound = std::sqrt(8.0 + 2.0 * alpha * alpha);

    sc.hasCjExpression = true;  // expressed in the auxiliaries B3, B4
    poly_add(poly_add(sc.cjExpression[0][0], {}, 0.5), {2}, 0.5);
    poly_add(poly_add(sc.cjExpression[0][1], {3}, 0.5), {3, 2}, -0.5);
    poly_add(poly_add(sc.cjExpression[1][0], {3}, 0.5), {2, 3}, -0.5);
    poly_add(poly_add(sc.cjExpression[1][1], {}, 0.5), {2}, -0.5);
    sc.fidelityPolynomial = detail::cj_fidelity_polynomial(sc, detail::reference_marginals(sc));

    WordPoly locZ, locX;  // B3(B1+B2)/cos(mu) and B4(B1-B2)/sin(mu)
    poly_add(poly_add(locZ, {2, 0}, 1.0 / std::cos(mu)), {2, 1}, 1.0 / std::cos(mu));
    poly_add(poly_add(locX, {3, 0}, 1.0 / std::sin(mu)), {3, 1}, -1.0 / std::sin(mu));
    sc.localizingPolynomials = {locZ, locX};

    sc.momentSequence = {{},        {0},       {1},       {2},       {3},       {0, 1},
                         {1, 0},    {3, 2},    {2, 3},    {2, 0},    {2, 1},    {0, 2},
                         {1, 2},    {3, 0},    {3, 1},    {0, 3},    {1, 3},    {0, 1, 0},
                         {1, 0, 1}, {2, 3, 2}, {3, 2, 3}, {0, 2, 0}, {0, 2, 1}, {0, 3, 0},
                         {0, 3, 1}, {0, 3, 2}, {0, 2, 3}, {1, 3, 2}, {1, 2, 3}};
    sc.localizingSequence = {{}, {0}, {1}, {2}, {3}, {0, 1}, {1, 0}, {3, 2}, {2, 3}, {0, 3}, {3, 0}};
    return sc;
}

inline BellScenario elegant_scenario() {
    BellScenario sc;
    sc.name = "elegant";
    sc.nGenerators = 7;
    sc.nSettings = 3;
    sc.complexValued = true;
    sc.referenceState = max_entangled_ket(2);
    sc.aliceObservables = {pauli_z(), pauli_x(), pauli_y()};
    double t = 1.0 / std::sqrt(3.0);
    CMatrix Z = pauli_z(), X = pauli_x(), Y = pauli_y();
    sc.bobObservables = {t * Z + t * X + (-t) * Y, t * Z + (-t) * X + t * Y,
                         (-t) * Z + t * X + t * Y, (-t) * Z + (-t) * X + (-t) * Y,
                         Z, X, Y};
    double r = 1.0 / std::sqrt(2.0);
    sc.referenceKets = {{CMatrix::ket({1.0, 0.0}), CMatrix::ket({0.0, 1.0})},
                        {CMatrix::ket({r, r}), CMatrix::ket({r, -r})},
                        {CMatrix::ket({cplx(r), cplx(0, -r)}), CMatrix::ket({cplx(r), cplx(0, r)})}};
    sc.referenceAssemblage = detail::steer_reference(sc);

    detail::add_correlator(sc.bellFunctional, 0, 0, 1);
    detail::add_correlator(sc.bellFunctional, 0, 1, 1);
    detail::add_correlator(sc.bellFunctional, 0, 2, -1);
    detail::add_correlator(sc.bellFunctional, 0, 3, -1);
    detail::add_correlator(sc.bellFunctional, 1, 0, 1);
    detail::add_correlator(sc.bellFunctional, 1, 1, -1);
    detail::add_correlator(sc.bellFunctional, 1, 2, 1);
    detail::add_correlator(sc.bellFunctional, 1, 3, -1);
    detail::add_correlator(sc.bellFunctional, 2, 0, 1);
    detail::add_correlator(sc.bellFunctional, 2, 1, -1);
    detail::add_correlator(sc.bellFunctional, 2, 2, -1);
    detail::add_correlator(sc.bellFunctional, 2, 3, 1);
    sc.localBound = 6.0;
    sc.quantumBound = 4.0 * std::sqrt(3.0);

    // q-independent objective over the auxiliary single-generator moments
    sc.fidelityPolynomial.add(0, 0, {4}, 1.0 / 3.0);
    sc.fidelityPolynomial.add(1, 0, {4}, -1.0 / 3.0);
    sc.fidelityPolynomial.add(0, 1, {5}, 1.0 / 3.0);
    sc.fidelityPolynomial.add(1, 1, {5}, -1.0 / 3.0);
    sc.fidelityPolynomial.add(1, 2, {6}, 1.0 / 3.0);
    sc.fidelityPolynomial.add(0, 2, {6}, -1.0 / 3.0);

    double k = std::sqrt(3.0) / 4.0;
    WordPoly l5, l6, l7;
    poly_add(poly_add(poly_add(poly_add(l5, {4, 0}, k), {4, 1}, k), {4, 2}, -k), {4, 3}, -k);
    poly_add(poly_add(poly_add(poly_add(l6, {5, 0}, k), {5, 1}, -k), {5, 2}, k), {5, 3}, -k);
    poly_add(poly_add(poly_add(poly_add(l7, {6, 0}, -k), {6, 1}, k), {6, 2}, k), {6, 3}, -k);
    sc.localizingPolynomials = {l5, l6, l7};

    sc.momentSequence = {{},     {0},    {1},    {2},    {3},    {4},    {5},    {6},
                         {4, 5}, {5, 4}, {4, 6}, {6, 4}, {5, 6}, {6, 5},
                         {4, 0}, {4, 1}, {4, 2}, {4, 3}, {0, 4}, {1, 4}, {2, 4}, {3, 4},
                         {5, 0}, {5, 1}, {5, 2}, {5, 3}, {0, 5}, {1, 5}, {2, 5}, {3, 5},
                         {6, 0}, {6, 1}, {6, 2}, {6, 3}, {0, 6}, {1, 6}, {2, 6}, {3, 6}};
    sc.localizingSequence = {{}, {0}, {1}, {2}, {3}, {4}, {5}, {6}};
    return sc;
}

inline BellScenario i3622_scenario() {
    BellScenario sc;
    sc.name = "i3622";
    sc.nGenerators = 9;
    sc.nSettings = 3;
    sc.complexValued = true;
    sc.referenceState = max_entangled_ket(2);
    sc.aliceObservables = {pauli_z(), pauli_x(), pauli_y()};
    double r = 1.0 / std::sqrt(2.0);
    sc.bobObservables = {r * (pauli_z() + pauli_x()), r * (pauli_z() - pauli_x()),
                         r * (pauli_z() + pauli_y()), r * (pauli_z() - pauli_y()),
                         r * (pauli_x() + pauli_y()), r * (pauli_x() - pauli_y()),
                         pauli_z(), pauli_x(), pauli_y()};
    sc.referenceKets = {{CMatrix::ket({1.0, 0.0}), CMatrix::ket({0.0, 1.0})},
                        {CMatrix::ket({r, r}), CMatrix::ket({r, -r})},
                        {CMatrix::ket({cplx(r), cplx(0, -r)}), CMatrix::ket({cplx(r), cplx(0, r)})}};
    sc.referenceAssemblage = detail::steer_reference(sc);

    detail::add_correlator(sc.bellFunctional, 0, 0, 1);
    detail::add_correlator(sc.bellFunctional, 0, 1, 1);
    detail::add_correlator(sc.bellFunctional, 1, 0, 1);
    detail::add_correlator(sc.bellFunctional, 1, 1, -1);
    detail::add_correlator(sc.bellFunctional, 0, 2, 1);
    detail::add_correlator(sc.bellFunctional, 0, 3, 1);
    detail::add_correlator(sc.bellFunctional, 2, 2, -1);
    detail::add_correlator(sc.bellFunctional, 2, 3, 1);
    detail::add_correlator(sc.bellFunctional, 1, 4, 1);
    detail::add_correlator(sc.bellFunctional, 1, 5, 1);
    detail::add_correlator(sc.bellFunctional, 2, 4, -1);
    detail::add_correlator(sc.bellFunctional, 2, 5, 1);
    sc.localBound = 6.0;
    sc.quantumBound = 6.0 * std::sqrt(2.0);

    sc.fidelityPolynomial.add(0, 0, {6}, 1.0 / 3.0);
    sc.fidelityPolynomial.add(1, 0, {6}, -1.0 / 3.0);
    sc.fidelityPolynomial.add(0, 1, {7}, 1.0 / 3.0);
    sc.fidelityPolynomial.add(1, 1, {7}, -1.0 / 3.0);
    sc.fidelityPolynomial.add(1, 2, {8}, 1.0 / 3.0);
    sc.fidelityPolynomial.add(0, 2, {8}, -1.0 / 3.0);

    WordPoly l1, l2, l3, l4, l5, l6;
    poly_add(poly_add(l1, {6, 0}, r), {6, 1}, r);    // B7(B1+B2)/sqrt2
    poly_add(poly_add(l2, {6, 2}, r), {6, 3}, r);    // B7(B3+B4)/sqrt2
    poly_add(poly_add(l3, {7, 4}, r), {7, 5}, r);    // B8(B5+B6)/sqrt2
    poly_add(poly_add(l4, {7, 0}, r), {7, 1}, -r);   // B8(B1-B2)/sqrt2
    poly_add(poly_add(l5, {8, 2}, r), {8, 3}, -r);   // B9(B3-B4)/sqrt2
    poly_add(poly_add(l6, {8, 4}, r), {8, 5}, -r);   // B9(B5-B6)/sqrt2
    sc.localizingPolynomials = {l1, l2, l3, l4, l5, l6};

    sc.momentSequence = {{},     {0},    {1},    {2},    {3},    {4},    {5},    {6},    {7},    {8},
                         {6, 7}, {7, 6}, {6, 8}, {8, 6}, {7, 8}, {8, 7},
                         {6, 0}, {6, 1}, {6, 2}, {6, 3}, {0, 6}, {1, 6}, {2, 6}, {3, 6},
                         {7, 0}, {7, 1}, {7, 4}, {7, 5}, {0, 7}, {1, 7}, {4, 7}, {5, 7},
                         {8, 2}, {8, 3}, {8, 4}, {8, 5}, {2, 8}, {3, 8}, {4, 8}, {5, 8}};
    sc.localizingSequence = {{}, {0}, {1}, {2}, {3}, {4}, {5}, {6}, {7}, {8}};
    return sc;
}

inline BellScenario make_scenario(const std::string& name, double alpha = 0.0) {
    if (name == "chsh") return chsh_scenario();
    if (name == "tilted") return tilted_chsh_scenario(alpha);
    if (name == "elegant") return elegant_scenario();
    if (name == "i3622") return i3622_scenario();
    throw std::invalid_argument("make_scenario: unknown scenario '" + name + "'");
}

/// Concrete reference strategy realizing every scenario constraint.  The
/// complex-valued scenarios realize on the doubled space (controlled mixture
/// at q = 1/2, doubled observables), where every moment is real.
struct Realization {
    Assemblage assemblage;
    std::vector<CMatrix> generators;
    int dim = 0;

    cplx moment(int a, int x, const Word& w) const {
        return trace_prod(assemblage.element(a, x), word_matrix(w, generators, dim));
    }
};

inline Realization reference_realization(const BellScenario& sc) {
    Realization r;
    if (!sc.complexValued) {
        r.assemblage = sc.referenceAssemblage;
        r.generators = sc.bobObservables;
        r.dim = 2;
    } else {
        r.assemblage = controlled_mixture(sc.referenceAssemblage, 0.5);
        CMatrix p0(2, 2), p1(2, 2);
        p0(0, 0) = 1;
        p1(1, 1) = 1;
        for (const CMatrix& b : sc.bobObservables)
            r.generators.push_back(kron(b, p0) + kron(b.transpose(), p1));
        r.dim = 4;
    }
    return r;
}

/// Exact reference moments over all words touched by the moment and
/// localizing matrices — a feasibility certificate for the relaxation.
inline MomentMap exact_moments(const BellScenario& sc) {
    Realization r = reference_realization(sc);
    std::vector<Word> words = moment_closure(sc.momentSequence);
    for (const Word& w : localizing_closure(sc.localizingSequence, sc.localizingPolynomials)) {
        if (std::find(words.begin(), words.end(), w) == words.end()) words.push_back(w);
    }
    MomentMap m;
    for (int x = 0; x < sc.nSettings; ++x)
        for (int a = 0; a < sc.nOutcomes; ++a)
            for (const Word& w : words) m[MomentKey{a, x, w}] = r.moment(a, x, w);
    return m;
}

}  // namespace steerkit

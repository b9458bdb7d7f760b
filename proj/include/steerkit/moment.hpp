#pragma once

// Noncommutative moment-relaxation compiler.  Turns a scenario's moment and
// localizing sequences into the problem IR of sdp.hpp:
//
//   min  fidelity(m)
//   s.t. chi[rho_{a|x}, S]            >= 0        per (a, x)
//        chi_L[rho_{a|x}, poly, S']   >= 0        per (a, x) and polynomial
//        sum_a chi[.|x] equal across x            (no-signaling)
//        tr(rho_{a|x}) = P_obs(a|x)               (observed marginals)
//        Bell(m) = violation   (or >= violation)
//
// Structural reductions keep the SDP small and equality-free:
//  * Conjugation symmetry.  All four catalog scenarios have real objective,
//    Bell, and marginal data, so conjugating every moment maps the feasible
//    set onto itself and fixes the objective; an optimum therefore exists
//    with all moments real.  A word and its adjoint share one real variable.
//  * No-signaling by substitution.  For each word the per-setting outcome
//    sum is a shared variable t_w; the last outcome's moment is expressed
//    as t_w minus the others instead of adding equality rows.
//  * The Bell constraint eliminates one moment variable (its row's
//    variables are marked as Schur-complement border).
//  * Localizing Hermiticity.  The auxiliary observables are defined through
//    polar decompositions, so each localizing operator B is Hermitian (and
//    PSD) in any admissible realization.  The blocks carry the Hermitian
//    part (B + B^dag)/2, and the anti-Hermitian part is forced to vanish:
//    entry-wise rows m(S'_j^dag B S'_i) - m(S'_j^dag B^dag S'_i) = 0 are
//    Gauss-eliminated together with the Bell row.  Dropping these rows
//    would leave the operator order of B free and the localizing
//    constraints nearly vacuous.  Each row mixes moments of a single
//    (a, x) block (plus border variables), so elimination preserves the
//    grouped-Schur structure.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <steerkit/scenarios.hpp>
#include <steerkit/sdp.hpp>
#include <steerkit/words.hpp>

namespace steerkit {

struct LinExpr {
    double constant = 0.0;
    std::vector<std::pair<int, double>> terms;  // variable id, coefficient

    void add(int var, double c) {
        for (auto& [v, w] : terms)
            if (v == var) {
                w += c;
                return;
            }
        terms.push_back({var, c});
    }
    void add(const LinExpr& e, double scale) {
        constant += scale * e.constant;
        for (auto [v, w] : e.terms) add(v, scale * w);
    }
};

enum class ConstraintMode { Equality, AtLeast };

/// Shared-variable table of real moment unknowns m(a, x, word).
class MomentTable {
public:
    // How to reconstruct each variable from a concrete moment assignment.
    struct Recipe {
        enum Kind { Moment, OutcomeTotal, Slack } kind = Moment;
        int a = 0, x = 0;
        Word word;
    };

    MomentTable(int nOutcomes, int nSettings, std::map<std::pair<int, int>, double> marginals)
        : nA_(nOutcomes), nX_(nSettings), marginals_(std::move(marginals)) {
        for (int x = 0; x < nX_; ++x) {
            double tot = 0.0;
            for (int a = 0; a < nA_; ++a) {
                double p = marginals_.at({a, x});
                if (p < -1e-12) throw std::invalid_argument("MomentTable: negative marginal");
                tot += p;
            }
            if (std::abs(tot - 1.0) > 1e-9)
                throw std::invalid_argument("MomentTable: marginals do not sum to 1");
        }
    }

    static Word representative(const Word& w) { return std::min(w, adjoint(w)); }

    /// Registers canonical words.  Words under no-signaling share a
    /// per-word outcome total t_w; others get an independent variable per
    /// (a, x).  Already-known words are left untouched.
    void register_words(const std::vector<Word>& words, bool noSignaling) {
        for (const Word& raw : words) {
            Word w = representative(canonicalize(raw));
            if (w.empty() || exprs_.count(key(0, 0, w))) continue;
            if (noSignaling) {
                int tw = new_var(Recipe{Recipe::OutcomeTotal, 0, 0, w}, -1);
                for (int x = 0; x < nX_; ++x) {
                    LinExpr last;
                    last.add(tw, 1.0);
                    for (int a = 0; a + 1 < nA_; ++a) {
                        int v = new_var(Recipe{Recipe::Moment, a, x, w}, x);
                        LinExpr e;
                        e.add(v, 1.0);
                        exprs_[key(a, x, w)] = e;
                        last.add(v, -1.0);
                    }
                    exprs_[key(nA_ - 1, x, w)] = last;
                }
            } else {
                for (int x = 0; x < nX_; ++x)
                    for (int a = 0; a < nA_; ++a) {
                        int v = new_var(Recipe{Recipe::Moment, a, x, w}, x);
                        LinExpr e;
                        e.add(v, 1.0);
                        exprs_[key(a, x, w)] = e;
                    }
            }
        }
    }

    int add_slack(int group) { return new_var(Recipe{Recipe::Slack, 0, 0, {}}, group); }

    const LinExpr& expr(int a, int x, const Word& w) const {
        Word c = canonicalize(w);
        if (c.empty()) {
            auto it = marginalExprs_.find({a, x});
            if (it == marginalExprs_.end()) {
                LinExpr e;
                e.constant = marginals_.at({a, x});
                it = marginalExprs_.emplace(std::make_pair(a, x), e).first;
            }
            return it->second;
        }
        auto it = exprs_.find(key(a, x, representative(c)));
        if (it == exprs_.end()) throw std::out_of_range("MomentTable: word outside the table");
        return it->second;
    }

    LinExpr of(const MomentPolynomial& p) const {
        LinExpr out;
        out.constant = p.constant.real();
        if (std::abs(p.constant.imag()) > 1e-9)
            throw std::invalid_argument("MomentTable: complex constant in real reduction");
        for (const MomentTerm& t : p.terms) {
            if (std::abs(t.coeff.imag()) > 1e-9)
                throw std::invalid_argument("MomentTable: complex coefficient in real reduction");
            out.add(expr(t.a, t.x, t.word), t.coeff.real());
        }
        return out;
    }

    int var_count() const { return static_cast<int>(recipes_.size()); }
    const std::vector<Recipe>& recipes() const { return recipes_; }
    const std::vector<int>& groups() const { return groups_; }
    void mark_border(int var) { groups_[var] = -1; }

private:
    using Key = std::tuple<int, int, Word>;
    static Key key(int a, int x, const Word& w) { return {a, x, w}; }

    int new_var(Recipe r, int group) {
        recipes_.push_back(std::move(r));
        groups_.push_back(group);
        return static_cast<int>(recipes_.size()) - 1;
    }

    int nA_, nX_;
    std::map<std::pair<int, int>, double> marginals_;
    std::map<Key, LinExpr> exprs_;
    mutable std::map<std::pair<int, int>, LinExpr> marginalExprs_;
    std::vector<Recipe> recipes_;
    std::vector<int> groups_;
};

/// Symbolic real symmetric matrix over MomentTable variables.
struct SymbolicMatrix {
    int size = 0;
    std::vector<LinExpr> entries;  // row-major
    LinExpr& at(int i, int j) { return entries[i * size + j]; }
    const LinExpr& at(int i, int j) const { return entries[i * size + j]; }
};

inline SymbolicMatrix build_moment_matrix(int a, int x, const std::vector<Word>& S,
                                          const MomentTable& table) {
    if (S.empty() || !S[0].empty())
        throw std::invalid_argument("build_moment_matrix: sequence must start with identity");
    SymbolicMatrix m;
    m.size = static_cast<int>(S.size());
    m.entries.resize(m.size * m.size);
    for (int i = 0; i < m.size; ++i)
        for (int j = 0; j < m.size; ++j)
            m.at(i, j) = table.expr(a, x, concat(adjoint(S[j]), S[i]));
    return m;
}

/// Raw localizing entry (i, j): sum_w c_w m(S'_j^dag w S'_i).
inline LinExpr localizing_entry(int a, int x, const WordPoly& poly, const std::vector<Word>& Sp,
                                int i, int j, const MomentTable& table) {
    LinExpr e;
    for (const auto& [w, c] : poly) {
        if (std::abs(c.imag()) > 1e-12)
            throw std::invalid_argument("localizing_entry: complex polynomial");
        e.add(table.expr(a, x, concat(concat(adjoint(Sp[j]), w), Sp[i])), c.real());
    }
    return e;
}

inline SymbolicMatrix build_localizing_matrix(int a, int x, const WordPoly& poly,
                                              const std::vector<Word>& Sp,
                                              const MomentTable& table) {
    SymbolicMatrix m;
    m.size = static_cast<int>(Sp.size());
    m.entries.resize(m.size * m.size);
    auto raw = [&](int i, int j) { return localizing_entry(a, x, poly, Sp, i, j, table); };
    for (int i = 0; i < m.size; ++i)
        for (int j = i; j < m.size; ++j) {
            LinExpr h = raw(i, j);
            h.add(raw(j, i), 1.0);
            h.constant *= 0.5;
            for (auto& [v, w] : h.terms) w *= 0.5;
            m.at(i, j) = h;
            m.at(j, i) = h;
        }
    return m;
}

struct RelaxationProblem {
    SdpProblem sdp;
    int nOutcomes = 0, nSettings = 0;
    double observedViolation = 0.0;
    ConstraintMode mode = ConstraintMode::Equality;
    MomentPolynomial bellFunctional;

    // recipe per emitted variable (post Bell-elimination numbering)
    std::vector<MomentTable::Recipe> recipes;

    /// Solver vector realizing the given concrete moments.
    std::vector<double> assignment(const MomentMap& m) const {
        std::vector<double> x(recipes.size());
        for (size_t j = 0; j < recipes.size(); ++j) {
            const MomentTable::Recipe& r = recipes[j];
            switch (r.kind) {
                case MomentTable::Recipe::Moment:
                    x[j] = m.at(MomentKey{r.a, r.x, r.word}).real();
                    break;
                case MomentTable::Recipe::OutcomeTotal: {
                    double t = 0.0;
                    for (int a = 0; a < nOutcomes; ++a)
                        t += m.at(MomentKey{a, 0, r.word}).real();
                    x[j] = t;
                    break;
                }
                case MomentTable::Recipe::Slack:
                    x[j] = evaluate(bellFunctional, m).real() - observedViolation;
                    break;
            }
        }
        return x;
    }
};

inline RelaxationProblem assemble(const BellScenario& sc, double observedViolation,
                                  std::map<std::pair<int, int>, double> observedMarginals = {},
                                  ConstraintMode mode = ConstraintMode::Equality) {
    if (observedMarginals.empty()) observedMarginals = detail::reference_marginals(sc);
    if (sc.complexValued)  // the q-independent objective assumes flat marginals
        for (const auto& [ax, p] : observedMarginals)
            if (std::abs(p - 1.0 / sc.nOutcomes) > 1e-9)
                throw std::invalid_argument(
                    "assemble: this scenario's objective requires uniform marginals");

    MomentTable table(sc.nOutcomes, sc.nSettings, observedMarginals);
    table.register_words(moment_closure(sc.momentSequence), true);
    table.register_words(localizing_closure(sc.localizingSequence, sc.localizingPolynomials),
                         false);

    RelaxationProblem out;
    out.nOutcomes = sc.nOutcomes;
    out.nSettings = sc.nSettings;
    out.observedViolation = observedViolation;
    out.mode = mode;
    out.bellFunctional = sc.bellFunctional;

    // Equality rows, all Gauss-eliminated into variable substitutions:
    //   * Bell row: bell(m) = violation (+ slack in at-least mode).  Its
    //     variables couple Schur groups and are marked as border.
    //   * Localizing Hermiticity: raw entry (i,j) minus raw entry (j,i)
    //     vanishes for every localizing block (operator order of B is not
    //     free; see the header comment).
    LinExpr bell = table.of(sc.bellFunctional);
    int slack = -1;
    if (mode == ConstraintMode::AtLeast) {
        slack = table.add_slack(-1);
        bell.add(slack, -1.0);
    }
    if (bell.terms.empty())
        throw std::invalid_argument("assemble: Bell functional has no variables");
    for (auto [v, w] : bell.terms) table.mark_border(v);

    std::vector<LinExpr> rows;
    rows.push_back(bell);
    rows.back().constant -= observedViolation;
    for (const WordPoly& poly : sc.localizingPolynomials)
        for (int x = 0; x < sc.nSettings; ++x)
            for (int a = 0; a < sc.nOutcomes; ++a)
                for (size_t i = 0; i < sc.localizingSequence.size(); ++i)
                    for (size_t j = i + 1; j < sc.localizingSequence.size(); ++j) {
                        LinExpr d = localizing_entry(a, x, poly, sc.localizingSequence,
                                                     static_cast<int>(i), static_cast<int>(j),
                                                     table);
                        d.add(localizing_entry(a, x, poly, sc.localizingSequence,
                                               static_cast<int>(j), static_cast<int>(i), table),
                              -1.0);
                        rows.push_back(std::move(d));
                    }

    std::map<int, LinExpr> subs;  // pivot variable -> expression in the others
    auto reduce = [&](const LinExpr& e) {
        LinExpr f;
        f.constant = e.constant;
        std::vector<std::pair<int, double>> todo(e.terms);
        while (!todo.empty()) {
            auto [v, w] = todo.back();
            todo.pop_back();
            auto it = subs.find(v);
            if (it == subs.end()) {
                f.add(v, w);
            } else {
                f.constant += w * it->second.constant;
                for (auto [v2, w2] : it->second.terms) todo.push_back({v2, w * w2});
            }
        }
        f.terms.erase(std::remove_if(f.terms.begin(), f.terms.end(),
                                     [](const auto& t) { return std::abs(t.second) < 1e-11; }),
                      f.terms.end());
        return f;
    };
    bool inconsistentRow = false;
    std::vector<int> pivotOrder;
    for (const LinExpr& row : rows) {
        LinExpr r = reduce(row);
        if (r.terms.empty()) {
            if (std::abs(r.constant) > 1e-8) inconsistentRow = true;
            continue;
        }
        // pivot: largest coefficient, preferring in-group variables so the
        // substitution never widens a variable's Schur footprint
        int pivot = -1;
        double pivotCoeff = 0.0;
        bool pivotBorder = true;
        for (auto [v, w] : r.terms) {
            bool border = table.groups()[v] < 0;
            if ((pivotBorder && !border) ||
                (pivotBorder == border && std::abs(w) > std::abs(pivotCoeff))) {
                pivot = v;
                pivotCoeff = w;
                pivotBorder = border;
            }
        }
        LinExpr s;  // pivot = -(constant + sum_{v != pivot} c_v v) / c_pivot
        s.constant = -r.constant / pivotCoeff;
        for (auto [v, w] : r.terms)
            if (v != pivot) s.add(v, -w / pivotCoeff);
        subs[pivot] = std::move(s);
        pivotOrder.push_back(pivot);
    }
    // finalize: a substitution only references pivots created after it, so
    // one reverse-creation-order pass makes every right-hand side pivot-free
    for (auto it = pivotOrder.rbegin(); it != pivotOrder.rend(); ++it) {
        LinExpr& e = subs[*it];
        LinExpr f;
        f.constant = e.constant;
        for (auto [v, w] : e.terms) {
            auto jt = subs.find(v);
            if (jt == subs.end())
                f.add(v, w);
            else
                f.add(jt->second, w);
        }
        e = std::move(f);
    }

    // final numbering skips the pivots
    std::vector<int> remap(table.var_count(), -1);
    int nFinal = 0;
    for (int v = 0; v < table.var_count(); ++v)
        if (!subs.count(v)) remap[v] = nFinal++;

    auto expand = [&](const LinExpr& e) {
        LinExpr f;
        f.constant = e.constant;
        for (auto [v, w] : e.terms) {
            auto it = subs.find(v);
            if (it != subs.end())
                f.add(it->second, w);
            else
                f.add(v, w);
        }
        return f;
    };

    out.sdp.nVars = nFinal;
    out.sdp.c.assign(nFinal, 0.0);
    out.sdp.schurGroup.assign(nFinal, 0);
    out.recipes.resize(nFinal);
    for (int v = 0; v < table.var_count(); ++v)
        if (remap[v] >= 0) {
            out.recipes[remap[v]] = table.recipes()[v];
            out.sdp.schurGroup[remap[v]] = table.groups()[v];
        }
    if (inconsistentRow)  // contradictory data; let the solver report it
        out.sdp.add_equality({}, 1.0);

    LinExpr obj = expand(table.of(fidelity_polynomial(sc, observedMarginals)));
    out.sdp.objConstant = obj.constant;
    for (auto [v, w] : obj.terms) out.sdp.c[remap[v]] = w;

    auto push_block = [&](const std::string& label, const SymbolicMatrix& m) {
        int blk = out.sdp.add_block(label, m.size);
        for (int i = 0; i < m.size; ++i)
            for (int j = i; j < m.size; ++j) {
                LinExpr e = expand(m.at(j, i));  // entry (row j, col i) == (p,q)=(i,j) upper
                if (e.constant != 0.0) out.sdp.set_f0(blk, i, j, e.constant);
                for (auto [v, w] : e.terms)
                    if (w != 0.0) out.sdp.add_coeff(blk, remap[v], i, j, w);
            }
    };

    for (int x = 0; x < sc.nSettings; ++x)
        for (int a = 0; a < sc.nOutcomes; ++a)
            push_block("chi_a" + std::to_string(a) + "_x" + std::to_string(x),
                       build_moment_matrix(a, x, sc.momentSequence, table));
    for (size_t p = 0; p < sc.localizingPolynomials.size(); ++p)
        for (int x = 0; x < sc.nSettings; ++x)
            for (int a = 0; a < sc.nOutcomes; ++a)
                push_block("loc" + std::to_string(p) + "_a" + std::to_string(a) + "_x" +
                               std::to_string(x),
                           build_localizing_matrix(a, x, sc.localizingPolynomials[p],
                                                   sc.localizingSequence, table));
    if (slack >= 0) {
        int blk = out.sdp.add_block("bell_slack", 1, true);
        out.sdp.add_coeff(blk, remap[slack], 0, 0, 1.0);
    }
    return out;
}

/// Concrete moments of an explicit strategy (state, Alice POVMs per
/// setting, Bob generator observables) over the words a scenario's
/// relaxation touches.
inline MomentMap realize(const BellScenario& sc, const CMatrix& state,
                         const std::vector<std::vector<CMatrix>>& aliceMeas,
                         const std::vector<CMatrix>& bobObs) {
    Realization r;
    r.assemblage = steered_assemblage(state, aliceMeas);
    r.generators = bobObs;
    r.dim = r.assemblage.dim;
    for (const CMatrix& b : bobObs)
        if (b.rows() != r.dim || b.cols() != r.dim)
            throw std::invalid_argument("realize: observable dimension mismatch");
    std::vector<Word> words = moment_closure(sc.momentSequence);
    for (const Word& w : localizing_closure(sc.localizingSequence, sc.localizingPolynomials))
        if (std::find(words.begin(), words.end(), w) == words.end()) words.push_back(w);
    MomentMap m;
    for (int x = 0; x < sc.nSettings; ++x)
        for (int a = 0; a < sc.nOutcomes; ++a)
            for (const Word& w : words) m[MomentKey{a, x, w}] = r.moment(a, x, w);
    return m;
}

}  // namespace steerkit

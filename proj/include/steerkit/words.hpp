#pragma once

// Words over Bob's dichotomic observables.  Each generator is unitary and
// Hermitian, so the only rewrite rule is B_y^2 = 1 (adjacent duplicate
// removal); generators do not commute.  The adjoint of a word is its
// reversal.

#include <algorithm>
#include <map>
#include <vector>

#include <steerkit/qmat.hpp>

namespace steerkit {

using Word = std::vector<int>;  // generator indices; empty = identity

inline Word canonicalize(const Word& w) {
    Word out;
    for (int g : w) {
        if (!out.empty() && out.back() == g)
            out.pop_back();
        else
            out.push_back(g);
    }
    return out;
}

inline Word adjoint(const Word& w) {
    Word out(w.rbegin(), w.rend());
    return out;
}

inline Word concat(const Word& a, const Word& b) {
    Word out = a;
    out.insert(out.end(), b.begin(), b.end());
    return canonicalize(out);
}

/// Polynomial in words with complex coefficients (e.g. a localizing operator
/// or one entry of a symbolic CJ matrix).
using WordPoly = std::map<Word, cplx>;

inline WordPoly& poly_add(WordPoly& p, const Word& w, cplx c) {
    p[canonicalize(w)] += c;
    return p;
}

/// Numeric matrix of a word under a concrete assignment of generators.
inline CMatrix word_matrix(const Word& w, const std::vector<CMatrix>& gens, int dim) {
    CMatrix m = CMatrix::identity(dim);
    for (int g : w) m = m * gens[g];
    return m;
}

inline CMatrix poly_matrix(const WordPoly& p, const std::vector<CMatrix>& gens, int dim) {
    CMatrix m(dim, dim);
    for (const auto& [w, c] : p) m = m + c * word_matrix(w, gens, dim);
    return m;
}

/// All canonical words adjoint(S_j) . S_i appearing in a moment matrix over
/// the sequence S.
inline std::vector<Word> moment_closure(const std::vector<Word>& S) {
    std::map<Word, bool> seen;
    for (const Word& sj : S)
        for (const Word& si : S) seen[concat(adjoint(sj), si)] = true;
    std::vector<Word> out;
    for (const auto& [w, _] : seen) out.push_back(w);
    return out;
}

/// All canonical words adjoint(S'_j) . w . S'_i for w ranging over the words
/// of the given polynomials (the extra moments a localizing matrix touches).
inline std::vector<Word> localizing_closure(const std::vector<Word>& Sp,
                                            const std::vector<WordPoly>& polys) {
    std::map<Word, bool> seen;
    for (const WordPoly& p : polys)
        for (const auto& [w, _] : p)
            for (const Word& sj : Sp)
                for (const Word& si : Sp) {
                    Word word = concat(concat(adjoint(sj), w), si);
                    seen[word] = true;
                    seen[adjoint(word)] = true;  // the Hermitian part touches both
                }
    std::vector<Word> out;
    for (const auto& [word, _] : seen) out.push_back(word);
    return out;
}

}  // namespace steerkit

#pragma once

// Problem IR for small semidefinite programs:
//   minimize  c'x + constant
//   s.t.      F0_k + sum_j x_j F_jk  >= 0   (PSD, per block k)
//             A x = b                       (optional equality rows)
// Coefficient matrices are Hermitian and stored sparsely as upper-triangle
// entries; the conjugate-transposed entry is implied.

#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <steerkit/qmat.hpp>

namespace steerkit {

struct SdpEntry {
    int p = 0, q = 0;  // p <= q
    cplx v;
};

struct SdpBlock {
    std::string label;
    int size = 0;
    bool diagonal = false;  // SDPA diagonal block (entries on the diagonal only)
    std::vector<SdpEntry> f0;
    // per-variable coefficient entry lists, keyed by variable index
    std::map<int, std::vector<SdpEntry>> coeff;
};

struct EqualityRow {
    std::vector<std::pair<int, double>> terms;
    double rhs = 0.0;
};

struct SdpProblem {
    int nVars = 0;
    std::vector<double> c;
    double objConstant = 0.0;
    std::vector<SdpBlock> blocks;
    std::vector<EqualityRow> equalities;
    // Optional Schur-complement elimination hint: group index per variable,
    // -1 for "border" variables coupling several groups.  Variables in two
    // different groups must never meet in a block; the solver verifies this
    // and falls back to a dense factorization if the hint is inconsistent.
    std::vector<int> schurGroup;

    int add_var(double cost = 0.0) {
        c.push_back(cost);
        return nVars++;
    }
    int add_block(const std::string& label, int size, bool diagonal = false) {
        blocks.push_back(SdpBlock{label, size, diagonal, {}, {}});
        return static_cast<int>(blocks.size()) - 1;
    }
    void set_f0(int blk, int p, int q, cplx v) { push_entry(blocks[blk].f0, p, q, v); }
    void add_coeff(int blk, int var, int p, int q, cplx v) {
        if (var < 0 || var >= nVars) throw std::out_of_range("add_coeff: bad variable");
        push_entry(blocks[blk].coeff[var], p, q, v);
    }
    void add_equality(std::vector<std::pair<int, double>> terms, double rhs) {
        equalities.push_back(EqualityRow{std::move(terms), rhs});
    }

    /// Numeric value of block `blk` at the assignment x.
    CMatrix block_value(int blk, const std::vector<double>& x) const {
        const SdpBlock& b = blocks[blk];
        CMatrix m(b.size, b.size);
        auto add = [&m](const std::vector<SdpEntry>& es, double w) {
            for (const SdpEntry& e : es) {
                m(e.p, e.q) += w * e.v;
                if (e.p != e.q) m(e.q, e.p) += w * std::conj(e.v);
            }
        };
        add(b.f0, 1.0);
        for (const auto& [var, es] : b.coeff) add(es, x[var]);
        return m;
    }

    double objective_value(const std::vector<double>& x) const {
        double v = objConstant;
        for (int j = 0; j < nVars; ++j) v += c[j] * x[j];
        return v;
    }

    /// Largest violation of the constraints at x (negative block eigenvalues
    /// and equality residuals).
    double max_violation(const std::vector<double>& x) const {
        double viol = 0.0;
        for (size_t k = 0; k < blocks.size(); ++k)
            viol = std::max(viol, -min_eigenvalue(block_value(static_cast<int>(k), x)));
        for (const EqualityRow& row : equalities) {
            double r = -row.rhs;
            for (auto [j, a] : row.terms) r += a * x[j];
            viol = std::max(viol, std::abs(r));
        }
        return viol;
    }

private:
    static void push_entry(std::vector<SdpEntry>& es, int p, int q, cplx v) {
        if (p > q) {
            std::swap(p, q);
            v = std::conj(v);
        }
        if (p == q && std::abs(v.imag()) > 1e-12)
            throw std::invalid_argument("Hermitian diagonal entry must be real");
        for (SdpEntry& e : es)
            if (e.p == p && e.q == q) {
                e.v += v;
                return;
            }
        es.push_back(SdpEntry{p, q, v});
    }
};

enum class SdpStatus { Optimal, Infeasible, NumericalTrouble, MaxIterations };

inline const char* to_string(SdpStatus s) {
    switch (s) {
        case SdpStatus::Optimal: return "optimal";
        case SdpStatus::Infeasible: return "infeasible";
        case SdpStatus::NumericalTrouble: return "numericalTrouble";
        case SdpStatus::MaxIterations: return "maxIterations";
    }
    return "?";
}

struct SdpSolution {
    std::vector<double> x;
    double objective = 0.0;
    double dualObjective = 0.0;
    double gap = 0.0;
    double maxPrimalResidual = 0.0;
    SdpStatus status = SdpStatus::NumericalTrouble;
    int iterations = 0;
};

struct SdpOptions {
    double gapTol = 1e-7;
    double feasTol = 1e-8;
    int maxIter = 200;
    bool trace = false;  // per-iteration convergence log on stderr
};

/// Standard embedding of a Hermitian m x m matrix into a real symmetric
/// 2m x 2m one, [[Re, -Im], [Im, Re]]; PSD iff the input is, eigenvalues
/// doubled in multiplicity.
inline CMatrix complex_to_real(const CMatrix& h) {
    if (h.rows() != h.cols()) throw std::invalid_argument("complex_to_real: square input expected");
    int n = h.rows();
    CMatrix r(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double re = h(i, j).real(), im = h(i, j).imag();
            r(i, j) = re;
            r(i + n, j + n) = re;
            r(i, j + n) = -im;
            r(i + n, j) = im;
        }
    return r;
}

}  // namespace steerkit

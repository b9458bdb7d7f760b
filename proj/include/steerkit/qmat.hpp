#pragma once

// Dense complex-matrix kernel: Hermitian algebra, tensor products,
// partial trace / partial transpose, and a Jacobi eigensolver for
// Hermitian matrices.  Everything here is value-semantic and pure;
// matrices are tiny (<= ~40x40) so no attempt is made at being clever.

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace steerkit {

using cplx = std::complex<double>;

constexpr double kHermTol = 1e-12;

class CMatrix {
public:
    CMatrix() : rows_(0), cols_(0) {}
    CMatrix(int rows, int cols)
        : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {}
    CMatrix(int rows, int cols, std::initializer_list<cplx> entries)
        : rows_(rows), cols_(cols), a_(entries) {
        if (a_.size() != static_cast<size_t>(rows) * cols)
            throw std::invalid_argument("CMatrix: entry count mismatch");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    cplx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    const cplx& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    const std::vector<cplx>& data() const { return a_; }
    std::vector<cplx>& data() { return a_; }

    static CMatrix zero(int n) { return CMatrix(n, n); }
    static CMatrix identity(int n) {
        CMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    /// Column vector from amplitudes.
    static CMatrix ket(std::initializer_list<cplx> amps) {
        CMatrix v(static_cast<int>(amps.size()), 1);
        int i = 0;
        for (cplx c : amps) v(i++, 0) = c;
        return v;
    }
    static CMatrix ket(const std::vector<cplx>& amps) {
        CMatrix v(static_cast<int>(amps.size()), 1);
        for (size_t i = 0; i < amps.size(); ++i) v(static_cast<int>(i), 0) = amps[i];
        return v;
    }

    CMatrix operator+(const CMatrix& o) const {
        check_same_shape(o);
        CMatrix r(rows_, cols_);
        for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] + o.a_[k];
        return r;
    }
    CMatrix operator-(const CMatrix& o) const {
        check_same_shape(o);
        CMatrix r(rows_, cols_);
        for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] - o.a_[k];
        return r;
    }
    CMatrix operator*(cplx s) const {
        CMatrix r(rows_, cols_);
        for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = s * a_[k];
        return r;
    }
    friend CMatrix operator*(cplx s, const CMatrix& m) { return m * s; }
    CMatrix operator*(const CMatrix& o) const {
        if (cols_ != o.rows_) throw std::invalid_argument("CMatrix: product shape mismatch");
        CMatrix r(rows_, o.cols_);
        for (int i = 0; i < rows_; ++i)
            for (int k = 0; k < cols_; ++k) {
                cplx aik = (*this)(i, k);
                if (aik == cplx(0.0)) continue;
                for (int j = 0; j < o.cols_; ++j) r(i, j) += aik * o(k, j);
            }
        return r;
    }
    CMatrix& operator+=(const CMatrix& o) { *this = *this + o; return *this; }
    CMatrix& operator-=(const CMatrix& o) { *this = *this - o; return *this; }

    CMatrix dagger() const {
        CMatrix r(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
        return r;
    }
    CMatrix transpose() const {
        CMatrix r(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }
    CMatrix conjugate() const {
        CMatrix r(rows_, cols_);
        for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = std::conj(a_[k]);
        return r;
    }

    cplx trace() const {
        if (rows_ != cols_) throw std::invalid_argument("CMatrix: trace of non-square");
        cplx t = 0.0;
        for (int i = 0; i < rows_; ++i) t += (*this)(i, i);
        return t;
    }

    double norm_fro() const {
        double s = 0.0;
        for (const cplx& c : a_) s += std::norm(c);
        return std::sqrt(s);
    }
    double max_abs() const {
        double s = 0.0;
        for (const cplx& c : a_) s = std::max(s, std::abs(c));
        return s;
    }

    bool is_hermitian(double tol = kHermTol) const {
        if (rows_ != cols_) return false;
        for (int i = 0; i < rows_; ++i)
            for (int j = i; j < cols_; ++j)
                if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
        return true;
    }

private:
    void check_same_shape(const CMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw std::invalid_argument("CMatrix: shape mismatch");
    }

    int rows_, cols_;
    std::vector<cplx> a_;
};

inline CMatrix outer(const CMatrix& ket_a, const CMatrix& ket_b) {
    return ket_a * ket_b.dagger();
}
inline CMatrix projector(const CMatrix& ket) { return outer(ket, ket); }

inline cplx inner(const CMatrix& ket_a, const CMatrix& ket_b) {
    return (ket_a.dagger() * ket_b)(0, 0);
}

/// tr(a b), both square and same size.
inline cplx trace_prod(const CMatrix& a, const CMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
        throw std::invalid_argument("trace_prod: shape mismatch");
    cplx t = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) t += a(i, k) * b(k, i);
    return t;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            cplx aij = a(i, j);
            if (aij == cplx(0.0)) continue;
            for (int k = 0; k < b.rows(); ++k)
                for (int l = 0; l < b.cols(); ++l)
                    r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return r;
}

enum class Subsystem { A, B };

inline void check_bipartite(const CMatrix& m, int da, int db) {
    if (m.rows() != m.cols() || m.rows() != da * db)
        throw std::invalid_argument("expected a (da*db)-dimensional square matrix");
}

/// Reduced matrix over the kept subsystem; tr is preserved.
inline CMatrix partial_trace(const CMatrix& m, int da, int db, Subsystem traced) {
    check_bipartite(m, da, db);
    if (traced == Subsystem::A) {
        CMatrix r(db, db);
        for (int i = 0; i < db; ++i)
            for (int j = 0; j < db; ++j)
                for (int k = 0; k < da; ++k) r(i, j) += m(k * db + i, k * db + j);
        return r;
    }
    CMatrix r(da, da);
    for (int i = 0; i < da; ++i)
        for (int j = 0; j < da; ++j)
            for (int k = 0; k < db; ++k) r(i, j) += m(i * db + k, j * db + k);
    return r;
}

inline CMatrix partial_transpose(const CMatrix& m, int da, int db, Subsystem part) {
    check_bipartite(m, da, db);
    CMatrix r(da * db, da * db);
    for (int ia = 0; ia < da; ++ia)
        for (int ib = 0; ib < db; ++ib)
            for (int ja = 0; ja < da; ++ja)
                for (int jb = 0; jb < db; ++jb) {
                    if (part == Subsystem::A)
                        r(ja * db + ib, ia * db + jb) = m(ia * db + ib, ja * db + jb);
                    else
                        r(ia * db + jb, ja * db + ib) = m(ia * db + ib, ja * db + jb);
                }
    return r;
}

struct EigResult {
    std::vector<double> values;  // ascending
    CMatrix vectors;             // column k is the eigenvector for values[k]
};

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
/// Off-diagonal norm is driven below 1e-12 relative to the matrix scale.
inline EigResult eig_hermitian(const CMatrix& m) {
    if (!m.is_hermitian(1e-10 * std::max(1.0, m.max_abs())))
        throw std::invalid_argument("eig_hermitian: input is not Hermitian");
    int n = m.rows();
    CMatrix a = m;
    // symmetrize exactly
    for (int i = 0; i < n; ++i) {
        a(i, i) = a(i, i).real();
        for (int j = i + 1; j < n; ++j) {
            cplx v = 0.5 * (a(i, j) + std::conj(a(j, i)));
            a(i, j) = v;
            a(j, i) = std::conj(v);
        }
    }
    CMatrix v = CMatrix::identity(n);
    double scale = std::max(1.0, a.max_abs());
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += std::norm(a(p, q));
        if (std::sqrt(off) < 1e-12 * scale) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                cplx apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                double app = a(p, p).real(), aqq = a(q, q).real();
                double absapq = std::abs(apq);
                cplx phase = apq / absapq;
                // rotate in the (p,q) plane: G = [[c, -s*conj(phase)], [s*phase, c]]
                double theta = 0.5 * std::atan2(2.0 * absapq, aqq - app);
                double c = std::cos(theta), s = std::sin(theta);
                for (int k = 0; k < n; ++k) {
                    cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - std::conj(phase) * s * akq;
                    a(k, q) = phase * s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - phase * s * aqk;
                    a(q, k) = std::conj(phase) * s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    cplx vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - std::conj(phase) * s * vkq;
                    v(k, q) = phase * s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = a(i, i).real();
    std::sort(order.begin(), order.end(), [&](int i, int j) { return diag[i] < diag[j]; });
    EigResult res;
    res.values.resize(n);
    res.vectors = CMatrix(n, n);
    for (int k = 0; k < n; ++k) {
        res.values[k] = diag[order[k]];
        for (int i = 0; i < n; ++i) res.vectors(i, k) = v(i, order[k]);
    }
    return res;
}

inline double min_eigenvalue(const CMatrix& m) { return eig_hermitian(m).values.front(); }
inline double max_eigenvalue(const CMatrix& m) { return eig_hermitian(m).values.back(); }

inline bool is_psd(const CMatrix& m, double tol = 1e-10) {
    return min_eigenvalue(m) > -tol;
}

// Pauli matrices and common states.
inline CMatrix pauli_x() { return CMatrix(2, 2, {0, 1, 1, 0}); }
inline CMatrix pauli_y() { return CMatrix(2, 2, {0, cplx(0, -1), cplx(0, 1), 0}); }
inline CMatrix pauli_z() { return CMatrix(2, 2, {1, 0, 0, -1}); }

/// Normalized |Phi+> = (|00>+|11>)/sqrt(2) on d x d.
inline CMatrix max_entangled_ket(int d) {
    CMatrix v(d * d, 1);
    for (int i = 0; i < d; ++i) v(i * d + i, 0) = 1.0 / std::sqrt(static_cast<double>(d));
    return v;
}

}  // namespace steerkit

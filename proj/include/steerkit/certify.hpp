#pragma once

// Device-independent certification built on the tomographically complete
// Pauli reference assemblages: entanglement witnesses for two-qubit states
// and witnesses for non-entanglement-breaking qubit channels, both in the
// perfect-self-testing regime.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include <steerkit/qmat.hpp>
#include <steerkit/steering.hpp>

namespace steerkit {

/// Coefficients indexed by (c, d, u, v): Alice outcome/setting (c, u) and
/// Bob outcome/setting (d, v) of the two reference assemblages.
using CoeffMap = std::map<std::array<int, 4>, double>;

struct QubitChannel {
    std::vector<CMatrix> kraus;  // 2x2 each, sum K^dag K = 1
};

/// Partial-transpose witness for a two-qubit state: W = (|phi><phi|)^{T_B}
/// with phi the eigenvector of the most negative eigenvalue of rho^{T_B};
/// none when the state is PPT (= separable for two qubits).
inline std::optional<CMatrix> ppt_witness(const CMatrix& state, double tol = 1e-10) {
    check_bipartite(state, 2, 2);
    EigResult e = eig_hermitian(partial_transpose(state, 2, 2, Subsystem::B));
    if (e.values.front() >= -tol) return std::nullopt;
    CMatrix phi(4, 1);
    for (int i = 0; i < 4; ++i) phi(i, 0) = e.vectors(i, 0);
    return partial_transpose(projector(phi), 2, 2, Subsystem::B);
}

/// Minimum-norm coefficients expanding a Hermitian 4x4 operator over the
/// products (tau_{c|u})^T (x) (omega_{d|v})^T of two assemblage bases.
inline CoeffMap expand_coefficients(const CMatrix& w, const Assemblage& sideA,
                                    const Assemblage& sideB) {
    if (w.rows() != 4 || w.cols() != 4 || !w.is_hermitian(1e-9))
        throw std::invalid_argument("expand_coefficients: Hermitian 4x4 operator expected");
    std::vector<std::array<int, 4>> keys;
    std::vector<CMatrix> basis;
    for (int u = 0; u < sideA.nSettings; ++u)
        for (int c = 0; c < sideA.nOutcomes; ++c)
            for (int v = 0; v < sideB.nSettings; ++v)
                for (int d = 0; d < sideB.nOutcomes; ++d) {
                    keys.push_back({c, d, u, v});
                    basis.push_back(kron(sideA.element(c, u).transpose(),
                                         sideB.element(d, v).transpose()));
                }
    int m = static_cast<int>(basis.size());
    Eigen::MatrixXd A(32, m);
    Eigen::VectorXd b(32);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            int row = 2 * (4 * i + j);
            b(row) = w(i, j).real();
            b(row + 1) = w(i, j).imag();
            for (int k = 0; k < m; ++k) {
                A(row, k) = basis[k](i, j).real();
                A(row + 1, k) = basis[k](i, j).imag();
            }
        }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    Eigen::VectorXd beta = cod.solve(b);
    if ((A * beta - b).norm() > 1e-10 * (1.0 + b.norm()))
        throw std::invalid_argument("expand_coefficients: basis does not span the operator");
    CoeffMap out;
    for (int k = 0; k < m; ++k) out[keys[k]] = beta(k);
    return out;
}

/// Reconstruction from the coefficients (for residual checks).
inline CMatrix coefficients_operator(const CoeffMap& beta, const Assemblage& sideA,
                                     const Assemblage& sideB) {
    CMatrix w(4, 4);
    for (const auto& [k, c] : beta)
        w = w + c * kron(sideA.element(k[0], k[2]).transpose(),
                         sideB.element(k[1], k[3]).transpose());
    return w;
}

/// DI entanglement-witness value: the four-party correlation
///   sum beta_{c,d}^{u,v} tr[(Phi+ (x) Phi+)(tau_{c|u} (x) rho (x) omega_{d|v})]
/// with both bridge states maximally entangled; equals tr(W rho) / 4.
inline double evaluate_diew(const CoeffMap& beta, const CMatrix& rho, const Assemblage& sideA,
                            const Assemblage& sideB) {
    check_bipartite(rho, 2, 2);
    CMatrix bridge = kron(projector(max_entangled_ket(2)), projector(max_entangled_ket(2)));
    double val = 0.0;
    for (const auto& [k, c] : beta) {
        CMatrix probe = kron(kron(sideA.element(k[0], k[2]), rho), sideB.element(k[1], k[3]));
        val += c * trace_prod(bridge, probe).real();
    }
    return val;
}

inline CMatrix apply_channel(const QubitChannel& n, const CMatrix& rho) {
    CMatrix out(2, 2);
    for (const CMatrix& k : n.kraus) out = out + k * rho * k.dagger();
    return out;
}

inline void check_kraus(const QubitChannel& n) {
    CMatrix s(2, 2);
    for (const CMatrix& k : n.kraus) s = s + k.dagger() * k;
    if ((s - CMatrix::identity(2)).max_abs() > 1e-10)
        throw std::invalid_argument("QubitChannel: Kraus operators not trace preserving");
}

/// Choi matrix J = (N (x) 1)(Phi+), normalized maximally entangled state
/// convention (tr J = 1).
inline CMatrix choi(const QubitChannel& n) {
    check_kraus(n);
    CMatrix phi = projector(max_entangled_ket(2));
    CMatrix j(4, 4);
    for (const CMatrix& k : n.kraus) {
        CMatrix ki = kron(k, CMatrix::identity(2));
        j = j + ki * phi * ki.dagger();
    }
    return j;
}

/// Choi matrix with the channel acting on the second slot, (1 (x) N)(Phi+):
/// the slot order that pairs with the witness expansion below.
inline CMatrix choi_on_second(const QubitChannel& n) {
    check_kraus(n);
    CMatrix phi = projector(max_entangled_ket(2));
    CMatrix j(4, 4);
    for (const CMatrix& k : n.kraus) {
        CMatrix ik = kron(CMatrix::identity(2), k);
        j = j + ik * phi * ik.dagger();
    }
    return j;
}

/// Entanglement breaking iff the Choi matrix is separable; for qubit
/// channels that is exactly the PPT condition.
inline bool is_entanglement_breaking(const QubitChannel& n, double tol = 1e-10) {
    return is_psd(partial_transpose(choi(n), 2, 2, Subsystem::B), tol);
}

/// DI channel-witness value: the conjugated side-A reference states are fed
/// through the channel,
///   sum gamma_{c,d}^{u,v} tr[Phi+ (N(tau*_{c|u}) (x) omega*_{d|v})].
/// With sideA the normalized reference states (tau-hat) this equals
/// tr[(1 (x) N)(Phi+) W^T] for the witness W the gamma expand over
/// tau-hat^T (x) omega^T; EB channels keep it nonnegative when W is an
/// entanglement witness.  The elements are Hermitian, so conj = transpose.
inline double evaluate_channel_witness(const CoeffMap& gamma, const QubitChannel& n,
                                       const Assemblage& sideA, const Assemblage& sideB) {
    check_kraus(n);
    CMatrix bridge = projector(max_entangled_ket(2));
    double val = 0.0;
    for (const auto& [k, c] : gamma) {
        CMatrix probe = kron(apply_channel(n, sideA.element(k[0], k[2]).transpose()),
                             sideB.element(k[1], k[3]).transpose());
        val += c * trace_prod(bridge, probe).real();
    }
    return val;
}

/// Normalized copy of an assemblage (each element scaled to unit trace),
/// the side-A basis of the channel witness.
inline Assemblage normalized_assemblage(const Assemblage& a) {
    Assemblage out = a;
    for (int x = 0; x < a.nSettings; ++x)
        for (int c = 0; c < a.nOutcomes; ++c)
            out.element(c, x) = (1.0 / a.marginal(c, x)) * a.element(c, x);
    return out;
}

inline QubitChannel identity_channel() { return {{CMatrix::identity(2)}}; }

inline QubitChannel depolarizing_channel(double p) {
    double a = std::sqrt(1.0 - 0.75 * p), b = 0.5 * std::sqrt(p);
    return {{a * CMatrix::identity(2), b * pauli_x(), b * pauli_y(), b * pauli_z()}};
}

inline QubitChannel amplitude_damping_channel(double gamma) {
    CMatrix k0(2, 2), k1(2, 2);
    k0(0, 0) = 1.0;
    k0(1, 1) = std::sqrt(1.0 - gamma);
    k1(0, 1) = std::sqrt(gamma);
    return {{k0, k1}};
}

/// werner_state(w) = w |psi-><psi-| + (1 - w) 1/4; NPT exactly for w > 1/3.
inline CMatrix werner_state(double w) {
    CMatrix psi(4, 1);
    psi(1, 0) = 1.0 / std::sqrt(2.0);
    psi(2, 0) = -1.0 / std::sqrt(2.0);
    return w * projector(psi) + (0.25 * (1.0 - w)) * CMatrix::identity(4);
}

}  // namespace steerkit

#pragma once

// Steering-scenario domain model: assemblages, LHS models, the fidelity
// notions between ensembles/assemblages, classical-fidelity baselines and
// the controlled-mixture identity checks used by the complex-valued
// scenarios.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <steerkit/qmat.hpp>
#include <steerkit/sdp.hpp>
#include <steerkit/sdp_solver.hpp>

namespace steerkit {

// Family {rho_{a|x}} of subnormalized states on Bob's side; a and x are
// 0-based everywhere in the code.
struct Assemblage {
    int nOutcomes = 0, nSettings = 0, dim = 0;
    std::vector<CMatrix> el;  // index a + x * nOutcomes

    Assemblage() = default;
    Assemblage(int nA, int nX, int d)
        : nOutcomes(nA), nSettings(nX), dim(d),
          el(static_cast<size_t>(nA) * nX, CMatrix::zero(d)) {}

    CMatrix& element(int a, int x) { return el[static_cast<size_t>(a) + static_cast<size_t>(x) * nOutcomes]; }
    const CMatrix& element(int a, int x) const {
        return el[static_cast<size_t>(a) + static_cast<size_t>(x) * nOutcomes];
    }
    double marginal(int a, int x) const { return element(a, x).trace().real(); }

    /// Largest violation of the assemblage invariants (PSD elements,
    /// per-setting normalization, no-signaling).
    double max_invariant_violation() const {
        double viol = 0.0;
        for (const CMatrix& m : el) viol = std::max(viol, -min_eigenvalue(m));
        CMatrix ref(dim, dim);
        for (int x = 0; x < nSettings; ++x) {
            CMatrix tot(dim, dim);
            for (int a = 0; a < nOutcomes; ++a) tot += element(a, x);
            viol = std::max(viol, std::abs(tot.trace().real() - 1.0));
            if (x == 0) ref = tot;
            else viol = std::max(viol, (tot - ref).max_abs());
        }
        return viol;
    }
    bool is_valid(double tol = 1e-10) const { return max_invariant_violation() <= tol; }

    /// True when every element is (a weighted) rank-one projector.
    bool is_pure(double tol = 1e-8) const {
        for (const CMatrix& m : el) {
            double t = m.trace().real();
            if (t < tol) continue;
            if (std::abs(trace_prod(m, m).real() - t * t) > tol) return false;
        }
        return true;
    }
    bool is_complex(double tol = 1e-12) const {
        for (const CMatrix& m : el)
            for (const cplx& v : m.data())
                if (std::abs(v.imag()) > tol) return true;
        return false;
    }

    /// Normalized element (reference direction sigma-hat).
    CMatrix normalized(int a, int x) const {
        double t = marginal(a, x);
        if (t <= 0.0) throw std::domain_error("normalized: zero marginal");
        return element(a, x) * (1.0 / t);
    }
};

/// rho_{a|x} = tr_A((E_{a|x} (x) 1) state); povms indexed [x][a].
inline Assemblage steered_assemblage(const CMatrix& state,
                                     const std::vector<std::vector<CMatrix>>& povms) {
    if (povms.empty() || povms[0].empty()) throw std::invalid_argument("steered_assemblage: empty POVMs");
    int da = povms[0][0].rows();
    if (state.rows() % da != 0) throw std::invalid_argument("steered_assemblage: dimension mismatch");
    int db = state.rows() / da;
    int nX = static_cast<int>(povms.size());
    int nA = static_cast<int>(povms[0].size());
    for (const auto& setting : povms) {
        if (static_cast<int>(setting.size()) != nA)
            throw std::invalid_argument("steered_assemblage: ragged POVM list");
        CMatrix sum(da, da);
        for (const CMatrix& e : setting) sum += e;
        if ((sum - CMatrix::identity(da)).max_abs() > 1e-8)
            throw std::invalid_argument("steered_assemblage: POVM completeness violated");
    }
    Assemblage out(nA, nX, db);
    for (int x = 0; x < nX; ++x)
        for (int a = 0; a < nA; ++a)
            out.element(a, x) =
                partial_trace(kron(povms[x][a], CMatrix::identity(db)) * state, da, db, Subsystem::A);
    return out;
}

struct Ensemble {
    std::vector<double> weights;
    std::vector<CMatrix> states;  // normalized density matrices
};

/// sum_i sqrt(p_i q_i) sqrt(<rho_i| s_i |rho_i>) with pure first argument.
inline double ensemble_fidelity(const Ensemble& e1, const Ensemble& e2) {
    if (e1.weights.size() != e2.weights.size())
        throw std::invalid_argument("ensemble_fidelity: length mismatch");
    double f = 0.0;
    for (size_t i = 0; i < e1.weights.size(); ++i) {
        const CMatrix& r = e1.states[i];
        if (std::abs(trace_prod(r, r).real() - 1.0) > 1e-8)
            throw std::invalid_argument("ensemble_fidelity: first ensemble must be pure");
        double ov = trace_prod(r, e2.states[i]).real();
        f += std::sqrt(e1.weights[i] * e2.weights[i]) * std::sqrt(std::max(0.0, ov));
    }
    return f;
}

/// (1/|X|) sum_{a,x} sqrt(P_sigma/P_rho) <sig-hat| rho_{a|x} |sig-hat>;
/// linear in the candidate elements, equals 1 iff candidate == reference.
inline double assemblage_fidelity(const Assemblage& ref, const Assemblage& cand) {
    if (ref.nOutcomes != cand.nOutcomes || ref.nSettings != cand.nSettings || ref.dim != cand.dim)
        throw std::invalid_argument("assemblage_fidelity: shape mismatch");
    if (!ref.is_pure()) throw std::invalid_argument("assemblage_fidelity: reference must be pure");
    double f = 0.0;
    for (int x = 0; x < ref.nSettings; ++x)
        for (int a = 0; a < ref.nOutcomes; ++a) {
            double ps = ref.marginal(a, x);
            if (ps <= 1e-14) continue;
            double pr = cand.marginal(a, x);
            if (pr <= 1e-14)
                throw std::domain_error("assemblage_fidelity: zero candidate marginal");
            f += std::sqrt(ps / pr) * trace_prod(ref.normalized(a, x), cand.element(a, x)).real();
        }
    return f / ref.nSettings;
}

/// F2(a, b) = tr(ab) / max(tr a^2, tr b^2).
inline double p2_fidelity(const CMatrix& a, const CMatrix& b) {
    double ta = trace_prod(a, a).real(), tb = trace_prod(b, b).real();
    return trace_prod(a, b).real() / std::max(ta, tb);
}

// Local-hidden-state model over all |A|^|X| deterministic strategies; a
// strategy lambda is encoded base-|A| with digit x giving its outcome at
// setting x.
struct LhsModel {
    int nOutcomes = 0, nSettings = 0;
    std::vector<double> weights;
    std::vector<CMatrix> states;  // normalized hidden states, one per strategy

    static int strategy_count(int nA, int nX) {
        int n = 1;
        for (int x = 0; x < nX; ++x) n *= nA;
        return n;
    }
    int outcome(int lambda, int x) const {
        for (int i = 0; i < x; ++i) lambda /= nOutcomes;
        return lambda % nOutcomes;
    }
    Assemblage induced(int dim) const {
        Assemblage out(nOutcomes, nSettings, dim);
        for (size_t l = 0; l < states.size(); ++l)
            for (int x = 0; x < nSettings; ++x)
                out.element(outcome(static_cast<int>(l), x), x) += weights[l] * states[l];
        return out;
    }
};

/// Exact classical (LHS) fidelity from the per-strategy eigenvalue oracle:
/// with uniform P(lambda) the optimum over hidden states decouples, giving
/// f_c = (sqrt|A| / (|X| |lambda|)) sum_l lambda_max(M_l) with
/// M_l = sum_{a,x} sqrt(P*(a|x)) delta_{a,l_x} sig-hat*_{a|x}.
inline double classical_fidelity_eig(const Assemblage& ref) {
    if (!ref.is_pure()) throw std::invalid_argument("classical_fidelity_eig: reference must be pure");
    int nL = LhsModel::strategy_count(ref.nOutcomes, ref.nSettings);
    LhsModel probe;
    probe.nOutcomes = ref.nOutcomes;
    probe.nSettings = ref.nSettings;
    double total = 0.0;
    for (int l = 0; l < nL; ++l) {
        CMatrix m(ref.dim, ref.dim);
        for (int x = 0; x < ref.nSettings; ++x) {
            int a = probe.outcome(l, x);
            double ps = ref.marginal(a, x);
            if (ps <= 1e-14) continue;
            m += std::sqrt(ps) * ref.normalized(a, x);
        }
        total += max_eigenvalue(m);
    }
    return std::sqrt(static_cast<double>(ref.nOutcomes)) / (ref.nSettings * nL) * total;
}

/// Same value through the sdp module: maximize the (linear) overlap over
/// hidden states {s_l >= 0, tr s_l = 1} with uniform strategy weights.
inline double classical_fidelity_sdp(const Assemblage& ref, const SdpOptions& opts = {}) {
    if (!ref.is_pure()) throw std::invalid_argument("classical_fidelity_sdp: reference must be pure");
    int nL = LhsModel::strategy_count(ref.nOutcomes, ref.nSettings);
    int d = ref.dim;
    double scale = std::sqrt(static_cast<double>(ref.nOutcomes)) / (ref.nSettings * nL);
    LhsModel probe;
    probe.nOutcomes = ref.nOutcomes;
    probe.nSettings = ref.nSettings;

    SdpProblem p;
    for (int l = 0; l < nL; ++l) {
        CMatrix m(d, d);
        for (int x = 0; x < ref.nSettings; ++x) {
            int a = probe.outcome(l, x);
            double ps = ref.marginal(a, x);
            if (ps <= 1e-14) continue;
            m += std::sqrt(ps) * ref.normalized(a, x);
        }
        int blk = p.add_block("s" + std::to_string(l), d);
        std::vector<std::pair<int, double>> trRow;
        for (int i = 0; i < d; ++i) {
            int v = p.add_var(-scale * m(i, i).real());  // minimize -overlap
            p.add_coeff(blk, v, i, i, 1.0);
            trRow.push_back({v, 1.0});
        }
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) {
                int vr = p.add_var(-scale * 2.0 * m(i, j).real());
                p.add_coeff(blk, vr, i, j, 1.0);
                int vi = p.add_var(-scale * 2.0 * m(i, j).imag());
                p.add_coeff(blk, vi, i, j, cplx(0.0, 1.0));
            }
        p.add_equality(trRow, 1.0);
    }
    SdpSolution s = solve(p, opts);
    if (s.status != SdpStatus::Optimal)
        throw std::runtime_error(std::string("classical_fidelity_sdp: solver status ") +
                                 to_string(s.status));
    return -s.objective;
}

/// q sigma (x) |0><0| + (1-q) sigma^T (x) |1><1| on dimension 2d.
inline Assemblage controlled_mixture(const Assemblage& base, double q) {
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("controlled_mixture: q outside [0,1]");
    Assemblage out(base.nOutcomes, base.nSettings, 2 * base.dim);
    CMatrix p0 = projector(CMatrix::ket({1.0, 0.0}));
    CMatrix p1 = projector(CMatrix::ket({0.0, 1.0}));
    for (int x = 0; x < base.nSettings; ++x)
        for (int a = 0; a < base.nOutcomes; ++a)
            out.element(a, x) = q * kron(base.element(a, x), p0) +
                                (1.0 - q) * kron(base.element(a, x).transpose(), p1);
    return out;
}

/// The Pauli-eigenstate reference used by the elegant-Bell and I3622
/// scenarios: settings measure Z, X, Y; all marginals are 1/2.  At x = 2
/// (the Y setting) outcome order is the -Y eigenstate first, matching the
/// sign pattern of the fidelity functional.
inline Assemblage pauli_reference_assemblage() {
    Assemblage ref(2, 3, 2);
    CMatrix paulis[3] = {pauli_z(), pauli_x(), pauli_y()};
    double sign[3][2] = {{+1, -1}, {+1, -1}, {-1, +1}};
    for (int x = 0; x < 3; ++x)
        for (int a = 0; a < 2; ++a)
            ref.element(a, x) = 0.5 * (0.5 * (CMatrix::identity(2) + sign[x][a] * paulis[x]));
    return ref;
}

struct MixtureIdentityReport {
    int samples = 0;
    double maxResidual = 0.0;
};

/// Residuals of the controlled-mixture operator identities for the elegant
/// reference: with B5** = Z(x)I, B6** = X(x)I, B7** = Y(x)Z acting on the
/// mixture sig** = q sig (x) |0><0| + (1-q) sig^T (x) |1><1|,
///   -i tr(sig**_{a|x} B5 B6 B7) = (2q-1) P(a|x) = q - 1/2,
///   -i tr(sig**_{a|x} Bi Bj)    = (2q-1) tr(sig*_{a|x} P_k)   (pairs),
///      tr(sig**_{a|x} B_{4+x})  = tr(sig*_{a|x} P_x)          (q-free),
/// where P_k is the Pauli matrix the pair product collapses to.
inline MixtureIdentityReport verify_mixture_identities(int qSamples) {
    if (qSamples < 1) throw std::invalid_argument("verify_mixture_identities: need >= 1 sample");
    Assemblage ref = pauli_reference_assemblage();
    CMatrix p0 = projector(CMatrix::ket({1.0, 0.0}));
    CMatrix p1 = projector(CMatrix::ket({0.0, 1.0}));
    CMatrix i2 = CMatrix::identity(2);
    CMatrix b5 = kron(pauli_z(), i2);
    CMatrix b6 = kron(pauli_x(), i2);
    CMatrix b7 = kron(pauli_y(), pauli_z());
    CMatrix triple = b5 * b6 * b7;
    // pair products and the Pauli each collapses to
    struct Pair {
        CMatrix prod;
        CMatrix pauli;
    };
    std::vector<Pair> pairs = {{b6 * b7, pauli_z()}, {b7 * b5, pauli_x()}, {b5 * b6, pauli_y()}};
    CMatrix singles[3] = {b5, b6, b7};

    MixtureIdentityReport rep;
    rep.samples = qSamples;
    cplx mi(0.0, -1.0);
    for (int k = 0; k < qSamples; ++k) {
        double q = (qSamples == 1) ? 0.5 : static_cast<double>(k) / (qSamples - 1);
        Assemblage mix = controlled_mixture(ref, q);
        for (int x = 0; x < 3; ++x)
            for (int a = 0; a < 2; ++a) {
                const CMatrix& s2 = mix.element(a, x);
                const CMatrix& s1 = ref.element(a, x);
                double r = std::abs((mi * trace_prod(s2, triple)).real() - (q - 0.5)) +
                           std::abs((mi * trace_prod(s2, triple)).imag());
                rep.maxResidual = std::max(rep.maxResidual, r);
                for (const Pair& pr : pairs) {
                    cplx lhs = mi * trace_prod(s2, pr.prod);
                    double rhs = (2.0 * q - 1.0) * trace_prod(s1, pr.pauli).real();
                    rep.maxResidual = std::max(rep.maxResidual, std::abs(lhs - cplx(rhs)));
                }
                cplx single = trace_prod(s2, singles[x]);
                double exp1 = trace_prod(s1, (x == 0 ? pauli_z() : x == 1 ? pauli_x() : pauli_y()))
                                  .real();
                rep.maxResidual = std::max(rep.maxResidual, std::abs(single - cplx(exp1)));
            }
    }
    return rep;
}

}  // namespace steerkit

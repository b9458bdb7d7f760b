#pragma once

// Primal-dual path-following solver for the SdpProblem IR.
//
// The problem  min c'x  s.t.  F0_k + sum_j x_j F_jk >= 0  is treated in
// conic form (G x + s = h, s >= 0 with G_j = -F_j, h = F0) inside a
// homogeneous self-dual embedding, so infeasibility above the quantum
// bound comes out as a certificate instead of a crash.  Scaling is
// Nesterov-Todd, steps are Mehrotra predictor-corrector, and the Schur
// complement is factored with an optional group/border (block-arrow)
// elimination that the moment compiler feeds via SdpProblem::schurGroup.
//
// Hermitian blocks are embedded as real symmetric ones up front
// ([[Re,-Im],[Im,Re]]), so the core iteration works on real matrices only;
// equality rows are eliminated densely through their nullspace (they only
// appear in small problems - the moment compiler substitutes its equalities
// structurally).

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include <steerkit/sdp.hpp>

namespace steerkit {
namespace detail {

struct REntry {
    int p, q;
    double v;
};

struct RBlock {
    int n = 0;
    Eigen::MatrixXd h;               // constant term F0 (dense)
    std::vector<int> vars;           // variable indices with support here
    std::vector<std::vector<REntry>> ent;  // full symmetric entry lists, parallel to vars
};

// Real symmetric internal form of an SdpProblem (after complex embedding).
struct RProblem {
    int m = 0;
    Eigen::VectorXd c;
    double objConstant = 0.0;
    std::vector<RBlock> blk;
    std::vector<int> group;  // per var; -1 = border
};

inline bool block_is_real(const SdpBlock& b) {
    for (const SdpEntry& e : b.f0)
        if (std::abs(e.v.imag()) > 1e-14) return false;
    for (const auto& [var, es] : b.coeff)
        for (const SdpEntry& e : es)
            if (std::abs(e.v.imag()) > 1e-14) return false;
    return true;
}

// Expand Hermitian upper-triangle entries to a full real symmetric entry
// list, doubling the block when complex values are present.
inline std::vector<REntry> real_entries(const std::vector<SdpEntry>& herm, int n, bool realBlock) {
    std::vector<REntry> out;
    for (const SdpEntry& e : herm) {
        if (realBlock) {
            out.push_back({e.p, e.q, e.v.real()});
            if (e.p != e.q) out.push_back({e.q, e.p, e.v.real()});
        } else {
            double re = e.v.real(), im = e.v.imag();
            auto emit = [&](int i, int j, double w) {
                if (w == 0.0) return;
                out.push_back({i, j, w});
                out.push_back({i + n, j + n, w});
            };
            auto emit_skew = [&](int i, int j, double w) {
                if (w == 0.0) return;
                out.push_back({i, j + n, -w});
                out.push_back({i + n, j, w});
            };
            emit(e.p, e.q, re);
            emit_skew(e.p, e.q, im);
            if (e.p != e.q) {
                emit(e.q, e.p, re);
                emit_skew(e.q, e.p, -im);
            }
        }
    }
    return out;
}

inline RProblem lower(const SdpProblem& p) {
    RProblem r;
    r.m = p.nVars;
    r.c = Eigen::Map<const Eigen::VectorXd>(p.c.data(), p.nVars);
    r.objConstant = p.objConstant;
    if (static_cast<int>(p.schurGroup.size()) == p.nVars)
        r.group = p.schurGroup;
    else
        r.group.assign(p.nVars, -1);
    for (const SdpBlock& b : p.blocks) {
        bool isReal = block_is_real(b);
        RBlock rb;
        rb.n = isReal ? b.size : 2 * b.size;
        rb.h = Eigen::MatrixXd::Zero(rb.n, rb.n);
        for (const REntry& e : real_entries(b.f0, b.size, isReal)) rb.h(e.p, e.q) += e.v;
        for (const auto& [var, es] : b.coeff) {
            std::vector<REntry> full = real_entries(es, b.size, isReal);
            if (full.empty()) continue;
            rb.vars.push_back(var);
            rb.ent.push_back(std::move(full));
        }
        r.blk.push_back(std::move(rb));
    }
    return r;
}

inline double dot_entries(const std::vector<REntry>& es, const Eigen::MatrixXd& y) {
    double t = 0.0;
    for (const REntry& e : es) t += e.v * y(e.q, e.p);
    return t;
}

// Grouped dense Cholesky of the Schur matrix: interior groups first, then
// the border block corrected by the group contributions.
class GroupedSchur {
public:
    // varGroup: validated group per variable (nG = border).
    void init(int m, const std::vector<int>& varGroup, int nGroups) {
        m_ = m;
        nG_ = nGroups;
        gid_ = varGroup;
        gsize_.assign(nGroups + 1, 0);
        local_.resize(m);
        for (int j = 0; j < m; ++j) local_[j] = gsize_[gid_[j]]++;
        D_.resize(nGroups);
        C_.resize(nGroups);
        W_.resize(nGroups);
        lltD_.resize(nGroups);
    }
    void reset() {
        for (int g = 0; g < nG_; ++g) {
            D_[g] = Eigen::MatrixXd::Zero(gsize_[g], gsize_[g]);
            C_[g] = Eigen::MatrixXd::Zero(gsize_[g], gsize_[nG_]);
        }
        B_ = Eigen::MatrixXd::Zero(gsize_[nG_], gsize_[nG_]);
    }
    void add(int j, int l, double v) {
        int gj = gid_[j], gl = gid_[l];
        if (gj == nG_ && gl == nG_) {
            B_(local_[j], local_[l]) += v;
            if (j != l) B_(local_[l], local_[j]) += v;
        } else if (gj == gl) {
            D_[gj](local_[j], local_[l]) += v;
            if (j != l) D_[gj](local_[l], local_[j]) += v;
        } else if (gl == nG_) {
            C_[gj](local_[j], local_[l]) += v;
        } else {  // gj == nG_
            C_[gl](local_[l], local_[j]) += v;
        }
    }
    bool factor() {
        Eigen::MatrixXd btil = B_;
        for (int g = 0; g < nG_; ++g) {
            if (!chol(D_[g], lltD_[g])) return false;
            W_[g] = C_[g];
            lltD_[g].matrixL().solveInPlace(W_[g]);
            btil.noalias() -= W_[g].transpose() * W_[g];
        }
        return chol(btil, lltB_);
    }
    // M y for the assembled (unfactored) matrix; used for refinement
    Eigen::VectorXd apply(const Eigen::VectorXd& y) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(m_);
        int nb = gsize_[nG_];
        Eigen::VectorXd yb(nb);
        std::vector<Eigen::VectorXd> yg(nG_);
        for (int g = 0; g < nG_; ++g) yg[g].resize(gsize_[g]);
        for (int j = 0; j < m_; ++j) {
            if (gid_[j] == nG_) yb(local_[j]) = y(j);
            else yg[gid_[j]](local_[j]) = y(j);
        }
        Eigen::VectorXd ob = B_ * yb;
        for (int g = 0; g < nG_; ++g) {
            Eigen::VectorXd og = D_[g] * yg[g] + C_[g] * yb;
            ob.noalias() += C_[g].transpose() * yg[g];
            for (int j = 0; j < m_; ++j)
                if (gid_[j] == g) out(j) = og(local_[j]);
        }
        for (int j = 0; j < m_; ++j)
            if (gid_[j] == nG_) out(j) = ob(local_[j]);
        return out;
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& r) const {
        Eigen::VectorXd y = solve_once(r);
        y += solve_once(r - apply(y));  // two refinement steps
        y += solve_once(r - apply(y));
        return y;
    }

    Eigen::VectorXd solve_once(const Eigen::VectorXd& r) const {
        int nb = gsize_[nG_];
        Eigen::VectorXd rb(nb);
        std::vector<Eigen::VectorXd> u(nG_);
        // gather
        std::vector<Eigen::VectorXd> rg(nG_);
        for (int g = 0; g < nG_; ++g) rg[g].resize(gsize_[g]);
        for (int j = 0; j < m_; ++j) {
            if (gid_[j] == nG_) rb(local_[j]) = r(j);
            else rg[gid_[j]](local_[j]) = r(j);
        }
        for (int g = 0; g < nG_; ++g) {
            u[g] = rg[g];
            lltD_[g].matrixL().solveInPlace(u[g]);
            rb.noalias() -= W_[g].transpose() * u[g];
        }
        Eigen::VectorXd yb = lltB_.solve(rb);
        Eigen::VectorXd out(m_);
        for (int g = 0; g < nG_; ++g) {
            Eigen::VectorXd yg = u[g];
            yg.noalias() -= W_[g] * yb;
            lltD_[g].matrixL().transpose().solveInPlace(yg);
            for (int j = 0; j < m_; ++j)
                if (gid_[j] == g) out(j) = yg(local_[j]);
        }
        for (int j = 0; j < m_; ++j)
            if (gid_[j] == nG_) out(j) = yb(local_[j]);
        return out;
    }

private:
    static bool chol(const Eigen::MatrixXd& a, Eigen::LLT<Eigen::MatrixXd>& llt) {
        if (a.rows() == 0) {
            llt.compute(a);
            return true;
        }
        double reg = 0.0;
        double scale = 1.0 + a.diagonal().cwiseAbs().maxCoeff();
        for (int attempt = 0; attempt < 12; ++attempt) {
            Eigen::MatrixXd work = a;
            if (reg > 0.0) work.diagonal().array() += reg;
            llt.compute(work);
            if (llt.info() == Eigen::Success) return true;
            reg = (reg == 0.0) ? 1e-13 * scale : reg * 100.0;
        }
        return false;
    }

    int m_ = 0, nG_ = 0;
    std::vector<int> gid_, local_;
    std::vector<int> gsize_;
    std::vector<Eigen::MatrixXd> D_, C_, W_;
    Eigen::MatrixXd B_;
    std::vector<Eigen::LLT<Eigen::MatrixXd>> lltD_;
    Eigen::LLT<Eigen::MatrixXd> lltB_;
};

struct ScaleBlk {
    Eigen::MatrixXd R, Rinv, Tinv;
    Eigen::VectorXd lam;  // diagonal of the scaled point
};

// min eigenvalue of Lam^{-1/2} M Lam^{-1/2}
inline double min_scaled_eig(const Eigen::VectorXd& lam, const Eigen::MatrixXd& m) {
    Eigen::VectorXd is = lam.array().rsqrt();
    Eigen::MatrixXd w = is.asDiagonal() * m * is.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

struct CoreResult {
    Eigen::VectorXd x;
    double pobj = 0.0, dobj = 0.0, gap = 0.0, pres = 0.0;
    SdpStatus status = SdpStatus::NumericalTrouble;
    int iterations = 0;
};

inline CoreResult solve_core(const RProblem& p, const SdpOptions& opts) {
    CoreResult out;
    int m = p.m;
    int nb = static_cast<int>(p.blk.size());
    if (m == 0) {
        out.x.resize(0);
        out.status = SdpStatus::Optimal;
        for (const RBlock& b : p.blk) {
            if (b.n == 0) continue;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.h, Eigen::EigenvaluesOnly);
            if (es.eigenvalues().minCoeff() < -opts.feasTol) out.status = SdpStatus::Infeasible;
        }
        return out;
    }

    // validate / flatten the group hint
    int nGroups = 0;
    for (int g : p.group) nGroups = std::max(nGroups, g + 1);
    std::vector<int> gid(m);
    bool consistent = true;
    for (int j = 0; j < m; ++j) gid[j] = (p.group[j] < 0) ? nGroups : p.group[j];
    for (const RBlock& b : p.blk) {
        int seen = -1;
        for (int j : b.vars) {
            if (gid[j] == nGroups) continue;
            if (seen == -1) seen = gid[j];
            else if (seen != gid[j]) consistent = false;
        }
    }
    if (!consistent) {
        // inconsistent hint: treat every variable as border (dense Schur)
        nGroups = 0;
        std::fill(gid.begin(), gid.end(), 0);
    }
    GroupedSchur schur;
    schur.init(m, gid, nGroups);

    double nu = 0.0;
    for (const RBlock& b : p.blk) nu += b.n;
    double hnorm = 1.0, cnorm = std::max(1.0, p.c.norm());
    {
        double hn = 0.0;
        for (const RBlock& b : p.blk) hn += b.h.squaredNorm();
        hnorm = std::max(1.0, std::sqrt(hn));
    }

    // iterates
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
    std::vector<Eigen::MatrixXd> s(nb), z(nb);
    for (int k = 0; k < nb; ++k) {
        s[k] = Eigen::MatrixXd::Identity(p.blk[k].n, p.blk[k].n);
        z[k] = s[k];
    }
    double tau = 1.0, kappa = 1.0;

    auto sum_xF = [&](const Eigen::VectorXd& v, int k) {
        const RBlock& b = p.blk[k];
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(b.n, b.n);
        for (size_t t = 0; t < b.vars.size(); ++t) {
            double w = v(b.vars[t]);
            if (w == 0.0) continue;
            for (const REntry& e : b.ent[t]) acc(e.p, e.q) += w * e.v;
        }
        return acc;
    };

    std::vector<ScaleBlk> sc(nb);
    std::vector<Eigen::MatrixXd> Rz(nb), Yw(nb), ds(nb), dz(nb), lamS(nb), lamZ(nb);
    std::vector<Eigen::MatrixXd> dsA(nb), dzA(nb);
    Eigen::VectorXd Rx(m), g(m), r1(m), dx1, dx2, dx(m);

    // The dual residual is allowed a modest slack: Schur round-off makes it
    // rebound near non-strictly-complementary optima while gap and primal
    // residual keep improving, and the optimality guarantees we expose (gap
    // and primal feasibility) do not rest on it.
    const double dresTol = 10.0 * std::max(opts.feasTol, opts.gapTol);
    double bestScore = std::numeric_limits<double>::infinity();
    CoreResult best;

    // snapshot handed out on non-converged exits: best iterate seen so far,
    // upgraded to optimal if that iterate met the tolerances
    auto exit_with = [&](SdpStatus fallback) {
        if (std::isfinite(bestScore)) {
            int iters = out.iterations;
            out = best;
            out.iterations = iters;
        }
        if (out.status != SdpStatus::Optimal) out.status = fallback;
        return out;
    };

    for (int iter = 0; iter < opts.maxIter; ++iter) {
        out.iterations = iter;
        // residuals
        double hz = 0.0, sz = 0.0;
        for (int k = 0; k < nb; ++k) {
            Rz[k] = sum_xF(x, k) * (-1.0) + s[k] - tau * p.blk[k].h;
            hz += (p.blk[k].h.array() * z[k].array()).sum();
            sz += (s[k].array() * z[k].array()).sum();
        }
        Rx = tau * p.c;
        for (int k = 0; k < nb; ++k) {
            const RBlock& b = p.blk[k];
            for (size_t t = 0; t < b.vars.size(); ++t)
                Rx(b.vars[t]) -= dot_entries(b.ent[t], z[k]);
        }
        double cx = p.c.dot(x);
        double Rt = kappa + cx + hz;
        double mu = (sz + tau * kappa) / (nu + 1.0);

        double rznorm = 0.0;
        for (int k = 0; k < nb; ++k) rznorm += Rz[k].squaredNorm();
        rznorm = std::sqrt(rznorm);
        double pres = rznorm / tau / hnorm;
        double dres = Rx.norm() / tau / cnorm;
        double gapAbs = sz / (tau * tau);
        double pobj = cx / tau, dobj = -hz / tau;
        double relgap = gapAbs / std::max({1.0, std::abs(pobj), std::abs(dobj)});

        out.x = x / tau;
        out.pobj = pobj;
        // clamp so the reported dual value never overstates the primal
        // (HSD iterates are only feasible up to the residual tolerances)
        out.dobj = std::min(dobj, pobj);
        out.gap = gapAbs;
        out.pres = pres;

        double score = std::max({pres / opts.feasTol, dres / dresTol,
                                 std::min(gapAbs, relgap) / opts.gapTol});
        if (score < bestScore) {
            bestScore = score;
            best = out;
            best.status = (score <= 1.0) ? SdpStatus::Optimal : SdpStatus::NumericalTrouble;
        }

        if (opts.trace)
            std::fprintf(stderr,
                         "it %3d  pobj % .8e dobj % .8e gap %.2e pres %.2e dres %.2e "
                         "mu %.2e tau %.2e kap %.2e\n",
                         iter, pobj, dobj, gapAbs, pres, dres, mu, tau, kappa);

        if (pres <= opts.feasTol && dres <= dresTol &&
            (gapAbs <= opts.gapTol || relgap <= opts.gapTol)) {
            out.status = SdpStatus::Optimal;
            return out;
        }
        // infeasibility certificates
        if (hz < 0.0) {
            Eigen::VectorXd gz = Rx - tau * p.c;  // G'z
            if (gz.norm() / (-hz) <= opts.feasTol * cnorm && tau <= 1e-6 * std::max(1.0, kappa)) {
                out.status = SdpStatus::Infeasible;
                return out;
            }
        }
        if (cx < 0.0) {
            double gxs = 0.0;
            for (int k = 0; k < nb; ++k)
                gxs += (sum_xF(x, k) * (-1.0) + s[k]).squaredNorm();
            if (std::sqrt(gxs) / (-cx) <= opts.feasTol * hnorm && tau <= 1e-6 * std::max(1.0, kappa)) {
                out.status = SdpStatus::NumericalTrouble;  // dual infeasible / unbounded
                return out;
            }
        }

        // Nesterov-Todd scaling per block
        bool ok = true;
        for (int k = 0; k < nb; ++k) {
            int n = p.blk[k].n;
            Eigen::LLT<Eigen::MatrixXd> ls(s[k]), lz(z[k]);
            if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) {
                ok = false;
                break;
            }
            Eigen::MatrixXd Ls = ls.matrixL(), Lz = lz.matrixL();
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(Lz.transpose() * Ls,
                                                  Eigen::ComputeFullU | Eigen::ComputeFullV);
            Eigen::VectorXd sig = svd.singularValues();
            if (sig.minCoeff() <= 0.0) {
                ok = false;
                break;
            }
            Eigen::VectorXd si = sig.array().sqrt().inverse();
            sc[k].R = Ls * svd.matrixV() * si.asDiagonal();
            Eigen::MatrixXd Linv = Eigen::MatrixXd::Identity(n, n);
            Ls.triangularView<Eigen::Lower>().solveInPlace(Linv);
            sc[k].Rinv = sig.array().sqrt().matrix().asDiagonal() * svd.matrixV().transpose() * Linv;
            sc[k].Tinv = sc[k].Rinv.transpose() * sc[k].Rinv;
            sc[k].lam = sig;
        }
        if (!ok) return exit_with(SdpStatus::NumericalTrouble);

        // Schur matrix and factorization
        schur.reset();
        for (int k = 0; k < nb; ++k) {
            const RBlock& b = p.blk[k];
            const Eigen::MatrixXd& T = sc[k].Tinv;
            int nv = static_cast<int>(b.vars.size());
            for (int a = 0; a < nv; ++a) {
                for (int c2 = a; c2 < nv; ++c2) {
                    double acc = 0.0;
                    for (const REntry& e : b.ent[a])
                        for (const REntry& f : b.ent[c2])
                            acc += e.v * f.v * T(e.q, f.p) * T(f.q, e.p);
                    schur.add(b.vars[a], b.vars[c2], acc);
                }
            }
        }
        if (!schur.factor()) return exit_with(SdpStatus::NumericalTrouble);

        // g, rho_h
        double rhoh = 0.0;
        g.setZero();
        std::vector<Eigen::MatrixXd> Yh(nb);
        for (int k = 0; k < nb; ++k) {
            const RBlock& b = p.blk[k];
            Yh[k] = sc[k].Tinv * b.h * sc[k].Tinv;
            rhoh += (b.h.array() * Yh[k].array()).sum();
            for (size_t t = 0; t < b.vars.size(); ++t)
                g(b.vars[t]) -= dot_entries(b.ent[t], Yh[k]);
        }
        dx2 = schur.solve(g - p.c);

        // one Newton solve for given (eta, D per block, dc); fills dx, ds, dz, dtau, dkappa
        double dtau = 0.0, dkappa = 0.0;
        auto newton = [&](double eta, const std::vector<Eigen::MatrixXd>& D, double dc) -> bool {
            double hYw = 0.0;
            for (int k = 0; k < nb; ++k) {
                const ScaleBlk& S = sc[k];
                Eigen::MatrixXd W = eta * Rz[k] + S.R * D[k] * S.R.transpose();
                Yw[k] = S.Tinv * W * S.Tinv;
                hYw += (p.blk[k].h.array() * Yw[k].array()).sum();
            }
            r1 = -eta * Rx;
            for (int k = 0; k < nb; ++k) {
                const RBlock& b = p.blk[k];
                for (size_t t = 0; t < b.vars.size(); ++t)
                    r1(b.vars[t]) += dot_entries(b.ent[t], Yw[k]);
            }
            dx1 = schur.solve(r1);
            double denom = (p.c + g).dot(dx2) - rhoh - kappa / tau;
            if (std::abs(denom) < 1e-300) return false;
            dtau = (-eta * Rt - hYw - dc / tau - (p.c + g).dot(dx1)) / denom;
            dx = dx1 + dtau * dx2;
            for (int k = 0; k < nb; ++k) {
                const ScaleBlk& S = sc[k];
                ds[k] = -eta * Rz[k] + sum_xF(dx, k) + dtau * p.blk[k].h;
                dz[k] = S.Tinv * (S.R * D[k] * S.R.transpose() - ds[k]) * S.Tinv;
                lamS[k] = S.Rinv * ds[k] * S.Rinv.transpose();
                lamZ[k] = S.R.transpose() * dz[k] * S.R;
            }
            dkappa = (dc - kappa * dtau) / tau;
            return true;
        };

        auto max_step = [&]() {
            double a = std::numeric_limits<double>::infinity();
            for (int k = 0; k < nb; ++k) {
                double msv = min_scaled_eig(sc[k].lam, lamS[k]);
                double mzv = min_scaled_eig(sc[k].lam, lamZ[k]);
                if (msv < 0) a = std::min(a, -1.0 / msv);
                if (mzv < 0) a = std::min(a, -1.0 / mzv);
            }
            if (dtau < 0) a = std::min(a, -tau / dtau);
            if (dkappa < 0) a = std::min(a, -kappa / dkappa);
            return a;
        };

        // predictor
        std::vector<Eigen::MatrixXd> D(nb);
        for (int k = 0; k < nb; ++k)
            D[k] = Eigen::MatrixXd((-sc[k].lam).asDiagonal());
        if (!newton(1.0, D, -tau * kappa)) return exit_with(SdpStatus::NumericalTrouble);
        double aAff = std::min(1.0, max_step());
        double szAff = 0.0;
        for (int k = 0; k < nb; ++k) {
            szAff += ((s[k] + aAff * ds[k]).array() * (z[k] + aAff * dz[k]).array()).sum();
        }
        double muAff = (szAff + (tau + aAff * dtau) * (kappa + aAff * dkappa)) / (nu + 1.0);
        double sigma = std::pow(std::max(0.0, std::min(1.0, muAff / mu)), 3.0);
        double dtauA = dtau, dkapA = dkappa;
        for (int k = 0; k < nb; ++k) {
            dsA[k] = lamS[k];
            dzA[k] = lamZ[k];
        }

        // corrector / combined
        for (int k = 0; k < nb; ++k) {
            int n = p.blk[k].n;
            const Eigen::VectorXd& lam = sc[k].lam;
            Eigen::MatrixXd gamma = 0.5 * (dsA[k] * dzA[k] + dzA[k] * dsA[k]);
            Eigen::MatrixXd num = -gamma;
            for (int i = 0; i < n; ++i) num(i, i) += sigma * mu - lam(i) * lam(i);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) D[k](i, j) = 2.0 * num(i, j) / (lam(i) + lam(j));
        }
        if (!newton(1.0 - sigma, D, sigma * mu - tau * kappa - dtauA * dkapA))
            return exit_with(SdpStatus::NumericalTrouble);
        double alpha = std::min(1.0, 0.98 * max_step());
        if (!(alpha > 1e-8))
            return exit_with(relgap <= 1e3 * opts.gapTol ? SdpStatus::MaxIterations
                                                         : SdpStatus::NumericalTrouble);
        x += alpha * dx;
        tau += alpha * dtau;
        kappa += alpha * dkappa;
        for (int k = 0; k < nb; ++k) {
            s[k] += alpha * ds[k];
            z[k] += alpha * dz[k];
            // exact resymmetrization keeps LLT happy
            s[k] = 0.5 * (s[k] + s[k].transpose()).eval();
            z[k] = 0.5 * (z[k] + z[k].transpose()).eval();
        }
    }
    return exit_with(SdpStatus::MaxIterations);
}

// Dense nullspace elimination of equality rows; returns the reduced problem
// plus the affine map x = x0 + N y.
struct Reduction {
    bool infeasibleRows = false;
    Eigen::VectorXd x0;
    Eigen::MatrixXd N;
};

inline SdpProblem eliminate_equalities(const SdpProblem& p, Reduction& red) {
    int n = p.nVars, rows = static_cast<int>(p.equalities.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, n);
    Eigen::VectorXd b(rows);
    for (int r = 0; r < rows; ++r) {
        b(r) = p.equalities[r].rhs;
        for (auto [j, a] : p.equalities[r].terms) A(r, j) += a;
    }
    red.x0 = A.colPivHouseholderQr().solve(b);
    if ((A * red.x0 - b).norm() > 1e-8 * (1.0 + b.norm())) {
        red.infeasibleRows = true;
        return SdpProblem{};
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    lu.setThreshold(1e-10);
    red.N = lu.kernel();
    if (lu.rank() == n) red.N = Eigen::MatrixXd::Zero(n, 0);
    int nk = static_cast<int>(red.N.cols());

    SdpProblem q;
    q.objConstant = p.objConstant;
    for (int l = 0; l < nk; ++l) q.add_var(red.N.col(l).dot(Eigen::Map<const Eigen::VectorXd>(p.c.data(), n)));
    q.objConstant += red.x0.dot(Eigen::Map<const Eigen::VectorXd>(p.c.data(), n));
    for (const SdpBlock& blk : p.blocks) {
        int kb = q.add_block(blk.label, blk.size);
        // dense accumulate: these problems are small
        CMatrix f0(blk.size, blk.size);
        std::vector<CMatrix> fj(nk, CMatrix(blk.size, blk.size));
        auto addto = [&](CMatrix& m, const std::vector<SdpEntry>& es, double w) {
            for (const SdpEntry& e : es) {
                m(e.p, e.q) += w * e.v;
                if (e.p != e.q) m(e.q, e.p) += w * std::conj(e.v);
            }
        };
        addto(f0, blk.f0, 1.0);
        for (const auto& [var, es] : blk.coeff) {
            addto(f0, es, red.x0(var));
            for (int l = 0; l < nk; ++l)
                if (red.N(var, l) != 0.0) addto(fj[l], es, red.N(var, l));
        }
        for (int i = 0; i < blk.size; ++i)
            for (int j = i; j < blk.size; ++j) {
                if (std::abs(f0(i, j)) > 1e-14) q.set_f0(kb, i, j, f0(i, j));
                for (int l = 0; l < nk; ++l)
                    if (std::abs(fj[l](i, j)) > 1e-14) q.add_coeff(kb, l, i, j, fj[l](i, j));
            }
    }
    return q;
}

}  // namespace detail

inline SdpSolution solve(const SdpProblem& p, const SdpOptions& opts = {}) {
    SdpSolution sol;
    if (!p.equalities.empty()) {
        detail::Reduction red;
        SdpProblem q = detail::eliminate_equalities(p, red);
        if (red.infeasibleRows) {
            sol.status = SdpStatus::Infeasible;
            return sol;
        }
        SdpSolution inner = solve(q, opts);
        sol = inner;
        sol.x.assign(p.nVars, 0.0);
        Eigen::VectorXd y = Eigen::VectorXd::Zero(red.N.cols());
        for (size_t i = 0; i < inner.x.size(); ++i) y(static_cast<int>(i)) = inner.x[i];
        Eigen::VectorXd xf = red.x0 + red.N * y;
        for (int j = 0; j < p.nVars; ++j) sol.x[j] = xf(j);
        if (sol.status == SdpStatus::Optimal)
            sol.maxPrimalResidual = p.max_violation(sol.x);
        return sol;
    }

    detail::RProblem rp = detail::lower(p);
    detail::CoreResult core = detail::solve_core(rp, opts);
    sol.status = core.status;
    sol.iterations = core.iterations;
    sol.x.assign(p.nVars, 0.0);
    for (int j = 0; j < p.nVars; ++j) sol.x[j] = core.x(j);
    sol.objective = core.pobj + p.objConstant;
    sol.dualObjective = core.dobj + p.objConstant;
    sol.gap = core.gap;
    sol.maxPrimalResidual = core.pres;
    return sol;
}

}  // namespace steerkit

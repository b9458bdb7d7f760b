// Acceptance gate: one pass/fail line per pinned criterion.  Exit code is
// the number of failed criteria.

#include <steerkit/certify.hpp>
#include <steerkit/selftest.hpp>
#include <steerkit/sdpa_io.hpp>

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <sstream>

using namespace steerkit;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what) {
    std::printf("[%2d] %s  %s\n", id, ok ? "PASS" : "FAIL", what.c_str());
    if (!ok) ++failures;
}

double now_seconds(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
    va_list ap;
    va_start(ap, f);
    char buf[512];
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

std::vector<std::vector<CMatrix>> alice_povms(const BellScenario& sc) {
    std::vector<std::vector<CMatrix>> povms;
    CMatrix i2 = CMatrix::identity(2);
    for (const CMatrix& a : sc.aliceObservables)
        povms.push_back({0.5 * (i2 + a), 0.5 * (i2 - a)});
    return povms;
}

std::map<std::pair<int, int>, double> marginals_of(const Assemblage& asg) {
    std::map<std::pair<int, int>, double> p;
    for (int x = 0; x < asg.nSettings; ++x)
        for (int a = 0; a < asg.nOutcomes; ++a) p[{a, x}] = asg.marginal(a, x);
    return p;
}

CMatrix random_hermitian(int n, std::mt19937& rng) {
    std::normal_distribution<double> g;
    CMatrix m(n, n);
    for (int i = 0; i < n; ++i) {
        m(i, i) = g(rng);
        for (int j = i + 1; j < n; ++j) {
            cplx v(g(rng), g(rng));
            m(i, j) = v;
            m(j, i) = std::conj(v);
        }
    }
    return m;
}

CMatrix random_state(int n, std::mt19937& rng) {
    std::normal_distribution<double> g;
    CMatrix gin(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) gin(i, j) = cplx(g(rng), g(rng));
    CMatrix m = gin * gin.dagger();
    return (1.0 / m.trace().real()) * m;
}

// max tr(CX) s.t. tr(X) = 1, X >= 0: optimum is the largest eigenvalue.
SdpProblem max_eig_problem(const CMatrix& c) {
    int d = c.rows();
    SdpProblem p;
    int blk = p.add_block("X", d);
    std::vector<std::pair<int, double>> trRow;
    for (int i = 0; i < d; ++i) {
        int v = p.add_var(-c(i, i).real());
        p.add_coeff(blk, v, i, i, 1.0);
        trRow.push_back({v, 1.0});
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            int vr = p.add_var(-2.0 * c(i, j).real());
            p.add_coeff(blk, vr, i, j, 1.0);
            int vi = p.add_var(-2.0 * c(i, j).imag());
            p.add_coeff(blk, vi, i, j, cplx(0.0, 1.0));
        }
    p.add_equality(trRow, 1.0);
    return p;
}

void criterion_1() {
    BellScenario sc = chsh_scenario();
    auto t0 = std::chrono::steady_clock::now();
    CurvePoint pt = fidelity_lower_bound(sc, sc.quantumBound);
    double dt = now_seconds(t0);
    bool ok = std::abs(pt.fidelityLowerBound - 1.0) < 1e-4 && dt < 5.0;
    report(1, ok, fmt("chsh self-test at 2*sqrt(2): f = %.9f (tol 1e-4, %.2f s < 5 s)",
                      pt.fidelityLowerBound, dt));
}

void criterion_2() {
    BellScenario sc = chsh_scenario();
    auto t0 = std::chrono::steady_clock::now();
    double eig = classical_fidelity_eig(sc.referenceAssemblage);
    double sdp = classical_fidelity_sdp(sc.referenceAssemblage);
    double dt = now_seconds(t0);
    bool ok = std::abs(eig - 0.8535533906) < 1e-6 && std::abs(sdp - 0.8535533906) < 1e-6 &&
              dt < 1.0;
    report(2, ok, fmt("chsh classical fidelity: eig %.9f, sdp %.9f (pin 0.853553 tol 1e-6, %.2f s)",
                      eig, sdp, dt));
}

void criterion_3() {
    auto t0 = std::chrono::steady_clock::now();
    double f = classical_fidelity_eig(elegant_scenario().referenceAssemblage);
    double dt = now_seconds(t0);
    bool ok = std::abs(f - 0.7886751346) < 1e-6 && dt < 1.0;
    report(3, ok, fmt("elegant classical fidelity: %.9f (pin 0.788675 tol 1e-6, %.2f s)", f, dt));
}

void criterion_4() {
    BellScenario sc = elegant_scenario();
    CurvePoint top = fidelity_lower_bound(sc, sc.quantumBound);
    SelfTestReport rep = sweep(sc, 9);
    double devPct = -1.0;
    if (rep.crossingViolation)
        devPct = 100.0 * (sc.quantumBound - *rep.crossingViolation) / sc.quantumBound;
    bool ok = std::abs(top.fidelityLowerBound - 1.0) < 1e-3 && rep.crossingViolation &&
              std::abs(devPct - 5.4) < 1.0;
    report(4, ok, fmt("elegant self-test: f(4*sqrt(3)) = %.6f (tol 1e-3), crossing %.2f%% below "
                      "the quantum bound (pin 5.4 +- 1.0)",
                      top.fidelityLowerBound, devPct));
}

void criterion_5() {
    bool ok = true;
    std::ostringstream detail;
    for (double alpha : {0.0, 0.5, 1.0}) {
        BellScenario sc = tilted_chsh_scenario(alpha);
        MomentMap m = realize(sc, projector(sc.referenceState), alice_povms(sc),
                              sc.bobObservables);
        double realized = evaluate(sc.bellFunctional, m).real();
        double expected = std::sqrt(8.0 + 2.0 * alpha * alpha);
        CurvePoint pt = fidelity_lower_bound(sc, sc.quantumBound);
        ok = ok && std::abs(realized - expected) < 1e-10 &&
             std::abs(pt.fidelityLowerBound - 1.0) < 1e-3;
        detail << fmt(" a=%.1f: |viol-bound|=%.1e f=%.6f;", alpha, std::abs(realized - expected),
                      pt.fidelityLowerBound);
    }
    BellScenario chsh = chsh_scenario(), tilted0 = tilted_chsh_scenario(0.0);
    SdpOptions opts;
    double maxDiff = 0.0;
    for (double f : {0.25, 0.5, 0.75}) {
        double v = chsh.localBound + f * (chsh.quantumBound - chsh.localBound);
        CurvePoint a = fidelity_lower_bound(chsh, v);
        CurvePoint b = fidelity_lower_bound(tilted0, v);
        maxDiff = std::max(maxDiff, std::abs(a.fidelityLowerBound - b.fidelityLowerBound));
    }
    ok = ok && maxDiff <= 2.0 * opts.gapTol;
    report(5, ok, fmt("tilted: bounds+fidelity per alpha;%s alpha=0 vs chsh max diff %.1e "
                      "(tol 2*gapTol)",
                      detail.str().c_str(), maxDiff));
}

void criterion_6() {
    BellScenario sc = i3622_scenario();
    CurvePoint pt = fidelity_lower_bound(sc, sc.quantumBound);
    bool ok = std::abs(pt.fidelityLowerBound - 1.0) < 1e-3;
    report(6, ok, fmt("i3622 self-test at 6*sqrt(2): f = %.6f (tol 1e-3)", pt.fidelityLowerBound));
}

void criterion_7() {
    std::mt19937 rng(5);
    bool ok = true;
    int total = 0;
    double worst = -1.0;  // max(bound - truth)
    for (const BellScenario& sc :
         {chsh_scenario(), tilted_chsh_scenario(0.7), elegant_scenario(), i3622_scenario()}) {
        auto povms = alice_povms(sc);
        double pMax = sc.complexValued ? 0.25 : 0.6;
        std::uniform_real_distribution<double> U(0.0, pMax);
        int done = 0;
        while (done < 20) {
            double p = U(rng);
            CMatrix rho = (1.0 - p) * projector(sc.referenceState) +
                          (p / 4.0) * CMatrix::identity(4);
            Assemblage asg = steered_assemblage(rho, povms);
            MomentMap m = realize(sc, rho, povms, sc.bobObservables);
            double viol = evaluate(sc.bellFunctional, m).real();
            if (viol <= sc.localBound + 1e-6) continue;
            CurvePoint pt = fidelity_lower_bound(sc, viol, marginals_of(asg));
            double truth = assemblage_fidelity(sc.referenceAssemblage, asg);
            worst = std::max(worst, pt.fidelityLowerBound - truth);
            ok = ok && pt.status == SdpStatus::Optimal && pt.fidelityLowerBound <= truth + 1e-6;
            ++done;
            ++total;
        }
    }
    report(7, ok, fmt("soundness: %d randomized strategies (20 per scenario), "
                      "max(bound - true fidelity) = %.1e (tol 1e-6)",
                      total, worst));
}

void criterion_8() {
    MixtureIdentityReport rep = verify_mixture_identities(1000);
    bool ok = rep.maxResidual < 1e-10;
    report(8, ok, fmt("controlled-mixture identities: max residual %.1e over %d q samples "
                      "(tol 1e-10)",
                      rep.maxResidual, rep.samples));
}

void criterion_9() {
    std::mt19937 rng(9);
    Assemblage ref = pauli_reference_assemblage();
    CMatrix rhoW = werner_state(0.5);
    CoeffMap beta = expand_coefficients(*ppt_witness(rhoW), ref, ref);
    double diew = evaluate_diew(beta, rhoW, ref, ref);
    bool ok = std::abs(diew + 1.0 / 32.0) < 1e-10;
    ok = ok && !ppt_witness(werner_state(1.0 / 3.0)).has_value();
    double minSep = 1.0;
    for (int k = 0; k < 1000; ++k)
        minSep = std::min(minSep, evaluate_diew(beta, kron(random_state(2, rng),
                                                           random_state(2, rng)),
                                                ref, ref));
    ok = ok && minSep >= -1e-9;

    Assemblage tauHat = normalized_assemblage(ref);
    auto witness_value = [&](const QubitChannel& n, const CMatrix& targetChoi) {
        CoeffMap gamma =
            expand_coefficients(ppt_witness(targetChoi)->transpose(), tauHat, ref);
        return evaluate_channel_witness(gamma, n, tauHat, ref);
    };
    QubitChannel id = identity_channel(), ad = amplitude_damping_channel(0.5);
    double vId = witness_value(id, choi_on_second(id));
    double vAd = witness_value(ad, choi_on_second(ad));
    CoeffMap gammaId = expand_coefficients(ppt_witness(choi_on_second(id))->transpose(),
                                           tauHat, ref);
    double vDep = evaluate_channel_witness(gammaId, depolarizing_channel(1.0), tauHat, ref);
    ok = ok && vId < 0.0 && vAd < 0.0 && vDep >= -1e-9;
    report(9, ok, fmt("certification: werner(0.5) witness %.10f (pin -1/32 tol 1e-10), "
                      "werner(1/3) no witness, min separable %.1e >= -1e-9, channels id %.3f / "
                      "ad(0.5) %.3f < 0, depolarizing %.1e >= -1e-9",
                      diew, minSep, vId, vAd, vDep));
}

void criterion_10() {
    std::mt19937 rng(10);
    double worst = 0.0;
    bool ok = true;
    for (int trial = 0; trial < 100; ++trial) {
        CMatrix c = random_hermitian(2 + trial % 5, rng);
        SdpSolution s = solve(max_eig_problem(c));
        double err = std::abs(-s.objective - max_eigenvalue(c));
        worst = std::max(worst, err);
        ok = ok && s.status == SdpStatus::Optimal && err < 1e-6;
    }
    // SDPA writer round trip at the chsh acceptance point; the external
    // solver leg runs as its own test via the exported file
    BellScenario sc = chsh_scenario();
    RelaxationProblem rp = assemble(sc, sc.quantumBound, {}, ConstraintMode::Equality);
    std::stringstream buf;
    export_sdpa(rp.sdp, buf);
    SdpSolution rt = solve(import_sdpa(buf));
    double rtObj = rt.objective;
    ok = ok && std::abs(rtObj - 1.0) < 1e-4;
    report(10, ok, fmt("solver vs eigenvalue oracle on 100 random SDPs: max err %.1e (tol 1e-6); "
                       "sdpa round-trip chsh bound %.6f (tol 1e-4)",
                       worst, rtObj));
}

}  // namespace

int main() {
    auto t0 = std::chrono::steady_clock::now();
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    std::printf("%d/10 criteria passed (%.1f s)\n", 10 - failures, now_seconds(t0));
    return failures;
}

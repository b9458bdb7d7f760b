#pragma once

// Fidelity lower-bound curves f(violation), classical baselines, and the
// crossing threshold where the device-independent bound beats the best
// local-hidden-state fidelity.

#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <steerkit/moment.hpp>
#include <steerkit/scenarios.hpp>
#include <steerkit/sdp_solver.hpp>
#include <steerkit/steering.hpp>

namespace steerkit {

struct CurvePoint {
    double violation = 0.0;
    double fidelityLowerBound = 0.0;
    SdpStatus status = SdpStatus::NumericalTrouble;
    double gap = 0.0;
    double solveSeconds = 0.0;
};

struct SelfTestReport {
    std::string scenario;
    std::vector<CurvePoint> curve;
    double classicalFidelity = 0.0;
    std::optional<double> crossingViolation;
};

/// One point of the bound curve: assemble the relaxation at the observed
/// violation and minimize the fidelity expression.
inline CurvePoint fidelity_lower_bound(const BellScenario& sc, double violation,
                                       const std::map<std::pair<int, int>, double>& marginals = {},
                                       ConstraintMode mode = ConstraintMode::Equality,
                                       const SdpOptions& opts = {}) {
    if (violation > sc.quantumBound + 1e-9)
        throw std::invalid_argument("fidelity_lower_bound: violation above the quantum bound");
    auto t0 = std::chrono::steady_clock::now();
    RelaxationProblem rp = assemble(sc, violation, marginals, mode);
    SdpSolution s = solve(rp.sdp, opts);
    auto t1 = std::chrono::steady_clock::now();
    CurvePoint pt;
    pt.violation = violation;
    pt.fidelityLowerBound = s.objective;
    pt.status = s.status;
    pt.gap = s.gap;
    pt.solveSeconds = std::chrono::duration<double>(t1 - t0).count();
    return pt;
}

namespace detail {

/// Bisection for f(v) = classicalFidelity between two bracketing violations,
/// to 1e-4 in the violation.
inline std::optional<double> crossing_bisect(const BellScenario& sc, double lo, double hi,
                                             double classicalFidelity, ConstraintMode mode,
                                             const SdpOptions& opts) {
    for (int it = 0; it < 60 && hi - lo > 1e-4; ++it) {
        double mid = 0.5 * (lo + hi);
        CurvePoint pt = fidelity_lower_bound(sc, mid, {}, mode, opts);
        if (pt.status != SdpStatus::Optimal) return std::nullopt;
        (pt.fidelityLowerBound < classicalFidelity ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Bound curve over [localBound, quantumBound] on a uniform violation grid,
/// with the classical baseline and the crossing threshold.  Points are
/// independent solves and run on `jobs` workers; output order is by grid
/// index regardless.
inline SelfTestReport sweep(const BellScenario& sc, int nPoints,
                            ConstraintMode mode = ConstraintMode::Equality,
                            const SdpOptions& opts = {}, int jobs = 1) {
    if (nPoints < 2) throw std::invalid_argument("sweep: need at least two points");
    SelfTestReport rep;
    rep.scenario = sc.name;
    rep.classicalFidelity = classical_fidelity_eig(sc.referenceAssemblage);
    rep.curve.resize(nPoints);

    auto run_point = [&](int i) {
        double v = sc.localBound +
                   (sc.quantumBound - sc.localBound) * static_cast<double>(i) / (nPoints - 1);
        try {
            rep.curve[i] = fidelity_lower_bound(sc, v, {}, mode, opts);
        } catch (const std::exception&) {  // flagged, not fatal
            rep.curve[i].violation = v;
            rep.curve[i].status = SdpStatus::NumericalTrouble;
        }
    };
    if (jobs <= 1) {
        for (int i = 0; i < nPoints; ++i) run_point(i);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w)
            pool.emplace_back([&, w] {
                for (int i = w; i < nPoints; i += jobs) run_point(i);
            });
        for (std::thread& t : pool) t.join();
    }

    // crossing: bracket at the highest-violation sign change among converged
    // points, then bisect
    for (int i = nPoints - 1; i > 0; --i) {
        const CurvePoint &a = rep.curve[i - 1], &b = rep.curve[i];
        if (a.status != SdpStatus::Optimal || b.status != SdpStatus::Optimal) continue;
        if (a.fidelityLowerBound < rep.classicalFidelity &&
            b.fidelityLowerBound >= rep.classicalFidelity) {
            rep.crossingViolation = detail::crossing_bisect(sc, a.violation, b.violation,
                                                            rep.classicalFidelity, mode, opts);
            break;
        }
    }
    return rep;
}

inline std::string to_csv(const SelfTestReport& rep) {
    std::ostringstream out;
    out << "violation,fidelity_lower_bound,status,gap,seconds\n";
    out.precision(12);
    for (const CurvePoint& pt : rep.curve)
        out << pt.violation << ',' << pt.fidelityLowerBound << ',' << to_string(pt.status) << ','
            << pt.gap << ',' << pt.solveSeconds << '\n';
    return out.str();
}

}  // namespace steerkit

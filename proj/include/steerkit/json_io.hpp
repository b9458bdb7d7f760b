#pragma once

// JSON serialization for the batch front end: matrices and assemblages
// ([re, im] entry pairs), Kraus-list channels, scenario dumps, and the
// self-test reports.

#include <json.hpp>

#include <steerkit/certify.hpp>
#include <steerkit/scenarios.hpp>
#include <steerkit/selftest.hpp>
#include <steerkit/steering.hpp>

namespace steerkit {

using json = nlohmann::json;

inline json to_json(const CMatrix& m) {
    json entries = json::array();
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            entries.push_back({m(i, j).real(), m(i, j).imag()});
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

inline CMatrix matrix_from_json(const json& j) {
    int rows = j.at("rows"), cols = j.at("cols");
    const json& e = j.at("entries");
    if (rows < 1 || cols < 1 || static_cast<int>(e.size()) != rows * cols)
        throw std::invalid_argument("matrix_from_json: entry count mismatch");
    CMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int jj = 0; jj < cols; ++jj) {
            const json& z = e[static_cast<size_t>(i) * cols + jj];
            m(i, jj) = cplx(z.at(0).get<double>(), z.at(1).get<double>());
        }
    return m;
}

inline json to_json(const Assemblage& a) {
    json el = json::array();
    for (int x = 0; x < a.nSettings; ++x) {
        json row = json::array();
        for (int o = 0; o < a.nOutcomes; ++o) row.push_back(to_json(a.element(o, x)));
        el.push_back(row);
    }
    return {{"dim", a.dim}, {"n_outcomes", a.nOutcomes}, {"n_settings", a.nSettings},
            {"elements", el}};
}

inline Assemblage assemblage_from_json(const json& j) {
    Assemblage a(j.at("n_outcomes"), j.at("n_settings"), j.at("dim"));
    const json& el = j.at("elements");
    for (int x = 0; x < a.nSettings; ++x)
        for (int o = 0; o < a.nOutcomes; ++o) a.element(o, x) = matrix_from_json(el.at(x).at(o));
    return a;
}

inline json to_json(const QubitChannel& n) {
    json ks = json::array();
    for (const CMatrix& k : n.kraus) ks.push_back(to_json(k));
    return {{"kraus", ks}};
}

inline QubitChannel channel_from_json(const json& j) {
    QubitChannel n;
    for (const json& k : j.at("kraus")) n.kraus.push_back(matrix_from_json(k));
    check_kraus(n);
    return n;
}

inline json to_json(const MomentPolynomial& p) {
    json terms = json::array();
    for (const MomentTerm& t : p.terms)
        terms.push_back({{"a", t.a}, {"x", t.x}, {"word", t.word},
                         {"coeff", {t.coeff.real(), t.coeff.imag()}}});
    return {{"constant", {p.constant.real(), p.constant.imag()}}, {"terms", terms}};
}

inline json to_json(const WordPoly& p) {
    json terms = json::array();
    for (const auto& [w, c] : p)
        terms.push_back({{"word", w}, {"coeff", {c.real(), c.imag()}}});
    return terms;
}

/// Scenario dump: generator count, word sequences as index lists, and the
/// functional/localizing coefficient tables.
inline json scenario_to_json(const BellScenario& sc) {
    json locPolys = json::array();
    for (const WordPoly& p : sc.localizingPolynomials) locPolys.push_back(to_json(p));
    return {{"name", sc.name},
            {"alpha", sc.alpha},
            {"n_generators", sc.nGenerators},
            {"n_settings", sc.nSettings},
            {"n_outcomes", sc.nOutcomes},
            {"local_bound", sc.localBound},
            {"quantum_bound", sc.quantumBound},
            {"complex_valued", sc.complexValued},
            {"moment_sequence", sc.momentSequence},
            {"localizing_sequence", sc.localizingSequence},
            {"bell_functional", to_json(sc.bellFunctional)},
            {"fidelity_polynomial", to_json(sc.fidelityPolynomial)},
            {"localizing_polynomials", locPolys},
            {"reference_assemblage", to_json(sc.referenceAssemblage)}};
}

inline json to_json(const SelfTestReport& rep) {
    json curve = json::array();
    for (const CurvePoint& pt : rep.curve)
        curve.push_back({{"violation", pt.violation},
                         {"fidelity_lower_bound", pt.fidelityLowerBound},
                         {"status", to_string(pt.status)},
                         {"gap", pt.gap},
                         {"seconds", pt.solveSeconds}});
    json j = {{"scenario", rep.scenario},
              {"classical_fidelity", rep.classicalFidelity},
              {"curve", curve}};
    j["crossing_violation"] =
        rep.crossingViolation ? json(*rep.crossingViolation) : json(nullptr);
    return j;
}

}  // namespace steerkit

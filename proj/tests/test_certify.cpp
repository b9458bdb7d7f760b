#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <steerkit/certify.hpp>

#include <random>

using namespace steerkit;

namespace {

std::mt19937& rng() {
    static std::mt19937 gen(7);
    return gen;
}

cplx rand_c() {
    std::normal_distribution<double> g(0.0, 1.0);
    return {g(rng()), g(rng())};
}

CMatrix random_hermitian(int n) {
    CMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rand_c();
    return 0.5 * (m + m.dagger());
}

/// Ginibre density matrix.
CMatrix random_state(int n) {
    CMatrix g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rand_c();
    CMatrix m = g * g.dagger();
    return (1.0 / m.trace().real()) * m;
}

CMatrix random_pure(int n) {
    CMatrix k(n, 1);
    double norm2 = 0.0;
    for (int i = 0; i < n; ++i) {
        k(i, 0) = rand_c();
        norm2 += std::norm(k(i, 0));
    }
    return (1.0 / std::sqrt(norm2)) * k;
}

QubitChannel random_channel(int nKraus) {
    // random isometry via Gram-Schmidt on the stacked Kraus columns
    std::vector<CMatrix> ks(nKraus, CMatrix(2, 2));
    for (int col = 0; col < 2; ++col) {
        std::vector<cplx> v(2 * nKraus);
        for (auto& z : v) z = rand_c();
        for (int prev = 0; prev < col; ++prev) {
            cplx ip = 0.0;
            for (int r = 0; r < nKraus; ++r)
                for (int i = 0; i < 2; ++i)
                    ip += std::conj(ks[r](i, prev)) * v[2 * r + i];
            for (int r = 0; r < nKraus; ++r)
                for (int i = 0; i < 2; ++i) v[2 * r + i] -= ip * ks[r](i, prev);
        }
        double norm2 = 0.0;
        for (const cplx& z : v) norm2 += std::norm(z);
        for (int r = 0; r < nKraus; ++r)
            for (int i = 0; i < 2; ++i) ks[r](i, col) = v[2 * r + i] / std::sqrt(norm2);
    }
    return {ks};
}

/// Measure-and-prepare channel from a random rank-one POVM: always
/// entanglement breaking.
QubitChannel random_measure_prepare() {
    std::uniform_real_distribution<double> U(0.2, 0.8);
    double lam = U(rng());
    CMatrix a = random_pure(2), b = random_pure(2);
    CMatrix aPerp(2, 1), bPerp(2, 1);
    aPerp(0, 0) = -std::conj(a(1, 0));
    aPerp(1, 0) = std::conj(a(0, 0));
    bPerp(0, 0) = -std::conj(b(1, 0));
    bPerp(1, 0) = std::conj(b(0, 0));
    QubitChannel n;
    std::vector<std::pair<double, CMatrix>> povm = {
        {lam, a}, {lam, aPerp}, {1.0 - lam, b}, {1.0 - lam, bPerp}};
    for (const auto& [w, f] : povm) n.kraus.push_back(std::sqrt(w) * outer(random_pure(2), f));
    return n;
}

}  // namespace

TEST_CASE("werner family: witness values and the ppt boundary") {
    // most negative partial-transpose eigenvalue of werner_state(w) is (1-3w)/4
    for (double w : {0.4, 0.5, 0.75, 1.0}) {
        auto witness = ppt_witness(werner_state(w));
        REQUIRE(witness.has_value());
        CHECK(trace_prod(*witness, werner_state(w)).real() ==
              doctest::Approx((1.0 - 3.0 * w) / 4.0).epsilon(1e-12));
    }
    CHECK(trace_prod(*ppt_witness(werner_state(0.5)), werner_state(0.5)).real() ==
          doctest::Approx(-0.125).epsilon(1e-12));
    CHECK_FALSE(ppt_witness(werner_state(1.0 / 3.0)).has_value());
    CHECK_FALSE(ppt_witness(werner_state(0.2)).has_value());
    CHECK_FALSE(ppt_witness(0.25 * CMatrix::identity(4)).has_value());
}

TEST_CASE("expansion over the reference products reconstructs the operator") {
    Assemblage ref = pauli_reference_assemblage();
    for (const CMatrix& w :
         {CMatrix::identity(4), kron(pauli_z(), pauli_x()), random_hermitian(4)}) {
        CoeffMap beta = expand_coefficients(w, ref, ref);
        CHECK(beta.size() == 36);
        CHECK((coefficients_operator(beta, ref, ref) - w).max_abs() < 1e-10);
    }
    CHECK_THROWS(expand_coefficients(CMatrix::identity(2), ref, ref));
    CMatrix nonHerm(4, 4);
    nonHerm(0, 1) = 1.0;
    CHECK_THROWS(expand_coefficients(nonHerm, ref, ref));
    // a basis missing the Y setting is rank deficient
    Assemblage thin = ref;
    thin.nSettings = 2;
    thin.el.resize(4);
    CHECK_THROWS(expand_coefficients(kron(pauli_y(), pauli_y()), thin, thin));
}

TEST_CASE("four-party witness expression equals tr(W rho)/4") {
    Assemblage ref = pauli_reference_assemblage();
    for (int k = 0; k < 100; ++k) {
        CMatrix w = random_hermitian(4);
        CMatrix rho = random_state(4);
        CoeffMap beta = expand_coefficients(w, ref, ref);
        CHECK(std::abs(evaluate_diew(beta, rho, ref, ref) - 0.25 * trace_prod(w, rho).real()) <
              1e-10);
    }
}

TEST_CASE("werner witness: negative at w=1/2, nonnegative on separable states") {
    Assemblage ref = pauli_reference_assemblage();
    CMatrix rhoW = werner_state(0.5);
    CoeffMap beta = expand_coefficients(*ppt_witness(rhoW), ref, ref);
    CHECK(evaluate_diew(beta, rhoW, ref, ref) == doctest::Approx(-1.0 / 32.0).epsilon(1e-10));
    for (int k = 0; k < 1000; ++k) {
        CMatrix sep = kron(random_state(2), random_state(2));
        CHECK(evaluate_diew(beta, sep, ref, ref) >= -1e-9);
    }
}

TEST_CASE("choi matrices of the standard channels") {
    CMatrix jId = choi(identity_channel());
    CHECK((jId - projector(max_entangled_ket(2))).max_abs() < 1e-12);
    CHECK(jId.trace().real() == doctest::Approx(1.0));
    CMatrix jDep = choi(depolarizing_channel(1.0));
    CHECK((jDep - 0.25 * CMatrix::identity(4)).max_abs() < 1e-12);
    for (double g : {0.1, 0.5, 0.9}) {
        CMatrix j = choi(amplitude_damping_channel(g));
        CHECK(j.trace().real() == doctest::Approx(1.0));
        CHECK(is_psd(j));
    }
    CHECK_THROWS(choi(QubitChannel{{0.5 * CMatrix::identity(2)}}));
}

TEST_CASE("entanglement breaking is the choi ppt condition") {
    CHECK_FALSE(is_entanglement_breaking(identity_channel()));
    for (double g : {0.1, 0.5, 0.9}) CHECK_FALSE(is_entanglement_breaking(amplitude_damping_channel(g)));
    CHECK(is_entanglement_breaking(amplitude_damping_channel(1.0)));
    CHECK(is_entanglement_breaking(depolarizing_channel(1.0)));
    CHECK(is_entanglement_breaking(depolarizing_channel(0.7)));
    CHECK_FALSE(is_entanglement_breaking(depolarizing_channel(0.6)));
    for (int k = 0; k < 50; ++k) CHECK(is_entanglement_breaking(random_measure_prepare()));
}

TEST_CASE("channel witness expression equals the choi pairing") {
    Assemblage tauHat = normalized_assemblage(pauli_reference_assemblage());
    Assemblage omega = pauli_reference_assemblage();
    for (int k = 0; k < 100; ++k) {
        CMatrix w = random_hermitian(4);
        QubitChannel n = random_channel(1 + k % 4);
        CoeffMap gamma = expand_coefficients(w, tauHat, omega);
        double direct = evaluate_channel_witness(gamma, n, tauHat, omega);
        double paired = trace_prod(choi_on_second(n), w.transpose()).real();
        CHECK(std::abs(direct - paired) < 1e-10);
    }
}

TEST_CASE("channel witnesses: negative for non-EB, nonnegative for EB") {
    Assemblage tauHat = normalized_assemblage(pauli_reference_assemblage());
    Assemblage omega = pauli_reference_assemblage();
    // witness the Choi state of the channel under test
    auto witness_value = [&](const QubitChannel& n, const QubitChannel& target) {
        auto w = ppt_witness(choi_on_second(target));
        REQUIRE(w.has_value());
        CoeffMap gamma = expand_coefficients(w->transpose(), tauHat, omega);
        return evaluate_channel_witness(gamma, n, tauHat, omega);
    };
    QubitChannel id = identity_channel(), ad = amplitude_damping_channel(0.5);
    CHECK(witness_value(id, id) < -1e-3);
    CHECK(witness_value(ad, ad) < -1e-3);
    CoeffMap gammaId =
        expand_coefficients(ppt_witness(choi_on_second(id))->transpose(), tauHat, omega);
    CHECK(evaluate_channel_witness(gammaId, depolarizing_channel(1.0), tauHat, omega) >= -1e-9);
    for (int k = 0; k < 50; ++k)
        CHECK(evaluate_channel_witness(gammaId, random_measure_prepare(), tauHat, omega) >= -1e-9);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "mwopt/dynamics.hpp"

using namespace mwopt;

namespace {

const double pi = 3.14159265358979323846;

ModeSpace joint_space(int d_a, int d_c) {
    return ModeSpace({d_a, d_c}, {"atom", "cavity"});
}

Eigen::VectorXcd pseudo_random_coeffs(int n, int seed) {
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i)
        v[i] = cplx(std::sin(1.9 * i + seed), std::cos(0.7 * i - 1.3 * seed));
    v.normalize();
    return v;
}

StateVector vacuum_joint(const ModeSpace& space, const Eigen::VectorXcd& atom_coeffs) {
    StateVector atom(ModeSpace::single(space.dim("atom"), "atom"), atom_coeffs);
    auto cav = number_state(ModeSpace::single(space.dim("cavity"), "cavity"), "cavity", 0);
    return join_modes(atom, cav);
}

}  // namespace

TEST_CASE("SystemParams keeps Lambda and G consistent") {
    auto p = SystemParams::from_coupling(0.0, 2.0, -1.0);
    CHECK(p.Lambda == doctest::Approx(0.5));
    CHECK(std::abs(p.Lambda * p.omega_m + p.G) < 1e-12);
    auto q = SystemParams::from_lambda(0.0, -3.0, 0.25);
    CHECK(q.G == doctest::Approx(0.75));
    CHECK_THROWS_AS(SystemParams::from_coupling(0.0, 0.0, 1.0), validation_error);
}

TEST_CASE("bessel_j_array matches the standard library at moderate argument") {
    for (double z : {0.5, 4.0, 25.0}) {
        auto j = detail::bessel_j_array(z, 40);
        for (int k = 0; k <= 40; ++k) {
            const double ref = std::cyl_bessel_j(k, z);
            CHECK(std::abs(j[k] - ref) < 1e-12 * std::max(1.0, std::abs(ref)));
        }
        // Exact sum rule J_0^2 + 2 sum_k J_k^2 = 1.
        double s = j[0] * j[0];
        for (int k = 1; k <= 40; ++k) s += 2.0 * j[k] * j[k];
        CHECK(std::abs(s - 1.0) < 1e-10);
    }
}

TEST_CASE("Chebyshev tridiagonal exponential equals dense spectral evolution") {
    const int d = 30;
    Eigen::VectorXd diag(d), off(d - 1);
    for (int k = 0; k < d; ++k) diag[k] = 0.8 * k + std::sin(2.2 * k);
    for (int k = 0; k + 1 < d; ++k) off[k] = 0.6 * std::sqrt(k + 1.0) * std::cos(0.9 * k);

    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
    for (int k = 0; k < d; ++k) h(k, k) = diag[k];
    for (int k = 0; k + 1 < d; ++k) {
        h(k, k + 1) = off[k];
        h(k + 1, k) = off[k];
    }
    for (double t : {0.0, 0.3, -2.0, 11.0}) {
        Eigen::VectorXcd v = pseudo_random_coeffs(d, 3);
        Eigen::VectorXcd ref;
        {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
            Eigen::VectorXcd modal = es.eigenvectors().adjoint() * v;
            for (int k = 0; k < d; ++k) modal[k] *= std::polar(1.0, -es.eigenvalues()[k] * t);
            ref = es.eigenvectors() * modal;
        }
        detail::tridiag_exp_apply(diag, off, t, v);
        CHECK((v - ref).norm() < 1e-11);
    }
}

TEST_CASE("build_hamiltonian structure") {
    auto space = joint_space(4, 6);
    auto params = SystemParams::from_lambda(0.7, 1.0, 0.5);

    auto h_free = build_hamiltonian(SystemParams::from_coupling(0.7, 1.0, 0.0), space, true);
    Eigen::MatrixXcd offdiag = h_free.matrix;
    for (long i = 0; i < offdiag.rows(); ++i) offdiag(i, i) = 0.0;
    CHECK(offdiag.cwiseAbs().maxCoeff() == 0.0);
    // diagonal entries omega0 n + omega_m k
    CHECK(std::abs(h_free.matrix(1 * 6 + 2, 1 * 6 + 2) - cplx(0.7 + 2.0, 0.0)) < 1e-14);

    auto h = build_hamiltonian(params, space, true);
    auto n_atom = mode_number(space, "atom");
    Eigen::MatrixXcd comm = h.matrix * n_atom.matrix - n_atom.matrix * h.matrix;
    CHECK(comm.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fixed-sector eigenvalues show the displaced-oscillator shift") {
    const int d_c = 48;
    auto params = SystemParams::from_lambda(0.3, 1.0, 0.6);
    auto space = joint_space(4, d_c);
    auto h = build_hamiltonian(params, space, true);
    for (int n : {1, 2}) {
        Eigen::MatrixXcd block = h.matrix.block(n * d_c, n * d_c, d_c, d_c);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block, Eigen::EigenvaluesOnly);
        const double shift = params.omega0 * n - params.omega_m * params.Lambda *
                                                     params.Lambda * n * n;
        for (int k = 0; k < d_c / 3; ++k) {
            const double expected = shift + params.omega_m * k;
            CHECK(std::abs(es.eigenvalues()[k] - expected) < 1e-9 * std::max(1.0, std::abs(expected)));
        }
    }
}

TEST_CASE("evolve_numeric basics: t = 0, free phases, energy conservation") {
    auto space = joint_space(4, 10);
    auto params = SystemParams::from_lambda(0.9, 1.0, 0.4);
    auto psi0 = vacuum_joint(space, pseudo_random_coeffs(4, 1));
    auto h = build_hamiltonian(params, space, true);

    auto same = evolve_numeric(h, psi0, 0.0);
    CHECK((same.amplitudes - psi0.amplitudes).norm() == 0.0);

    // G = 0: |n> x |0> only picks up exp(-i omega0 n t)
    auto h0 = build_hamiltonian(SystemParams::from_coupling(0.9, 1.0, 0.0), space, true);
    auto atom2 = number_state(ModeSpace::single(4, "atom"), "atom", 2);
    auto vac = number_state(ModeSpace::single(10, "cavity"), "cavity", 0);
    auto evolved = evolve_numeric(h0, join_modes(atom2, vac), 1.7);
    const cplx expected_phase = std::polar(1.0, -0.9 * 2 * 1.7);
    CHECK(std::abs(evolved.amplitudes[2 * 10] - expected_phase) < 1e-12);

    // <H> is conserved
    auto later = evolve_numeric(h, psi0, 2.1);
    const cplx e0 = expectation(h, psi0);
    const cplx e1 = expectation(h, later);
    CHECK(std::abs(e0 - e1) < 1e-9 * std::abs(e0));
}

TEST_CASE("frame consistency: omega0 contributes exact per-sector phases") {
    auto space = joint_space(4, 20);
    auto params = SystemParams::from_lambda(1.3, 1.0, 0.3);
    auto psi0 = vacuum_joint(space, pseudo_random_coeffs(4, 7));
    const double t = 1.9;

    auto with = evolve_numeric(build_hamiltonian(params, space, true), psi0, t);
    auto without = evolve_numeric(build_hamiltonian(params, space, false), psi0, t);
    Eigen::VectorXcd corrected = without.amplitudes;
    for (int n = 0; n < 4; ++n)
        corrected.segment(n * 20, 20) *= std::polar(1.0, -params.omega0 * n * t);
    CHECK((with.amplitudes - corrected).norm() < 1e-10);
}

TEST_CASE("analytic state: Lambda = 0, tau = 2 pi revival, tau = pi component amplitudes") {
    const int d_a = 16;
    auto space = joint_space(d_a, 60);
    auto params0 = SystemParams::from_lambda(0.0, 1.0, 0.0);
    auto res0 = analytic_state(cplx(1.0, 0.0), params0, 2.3, space);
    auto ref = vacuum_joint(space,
                            coherent_state(ModeSpace::single(d_a, "atom"), "atom", 1.0).amplitudes);
    CHECK(fidelity(res0.state, ref) == doctest::Approx(1.0).epsilon(1e-12));

    auto params = SystemParams::from_lambda(0.0, 1.0, 0.5);
    auto res = analytic_state(cplx(1.0, 0.0), params, 2.0 * pi, space);
    // cavity factor returns to vacuum in every sector; atom phases e^{i 2 pi Lambda^2 n^2}
    auto atom = coherent_state(ModeSpace::single(d_a, "atom"), "atom", 1.0);
    for (int n = 0; n < d_a; ++n) {
        Eigen::VectorXcd slice = res.state.amplitudes.segment(n * 60, 60);
        CHECK(slice.tail(59).norm() < 1e-13);
        const cplx expect = atom.amplitudes[n] *
                            std::polar(1.0, 2.0 * pi * 0.25 * n * n);
        CHECK(std::abs(slice[0] - expect) < 1e-12);
    }

    // at tau = pi the sector-n cavity component is the coherent state |2 Lambda n>
    auto space_pi = joint_space(8, 220);
    auto res_pi = analytic_state(Eigen::VectorXcd(atom.amplitudes.head(8)), params, pi, space_pi);
    CHECK(std::abs(eta_of(pi) - cplx(2.0, 0.0)) < 1e-15);
    for (int n = 0; n < 8; ++n) {
        Eigen::VectorXcd slice = res_pi.state.amplitudes.segment(n * 220, 220);
        auto [cav, leak] = coherent_amplitudes(220, 2.0 * 0.5 * n);
        const double w = slice.norm();
        CHECK(std::abs(std::abs(cav.dot(slice)) - w) < 1e-12);
    }
}

TEST_CASE("core oracle: closed form equals dense spectral propagation") {
    const int d_a = 6;
    auto coeffs = pseudo_random_coeffs(d_a, 11);
    for (double lambda : {0.2, 0.35}) {
        for (double tau : {pi / 2, pi, 2 * pi}) {
            const double amp = 2.0 * lambda * (d_a - 1);
            const int d_c = static_cast<int>(std::ceil(4.0 * amp * amp)) + 24;
            auto space = joint_space(d_a, d_c);
            auto params = SystemParams::from_lambda(0.0, 1.0, lambda);
            auto psi0 = vacuum_joint(space, coeffs);
            auto numeric = evolve_numeric(build_hamiltonian(params, space, false), psi0, tau);
            auto analytic = analytic_state(coeffs, params, tau, space);
            CHECK(std::abs(numeric.overlap(analytic.state)) >= 1.0 - 1e-10);
        }
    }
}

TEST_CASE("blocked propagation equals dense propagation") {
    const int d_a = 5;
    auto coeffs = pseudo_random_coeffs(d_a, 4);
    auto space = joint_space(d_a, 60);
    auto params = SystemParams::from_lambda(0.8, 1.0, 0.35);
    auto psi0 = vacuum_joint(space, coeffs);
    for (double t : {0.9, pi, -1.4}) {
        auto dense = evolve_numeric(build_hamiltonian(params, space, true), psi0, t);
        auto blocked = evolve_blocked(params, psi0, t, true);
        CHECK((dense.amplitudes - blocked.amplitudes).norm() < 1e-9);
    }
}

TEST_CASE("blocked propagation handles negative omega_m") {
    const int d_a = 5;
    auto coeffs = pseudo_random_coeffs(d_a, 9);
    auto space = joint_space(d_a, 60);
    auto params = SystemParams::from_lambda(0.0, -1.0, 0.35);  // G = 0.35
    auto psi0 = vacuum_joint(space, coeffs);
    const double tau = pi;  // t = tau / omega_m < 0
    auto blocked = evolve_blocked(params, psi0, tau / params.omega_m);
    auto analytic = analytic_state(coeffs, params, tau, space);
    CHECK(std::abs(blocked.overlap(analytic.state)) >= 1.0 - 1e-10);
}

TEST_CASE("atom-number marginal is conserved exactly by the closed form") {
    auto space = joint_space(8, 200);
    auto params = SystemParams::from_lambda(0.0, 1.0, 0.45);
    auto coeffs = pseudo_random_coeffs(8, 2);
    for (double tau : {0.7, pi, 5.1}) {
        auto res = analytic_state(coeffs, params, tau, space);
        for (int n = 0; n < 8; ++n) {
            const double w = res.state.amplitudes.segment(n * 200, 200).squaredNorm();
            CHECK(std::abs(w - std::norm(coeffs[n])) < 1e-12);
        }
    }
}

TEST_CASE("periodicity: tau and tau + 2 pi differ by sector phases only") {
    auto space = joint_space(8, 60);
    auto params = SystemParams::from_lambda(0.0, 1.0, 0.4);
    auto coeffs = pseudo_random_coeffs(8, 5);
    const double tau = 1.1;
    auto a = analytic_state(coeffs, params, tau, space);
    auto b = analytic_state(coeffs, params, tau + 2 * pi, space);
    Eigen::VectorXcd corrected = a.state.amplitudes;
    for (int n = 0; n < 8; ++n)
        corrected.segment(n * 60, 60) *=
            std::polar(1.0, 2.0 * pi * params.Lambda * params.Lambda * n * n);
    CHECK((corrected - b.state.amplitudes).norm() < 1e-12);

    auto rho_a = reduce_mode(a.state, "cavity");
    auto rho_b = reduce_mode(b.state, "cavity");
    CHECK((rho_a.matrix - rho_b.matrix).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("entanglement witness: purity dips at tau = pi and revives at 2 pi") {
    auto atom = coherent_state(ModeSpace::single(24, "atom"), "atom", 1.0);
    auto params = SystemParams::from_lambda(0.0, 1.0, 0.25);
    const int d_c = recommended_cavity_dim(0.25, atom.amplitudes);
    auto space = joint_space(24, d_c);
    auto psi0 = vacuum_joint(space, atom.amplitudes);

    auto mid = evolve_blocked(params, psi0, pi);
    CHECK(purity(reduce_mode(mid, "atom")) < 1.0 - 1e-3);

    auto back = evolve_blocked(params, psi0, 2 * pi);
    CHECK(purity(reduce_mode(back, "atom")) > 1.0 - 1e-8);
}

TEST_CASE("truncation and propagation guards") {
    auto params = SystemParams::from_lambda(0.0, 1.0, 1.0);
    auto coeffs = pseudo_random_coeffs(6, 3);
    CHECK_THROWS_AS(analytic_state(coeffs, params, pi, joint_space(6, 30)), truncation_error);

    // Final state cannot fit a cavity dim of 12: norm must visibly leak.
    auto space_small = joint_space(6, 12);
    auto psi0 = vacuum_joint(space_small, coeffs);
    CHECK_THROWS_AS(evolve_blocked(params, psi0, pi), propagation_error);
}

TEST_CASE("evolution_trace reports revival structure") {
    auto params = SystemParams::from_lambda(0.0, 1.0, 0.5);
    std::vector<double> taus;
    for (int i = 0; i <= 8; ++i) taus.push_back(2.0 * pi * i / 8.0);
    auto rows = evolution_trace(params, cplx(1.0, 0.0), taus);
    REQUIRE(rows.size() == taus.size());
    CHECK(rows.front().atom_purity == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rows.front().cavity_n == doctest::Approx(0.0));
    // entangled in the middle, pure again at the revival
    CHECK(rows[4].atom_purity < 1.0 - 1e-3);
    CHECK(rows.back().atom_purity > 1.0 - 1e-7);
    CHECK(rows.back().cavity_n < 1e-7);
    for (const auto& row : rows) CHECK(row.overlap_analytic > 1.0 - 1e-8);
}

#include "mwopt/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mwopt {

namespace {

constexpr double pi = 3.14159265358979323846;

// Working dimension large enough that displacing a state supported below
// d_in by beta stays inside the basis with room to spare.
int displacement_work_dim(int d_in, cplx beta) {
    const double amp = std::abs(beta) + std::sqrt(static_cast<double>(d_in - 1));
    return std::max(d_in, static_cast<int>(std::ceil(4.0 * amp * amp)) + 20);
}

// D(beta) rho D(-beta) in an enlarged basis.
DensityOperator displaced_density(const DensityOperator& rho, cplx beta) {
    if (rho.space.n_modes() != 1)
        throw dimension_error("displacement protocols expect a single-mode density operator");
    const int d_work = displacement_work_dim(rho.space.dim(0), beta);
    DensityOperator big = embed_density(rho, d_work);
    const Eigen::MatrixXcd d_op =
        displacement_operator(big.space, big.space.labels()[0], beta).matrix;
    return DensityOperator(big.space, d_op * big.matrix * d_op.adjoint(), false);
}

// Stable evaluation of S(x) = sum_k w_k (1+i)^k with w_k the photon-number
// weights of a coherent state of mean x.  Small x is summed term by term
// over the simulated truncated weights; larger x uses the closed form
// exp(i x) of the same absolutely convergent series (the direct sum would
// need intermediates of size exp(0.41 x)).  Both branches agree to ~1e-10
// at the crossover, which the tests pin down.
cplx counting_sector_sum(double x) {
    if (x <= 35.0) {
        const int dim = static_cast<int>(std::ceil(4.0 * x)) + 25;
        auto [cav, leak] = coherent_amplitudes(dim, std::sqrt(x));
        cplx s = 0.0;
        cplx w = 1.0;  // (1+i)^k
        for (int k = 0; k < dim; ++k) {
            s += std::norm(cav[k]) * w;
            w *= cplx(1.0, 1.0);
        }
        return s;
    }
    return std::polar(1.0, x);
}

double check_constraint(double residual, const char* what) {
    if (std::abs(residual) > tol::constraint) {
        std::ostringstream os;
        os << what << " violated by " << residual;
        throw constraint_error(os.str());
    }
    return residual;
}

}  // namespace

CatSpec::CatSpec(cplx a, int m, double l) : alpha(a), m_revival(m), lambda(l) {
    if (m_revival < 1) throw validation_error("cat revival index must be >= 1");
    if (std::abs(4.0 * m_revival * lambda * lambda - 1.0) > 1e-12)
        throw validation_error("cat condition Lambda^2 = 1/(4 m) violated");
}

CatSpec CatSpec::from_m(cplx alpha, int m) {
    if (m < 1) throw validation_error("cat revival index must be >= 1");
    return CatSpec(alpha, m, 1.0 / (2.0 * std::sqrt(static_cast<double>(m))));
}

void MeasurementRecord::validate() const {
    if (values.size() != probabilities.size())
        throw dimension_error("measurement record values/probabilities length mismatch");
    double sum = 0.0;
    for (double p : probabilities) {
        if (p < 0.0) throw dimension_error("measurement record has a negative probability");
        sum += p;
    }
    if (!is_density && std::abs(sum - 1.0) > tol::trace_unit)
        throw dimension_error("measurement record probabilities do not sum to 1");
}

StateVector cat_target(const CatSpec& spec, const ModeSpace& space) {
    if (space.n_modes() != 1)
        throw dimension_error("cat_target builds single-mode states");
    const int d = space.dim(0);
    auto [plus, leak_p] = coherent_amplitudes(d, spec.alpha);
    auto [minus, leak_m] = coherent_amplitudes(d, -spec.alpha);
    // undo the per-branch renormalization so the branch weights are physical
    Eigen::VectorXcd v = cplx(0.5, 0.5) * std::sqrt(1.0 - leak_p) * plus +
                         cplx(0.5, -0.5) * std::sqrt(1.0 - leak_m) * minus;
    const double sum = v.squaredNorm();
    const double leakage = std::max(0.0, 1.0 - sum);
    if (leakage > tol::leakage_budget) {
        std::ostringstream os;
        os << "cat state |alpha|=" << std::abs(spec.alpha) << " leaks " << leakage
           << " beyond dim " << d;
        throw truncation_error(os.str());
    }
    v /= std::sqrt(sum);
    return StateVector(space, std::move(v), leakage);
}

std::pair<StateVector, double> conditional_quadrature_collapse(const StateVector& joint,
                                                               double X) {
    if (joint.space.n_modes() != 2 || joint.space.mode_index("atom") != 0 ||
        joint.space.mode_index("cavity") != 1)
        throw dimension_error("collapse expects an (atom, cavity) joint state");
    const int d_a = joint.space.dim(0);
    const int d_c = joint.space.dim(1);
    const Eigen::VectorXd psi_x = quadrature_wavefunctions(d_c, X);
    Eigen::VectorXcd atom(d_a);
    for (int n = 0; n < d_a; ++n) {
        cplx amp = 0.0;
        const long base = static_cast<long>(n) * d_c;
        for (int k = 0; k < d_c; ++k) amp += psi_x[k] * joint.amplitudes[base + k];
        atom[n] = amp;
    }
    const double density = atom.squaredNorm();
    if (density < 1e-300)
        throw truncation_error("conditional state undefined: density vanishes at this X");
    atom /= std::sqrt(density);
    return {StateVector(ModeSpace::single(d_a, joint.space.labels()[0]), std::move(atom),
                        joint.norm_leakage),
            density};
}

std::vector<double> gaussian_sector_weights(double X, double lambda, double tau, int n_max) {
    const double cycles = tau / pi;
    const double nearest = std::round(cycles);
    if (std::abs(cycles - nearest) > 1e-9 || std::llround(nearest) % 2 == 0)
        throw validation_error("closed-form sector weights hold at tau = odd multiple of pi");
    if (n_max < 0) throw dimension_error("n_max must be >= 0");
    std::vector<double> w(n_max + 1);
    if (lambda == 0.0) {
        std::fill(w.begin(), w.end(), 1.0 / (n_max + 1.0));
        return w;
    }
    double peak = -std::numeric_limits<double>::infinity();
    std::vector<double> log_w(n_max + 1);
    for (int n = 0; n <= n_max; ++n) {
        const double d = n - X / (2.0 * lambda);
        log_w[n] = -8.0 * lambda * lambda * d * d;
        peak = std::max(peak, log_w[n]);
    }
    double sum = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        w[n] = std::exp(log_w[n] - peak);
        sum += w[n];
    }
    for (double& x : w) x /= sum;
    return w;
}

std::vector<std::pair<int, double>> displaced_number_statistics(const DensityOperator& rho_a,
                                                                cplx beta) {
    DensityOperator displaced = displaced_density(rho_a, beta);
    const long d = displaced.space.total_dim();
    std::vector<std::pair<int, double>> stats;
    stats.reserve(d);
    double sum = 0.0;
    for (long n = 0; n < d; ++n) {
        const double p = std::real(displaced.matrix(n, n));
        stats.emplace_back(static_cast<int>(n), p);
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-8) {
        std::ostringstream os;
        os << "displaced number statistics sum to " << sum << "; basis too small";
        throw truncation_error(os.str());
    }
    return stats;
}

MeasurementRecord quadrature_distribution(const DensityOperator& rho_a, cplx beta,
                                          double lambda, double tau,
                                          const std::vector<double>& x_grid,
                                          bool allow_general_tau) {
    if (x_grid.empty()) throw validation_error("quadrature distribution needs a nonempty grid");
    if (!allow_general_tau) {
        const double cycles = tau / pi;
        const double nearest = std::round(cycles);
        if (std::abs(cycles - nearest) > 1e-9 || std::llround(nearest) % 2 == 0)
            throw validation_error(
                "protocol reads out at tau = odd multiple of pi; pass allow_general_tau");
    }
    const auto stats = displaced_number_statistics(rho_a, beta);
    const cplx eta = eta_of(tau);
    MeasurementRecord record{MeasurementRecord::Kind::quadrature, x_grid, {}, true};
    record.probabilities.reserve(x_grid.size());
    const double norm_factor = std::sqrt(2.0 / pi);
    for (double x : x_grid) {
        double p = 0.0;
        for (const auto& [n, w] : stats) {
            if (w <= 0.0) continue;
            const double center = std::real(lambda * static_cast<double>(n) * eta);
            p += w * norm_factor * std::exp(-2.0 * (x - center) * (x - center));
        }
        record.probabilities.push_back(p);
    }
    return record;
}

WignerPoint wigner_direct(const DensityOperator& rho_a, cplx beta) {
    DensityOperator displaced = displaced_density(rho_a, -beta);
    WignerPoint point;
    point.beta = beta;
    point.method = WignerMethod::direct;
    point.value = (2.0 / pi) * parity_expectation(displaced);
    return point;
}

MeasurementRecord counting_photon_record(const DensityOperator& rho_a, cplx beta,
                                         double lambda, double tau, double coverage) {
    DensityOperator displaced = displaced_density(rho_a, -beta);
    const long d = displaced.space.total_dim();
    const cplx eta = eta_of(tau);

    // photon cutoff covering every sector that carries weight
    double x_max = 0.0;
    for (long m = 0; m < d; ++m) {
        if (std::real(displaced.matrix(m, m)) < 1e-14) continue;
        x_max = std::max(x_max, std::norm(lambda * static_cast<double>(m) * eta));
    }
    const int k_max = static_cast<int>(std::ceil(x_max + 12.0 * std::sqrt(x_max))) + 25;
    if (k_max > 100000)
        throw truncation_error("photon record cutoff exceeds 1e5; state too energetic");

    std::vector<double> p(k_max + 1, 0.0);
    double covered = 0.0;
    for (long m = 0; m < d; ++m) {
        const double w = std::real(displaced.matrix(m, m));
        if (w < 1e-14) continue;
        const cplx amp = lambda * static_cast<double>(m) * eta;
        auto [cav, leak] = coherent_amplitudes(k_max + 1, amp);
        const double renorm = 1.0 - leak;  // undo truncation renormalization
        for (int k = 0; k <= k_max; ++k) p[k] += w * std::norm(cav[k]) * renorm;
        covered += w;
    }
    double mass = 0.0;
    for (double v : p) mass += v;
    if (mass < coverage) {
        std::ostringstream os;
        os << "photon record covers only " << mass << " of the distribution";
        throw truncation_error(os.str());
    }
    MeasurementRecord record{MeasurementRecord::Kind::photon_number, {}, std::move(p), false};
    record.values.resize(record.probabilities.size());
    for (size_t k = 0; k < record.values.size(); ++k) record.values[k] = static_cast<double>(k);
    (void)covered;
    return record;
}

WignerPoint wigner_reconstruct_counting(const DensityOperator& rho_a, cplx beta,
                                        double lambda, double tau) {
    const cplx eta = eta_of(tau);
    WignerPoint point;
    point.beta = beta;
    point.method = WignerMethod::counting;
    point.constraint_residual =
        check_constraint(lambda * lambda * std::norm(eta) - pi, "|Lambda eta|^2 = pi");

    DensityOperator displaced = displaced_density(rho_a, -beta);
    const long d = displaced.space.total_dim();
    cplx acc = 0.0;
    for (long m = 0; m < d; ++m) {
        const double w = std::real(displaced.matrix(m, m));
        if (w == 0.0) continue;
        acc += w * counting_sector_sum(std::norm(lambda * static_cast<double>(m) * eta));
    }
    point.value = (2.0 / pi) * acc.real();
    point.imag_residual = (2.0 / pi) * std::abs(acc.imag());
    if (point.imag_residual > 1e-8)
        throw constraint_error("counting reconstruction left an imaginary residual > 1e-8");
    return point;
}

std::pair<double, double> parity_photon_probs(const DensityOperator& rho_a, cplx beta,
                                              double lambda, double tau, double rho0,
                                              double rho1) {
    if (rho0 < 0.0 || rho1 < 0.0 || std::abs(rho0 + rho1 - 1.0) > 1e-12)
        throw validation_error("cavity mixture weights must be nonnegative and sum to 1");
    DensityOperator displaced = displaced_density(rho_a, -beta);
    const long d = displaced.space.total_dim();
    const cplx eta = eta_of(tau);

    Eigen::MatrixXcd rho_c = Eigen::MatrixXcd::Zero(2, 2);
    rho_c(0, 0) = rho0;
    rho_c(1, 1) = rho1;

    double p0 = 0.0;
    double p1 = 0.0;
    for (long m = 0; m < d; ++m) {
        const double w = std::real(displaced.matrix(m, m));
        if (w == 0.0) continue;
        // Blockaded cavity: leading-order interaction-picture rotation with
        // displacement-like generator of amplitude -Lambda m conj(eta).
        const cplx b2 = -lambda * static_cast<double>(m) * std::conj(eta);
        Eigen::MatrixXcd gen = Eigen::MatrixXcd::Zero(2, 2);
        gen(1, 0) = b2;
        gen(0, 1) = -std::conj(b2);
        const Eigen::MatrixXcd u = unitary_from_antihermitian(gen);
        const Eigen::MatrixXcd out = u * rho_c * u.adjoint();
        p0 += w * std::real(out(0, 0));
        p1 += w * std::real(out(1, 1));
    }
    return {p0, p1};
}

WignerPoint wigner_reconstruct_parity(const DensityOperator& rho_a, cplx beta, double lambda,
                                      double tau, double rho0, double rho1) {
    if (std::abs(rho1 - rho0) < 1e-12)
        throw validation_error("degenerate contrast: rho1 = rho0 carries no signal");
    WignerPoint point;
    point.beta = beta;
    point.method = WignerMethod::parity;
    point.constraint_residual =
        check_constraint(2.0 * lambda * eta_abs(tau) - pi, "2 Lambda |eta| = pi");
    auto [p0, p1] = parity_photon_probs(rho_a, beta, lambda, tau, rho0, rho1);
    point.value = 2.0 * (p1 - p0) / (pi * (rho1 - rho0));
    return point;
}

double counting_lambda_for_tau(double tau) {
    const double e = eta_abs(tau);
    if (e < 1e-12)
        throw constraint_error("|eta| vanishes at this tau; constraint unreachable");
    return std::sqrt(pi) / e;
}

double counting_tau_for_lambda(double lambda) {
    // 2 (1 - cos tau) = pi / lambda^2
    if (lambda <= 0.0) throw constraint_error("constraint needs Lambda > 0");
    const double c = 1.0 - pi / (2.0 * lambda * lambda);
    if (c < -1.0)
        throw constraint_error("Lambda too small: |Lambda eta|^2 = pi unreachable");
    return std::acos(c);
}

double parity_lambda_for_tau(double tau) {
    const double e = eta_abs(tau);
    if (e < 1e-12)
        throw constraint_error("|eta| vanishes at this tau; constraint unreachable");
    return pi / (2.0 * e);
}

double parity_tau_for_lambda(double lambda) {
    // 2 |sin(tau/2)| = pi / (2 lambda)
    if (lambda <= 0.0) throw constraint_error("constraint needs Lambda > 0");
    const double s = pi / (4.0 * lambda);
    if (s > 1.0) throw constraint_error("Lambda too small: 2 Lambda |eta| = pi unreachable");
    return 2.0 * std::asin(s);
}

}  // namespace mwopt

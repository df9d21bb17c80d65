#include "mwopt/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace mwopt {

namespace {
constexpr double pi = 3.14159265358979323846;
}

SystemParams SystemParams::from_coupling(double omega0, double omega_m, double G) {
    if (omega_m == 0.0) throw validation_error("resonance: Lambda undefined for omega_m = 0");
    return {omega0, omega_m, G, -G / omega_m};
}

SystemParams SystemParams::from_lambda(double omega0, double omega_m, double Lambda) {
    if (omega_m == 0.0) throw validation_error("resonance: Lambda undefined for omega_m = 0");
    return {omega0, omega_m, -Lambda * omega_m, Lambda};
}

cplx eta_of(double tau) { return cplx(1.0, 0.0) - std::polar(1.0, -tau); }

Operator build_hamiltonian(const SystemParams& params, const ModeSpace& space,
                           bool include_omega0) {
    if (space.n_modes() != 2)
        throw dimension_error("build_hamiltonian expects a joint (atom, cavity) space");
    const Eigen::MatrixXcd n_atom = mode_number(space, "atom").matrix;
    const Eigen::MatrixXcd n_cav = mode_number(space, "cavity").matrix;
    const Eigen::MatrixXcd c = mode_annihilation(space, "cavity").matrix;
    Eigen::MatrixXcd h = params.omega_m * n_cav +
                         params.G * ((c + c.adjoint()) * n_atom);
    if (include_omega0) h += params.omega0 * n_atom;
    return Operator(space, std::move(h), true);
}

StateVector evolve_numeric(const Operator& hamiltonian, const StateVector& psi0, double t) {
    if (!(hamiltonian.space == psi0.space))
        throw dimension_error("evolve_numeric requires matching spaces");
    const Eigen::MatrixXcd& h = hamiltonian.matrix;
    if (!hamiltonian.hermitian_hint &&
        (h - h.adjoint()).cwiseAbs().maxCoeff() > tol::hermitian * std::max(1.0, h.cwiseAbs().maxCoeff()))
        throw dimension_error("evolve_numeric needs a Hermitian Hamiltonian");
    if (t == 0.0) return psi0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success)
        throw propagation_error("eigendecomposition failed in evolve_numeric");
    Eigen::VectorXcd modal = es.eigenvectors().adjoint() * psi0.amplitudes;
    for (long k = 0; k < modal.size(); ++k)
        modal[k] *= std::polar(1.0, -es.eigenvalues()[k] * t);
    Eigen::VectorXcd out = es.eigenvectors() * modal;
    const double drift = std::abs(out.norm() - psi0.norm());
    if (drift > tol::norm_drift) {
        std::ostringstream os;
        os << "propagation lost norm by " << drift << " (truncation too small)";
        throw propagation_error(os.str());
    }
    return StateVector(psi0.space, std::move(out), psi0.norm_leakage);
}

// --- Chebyshev machinery -----------------------------------------------------

namespace detail {

std::vector<double> bessel_j_array(double z, int kmax) {
    std::vector<double> j(kmax + 1, 0.0);
    if (z < 0.0) throw dimension_error("bessel_j_array needs z >= 0");
    if (z == 0.0) {
        j[0] = 1.0;
        return j;
    }
    const int start = kmax + 20 + static_cast<int>(2.0 * std::sqrt(static_cast<double>(kmax) + z));
    double fkp1 = 0.0;
    double fk = 1e-280;
    double norm_acc = 0.0;  // J_0 + 2 J_2 + 2 J_4 + ... accumulated on the fly
    for (int k = start; k >= 1; --k) {
        const double fkm1 = (2.0 * k / z) * fk - fkp1;
        fkp1 = fk;
        fk = fkm1;
        if (k - 1 <= kmax) j[k - 1] = fk;
        if ((k - 1) % 2 == 0) norm_acc += (k - 1 == 0 ? 1.0 : 2.0) * fk;
        if (std::abs(fk) > 1e250) {
            const double scale = 1e-250;
            fk *= scale;
            fkp1 *= scale;
            norm_acc *= scale;
            for (double& v : j) v *= scale;
        }
    }
    for (double& v : j) v /= norm_acc;
    return j;
}

namespace {

inline void tridiag_apply(const Eigen::VectorXd& diag, const Eigen::VectorXd& off,
                          const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    const long n = diag.size();
    if (n == 1) {
        out[0] = diag[0] * in[0];
        return;
    }
    out[0] = diag[0] * in[0] + off[0] * in[1];
    for (long k = 1; k + 1 < n; ++k)
        out[k] = off[k - 1] * in[k - 1] + diag[k] * in[k] + off[k] * in[k + 1];
    out[n - 1] = off[n - 2] * in[n - 2] + diag[n - 1] * in[n - 1];
}

}  // namespace

void tridiag_exp_apply(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double t,
                       Eigen::VectorXcd& v, double bound_lo, double bound_hi) {
    const long n = diag.size();
    if (t == 0.0 || n == 0) return;
    if (n == 1) {
        v[0] *= std::polar(1.0, -diag[0] * t);
        return;
    }
    double lo;
    double hi;
    if (bound_lo <= bound_hi) {
        lo = bound_lo;
        hi = bound_hi;
    } else {
        // Gershgorin enclosure of the spectrum.
        lo = diag[0] - std::abs(off[0]);
        hi = diag[0] + std::abs(off[0]);
        for (long k = 1; k < n; ++k) {
            const double left = std::abs(off[k - 1]);
            const double right = k + 1 < n ? std::abs(off[k]) : 0.0;
            lo = std::min(lo, diag[k] - left - right);
            hi = std::max(hi, diag[k] + left + right);
        }
    }
    const double center = 0.5 * (hi + lo);
    double half = 0.5 * (hi - lo);
    if (half <= 0.0) {  // diagonal matrix
        for (long k = 0; k < n; ++k) v[k] *= std::polar(1.0, -diag[k] * t);
        return;
    }
    half *= 1.0 + 1e-12;

    const double z = half * t;  // signed
    const double az = std::abs(z);
    const int kmax = static_cast<int>(az + 14.0 * std::cbrt(az + 1.0) + 40.0);
    const std::vector<double> bessel = bessel_j_array(az, kmax);
    const bool neg = z < 0.0;

    // exp(-i z x) = sum_k (2 - delta_k0) (-i)^k J_k(z) T_k(x); J_k(-z) = (-1)^k J_k(z).
    Eigen::VectorXd d_scaled = (diag.array() - center) / half;
    Eigen::VectorXd off_scaled = off / half;

    Eigen::VectorXcd w_prev = v;
    Eigen::VectorXcd w_cur(n);
    tridiag_apply(d_scaled, off_scaled, w_prev, w_cur);
    Eigen::VectorXcd acc = bessel[0] * w_prev;
    Eigen::VectorXcd w_next(n);

    const double* dd = d_scaled.data();
    const double* ee = off_scaled.data();
    for (int k = 1; k <= kmax; ++k) {
        double jk = bessel[k];
        if (neg && (k % 2 == 1)) jk = -jk;
        const double two_jk = 2.0 * jk;
        const int quad = k % 4;  // (-i)^k cycles 1, -i, -1, i
        cplx* a = acc.data();
        const cplx* wc = w_cur.data();
        if (k == kmax) {
            for (long i = 0; i < n; ++i) {
                switch (quad) {
                    case 0: a[i] += two_jk * wc[i]; break;
                    case 1: a[i] += cplx(two_jk * wc[i].imag(), -two_jk * wc[i].real()); break;
                    case 2: a[i] -= two_jk * wc[i]; break;
                    default: a[i] += cplx(-two_jk * wc[i].imag(), two_jk * wc[i].real()); break;
                }
            }
            break;
        }
        // One fused sweep: acc += coeff * w_cur and w_next = 2 Htilde w_cur - w_prev.
        const cplx* wp = w_prev.data();
        cplx* wn = w_next.data();
        for (long i = 0; i < n; ++i) {
            switch (quad) {
                case 0: a[i] += two_jk * wc[i]; break;
                case 1: a[i] += cplx(two_jk * wc[i].imag(), -two_jk * wc[i].real()); break;
                case 2: a[i] -= two_jk * wc[i]; break;
                default: a[i] += cplx(-two_jk * wc[i].imag(), two_jk * wc[i].real()); break;
            }
            cplx h = dd[i] * wc[i];
            if (i > 0) h += ee[i - 1] * wc[i - 1];
            if (i + 1 < n) h += ee[i] * wc[i + 1];
            wn[i] = 2.0 * h - wp[i];
        }
        w_prev.swap(w_cur);
        w_cur.swap(w_next);
    }
    v = std::polar(1.0, -center * t) * acc;
}

}  // namespace detail

// --- blocked propagation -------------------------------------------------------

namespace {

struct SectorBasis {
    Eigen::VectorXd diag;
    Eigen::VectorXd off;
};

SectorBasis sector_hamiltonian(const SystemParams& params, int n, int dim) {
    SectorBasis h;
    h.diag.resize(dim);
    h.off.resize(std::max(dim - 1, 0));
    for (int k = 0; k < dim; ++k) h.diag[k] = params.omega_m * k;
    for (int k = 0; k + 1 < dim; ++k)
        h.off[k] = params.G * n * std::sqrt(k + 1.0);
    return h;
}

// Rigorous spectral enclosure of the sector Hamiltonian.  One side comes from
// Gershgorin; the other from the variational bound
//   <H> = omega <N> + 2 g Re<c> >= omega mu - 2|g| sqrt(mu) >= -g^2/omega
// (omega > 0; mirrored for omega < 0), which is tight at the polaron minimum
// and roughly a third sharper than Gershgorin for strongly driven sectors.
std::pair<double, double> sector_bounds(const SectorBasis& h, double omega, double g) {
    const long n = h.diag.size();
    double lo = h.diag[0] - std::abs(h.off[0]);
    double hi = h.diag[0] + std::abs(h.off[0]);
    for (long k = 1; k < n; ++k) {
        const double left = std::abs(h.off[k - 1]);
        const double right = k + 1 < n ? std::abs(h.off[k]) : 0.0;
        lo = std::min(lo, h.diag[k] - left - right);
        hi = std::max(hi, h.diag[k] + left + right);
    }
    if (omega > 0.0)
        lo = std::max(lo, -g * g / omega);
    else if (omega < 0.0)
        hi = std::min(hi, g * g / (-omega));
    return {lo, hi};
}

// Evolves one atom sector's cavity slice, growing the scratch basis until the
// top of the basis stays unpopulated.  Returns the slice truncated back to
// out_dim plus the discarded weight.
std::pair<Eigen::VectorXcd, double> evolve_sector(const SystemParams& params, int n,
                                                  const Eigen::VectorXcd& slice, double t,
                                                  int out_dim) {
    const double w2 = slice.squaredNorm();
    int i_max = 0;
    for (long k = 0; k < slice.size(); ++k)
        if (std::norm(slice[k]) > 1e-30 * w2) i_max = static_cast<int>(k);

    const double excursion = 2.0 * std::abs(params.Lambda) * n;
    int d_work = std::max({static_cast<int>(std::ceil(excursion * excursion + 9.0 * excursion)) +
                               25 + i_max,
                           i_max + 30, 8});
    for (int attempt = 0; attempt < 5; ++attempt) {
        Eigen::VectorXcd work = Eigen::VectorXcd::Zero(d_work);
        work.head(std::min<long>(slice.size(), d_work)) =
            slice.head(std::min<long>(slice.size(), d_work));
        const SectorBasis h = sector_hamiltonian(params, n, d_work);
        const auto [lo, hi] = sector_bounds(h, params.omega_m, params.G * n);
        detail::tridiag_exp_apply(h.diag, h.off, t, work, lo, hi);
        const int guard = std::max(5, d_work / 64);
        const double tail = work.tail(guard).squaredNorm();
        const double drift = std::abs(work.squaredNorm() - w2);
        if (tail <= 1e-24 * w2 && drift <= 1e-12 * w2) {
            Eigen::VectorXcd out = Eigen::VectorXcd::Zero(out_dim);
            const int keep = std::min(out_dim, d_work);
            out.head(keep) = work.head(keep);
            const double discarded =
                d_work > out_dim ? work.tail(d_work - out_dim).squaredNorm() : 0.0;
            return {std::move(out), discarded};
        }
        d_work = d_work + d_work / 2 + 20;
    }
    std::ostringstream os;
    os << "sector " << n << " kept populating the basis top after repeated growth";
    throw propagation_error(os.str());
}

}  // namespace

StateVector evolve_blocked(const SystemParams& params, const StateVector& psi0, double t,
                           bool include_omega0, double sector_weight_floor) {
    const ModeSpace& space = psi0.space;
    if (space.n_modes() != 2)
        throw dimension_error("evolve_blocked expects a joint (atom, cavity) space");
    const int d_a = space.dim("atom");
    const int d_c = space.dim("cavity");
    if (space.mode_index("atom") != 0)
        throw dimension_error("atom mode must be the leftmost Kronecker factor");
    if (t == 0.0) return psi0;

    const double total2 = psi0.amplitudes.squaredNorm();
    Eigen::VectorXcd out(space.total_dim());
    double discarded_total = 0.0;
    for (int n = 0; n < d_a; ++n) {
        const Eigen::VectorXcd slice = psi0.amplitudes.segment(
            static_cast<long>(n) * d_c, d_c);
        const double w2 = slice.squaredNorm();
        if (w2 <= sector_weight_floor * total2) {
            out.segment(static_cast<long>(n) * d_c, d_c).setZero();
            discarded_total += w2;
            continue;
        }
        auto [evolved, discarded] = evolve_sector(params, n, slice, t, d_c);
        if (include_omega0)
            evolved *= std::polar(1.0, -params.omega0 * n * t);
        out.segment(static_cast<long>(n) * d_c, d_c) = evolved;
        discarded_total += discarded;
    }
    const double drift = std::abs(out.norm() - psi0.norm());
    if (drift > tol::norm_drift) {
        std::ostringstream os;
        os << "blocked propagation lost norm by " << drift
           << "; cavity dimension cannot hold the final state";
        throw propagation_error(os.str());
    }
    return StateVector(space, std::move(out), psi0.norm_leakage + discarded_total);
}

// --- closed-form state ------------------------------------------------------------

EvolutionResult analytic_state(const Eigen::VectorXcd& atom_coeffs, const SystemParams& params,
                               double tau, const ModeSpace& space) {
    if (space.n_modes() != 2 || space.mode_index("atom") != 0)
        throw dimension_error("analytic_state expects an (atom, cavity) space, atom first");
    const int d_a = space.dim("atom");
    const int d_c = space.dim("cavity");
    if (atom_coeffs.size() > d_a)
        throw dimension_error("more atom coefficients than atom dimension");

    Eigen::VectorXcd coeffs = Eigen::VectorXcd::Zero(d_a);
    coeffs.head(atom_coeffs.size()) = atom_coeffs;
    const double cnorm = coeffs.norm();
    if (cnorm == 0.0) throw dimension_error("atom coefficients are all zero");
    coeffs /= cnorm;

    const cplx eta = eta_of(tau);
    int n_eff = 0;
    for (int n = 0; n < d_a; ++n)
        if (std::abs(coeffs[n]) > 1e-8) n_eff = n;
    const double worst_amp = std::abs(params.Lambda) * n_eff * std::abs(eta);
    const int required = static_cast<int>(std::ceil(4.0 * worst_amp * worst_amp)) + 20;
    if (d_c < required) {
        std::ostringstream os;
        os << "cavity dim " << d_c << " below required " << required
           << " for |Lambda n eta| = " << worst_amp;
        throw truncation_error(os.str());
    }

    Eigen::VectorXcd joint(space.total_dim());
    double leakage = 0.0;
    const double quad_phase = tau - std::sin(tau);
    for (int n = 0; n < d_a; ++n) {
        const cplx amp = params.Lambda * static_cast<double>(n) * eta;
        auto [cav, leak] = coherent_amplitudes(d_c, amp);
        const cplx phase = std::polar(1.0, params.Lambda * params.Lambda * n * n * quad_phase);
        joint.segment(static_cast<long>(n) * d_c, d_c) = coeffs[n] * phase * cav;
        leakage += std::norm(coeffs[n]) * leak;
    }
    StateVector state(space, std::move(joint), leakage);
    return EvolutionResult{std::move(state), tau, Frame::interaction, leakage};
}

EvolutionResult analytic_state(cplx alpha, const SystemParams& params, double tau,
                               const ModeSpace& space) {
    const int d_a = space.dim("atom");
    auto atom = coherent_state(ModeSpace::single(d_a, "atom"), "atom", alpha);
    auto result = analytic_state(atom.amplitudes, params, tau, space);
    result.leakage += atom.norm_leakage;
    result.state.norm_leakage += atom.norm_leakage;
    return result;
}

int recommended_atom_dim(cplx alpha) {
    const double a2 = std::norm(alpha);
    return static_cast<int>(std::ceil(4.0 * a2)) + 20;
}

int recommended_cavity_dim(double lambda, const Eigen::VectorXcd& atom_coeffs,
                           double max_eta_abs) {
    int n_eff = 0;
    const double norm = atom_coeffs.norm();
    for (long n = 0; n < atom_coeffs.size(); ++n)
        if (std::abs(atom_coeffs[n]) > 1e-8 * norm) n_eff = static_cast<int>(n);
    const double amp = std::abs(lambda) * n_eff * max_eta_abs;
    return static_cast<int>(std::ceil(4.0 * amp * amp)) + 20;
}

// --- evolution trace -----------------------------------------------------------------

std::vector<TraceRow> evolution_trace(const SystemParams& params, cplx alpha,
                                      const std::vector<double>& taus) {
    if (taus.empty()) return {};
    const int d_a = recommended_atom_dim(alpha);
    auto atom = coherent_state(ModeSpace::single(d_a, "atom"), "atom", alpha);

    // Per-sector scratch bases sized once for the worst excursion.  Sectors
    // with negligible coherent weight are carried as zero.
    std::vector<Eigen::VectorXcd> slices(d_a);
    std::vector<SectorBasis> hs(d_a);
    std::vector<std::pair<double, double>> bounds(d_a);
    std::vector<int> dims(d_a);
    std::vector<bool> active(d_a);
    double skipped_weight = 0.0;
    for (int n = 0; n < d_a; ++n) {
        active[n] = std::norm(atom.amplitudes[n]) > 1e-11;
        const double excursion = 2.0 * std::abs(params.Lambda) * n;
        dims[n] = static_cast<int>(std::ceil(excursion * excursion + 9.0 * excursion)) + 25;
        slices[n] = Eigen::VectorXcd::Zero(dims[n]);
        if (!active[n]) {
            skipped_weight += std::norm(atom.amplitudes[n]);
            continue;
        }
        slices[n][0] = atom.amplitudes[n];
        hs[n] = sector_hamiltonian(params, n, dims[n]);
        bounds[n] = sector_bounds(hs[n], params.omega_m, params.G * n);
    }

    std::vector<TraceRow> rows;
    rows.reserve(taus.size());
    double tau_prev = 0.0;
    for (double tau : taus) {
        const double dt = (tau - tau_prev) / params.omega_m;
        if (dt != 0.0)
            for (int n = 0; n < d_a; ++n)
                if (active[n])
                    detail::tridiag_exp_apply(hs[n].diag, hs[n].off, dt, slices[n],
                                              bounds[n].first, bounds[n].second);
        tau_prev = tau;

        TraceRow row{};
        row.tau = tau;
        // reduced atom density rho(m,n) = <s_n|s_m>
        Eigen::MatrixXcd rho(d_a, d_a);
        for (int m = 0; m < d_a; ++m)
            for (int n = 0; n <= m; ++n) {
                const long len = std::min(slices[m].size(), slices[n].size());
                const cplx val = slices[n].head(len).dot(slices[m].head(len));
                rho(m, n) = val;
                rho(n, m) = std::conj(val);
            }
        row.atom_purity = std::real((rho * rho).trace());

        double cav_n = 0.0;
        cplx cav_c = 0.0;
        for (int n = 0; n < d_a; ++n) {
            const auto& s = slices[n];
            for (long k = 0; k < s.size(); ++k) cav_n += k * std::norm(s[k]);
            for (long k = 0; k + 1 < s.size(); ++k)
                cav_c += std::conj(s[k]) * std::sqrt(k + 1.0) * s[k + 1];
        }
        row.cavity_n = cav_n;
        row.cavity_x = std::real(cav_c);

        // overlap with the closed-form state, sector by sector
        const cplx eta = eta_of(tau);
        const double quad_phase = tau - std::sin(tau);
        cplx overlap = 0.0;
        double leak = atom.norm_leakage + skipped_weight;
        for (int n = 0; n < d_a; ++n) {
            if (!active[n]) continue;
            const cplx amp = params.Lambda * static_cast<double>(n) * eta;
            auto [cav, sector_leak] = coherent_amplitudes(dims[n], amp);
            const cplx phase =
                std::polar(1.0, params.Lambda * params.Lambda * n * n * quad_phase);
            const cplx target_coeff = atom.amplitudes[n] * phase;
            overlap += std::conj(target_coeff) * cav.dot(slices[n]);
            leak += std::norm(atom.amplitudes[n]) * sector_leak;
        }
        row.overlap_analytic = std::abs(overlap);
        row.leakage = leak;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace mwopt

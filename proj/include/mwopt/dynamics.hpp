#ifndef MWOPT_DYNAMICS_HPP
#define MWOPT_DYNAMICS_HPP

#include <vector>

#include "mwopt/fock.hpp"

namespace mwopt {

// Parameters of H/hbar = omega0 a^dag a + omega_m c^dag c + G (c + c^dag) a^dag a.
// Lambda = -G / omega_m is kept consistent with G at construction.
struct SystemParams {
    double omega0 = 0.0;   // rad/s
    double omega_m = 0.0;  // rad/s, nonzero, may be negative
    double G = 0.0;        // rad/s
    double Lambda = 0.0;   // dimensionless

    static SystemParams from_coupling(double omega0, double omega_m, double G);
    static SystemParams from_lambda(double omega0, double omega_m, double Lambda);
};

enum class Frame { interaction, lab };

struct EvolutionResult {
    StateVector state;
    double tau;  // dimensionless omega_m * t
    Frame frame;
    double leakage;
};

// eta(tau) = 1 - exp(-i tau), the per-quantum cavity excursion.
cplx eta_of(double tau);
inline double eta_abs(double tau) { return std::abs(eta_of(tau)); }

// Dense joint Hamiltonian on an (atom, cavity) ModeSpace.
Operator build_hamiltonian(const SystemParams& params, const ModeSpace& space,
                           bool include_omega0);

// exp(-i H t) psi0 by full eigendecomposition; suits moderate dimensions.
StateVector evolve_numeric(const Operator& hamiltonian, const StateVector& psi0, double t);

// Same propagation exploiting [H, a^dag a] = 0: each atom-number sector is a
// driven cavity oscillator, integrated by a Chebyshev expansion of the matrix
// exponential in an adaptively sized scratch basis.  Scales to spaces far
// beyond dense reach.  Set include_omega0 to add the exact per-sector
// exp(-i omega0 n t) phases.  Sectors whose relative weight falls below
// sector_weight_floor are dropped into norm_leakage; the overlap error this
// causes is bounded by (atom dim) * floor.
StateVector evolve_blocked(const SystemParams& params, const StateVector& psi0, double t,
                           bool include_omega0 = false,
                           double sector_weight_floor = 1e-11);

// Closed-form joint state for cavity starting in vacuum:
//   sum_n c_n e^{i Lambda^2 n^2 (tau - sin tau)} |n>_a |Lambda n eta>_c.
// Interaction frame (omega0 phases dropped; cavity amplitude as written).
EvolutionResult analytic_state(const Eigen::VectorXcd& atom_coeffs,
                               const SystemParams& params, double tau,
                               const ModeSpace& space);
EvolutionResult analytic_state(cplx alpha, const SystemParams& params, double tau,
                               const ModeSpace& space);

// Truncation policy dim >= ceil(4 |amplitude|^2) + 20 applied to the atom
// coherent amplitude and to the worst populated sector's cavity excursion.
int recommended_atom_dim(cplx alpha);
int recommended_cavity_dim(double lambda, const Eigen::VectorXcd& atom_coeffs,
                           double max_eta_abs = 2.0);

struct TraceRow {
    double tau;
    double atom_purity;
    double cavity_x;        // <(c + c^dag)/2>
    double cavity_n;        // <c^dag c>
    double overlap_analytic;
    double leakage;
};

// Observables along a tau grid for an atom coherent state against vacuum,
// stepping each sector sequentially between grid points.
std::vector<TraceRow> evolution_trace(const SystemParams& params, cplx alpha,
                                      const std::vector<double>& taus);

namespace detail {

// J_0..J_kmax at z >= 0 by Miller's downward recurrence with the
// J_0 + 2 J_2 + 2 J_4 + ... = 1 normalization.
std::vector<double> bessel_j_array(double z, int kmax);

// In-place v <- exp(-i t H) v for real symmetric tridiagonal H given by its
// diagonal and subdiagonal, via the Chebyshev expansion of exp(-i z x).
// Spectral bounds default to Gershgorin; callers with sharper rigorous
// enclosures pass them to shorten the expansion.
void tridiag_exp_apply(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double t,
                       Eigen::VectorXcd& v, double bound_lo = 1.0, double bound_hi = -1.0);

}  // namespace detail

}  // namespace mwopt

#endif

#ifndef MWOPT_PROTOCOLS_HPP
#define MWOPT_PROTOCOLS_HPP

#include <utility>
#include <vector>

#include "mwopt/dynamics.hpp"
#include "mwopt/fock.hpp"

namespace mwopt {

// Revival-time cat parameters: Lambda^2 = 1/(4 m_revival).
struct CatSpec {
    cplx alpha;
    int m_revival;
    double lambda;

    CatSpec(cplx a, int m, double l);
    static CatSpec from_m(cplx alpha, int m);
};

enum class WignerMethod { direct, counting, parity };

struct WignerPoint {
    cplx beta;
    double value = 0.0;
    WignerMethod method = WignerMethod::direct;
    double constraint_residual = 0.0;  // |Lambda eta|^2 - pi or 2 Lambda |eta| - pi
    double imag_residual = 0.0;        // counting method only
};

struct MeasurementRecord {
    enum class Kind { photon_number, quadrature };
    Kind kind;
    std::vector<double> values;
    std::vector<double> probabilities;  // densities for Kind::quadrature
    bool is_density = false;

    void validate() const;  // discrete records must sum to 1 within 1e-10
};

// Normalized ((1+i)/2)|alpha> + ((1-i)/2)|-alpha> on a single-mode space.
StateVector cat_target(const CatSpec& spec, const ModeSpace& space);

// Projects the cavity mode of a joint (atom, cavity) state onto the
// quadrature eigenvalue X.  Returns the normalized atom state and the
// probability density of obtaining X.
std::pair<StateVector, double> conditional_quadrature_collapse(const StateVector& joint,
                                                               double X);

// Closed-form collapse weights exp[-8 Lambda^2 (n - X / 2 Lambda)^2] at
// tau an odd multiple of pi, normalized over n = 0..n_max.
std::vector<double> gaussian_sector_weights(double X, double lambda, double tau, int n_max);

// P_a(n) = <n| D(beta) rho_a D(-beta) |n>; embeds into a larger working
// basis as needed.
std::vector<std::pair<int, double>> displaced_number_statistics(const DensityOperator& rho_a,
                                                                cplx beta);

// P_c(X) = sum_n P_a(n) |<X| Lambda n eta >|^2 on a grid of X values.
// The protocol reads out at tau = (odd) pi; pass allow_general_tau to
// evaluate elsewhere.
MeasurementRecord quadrature_distribution(const DensityOperator& rho_a, cplx beta,
                                          double lambda, double tau,
                                          const std::vector<double>& x_grid,
                                          bool allow_general_tau = false);

// W(beta) = (2/pi) sum_n (-1)^n <n| D(-beta) rho_a D(beta) |n>.
WignerPoint wigner_direct(const DensityOperator& rho_a, cplx beta);

// Cavity photon-number distribution produced by the counting protocol:
// displace by -beta, attach vacuum, evolve to tau, trace the atom.
// Sectors lighter than 1e-14 are dropped; coverage bounds the discarded
// photon-number mass.
MeasurementRecord counting_photon_record(const DensityOperator& rho_a, cplx beta,
                                         double lambda, double tau,
                                         double coverage = 1.0 - 1e-10);

// Wigner reconstruction from photon counting, (2/pi) sum_n P_c(n) (1+i)^n,
// valid on the constraint |Lambda eta|^2 = pi.
WignerPoint wigner_reconstruct_counting(const DensityOperator& rho_a, cplx beta,
                                        double lambda, double tau);

// Photon probabilities (P_c(0), P_c(1)) of the single-photon protocol with
// cavity input rho_0 |0><0| + rho_1 |1><1|.  The cavity is confined to the
// {0, 1} subspace (photon blockade); each atom sector applies the
// leading-order interaction-picture rotation of angle 2 Lambda |eta| n.
std::pair<double, double> parity_photon_probs(const DensityOperator& rho_a, cplx beta,
                                              double lambda, double tau, double rho0,
                                              double rho1);

// Wigner reconstruction W = 2 (P_c(1) - P_c(0)) / (pi (rho1 - rho0)), valid
// on the constraint 2 Lambda |eta| = pi.
WignerPoint wigner_reconstruct_parity(const DensityOperator& rho_a, cplx beta, double lambda,
                                      double tau, double rho0, double rho1);

// Constraint solvers: given one free variable, produce the other.
double counting_lambda_for_tau(double tau);  // |Lambda eta|^2 = pi
double counting_tau_for_lambda(double lambda);
double parity_lambda_for_tau(double tau);  // 2 Lambda |eta| = pi
double parity_tau_for_lambda(double lambda);

}  // namespace mwopt

#endif

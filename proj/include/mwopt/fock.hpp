#ifndef MWOPT_FOCK_HPP
#define MWOPT_FOCK_HPP

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <string_view>
#include <vector>

#include "mwopt/errors.hpp"

namespace mwopt {

using cplx = std::complex<double>;

// Default numerical budgets shared across the library.
namespace tol {
inline constexpr double hermitian = 1e-12;
inline constexpr double trace_unit = 1e-10;
inline constexpr double leakage_budget = 1e-10;
inline constexpr double unitarity = 1e-9;
inline constexpr double norm_drift = 1e-8;
inline constexpr double constraint = 1e-9;
}  // namespace tol

// Truncation metadata for a tensor product of bosonic modes.  The first
// label is the leftmost (most significant) Kronecker factor; joint index
// = i_0 * (d_1 * d_2 * ...) + i_1 * (d_2 * ...) + ...
class ModeSpace {
public:
    ModeSpace(std::vector<int> dims, std::vector<std::string> labels);
    static ModeSpace single(int dim, std::string label);
    static ModeSpace join(const ModeSpace& a, const ModeSpace& b);

    int n_modes() const { return static_cast<int>(dims_.size()); }
    long total_dim() const { return total_; }
    int dim(int mode) const { return dims_.at(mode); }
    int dim(std::string_view label) const { return dims_[mode_index(label)]; }
    int mode_index(std::string_view label) const;  // throws on unknown label
    long stride(int mode) const { return strides_.at(mode); }
    const std::vector<int>& dims() const { return dims_; }
    const std::vector<std::string>& labels() const { return labels_; }

    bool operator==(const ModeSpace& other) const {
        return dims_ == other.dims_ && labels_ == other.labels_;
    }

private:
    std::vector<int> dims_;
    std::vector<std::string> labels_;
    std::vector<long> strides_;
    long total_ = 0;
};

// Complex amplitudes over the truncated joint number basis.  norm_leakage
// records probability discarded by truncation at construction; it is never
// silently dropped.
struct StateVector {
    ModeSpace space;
    Eigen::VectorXcd amplitudes;
    double norm_leakage = 0.0;

    StateVector(ModeSpace s, Eigen::VectorXcd amps, double leakage = 0.0);

    double norm() const { return amplitudes.norm(); }
    cplx overlap(const StateVector& other) const;
};

struct DensityOperator {
    ModeSpace space;
    Eigen::MatrixXcd matrix;

    // Checks hermiticity (1e-12 entrywise) and dimension; trace is checked
    // against 1 when `require_unit_trace` is set.  The eigenvalue floor is
    // validated separately (validate_positivity) since it costs O(d^3).
    DensityOperator(ModeSpace s, Eigen::MatrixXcd m, bool require_unit_trace = true);

    void validate_positivity(double floor = -1e-10) const;
};

struct Operator {
    ModeSpace space;
    Eigen::MatrixXcd matrix;
    bool hermitian_hint = false;

    Operator(ModeSpace s, Eigen::MatrixXcd m, bool hermitian = false);
};

// --- construction -------------------------------------------------------

StateVector number_state(const ModeSpace& space, std::string_view mode, int n);

// Truncated coherent state, renormalized; throws truncation_error when the
// discarded Poisson tail exceeds leakage_budget.
StateVector coherent_state(const ModeSpace& space, std::string_view mode, cplx alpha,
                           double leakage_budget = tol::leakage_budget);

Operator mode_annihilation(const ModeSpace& space, std::string_view mode);
Operator mode_number(const ModeSpace& space, std::string_view mode);

// exp(beta c^dag - conj(beta) c) restricted to the truncated space; exactly
// unitary there.  Throws truncation_error when 4|beta|^2 exceeds the mode
// dimension (displaced support would leave the basis).
Operator displacement_operator(const ModeSpace& space, std::string_view mode, cplx beta);

// --- composition --------------------------------------------------------

StateVector join_modes(const StateVector& a, const StateVector& b);

DensityOperator reduce_mode(const StateVector& psi, std::string_view keep);
DensityOperator reduce_mode(const DensityOperator& rho, std::string_view keep);

// Zero-pad a single-mode state/density to a larger dimension.
StateVector embed_state(const StateVector& psi, int new_dim);
DensityOperator embed_density(const DensityOperator& rho, int new_dim);

// --- quadrature ---------------------------------------------------------

// psi_n(X) = (2/pi)^{1/4} (2^n n!)^{-1/2} H_n(sqrt(2) X) e^{-X^2},
// the eigenfunction convention of X = (c + c^dag)/2 (vacuum variance 1/4).
double quadrature_wavefunction(int n, double X);

// psi_0..psi_{count-1} at X by the stable normalized recurrence.
Eigen::VectorXd quadrature_wavefunctions(int count, double X);

// <X| rho |X> for a single-mode density operator.
double quadrature_density(const DensityOperator& rho, double X);

// --- scalar diagnostics --------------------------------------------------

double parity_expectation(const DensityOperator& rho);  // sum_n (-1)^n rho_nn
double fidelity(const StateVector& a, const StateVector& b);  // |<a|b>|^2
double pure_fidelity(const DensityOperator& rho, const StateVector& psi);  // <psi|rho|psi>
double purity(const DensityOperator& rho);  // Tr rho^2
cplx expectation(const Operator& op, const StateVector& psi);

DensityOperator to_density(const StateVector& psi);

// exp(A) for anti-Hermitian A via eigendecomposition of iA.
Eigen::MatrixXcd unitary_from_antihermitian(const Eigen::MatrixXcd& a);

// log |c_n| of the coherent amplitude c_n = e^{-|a|^2/2} a^n / sqrt(n!);
// shared by every routine that needs Poisson weights without underflow.
double coherent_log_abs_amplitude(double abs_alpha, int n);

// Renormalized truncated coherent amplitudes plus the discarded tail weight.
// Never throws on leakage; callers enforce their own budgets.
std::pair<Eigen::VectorXcd, double> coherent_amplitudes(int dim, cplx alpha);

}  // namespace mwopt

#endif

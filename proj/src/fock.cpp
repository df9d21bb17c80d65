#include "mwopt/fock.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace mwopt {

namespace {

constexpr double pi = 3.14159265358979323846;

[[noreturn]] void throw_unknown_label(std::string_view label) {
    std::ostringstream os;
    os << "unknown mode label '" << label << "'";
    throw dimension_error(os.str());
}

}  // namespace

// --- ModeSpace ------------------------------------------------------------

ModeSpace::ModeSpace(std::vector<int> dims, std::vector<std::string> labels)
    : dims_(std::move(dims)), labels_(std::move(labels)) {
    if (dims_.empty() || dims_.size() != labels_.size())
        throw dimension_error("ModeSpace needs one label per mode dimension");
    for (int d : dims_)
        if (d < 2) throw dimension_error("every mode dimension must be >= 2");
    std::set<std::string> seen(labels_.begin(), labels_.end());
    if (seen.size() != labels_.size())
        throw dimension_error("ModeSpace labels must be unique");
    strides_.assign(dims_.size(), 1);
    for (int i = static_cast<int>(dims_.size()) - 2; i >= 0; --i)
        strides_[i] = strides_[i + 1] * dims_[i + 1];
    total_ = strides_[0] * dims_[0];
}

ModeSpace ModeSpace::single(int dim, std::string label) {
    return ModeSpace({dim}, {std::move(label)});
}

ModeSpace ModeSpace::join(const ModeSpace& a, const ModeSpace& b) {
    std::vector<int> dims = a.dims_;
    dims.insert(dims.end(), b.dims_.begin(), b.dims_.end());
    std::vector<std::string> labels = a.labels_;
    labels.insert(labels.end(), b.labels_.begin(), b.labels_.end());
    return ModeSpace(std::move(dims), std::move(labels));  // ctor rejects collisions
}

int ModeSpace::mode_index(std::string_view label) const {
    for (size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == label) return static_cast<int>(i);
    throw_unknown_label(label);
}

// --- value types -----------------------------------------------------------

StateVector::StateVector(ModeSpace s, Eigen::VectorXcd amps, double leakage)
    : space(std::move(s)), amplitudes(std::move(amps)), norm_leakage(leakage) {
    if (amplitudes.size() != space.total_dim())
        throw dimension_error("amplitude vector length does not match space dimension");
    if (norm_leakage < 0.0) norm_leakage = 0.0;
}

cplx StateVector::overlap(const StateVector& other) const {
    if (!(space == other.space))
        throw dimension_error("overlap requires states on the same ModeSpace");
    return amplitudes.dot(other.amplitudes);  // conjugates *this
}

DensityOperator::DensityOperator(ModeSpace s, Eigen::MatrixXcd m, bool require_unit_trace)
    : space(std::move(s)), matrix(std::move(m)) {
    const long d = space.total_dim();
    if (matrix.rows() != d || matrix.cols() != d)
        throw dimension_error("density matrix dimension does not match space");
    const double herm = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
    if (herm > tol::hermitian)
        throw dimension_error("density operator not Hermitian within 1e-12");
    if (require_unit_trace) {
        const double tr_err = std::abs(matrix.trace() - cplx(1.0, 0.0));
        if (tr_err > tol::trace_unit)
            throw dimension_error("density operator trace differs from 1 beyond 1e-10");
    }
}

void DensityOperator::validate_positivity(double floor) const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(matrix, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < floor)
        throw dimension_error("density operator has an eigenvalue below the allowed floor");
}

Operator::Operator(ModeSpace s, Eigen::MatrixXcd m, bool hermitian)
    : space(std::move(s)), matrix(std::move(m)), hermitian_hint(hermitian) {
    const long d = space.total_dim();
    if (matrix.rows() != d || matrix.cols() != d)
        throw dimension_error("operator dimension does not match space");
    if (hermitian_hint) {
        const double herm = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
        if (herm > tol::hermitian)
            throw dimension_error("operator marked Hermitian violates 1e-12 hermiticity");
    }
}

// --- constructors -----------------------------------------------------------

StateVector number_state(const ModeSpace& space, std::string_view mode, int n) {
    const int d = space.dim(mode);
    if (space.n_modes() != 1)
        throw dimension_error("number_state builds single-mode states; use join_modes");
    if (n < 0 || n >= d) {
        std::ostringstream os;
        os << "number state index " << n << " out of range for dim " << d;
        throw dimension_error(os.str());
    }
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d);
    v[n] = 1.0;
    return StateVector(space, std::move(v), 0.0);
}

double coherent_log_abs_amplitude(double abs_alpha, int n) {
    if (abs_alpha == 0.0) return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return -0.5 * abs_alpha * abs_alpha + n * std::log(abs_alpha) - 0.5 * std::lgamma(n + 1.0);
}

std::pair<Eigen::VectorXcd, double> coherent_amplitudes(int dim, cplx alpha) {
    const double r = std::abs(alpha);
    const double phase = std::arg(alpha);
    Eigen::VectorXcd v(dim);
    double sum = 0.0;
    for (int n = 0; n < dim; ++n) {
        const double lg = coherent_log_abs_amplitude(r, n);
        const double mag = lg < -700.0 ? 0.0 : std::exp(lg);
        v[n] = std::polar(mag, phase * n);
        sum += mag * mag;
    }
    const double leakage = std::max(0.0, 1.0 - sum);
    if (sum > 0.0) v /= std::sqrt(sum);
    return {std::move(v), leakage};
}

StateVector coherent_state(const ModeSpace& space, std::string_view mode, cplx alpha,
                           double leakage_budget) {
    if (space.n_modes() != 1)
        throw dimension_error("coherent_state builds single-mode states; use join_modes");
    const int d = space.dim(mode);
    auto [v, leakage] = coherent_amplitudes(d, alpha);
    if (leakage > leakage_budget) {
        std::ostringstream os;
        os << "coherent state |alpha|=" << std::abs(alpha) << " leaks " << leakage
           << " beyond dim " << d << " (budget " << leakage_budget << ")";
        throw truncation_error(os.str());
    }
    return StateVector(space, std::move(v), leakage);
}

namespace {

// Kronecker-embeds a single-mode matrix block into the joint space.
Eigen::MatrixXcd embed_mode_matrix(const ModeSpace& space, int mode,
                                   const Eigen::MatrixXcd& block) {
    const long total = space.total_dim();
    const int d = space.dim(mode);
    const long stride = space.stride(mode);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(total, total);
    // Iterate joint indices with the chosen mode's digit factored out.
    const long outer = total / (d * stride);
    for (long o = 0; o < outer; ++o) {
        for (long inner = 0; inner < stride; ++inner) {
            const long base = o * d * stride + inner;
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c) {
                    const cplx val = block(r, c);
                    if (val != cplx(0.0, 0.0)) out(base + r * stride, base + c * stride) = val;
                }
        }
    }
    return out;
}

}  // namespace

Operator mode_annihilation(const ModeSpace& space, std::string_view mode) {
    const int idx = space.mode_index(mode);
    const int d = space.dim(idx);
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
    for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return Operator(space, embed_mode_matrix(space, idx, a), false);
}

Operator mode_number(const ModeSpace& space, std::string_view mode) {
    const int idx = space.mode_index(mode);
    const int d = space.dim(idx);
    Eigen::MatrixXcd n_op = Eigen::MatrixXcd::Zero(d, d);
    for (int n = 0; n < d; ++n) n_op(n, n) = static_cast<double>(n);
    return Operator(space, embed_mode_matrix(space, idx, n_op), true);
}

Eigen::MatrixXcd unitary_from_antihermitian(const Eigen::MatrixXcd& a) {
    const double anti = (a + a.adjoint()).cwiseAbs().maxCoeff();
    if (anti > 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()))
        throw dimension_error("generator is not anti-Hermitian");
    const Eigen::MatrixXcd h = cplx(0.0, 1.0) * a;  // Hermitian
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success)
        throw propagation_error("eigendecomposition failed in matrix exponential");
    Eigen::VectorXcd phases(es.eigenvalues().size());
    for (long k = 0; k < phases.size(); ++k)
        phases[k] = std::polar(1.0, -es.eigenvalues()[k]);
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Operator displacement_operator(const ModeSpace& space, std::string_view mode, cplx beta) {
    const int idx = space.mode_index(mode);
    const int d = space.dim(idx);
    const double b2 = std::norm(beta);
    if (4.0 * b2 >= static_cast<double>(d) && beta != cplx(0.0, 0.0)) {
        std::ostringstream os;
        os << "displacement |beta|^2=" << b2 << " needs mode dim > " << 4.0 * b2
           << ", have " << d;
        throw truncation_error(os.str());
    }
    Eigen::MatrixXcd gen = Eigen::MatrixXcd::Zero(d, d);
    for (int n = 1; n < d; ++n) {
        const double s = std::sqrt(static_cast<double>(n));
        gen(n, n - 1) = beta * s;              // beta c^dag
        gen(n - 1, n) = -std::conj(beta) * s;  // -conj(beta) c
    }
    Eigen::MatrixXcd block = unitary_from_antihermitian(gen);
    if (space.n_modes() == 1) return Operator(space, std::move(block), false);
    return Operator(space, embed_mode_matrix(space, idx, block), false);
}

// --- composition -------------------------------------------------------------

StateVector join_modes(const StateVector& a, const StateVector& b) {
    ModeSpace joint = ModeSpace::join(a.space, b.space);
    Eigen::VectorXcd v(joint.total_dim());
    const long db = b.space.total_dim();
    for (long i = 0; i < a.space.total_dim(); ++i)
        v.segment(i * db, db) = a.amplitudes[i] * b.amplitudes;
    return StateVector(std::move(joint), std::move(v), a.norm_leakage + b.norm_leakage);
}

namespace {

// Partial trace over all modes except `keep`, shared by both overloads via
// an element accessor.
template <typename Access>
Eigen::MatrixXcd partial_trace(const ModeSpace& space, int keep, Access rho_elem) {
    const int dk = space.dim(keep);
    const long sk = space.stride(keep);
    const long total = space.total_dim();
    const long outer = total / (dk * sk);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dk, dk);
    for (long o = 0; o < outer; ++o)
        for (long inner = 0; inner < sk; ++inner) {
            const long base = o * dk * sk + inner;
            for (int r = 0; r < dk; ++r)
                for (int c = 0; c < dk; ++c)
                    out(r, c) += rho_elem(base + r * sk, base + c * sk);
        }
    return out;
}

}  // namespace

DensityOperator reduce_mode(const StateVector& psi, std::string_view keep) {
    const int idx = psi.space.mode_index(keep);
    const auto& v = psi.amplitudes;
    Eigen::MatrixXcd red = partial_trace(psi.space, idx, [&](long r, long c) {
        return v[r] * std::conj(v[c]);
    });
    ModeSpace out = ModeSpace::single(psi.space.dim(idx), psi.space.labels()[idx]);
    return DensityOperator(std::move(out), std::move(red), false);
}

DensityOperator reduce_mode(const DensityOperator& rho, std::string_view keep) {
    const int idx = rho.space.mode_index(keep);
    Eigen::MatrixXcd red = partial_trace(rho.space, idx, [&](long r, long c) {
        return rho.matrix(r, c);
    });
    ModeSpace out = ModeSpace::single(rho.space.dim(idx), rho.space.labels()[idx]);
    return DensityOperator(std::move(out), std::move(red), false);
}

StateVector embed_state(const StateVector& psi, int new_dim) {
    if (psi.space.n_modes() != 1)
        throw dimension_error("embed_state expects a single-mode state");
    const int d = psi.space.dim(0);
    if (new_dim < d) throw dimension_error("embed_state cannot shrink a state");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(new_dim);
    v.head(d) = psi.amplitudes;
    return StateVector(ModeSpace::single(new_dim, psi.space.labels()[0]), std::move(v),
                       psi.norm_leakage);
}

DensityOperator embed_density(const DensityOperator& rho, int new_dim) {
    if (rho.space.n_modes() != 1)
        throw dimension_error("embed_density expects a single-mode operator");
    const int d = rho.space.dim(0);
    if (new_dim < d) throw dimension_error("embed_density cannot shrink an operator");
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(new_dim, new_dim);
    m.topLeftCorner(d, d) = rho.matrix;
    return DensityOperator(ModeSpace::single(new_dim, rho.space.labels()[0]), std::move(m),
                           false);
}

// --- quadrature ---------------------------------------------------------------

Eigen::VectorXd quadrature_wavefunctions(int count, double X) {
    if (count < 1) throw dimension_error("quadrature_wavefunctions needs count >= 1");
    Eigen::VectorXd psi(count);
    const double y = std::sqrt(2.0) * X;
    psi[0] = std::pow(2.0 / pi, 0.25) * std::exp(-X * X);
    if (count == 1) return psi;
    // psi_{n+1} = y sqrt(2/(n+1)) psi_n - sqrt(n/(n+1)) psi_{n-1}, y = sqrt(2) X
    psi[1] = y * std::sqrt(2.0) * psi[0];
    for (int n = 1; n + 1 < count; ++n)
        psi[n + 1] = y * std::sqrt(2.0 / (n + 1.0)) * psi[n] -
                     std::sqrt(n / (n + 1.0)) * psi[n - 1];
    return psi;
}

double quadrature_wavefunction(int n, double X) {
    if (n < 0) throw dimension_error("quadrature_wavefunction needs n >= 0");
    return quadrature_wavefunctions(n + 1, X)[n];
}

double quadrature_density(const DensityOperator& rho, double X) {
    if (rho.space.n_modes() != 1)
        throw dimension_error("quadrature_density expects a single-mode density operator");
    const Eigen::VectorXd psi = quadrature_wavefunctions(rho.space.dim(0), X);
    const Eigen::VectorXcd psic = psi.cast<cplx>();
    return std::real(psic.dot(rho.matrix * psic));
}

// --- diagnostics ----------------------------------------------------------------

double parity_expectation(const DensityOperator& rho) {
    if (rho.space.n_modes() != 1)
        throw dimension_error("parity_expectation expects a single-mode density operator");
    double p = 0.0;
    for (long n = 0; n < rho.space.total_dim(); ++n)
        p += (n % 2 == 0 ? 1.0 : -1.0) * std::real(rho.matrix(n, n));
    return p;
}

double fidelity(const StateVector& a, const StateVector& b) {
    return std::norm(a.overlap(b));
}

double pure_fidelity(const DensityOperator& rho, const StateVector& psi) {
    if (!(rho.space == psi.space))
        throw dimension_error("pure_fidelity requires matching spaces");
    return std::real(psi.amplitudes.dot(rho.matrix * psi.amplitudes));
}

double purity(const DensityOperator& rho) {
    return std::real((rho.matrix * rho.matrix).trace());
}

cplx expectation(const Operator& op, const StateVector& psi) {
    if (!(op.space == psi.space))
        throw dimension_error("expectation requires matching spaces");
    return psi.amplitudes.dot(op.matrix * psi.amplitudes);
}

DensityOperator to_density(const StateVector& psi) {
    return DensityOperator(psi.space, psi.amplitudes * psi.amplitudes.adjoint(), false);
}

}  // namespace mwopt

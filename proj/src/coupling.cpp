#include "mwopt/coupling.hpp"

#include <cmath>
#include <sstream>

namespace mwopt {

TrapGeometry::TrapGeometry(vec3 omega, double m) : omega_trap(omega), mass(m) {
    for (double w : omega_trap)
        if (!(w > 0.0)) throw validation_error("trap frequencies must be positive");
    if (!(mass > 0.0)) throw validation_error("atomic mass must be positive");
}

vec3 TrapGeometry::oscillator_lengths() const {
    vec3 lengths;
    for (int i = 0; i < 3; ++i) lengths[i] = std::sqrt(hbar / (mass * omega_trap[i]));
    return lengths;
}

OpticalParams::OpticalParams(cplx omega_p, cplx g_c, double delta, vec3 kp, vec3 kc)
    : rabi_pump(omega_p), rabi_vacuum(g_c), detuning_atom(delta), k_pump(kp), k_cavity(kc) {
    if (detuning_atom == 0.0)
        throw validation_error("atom-field detuning must be nonzero");
    auto norm3 = [](const vec3& v) {
        return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    };
    if (!(norm3(k_pump) > 0.0) || !(norm3(k_cavity) > 0.0))
        throw validation_error("pump and cavity wave vectors must be nonzero");
}

vec3 OpticalParams::delta_k() const {
    return {k_pump[0] - k_cavity[0], k_pump[1] - k_cavity[1], k_pump[2] - k_cavity[2]};
}

cplx motional_overlap(int n, int m, double eta) {
    if (n < 0 || m < 0) throw dimension_error("motional indices must be >= 0");
    const int lo = std::min(n, m);
    const int hi = std::max(n, m);
    const int dn = hi - lo;
    if (eta == 0.0) return n == m ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
    const double eta2 = eta * eta;
    // <n|exp(i eta (b+b^dag))|m> = e^{-eta^2/2} (i eta)^dn sqrt(lo!/hi!) L_lo^{(dn)}(eta^2)
    const double log_pre = -0.5 * eta2 + 0.5 * (std::lgamma(lo + 1.0) - std::lgamma(hi + 1.0));
    const double lag = std::assoc_laguerre(static_cast<unsigned>(lo),
                                           static_cast<unsigned>(dn), eta2);
    const cplx ieta_pow = std::pow(cplx(0.0, eta), dn);
    return ieta_pow * (lag * std::exp(log_pre));
}

namespace {

vec3 signed_lamb_dicke(const vec3& delta_k, const TrapGeometry& trap) {
    const vec3 lengths = trap.oscillator_lengths();
    vec3 eta;
    for (int i = 0; i < 3; ++i) eta[i] = delta_k[i] * lengths[i] / std::sqrt(2.0);
    return eta;
}

cplx coupling_prefactor(const OpticalParams& optics) {
    return optics.rabi_pump * std::conj(optics.rabi_vacuum) / (2.0 * optics.detuning_atom);
}

}  // namespace

cplx transition_moment(const idx3& n, const idx3& m, const vec3& delta_k,
                       const TrapGeometry& trap, const OpticalParams& optics) {
    const vec3 eta = signed_lamb_dicke(delta_k, trap);
    cplx product = coupling_prefactor(optics);
    for (int axis = 0; axis < 3; ++axis)
        product *= motional_overlap(n[axis], m[axis], eta[axis]);
    return product;
}

vec3 lamb_dicke_parameters(const vec3& delta_k, const TrapGeometry& trap) {
    vec3 eta = signed_lamb_dicke(delta_k, trap);
    for (double& e : eta) e = std::abs(e);
    return eta;
}

double single_mode_validity(const vec3& delta_k, const TrapGeometry& trap,
                            const OpticalParams& optics, int n_max) {
    if (n_max < 1) throw validation_error("single_mode_validity needs n_max >= 1");
    const cplx g00 = transition_moment({0, 0, 0}, {0, 0, 0}, delta_k, trap, optics);
    if (std::abs(g00) == 0.0)
        throw validation_error("degenerate geometry: G_{0,0} vanishes");
    double worst = 0.0;
    for (int nx = 0; nx <= n_max; ++nx)
        for (int ny = 0; ny + nx <= n_max; ++ny)
            for (int nz = 0; nz + ny + nx <= n_max; ++nz) {
                if (nx + ny + nz == 0) continue;
                const cplx g = transition_moment({nx, ny, nz}, {0, 0, 0}, delta_k, trap, optics);
                worst = std::max(worst, std::abs(g) / std::abs(g00));
            }
    return worst;
}

CouplingResult effective_coupling(const OpticalParams& optics, const vec3& delta_k,
                                  const TrapGeometry& trap, double omega_m,
                                  int validity_n_max) {
    if (omega_m == 0.0)
        throw validation_error("resonance: Lambda undefined for omega_m = 0");
    CouplingResult result;
    result.G = transition_moment({0, 0, 0}, {0, 0, 0}, delta_k, trap, optics);
    result.delta_k = delta_k;
    result.lamb_dicke = lamb_dicke_parameters(delta_k, trap);
    result.validity_ratio = single_mode_validity(delta_k, trap, optics, validity_n_max);
    result.lambda = -result.G / omega_m;
    return result;
}

vec3 delta_k_from_angle(double wavelength, double theta) {
    if (!(wavelength > 0.0)) throw validation_error("wavelength must be positive");
    const double k = 2.0 * 3.14159265358979323846 / wavelength;
    return {-k * std::sin(theta), 0.0, k * (1.0 - std::cos(theta))};
}

}  // namespace mwopt

#ifndef MWOPT_COUPLING_HPP
#define MWOPT_COUPLING_HPP

#include <array>
#include <complex>

#include "mwopt/fock.hpp"

namespace mwopt {

inline constexpr double hbar = 1.054571817e-34;  // J s

using vec3 = std::array<double, 3>;
using idx3 = std::array<int, 3>;

// Harmonic trap; lengths L_i = sqrt(hbar / (m omega_i)).
struct TrapGeometry {
    vec3 omega_trap;  // rad/s, all > 0
    double mass;      // kg, > 0

    TrapGeometry(vec3 omega, double m);
    vec3 oscillator_lengths() const;
};

struct OpticalParams {
    cplx rabi_pump;       // Omega_p, rad/s
    cplx rabi_vacuum;     // g_c, rad/s
    double detuning_atom; // Delta, rad/s, != 0
    vec3 k_pump;          // 1/m
    vec3 k_cavity;        // 1/m

    OpticalParams(cplx omega_p, cplx g_c, double delta, vec3 kp, vec3 kc);
    vec3 delta_k() const;  // k_pump - k_cavity
};

struct CouplingResult {
    cplx G;                 // rad/s
    vec3 delta_k;           // 1/m
    vec3 lamb_dicke;        // dimensionless, >= 0
    double validity_ratio;  // max_{0<|n|<=n_max} |G_{n,0}| / |G_{0,0}|
    cplx lambda;            // -G / omega_m
};

// 1-D motional overlap <n| exp(i eta (b + b^dag)) |m>; symmetric in n, m.
cplx motional_overlap(int n, int m, double eta);

// G_{n,m} = (Omega_p g_c^* / 2 Delta) prod_i M(n_i, m_i, eta_i) with
// eta_i = delta_k_i L_i / sqrt(2).
cplx transition_moment(const idx3& n, const idx3& m, const vec3& delta_k,
                       const TrapGeometry& trap, const OpticalParams& optics);

// eta_i = |delta_k_i| L_i / sqrt(2) per axis.
vec3 lamb_dicke_parameters(const vec3& delta_k, const TrapGeometry& trap);

// max over 0 < n_x+n_y+n_z <= n_max of |G_{n,0}| / |G_{0,0}|; a small value
// certifies the single-mode approximation.
double single_mode_validity(const vec3& delta_k, const TrapGeometry& trap,
                            const OpticalParams& optics, int n_max);

// G = G_{0,0} and Lambda = -G / omega_m, packaged with diagnostics.
CouplingResult effective_coupling(const OpticalParams& optics, const vec3& delta_k,
                                  const TrapGeometry& trap, double omega_m,
                                  int validity_n_max = 3);

// Pump along +z, cavity rotated by theta in the x-z plane, |k_p| = |k_c|
// = 2 pi / wavelength:  delta_k = k (-sin theta, 0, 1 - cos theta).
vec3 delta_k_from_angle(double wavelength, double theta);

}  // namespace mwopt

#endif

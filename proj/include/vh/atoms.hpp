#pragma once

#include <array>

#include "vh/angular.hpp"
#include "vh/specfun.hpp"

namespace vh {

enum class SwitchingVariant { gaussian, cropped };

struct SwitchingKind {
    SwitchingVariant variant = SwitchingVariant::gaussian;
    double crop_sigmas = 8.0;
};

struct AtomSpec {
    double a0 = 1.0;
    double omega = 1.0;
    Vec3 position{0.0, 0.0, 0.0};
    double switching_center = 0.0;
    double switching_width = 1.0;
    EulerAngles orientation{};
};

enum class Transition { s1_to_2pz, s1_to_2s };

using CVec3 = std::array<cplx, 3>;

void validate(const AtomSpec& atom);
void validate(const SwitchingKind& kind);

// Supports (n,l) = (1,0), (2,0), (2,1).
double radial_R(int n, int l, double r, double a0);

// F(x) = psi_e^*(x) x psi_g(x) for 1s -> 2p_z, x relative to the atom's centre,
// expressed in atom A's frame.
CVec3 smearing_vector(const AtomSpec& atom, const Vec3& x, Transition tr = Transition::s1_to_2pz);

// 1s -> 2s scalar smearing, (4 pi a0^3 sqrt2)^{-1} e^{-3r/2a0} (2 - r/a0).
double smearing_scalar(const AtomSpec& atom, const Vec3& x);

double switching(const SwitchingKind& kind, double t, const AtomSpec& atom);

// Half-width of the cropped window, crop_sigmas * T / sqrt2.
double crop_half_width(const SwitchingKind& kind, double T);

// int_0^inf r^3 R21(r) R10(r) j_l(k r) dr
double radial_overlap(int l, double k, double a0);
double radial_overlap_quadrature(int l, double k, double a0);

// log10 of the 1s-1s overlap for centres a distance d apart.
double wavefunction_overlap_log10(double d, double a0);

}  // namespace vh

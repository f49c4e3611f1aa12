#pragma once

#include <array>
#include <complex>
#include <vector>

#include "vh/specfun.hpp"

namespace vh {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

struct ThreeJ {
    int l1, l2, l3, m1, m2, m3;
};

struct EulerAngles {
    double psi = 0.0, theta = 0.0, phi = 0.0;
};

struct HarmonicIndex {
    int l = 0, m = 0;
    bool conjugated = false;
};

double wigner_3j(const ThreeJ& t);

// D^l_{mu,m}(psi, theta, phi) in the frame convention where D^1_{00} = cos(theta)
// and Y^B_{lm}(x) = sum_mu Y_{l mu}(x) D^l_{mu,m} = Y_{lm}(R^T x).
cplx wigner_D(int l, int mu, int m, const EulerAngles& a);

// R = Rz(-psi) Ry(-theta) Rz(-phi); atom B's symmetry axis is R e_z.
Mat3 rotation_matrix(const EulerAngles& a);

cplx sph_harm(int l, int m, double theta, double phi);
cplx sph_harm(int l, int m, const Vec3& dir);

cplx rotate_harmonic(int l, int m, const EulerAngles& a, double theta, double phi);

// Integral over the sphere of a product of 3, 4 or 5 harmonics.
double gaunt_integral(const std::vector<HarmonicIndex>& idx);

// Sum of the two transverse polarization dyads for wave vector k.
Mat3 polarization_completeness(const Vec3& k);

}  // namespace vh

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "vh/angular.hpp"
#include "vh/harvesting.hpp"

namespace vh {

// One line of the self-check table. For families with many cases the values
// are those of the worst case.
struct OracleReport {
    std::string name;
    std::string family;
    double closed_form = 0.0;
    double brute_force = 0.0;
    double rel_err = 0.0;
    double tolerance = 0.0;
    std::size_t cases = 1;
    std::size_t budget = 0;  // integrand evaluations spent by the brute force
    bool pass = false;
    std::string note;
};

// Ordered double time integral, both orderings, by nested adaptive quadrature on
// the triangle t2 < t1 within +-10 sigma of both centres.
QuadratureResult<cplx> time_integral_bruteforce(double omega_a, double omega_b, double k, double t_a, double t_b,
                                                double T, double rtol = 1e-10);

// 64-point Gauss-Legendre in cos(theta) times a 128-point trapezoid in phi.
double sphere_quadrature(const std::vector<HarmonicIndex>& idx);

// int r^3 R21 R10 j_l(k r) dr by adaptive quadrature. Past a0 k = 1 the two
// exponential halves of j_l are integrated along the rays where they decay
// without oscillating.
QuadratureResult<double> radial_bruteforce(int l, double k, double a0);

// Y_lm at R^T x, with R the explicit 3x3 rotation matrix.
cplx rotation_bruteforce(int l, int m, const EulerAngles& a, const Vec3& direction);

// Smallest eigenvalue of the partial transpose of rho, by a dense solver.
double partial_transpose_min_eigenvalue(const Mat4& rho);

std::vector<OracleReport> run_all();

}  // namespace vh

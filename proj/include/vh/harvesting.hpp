#pragma once

#include <array>
#include <string>

#include "vh/atoms.hpp"
#include "vh/specfun.hpp"

namespace vh {

enum class ModelKind { em_dipole, udw_scalar, udw_derivative };

std::string to_string(ModelKind m);
ModelKind model_from_string(const std::string& s);

struct DetectorPair {
    AtomSpec atom_a;
    AtomSpec atom_b;
    ModelKind model = ModelKind::em_dipole;
    double coupling = 1.0;
    SwitchingKind switching{};
};

struct HarvestTerms {
    double L_aa = 0.0, L_bb = 0.0;
    cplx L_ab = 0.0, M = 0.0;
    double err_L_aa = 0.0, err_L_bb = 0.0, err_L_ab = 0.0, err_M = 0.0;
    bool converged = true;
    // The same terms multiplied by exp(log_scale); physical values underflow once
    // Omega T exceeds about 38, the scaled ones do not.
    double log_scale = 0.0;
    double s_L_aa = 0.0, s_L_bb = 0.0;
    cplx s_L_ab = 0.0, s_M = 0.0;
    double s_err_L_aa = 0.0, s_err_L_bb = 0.0, s_err_L_ab = 0.0, s_err_M = 0.0;
};

// Build a terms record from scaled values; fills the physical fields.
HarvestTerms make_terms(double s_L_aa, double s_L_bb, cplx s_L_ab, cplx s_M, double log_scale = 0.0);

using Mat4 = std::array<std::array<cplx, 4>, 4>;

struct TwoQubitState {
    Mat4 rho{};  // basis {gg, eg, ge, ee}
    double negativity2 = 0.0;
    double negativity = 0.0;
    double concurrence = 0.0;
};

struct PositivityReport {
    double E1 = 0.0, E3 = 0.0, E4 = 0.0;
    double E2_fourth_order = 0.0;  // informational, O(e^4)
    double cauchy_schwarz_gap = 0.0;  // L_aa L_bb - |L_ab|^2
    double tolerance = 0.0;
    bool local_nonnegative = true;
    bool e3_ok = true, e4_ok = true, cauchy_schwarz_ok = true;
    bool all_ok() const { return local_nonnegative && e3_ok && e4_ok && cauchy_schwarz_ok; }
};

// Dimensionless description of a pair in units of the switching width T.
struct PairGeometry {
    ModelKind model = ModelKind::em_dipole;
    double alpha = 0.0;       // a0 / T
    double wa = 0.0, wb = 0.0;  // Omega T
    double dist = 0.0;        // d / T
    double ta = 0.0, tb = 0.0;  // centres / T
    double cos_theta = 1.0;
    double coupling2 = 1.0;
    SwitchingKind switching{};
};

PairGeometry geometry_of(const DetectorPair& pair);

double local_term(const DetectorPair& pair, char which, double* err = nullptr, const QuadTol& tol = {});
cplx nonlocal_term(const DetectorPair& pair, double* err = nullptr, const QuadTol& tol = {});
cplx cross_noise_term(const DetectorPair& pair, double* err = nullptr, const QuadTol& tol = {});
HarvestTerms harvest(const DetectorPair& pair, const QuadTol& tol = {});

// Ordered double time integral summed over both orderings, physical units.
cplx time_integral_closed(double omega_a, double omega_b, double k, double t_a, double t_b, double T);

// The same with exp(-T^2 (Omega_a+Omega_b)^2 / 8) removed, for complex k (T = 1 units).
cplx time_integral_reduced(double wa, double wb, cplx k, double ta, double tb);

// Per-k integrands of the identity part, the dyadic part and their difference.
struct Decomposition {
    double identity = 0.0, dyadic = 0.0, total = 0.0;
};
Decomposition em_decomposition_local(double k, double a0);
// Coefficients multiplying j0(kd) and j2(kd) in the nonlocal integrand.
struct DecompositionM {
    double identity_j0 = 0.0, identity_j2 = 0.0;
    double dyadic_j0 = 0.0, dyadic_j2 = 0.0;
    double total_j0 = 0.0, total_j2 = 0.0;
};
DecompositionM em_decomposition_nonlocal(double k, double a0);

TwoQubitState assemble_state(const HarvestTerms& terms);
double negativity2(double L_aa, double L_bb, double abs_M);
double negativity2_error(const HarvestTerms& t);
PositivityReport positivity_report(const HarvestTerms& terms, double coupling = 1.0);

// Integrand weight (without the time factor) of the model: k^p/(4 a0^2 k^2 + 9)^6,
// p = 3, 5, 7, in units T = 1.
cplx model_weight(ModelKind m, double alpha, cplx k);
// Spatial factor: (j0+j2)(x) for EM, j0(x) for the scalar models.
double model_spatial(ModelKind m, double x);
double model_prefactor(ModelKind m, double alpha);

// Time-domain evaluation of M: the u = t1 + t2 integral in closed form, the
// s = t1 - t2 integral against W(s) = int dk weight(k) spatial(k d) e^{-iks}.
// Works for Gaussian and cropped switching; returns the physical value.
cplx nonlocal_term_time_domain(const DetectorPair& pair, double* err = nullptr, const QuadTol& tol = {});

}  // namespace vh

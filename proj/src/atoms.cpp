#include "vh/atoms.hpp"
#include "vh/mutation.hpp"

#include <algorithm>
#include <cmath>

namespace vh {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void validate(const AtomSpec& a) {
    if (!(a.a0 > 0.0)) throw domain_error("atom: a0 must be positive");
    if (!(a.omega > 0.0)) throw domain_error("atom: gap must be positive");
    if (!(a.switching_width > 0.0)) throw domain_error("atom: switching width must be positive");
}

void validate(const SwitchingKind& k) {
    if (!(k.crop_sigmas > 0.0)) throw domain_error("switching: crop_sigmas must be positive");
}

double radial_R(int n, int l, double r, double a0) {
    if (r < 0.0) throw domain_error("radial_R: r < 0");
    const double x = r / a0, s = std::pow(a0, -1.5);
    if (n == 1 && l == 0) return 2.0 * s * std::exp(-x);
    if (n == 2 && l == 1) return s * x * std::exp(-0.5 * x) / std::sqrt(24.0);
    if (n == 2 && l == 0) return s * (2.0 - x) * std::exp(-0.5 * x) / (2.0 * std::sqrt(2.0));
    throw domain_error("radial_R: unsupported (n,l)");
}

CVec3 smearing_vector(const AtomSpec& atom, const Vec3& x, Transition tr) {
    if (tr != Transition::s1_to_2pz) throw domain_error("smearing_vector: EM transition required");
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    const double y00 = 1.0 / std::sqrt(4.0 * kPi);
    if (r == 0.0) return {0.0, 0.0, 0.0};
    const double theta = std::acos(std::clamp(x[2] / r, -1.0, 1.0));
    const double phi = std::atan2(x[1], x[0]);
    cplx ye = rotate_harmonic(1, 0, atom.orientation, theta, phi);
    cplx amp = std::conj(radial_R(2, 1, r, atom.a0) * ye) * radial_R(1, 0, r, atom.a0) * y00;
    return {amp * x[0], amp * x[1], amp * x[2]};
}

double smearing_scalar(const AtomSpec& atom, const Vec3& x) {
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    const double a = atom.a0;
    return std::exp(-1.5 * r / a) * (2.0 - r / a) / (4.0 * kPi * a * a * a * std::sqrt(2.0));
}

double crop_half_width(const SwitchingKind& kind, double T) { return kind.crop_sigmas * T / std::sqrt(2.0); }

double switching(const SwitchingKind& kind, double t, const AtomSpec& atom) {
    const double T = atom.switching_width;
    const double dt = t - atom.switching_center;
    if (kind.variant == SwitchingVariant::cropped && std::abs(dt) > crop_half_width(kind, T)) return 0.0;
    return std::exp(-dt * dt / (T * T));
}

double radial_overlap_quadrature(int l, double k, double a0) {
    if (l < 0 || l > 4) throw domain_error("radial_overlap: l outside 0..4");
    auto f = [&](double r) {
        return r * r * r * radial_R(2, 1, r, a0) * radial_R(1, 0, r, a0) * spherical_bessel_j(l, k * r);
    };
    std::vector<double> pts;
    const double rmax = 60.0 * a0;
    double step = a0;
    if (k > 0.0) step = std::min(step, 3.14159265358979 / k);
    int n = std::min(20000, int(std::ceil(rmax / step)));
    for (int i = 0; i <= n; ++i) pts.push_back(rmax * i / n);
    QuadTol tol;
    tol.atol = 1e-300;
    tol.rtol = 1e-13;
    return integrate_adaptive(f, pts, tol).value;
}

double radial_overlap(int l, double k, double a0) {
    if (k < 0.0) throw domain_error("radial_overlap: k < 0");
    const double u = (a0 * k) * (a0 * k);
    const double den = std::pow(4.0 * u + 9.0, 4);
    const double c = mutation_factor(ClosedForm::radial_overlap);
    if (l == 0) return c * 384.0 * std::sqrt(6.0) * a0 * (9.0 - 4.0 * u) / den;
    if (l == 2) return c * 3072.0 * std::sqrt(6.0) * a0 * u / den;
    return radial_overlap_quadrature(l, k, a0);
}

double wavefunction_overlap_log10(double d, double a0) {
    if (d < 0.0) throw domain_error("wavefunction_overlap_log10: d < 0");
    // S(rho) = e^{-rho} (1 + rho + rho^2/3), rho = d/a0
    const double rho = d / a0;
    return (-rho + std::log1p(rho + rho * rho / 3.0)) / std::log(10.0);
}

}  // namespace vh

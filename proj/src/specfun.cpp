#include "vh/specfun.hpp"

#include <cmath>

namespace vh {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kLogMax = 709.0;

// Double-double arithmetic, enough to absorb the e^{|z|^2} cancellation of the
// power series for |z| < 6.5.
struct dd {
    double hi = 0.0, lo = 0.0;
};

inline dd quick_two_sum(double a, double b) {
    double s = a + b;
    return {s, b - (s - a)};
}

inline dd operator+(dd x, dd y) {
    double s = x.hi + y.hi;
    double bb = s - x.hi;
    double e = (x.hi - (s - bb)) + (y.hi - bb);
    e += x.lo + y.lo;
    return quick_two_sum(s, e);
}

inline dd operator-(dd x) { return {-x.hi, -x.lo}; }
inline dd operator-(dd x, dd y) { return x + (-y); }

inline dd operator*(dd x, dd y) {
    double p = x.hi * y.hi;
    double e = std::fma(x.hi, y.hi, -p);
    e += x.hi * y.lo + x.lo * y.hi;
    return quick_two_sum(p, e);
}

inline dd operator/(dd x, double d) {
    double q1 = x.hi / d;
    double p = q1 * d;
    double pe = std::fma(q1, d, -p);
    double s = x.hi - p;
    double bb = s - x.hi;
    double e = (x.hi - (s - bb)) + (-p - bb);
    e = e - pe + x.lo;
    double q2 = (s + e) / d;
    return quick_two_sum(q1, q2);
}

inline dd mul_exact(double a, double b) {
    double p = a * b;
    return {p, std::fma(a, b, -p)};
}

// Power series w(z) = sum_n (iz)^n / Gamma(n/2 + 1).
template <class R>
cplx w_series(cplx z);

template <>
cplx w_series<long double>(cplx z) {
    using R = long double;
    const R zr = -R(z.imag()), zi = R(z.real());
    const R z2r = zr * zr - zi * zi, z2i = 2 * zr * zi;
    const R c = 1.12837916709551257389615890312154517L;
    // even terms a_m = zeta^{2m}/m!, odd terms b_m = zeta^{2m+1}/Gamma(m+3/2)
    R ar = 1, ai = 0, br = c * zr, bi = c * zi;
    R sr = ar + br, si = ai + bi;
    const double r2 = std::norm(z);
    for (int m = 1; m < 200; ++m) {
        R nr = (ar * z2r - ai * z2i) / m, ni = (ar * z2i + ai * z2r) / m;
        ar = nr;
        ai = ni;
        R hm = m + 0.5L;
        nr = (br * z2r - bi * z2i) / hm;
        ni = (br * z2i + bi * z2r) / hm;
        br = nr;
        bi = ni;
        sr += ar + br;
        si += ai + bi;
        R mag = std::fabs(ar) + std::fabs(ai) + std::fabs(br) + std::fabs(bi);
        if (m > r2 && mag < 1e-20L * (std::fabs(sr) + std::fabs(si))) break;
    }
    return {double(sr), double(si)};
}

template <>
cplx w_series<dd>(cplx z) {
    const double zr = -z.imag(), zi = z.real();
    const dd z2r = mul_exact(zr, zr) - mul_exact(zi, zi);
    const dd z2i = mul_exact(2.0 * zr, zi);
    const dd c{1.1283791670955126, 1.533545961316588e-17};
    dd ar{1.0, 0.0}, ai{}, br = c * dd{zr, 0.0}, bi = c * dd{zi, 0.0};
    dd sr = ar + br, si = ai + bi;
    const double r2 = std::norm(z);
    for (int m = 1; m < 300; ++m) {
        dd nr = (ar * z2r - ai * z2i) / double(m), ni = (ar * z2i + ai * z2r) / double(m);
        ar = nr;
        ai = ni;
        double hm = m + 0.5;
        nr = (br * z2r - bi * z2i) / hm;
        ni = (br * z2i + bi * z2r) / hm;
        br = nr;
        bi = ni;
        sr = sr + (ar + br);
        si = si + (ai + bi);
        double mag = std::fabs(ar.hi) + std::fabs(ai.hi) + std::fabs(br.hi) + std::fabs(bi.hi);
        if (m > r2 && mag < 1e-32 * (std::fabs(sr.hi) + std::fabs(si.hi))) break;
    }
    return {sr.hi + sr.lo, si.hi + si.lo};
}

// Laplace continued fraction, Im z >= 0, |z| large.
cplx w_cf(cplx z) {
    double r = std::abs(z);
    int n = r < 7 ? 140 : r < 8 ? 100 : r < 12 ? 50 : r < 30 ? 28 : r < 100 ? 14 : 8;
    cplx t = 0.0;
    for (int j = n; j >= 1; --j) t = (0.5 * j) / (z - t);
    return cplx(0.0, 1.0) / (kSqrtPi * (z - t));
}

cplx w_upper(cplx z) {
    double r = std::abs(z);
    if (r < 3.0) return w_series<long double>(z);
    if (r < 6.0) return w_series<dd>(z);
    return w_cf(z);
}

cplx checked_exp(cplx q) {
    if (q.real() > kLogMax) throw overflow_error("exponent overflow");
    return std::exp(q);
}

}  // namespace

cplx faddeeva_w(cplx z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw domain_error("faddeeva_w: non-finite argument");
    if (z.imag() >= 0.0) return w_upper(z);
    // w(z) = 2 exp(-z^2) - w(-z)
    return 2.0 * checked_exp(-z * z) - w_upper(-z);
}

cplx erfc_complex(cplx z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw domain_error("erfc_complex: non-finite argument");
    cplx mz2 = -z * z;
    if (z.real() >= 0.0) return checked_exp(mz2) * w_upper(cplx(-z.imag(), z.real()));
    return 2.0 - checked_exp(mz2) * w_upper(cplx(z.imag(), -z.real()));
}

cplx exp_erfc(cplx p, cplx q, cplx z) {
    if (z.real() >= 0.0) {
        if (q.real() < -745.0) return 0.0;
        return checked_exp(q) * w_upper(cplx(-z.imag(), z.real()));
    }
    cplx tail = q.real() < -745.0 ? cplx(0.0) : checked_exp(q) * w_upper(cplx(z.imag(), -z.real()));
    cplx g = p.real() < -745.0 ? cplx(0.0) : 2.0 * checked_exp(p);
    return g - tail;
}

cplx time_bracket_reduced(cplx k, double t, double T) {
    if (!(T > 0.0)) throw domain_error("time kernel: T must be positive");
    const double s2T = std::sqrt(2.0) * T;
    const cplx I(0.0, 1.0);
    const double q = -t * t / (2.0 * T * T);
    cplx sum = 0.0;
    for (double tt : {t, -t}) {
        cplx z = (tt + I * T * T * k) / s2T;
        cplx p = -0.5 * T * T * k * k + I * k * tt;
        sum += exp_erfc(p, q, z);
    }
    return sum;
}

cplx scaled_time_kernel(double k, double t_ba, double T, double omega) {
    if (!(T > 0.0)) throw domain_error("scaled_time_kernel: T must be positive");
    return std::exp(-0.5 * T * T * omega * omega) * time_bracket_reduced(k, t_ba, T);
}

namespace {

double sbessel_series(int l, double x) {
    // j_l(x) = x^l/(2l+1)!! sum_n (-x^2/2)^n / (n! (2l+3)(2l+5)...(2l+2n+1))
    double pref = 1.0;
    for (int i = 1; i <= l; ++i) pref *= x / (2 * i + 1);
    double term = 1.0, sum = 1.0, h = -0.5 * x * x;
    for (int n = 1; n < 60; ++n) {
        term *= h / (n * (2 * l + 2 * n + 1));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return pref * sum;
}

}  // namespace

double spherical_bessel_j(int l, double x) {
    if (l < 0 || l > 4) throw domain_error("spherical_bessel_j: l outside 0..4");
    if (!(x >= 0.0)) throw domain_error("spherical_bessel_j: x < 0");
    if (x < l + 1.0) return sbessel_series(l, x);
    double s = std::sin(x), c = std::cos(x);
    double j0 = s / x;
    if (l == 0) return j0;
    double j1 = s / (x * x) - c / x;
    if (l == 1) return j1;
    // upward recurrence is stable for x > l
    double jm = j0, jc = j1;
    for (int n = 1; n < l; ++n) {
        double jn = (2 * n + 1) / x * jc - jm;
        jm = jc;
        jc = jn;
    }
    return jc;
}

double j0_plus_j2(double x) {
    if (x < 0.5) {
        // 3 j1(x)/x = 1 - x^2/10 + x^4/280 - ...
        double h = -0.5 * x * x, term = 1.0, sum = 1.0;
        for (int n = 1; n < 30; ++n) {
            term *= h / (n * (2 * n + 3));
            sum += term;
            if (std::abs(term) < 1e-17) break;
        }
        return sum;
    }
    return 3.0 * (std::sin(x) - x * std::cos(x)) / (x * x * x);
}

QuadratureResult<cplx> integrate_rotated_tail(const std::function<cplx(cplx)>& g, double k0, double nu, double y_max,
                                              const QuadTol& tol) {
    const cplx I(0.0, 1.0);
    if (nu == 0.0) {
        auto f = [&](double k) { return g(cplx(k, 0.0)); };
        return integrate_to_infinity(f, k0, std::max(k0, 1e-300), tol);
    }
    const double sgn = nu > 0 ? 1.0 : -1.0;
    auto f = [&](double y) {
        cplx k(k0, sgn * y);
        return sgn * I * g(k) * std::exp(I * nu * k);
    };
    if (std::isinf(y_max)) return integrate_to_infinity(f, 0.0, 1.0 / std::abs(nu), tol);
    const double step = 1.0 / std::abs(nu);
    std::vector<double> pts{0.0};
    for (double y = step; y < y_max; y *= 4) pts.push_back(y);
    pts.push_back(y_max);
    return integrate_adaptive(f, pts, tol);
}

double damped_cutoff(double width, double center) {
    // exp(-T^2 (k-c)^2/2) < exp(-690)
    return std::max(center, 0.0) + std::sqrt(2.0 * 690.0) / width;
}

std::vector<double> damped_panels(double width, double center, const std::vector<double>& lengths) {
    if (!(width > 0.0)) throw domain_error("damped kernel: width must be positive");
    double kmax = damped_cutoff(width, center);
    double half = kmax;
    for (double L : lengths) {
        if (!(L > 0.0)) throw domain_error("damped kernel: oscillation lengths must be positive");
        half = std::min(half, 0.5 * L);
    }
    // the Gaussian bulk gets its own breakpoints
    half = std::min(half, 1.0 / width);
    std::vector<double> pts;
    std::size_t n = static_cast<std::size_t>(std::ceil(kmax / half));
    n = std::min<std::size_t>(n, 20000);
    for (std::size_t i = 0; i <= n; ++i) pts.push_back(kmax * double(i) / double(n));
    return pts;
}

QuadratureResult<double> integrate_damped(const DampedKernelSpec& spec, const QuadTol& tol) {
    auto pts = damped_panels(spec.damping_width, spec.center, spec.oscillation_lengths);
    return integrate_adaptive(spec.integrand, pts, tol);
}

QuadratureResult<cplx> integrate_damped(const DampedKernelSpecC& spec, const QuadTol& tol) {
    auto pts = damped_panels(spec.damping_width, spec.center, spec.oscillation_lengths);
    return integrate_adaptive(spec.integrand, pts, tol);
}

}  // namespace vh

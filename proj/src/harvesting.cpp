#include "vh/harvesting.hpp"
#include "vh/mutation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace vh {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt2 = 1.41421356237309504880;
const cplx kI(0.0, 1.0);

int weight_power(ModelKind m) {
    switch (m) {
        case ModelKind::em_dipole: return 3;
        case ModelKind::udw_scalar: return 5;
        case ModelKind::udw_derivative: return 7;
    }
    return 3;
}

bool is_em(ModelKind m) { return m == ModelKind::em_dipole; }

// Spatial kernel continued to complex argument.
cplx spatial_c(ModelKind m, cplx x) {
    if (std::abs(x) < 0.5) {
        const cplx x2 = x * x;
        cplx term = 1.0, sum = 1.0;
        for (int n = 0; n < 12; ++n) {
            if (is_em(m))
                term *= -x2 / (2.0 * (n + 1) * (2 * n + 5));
            else
                term *= -x2 / double((2 * n + 2) * (2 * n + 3));
            sum += term;
        }
        return sum;
    }
    if (is_em(m)) return 3.0 * (std::sin(x) - x * std::cos(x)) / (x * x * x);
    return std::sin(x) / x;
}

// spatial(x) = plus(x) e^{ix} + minus(x) e^{-ix}
struct SplitKernel {
    cplx plus, minus;
};

SplitKernel split_spatial(ModelKind m, cplx x) {
    if (is_em(m)) {
        const cplx x3 = x * x * x;
        return {3.0 * (-0.5 * kI - 0.5 * x) / x3, 3.0 * (0.5 * kI - 0.5 * x) / x3};
    }
    const cplx inv = 1.0 / (2.0 * kI * x);
    return {inv, -inv};
}

using CFun = std::function<cplx(cplx)>;

// Equidistant points covering [a, b] with spacing at most h.
void append_panels(std::vector<double>& pts, double a, double b, double h, std::size_t cap = 20000) {
    if (!(b > a)) return;
    std::size_t n = static_cast<std::size_t>(std::ceil((b - a) / h));
    n = std::clamp<std::size_t>(n, 1, cap);
    if (pts.empty() || pts.back() < a) pts.push_back(a);
    for (std::size_t i = 1; i <= n; ++i) pts.push_back(a + (b - a) * double(i) / double(n));
}

// int_{k0}^inf g(k) e^{i nu k} dk. The weights carry poles at +-1.5i/alpha, so
// the contour is turned only where it stays clear of them. `spread` bounds the
// exponential growth of g off the real axis.
// `rot_start(Y)` is the smallest abscissa where a segment of height Y may start.
QuadratureResult<cplx> tail_integral(const CFun& g, double nu, double k0, double alpha, const QuadTol& tol,
                                     double spread = 0.0, const std::function<double(double)>& rot_start = {}) {
    const double rate = std::abs(nu) - spread;
    if (rate < 4.5 * alpha) {
        auto f = [&](double k) { return g(cplx(k, 0.0)) * std::exp(kI * nu * k); };
        return integrate_to_infinity(f, k0, std::max(k0, 1.0 / alpha), tol);
    }
    const double y = 45.0 / rate;
    const double ks = rot_start ? std::max(k0, rot_start(y)) : k0;
    if (rate >= 53.0 * alpha && ks == k0) return integrate_rotated_tail(g, k0, nu, y, tol);
    const double kr = rate >= 53.0 * alpha ? ks : std::max(ks, 20.0 / alpha);
    QuadratureResult<cplx> r;
    if (kr > k0) {
        std::vector<double> pts;
        append_panels(pts, k0, kr, kPi / std::abs(nu));
        auto f = [&](double k) { return g(cplx(k, 0.0)) * std::exp(kI * nu * k); };
        r = integrate_adaptive(f, pts, tol);
    }
    auto t = integrate_rotated_tail(g, kr, nu, y, tol);
    r.value += t.value;
    r.abs_error += t.abs_error;
    r.evaluations += t.evaluations;
    return r;
}

QuadTol with_atol(const QuadTol& tol, double atol) {
    QuadTol t = tol;
    t.atol = atol;
    return t;
}

struct Reduced {
    cplx value = 0.0;
    double err = 0.0;
    double log_factor = 0.0;  // physical = value * exp(-log_factor)
    bool converged = true;
};

// Fourier transform of the cropped Gaussian window exp(-t^2) on |t| <= c,
// times exp(w^2/4), at omega = w + k.
cplx cropped_window_reduced(double w, double c, cplx k) {
    const cplx om = w + k;
    const cplx gauss = std::sqrt(kPi) * std::exp(-(2.0 * w * k + k * k) / 4.0);
    const cplx pre = 0.5 * std::sqrt(kPi) * std::exp(-c * c + w * w / 4.0);
    const cplx d = pre * (std::exp(kI * om * c) * faddeeva_w(om / 2.0 + kI * c) +
                          std::exp(-kI * om * c) * faddeeva_w(-om / 2.0 + kI * c));
    return gauss - d;
}

double crop_c(const PairGeometry& g) { return g.switching.crop_sigmas / kSqrt2; }

// Local term divided by exp(-w^2/2), in units of the coupling squared.
Reduced local_reduced(const PairGeometry& g, double w, double atol, const QuadTol& tol) {
    const double pref = model_prefactor(g.model, g.alpha);
    Reduced out;
    out.log_factor = 0.5 * w * w;
    QuadTol qt = with_atol(tol, atol);
    if (g.switching.variant == SwitchingVariant::gaussian) {
        DampedKernelSpec spec;
        spec.damping_width = 1.0;
        spec.center = -w;
        spec.integrand = [&](double k) {
            return pref / kPi * model_weight(g.model, g.alpha, k).real() * std::exp(-w * k - 0.5 * k * k);
        };
        auto r = integrate_damped(spec, qt);
        out.value = r.value;
        out.err = r.abs_error;
        return out;
    }
    const double c = crop_c(g);
    const double k0 = std::max(1.0, 2.0 * std::sqrt(c * c + 45.0) - w);
    auto f = [&](double k) {
        return pref / (kPi * kPi) * model_weight(g.model, g.alpha, k).real() *
               std::norm(cropped_window_reduced(w, c, k));
    };
    std::vector<double> pts;
    append_panels(pts, 0.0, k0, std::min(1.0, kPi / (2.0 * c)));
    auto main = integrate_adaptive(f, pts, qt);
    const double amp = kPi / 4.0 * std::exp(-2.0 * c * c + 0.5 * w * w);
    auto w1 = [=](cplx k) { return faddeeva_w((w + k) / 2.0 + kI * c); };
    auto w2 = [=](cplx k) { return faddeeva_w(-(w + k) / 2.0 + kI * c); };
    const double scale = pref / (kPi * kPi) * amp;
    CFun gp = [&](cplx k) {
        return scale * model_weight(g.model, g.alpha, k) * std::exp(2.0 * kI * w * c) * w1(k) * w1(k);
    };
    CFun gm = [&](cplx k) {
        return scale * model_weight(g.model, g.alpha, k) * std::exp(-2.0 * kI * w * c) * w2(k) * w2(k);
    };
    CFun g0 = [&](cplx k) { return 2.0 * scale * model_weight(g.model, g.alpha, k) * w1(k) * w2(k); };
    QuadTol tt = with_atol(tol, 0.1 * tol.rtol * std::abs(main.value) + atol);
    // past Im z = c the window pieces pick up a Gaussian 2e^{-z^2}
    auto start = [c, w](double y) { return std::sqrt(8.0 * c * c + 180.0 + y * y) - w; };
    auto tp = tail_integral(gp, 2.0 * c, k0, g.alpha, tt, 0.0, start);
    auto tm = tail_integral(gm, -2.0 * c, k0, g.alpha, tt, 0.0, start);
    auto t0 = tail_integral(g0, 0.0, k0, g.alpha, tt);
    out.value = main.value + (tp.value + tm.value + t0.value).real();
    out.err = main.abs_error + tp.abs_error + tm.abs_error + t0.abs_error;
    return out;
}

double mean_gap(const PairGeometry& g) { return 0.5 * (g.wa + g.wb); }

double angular_factor(const PairGeometry& g) { return is_em(g.model) ? g.cos_theta : 1.0; }

bool split_kernel(const PairGeometry& g) { return g.dist >= 4.5 * g.alpha; }

// Cross-noise term divided by exp(-wbar^2/2).
Reduced cross_reduced(const PairGeometry& g, double atol, const QuadTol& tol) {
    const double pref = model_prefactor(g.model, g.alpha);
    const double ang = angular_factor(g);
    const double wbar = mean_gap(g), delta = g.wa - g.wb;
    Reduced out;
    out.log_factor = 0.5 * wbar * wbar;
    if (ang == 0.0) return out;
    QuadTol qt = with_atol(tol, atol);
    const double D = g.dist;
    const double tab = g.ta - g.tb;
    if (g.switching.variant == SwitchingVariant::gaussian) {
        DampedKernelSpecC spec;
        spec.damping_width = 1.0;
        spec.center = -wbar;
        if (D + std::abs(tab) > 0.0) spec.oscillation_lengths = {2.0 * kPi / (D + std::abs(tab))};
        spec.integrand = [&](double k) {
            const double ph = (g.wa + k) * g.ta - (g.wb + k) * g.tb;
            return pref / kPi * ang * model_weight(g.model, g.alpha, k).real() * model_spatial(g.model, k * D) *
                   std::exp(-wbar * k - 0.5 * k * k - delta * delta / 8.0) * std::exp(kI * ph);
        };
        auto r = integrate_damped(spec, qt);
        out.value = r.value;
        out.err = r.abs_error;
        return out;
    }
    const double c = crop_c(g);
    const double k0 = std::max(1.0, 2.0 * std::sqrt(c * c + 45.0) - std::min(g.wa, g.wb));
    const double shift = std::exp(-delta * delta / 8.0);
    auto f = [&](double k) {
        const double ph = (g.wa + k) * g.ta - (g.wb + k) * g.tb;
        return pref / (kPi * kPi) * ang * shift * model_weight(g.model, g.alpha, k).real() *
               model_spatial(g.model, k * D) * cropped_window_reduced(g.wa, c, k) *
               cropped_window_reduced(g.wb, c, k) * std::exp(kI * ph);
    };
    std::vector<double> pts;
    append_panels(pts, 0.0, k0, std::min(1.0, kPi / (2.0 * c + D + std::abs(tab))));
    auto main = integrate_adaptive(f, pts, qt);
    out.value = main.value;
    out.err = main.abs_error;
    // Window pieces: (sqrt(pi)/2) e^{-c^2 + w^2/4} e^{s i omega c} w(s omega/2 + ic), s = +-1.
    auto piece = [c](double w, int s, cplx k) {
        const cplx om = w + k;
        return 0.5 * std::sqrt(kPi) * std::exp(-c * c + w * w / 4.0) * std::exp(double(s) * kI * w * c) *
               faddeeva_w(double(s) * om / 2.0 + kI * c);
    };
    QuadTol tt = with_atol(tol, 0.1 * tol.rtol * std::abs(main.value) + atol);
    const bool split = split_kernel(g);
    const double wmin = std::min(g.wa, g.wb);
    auto start = [c, wmin](double y) { return std::sqrt(8.0 * c * c + 180.0 + y * y) - wmin; };
    for (int sa : {1, -1}) {
        for (int sb : {1, -1}) {
            const double base = (sa + sb) * c + tab;
            auto common = [&, sa, sb](cplx k) {
                const cplx ph = std::exp(kI * (g.wa * g.ta - g.wb * g.tb));
                return pref / (kPi * kPi) * ang * shift * model_weight(g.model, g.alpha, k) * piece(g.wa, sa, k) *
                       piece(g.wb, sb, k) * ph;
            };
            if (!split) {
                CFun h = [&](cplx k) { return common(k) * spatial_c(g.model, k * D); };
                auto r = tail_integral(h, base, k0, g.alpha, tt, D, start);
                out.value += r.value;
                out.err += r.abs_error;
                continue;
            }
            CFun hp = [&](cplx k) { return common(k) * split_spatial(g.model, k * D).plus; };
            CFun hm = [&](cplx k) { return common(k) * split_spatial(g.model, k * D).minus; };
            auto rp = tail_integral(hp, base + D, k0, g.alpha, tt, 0.0, start);
            auto rm = tail_integral(hm, base - D, k0, g.alpha, tt, 0.0, start);
            out.value += rp.value + rm.value;
            out.err += rp.abs_error + rm.abs_error;
        }
    }
    return out;
}

// Nonlocal term divided by exp(-wbar^2/2), Gaussian switching, momentum space.
Reduced nonlocal_reduced(const PairGeometry& g, double atol, const QuadTol& tol) {
    const double pref = model_prefactor(g.model, g.alpha);
    const double ang = angular_factor(g);
    const double wbar = mean_gap(g), delta = g.wa - g.wb;
    Reduced out;
    out.log_factor = 0.5 * wbar * wbar;
    if (ang == 0.0) return out;
    const double D = g.dist;
    const double t = g.tb - g.ta;
    const double c0 = -pref / (kPi * kPi) * ang;
    const bool equal = g.wa == g.wb;
    auto G = [&](cplx k) -> cplx {
        if (equal) return 0.5 * kPi * std::exp(kI * g.wa * (g.ta + g.tb)) * time_bracket_reduced(k, t, 1.0);
        return time_integral_reduced(g.wa, g.wb, k, g.ta, g.tb);
    };
    const bool split = split_kernel(g);
    const double y_eff = (split && D >= 53.0 * g.alpha) ? 45.0 / D : 0.0;
    const double k0 = 0.5 * std::abs(delta) + std::sqrt(80.0 + (y_eff + std::abs(t)) * (y_eff + std::abs(t)));
    auto f = [&](double k) {
        return c0 * model_weight(g.model, g.alpha, k).real() * model_spatial(g.model, k * D) * G(k);
    };
    std::vector<double> pts;
    const double fast = std::max({D, std::abs(t), 1e-300});
    const double kg = std::min(k0, 0.5 * std::abs(delta) + std::abs(t) + 20.0);
    append_panels(pts, 0.0, kg, std::min(1.0, kPi / fast));
    append_panels(pts, kg, k0, std::min(kPi / std::max(D, 1e-300), k0));
    QuadTol qt = with_atol(tol, atol);
    auto main = integrate_adaptive(f, pts, qt);
    out.value = main.value;
    out.err = main.abs_error;
    QuadTol tt = with_atol(tol, 0.1 * tol.rtol * std::abs(main.value) + atol);
    if (!split) {
        CFun h = [&](cplx k) { return c0 * model_weight(g.model, g.alpha, k) * spatial_c(g.model, k * D) * G(k); };
        auto r = tail_integral(h, 0.0, k0, g.alpha, tt);
        out.value += r.value;
        out.err += r.abs_error;
        return out;
    }
    CFun hp = [&](cplx k) { return c0 * model_weight(g.model, g.alpha, k) * split_spatial(g.model, k * D).plus * G(k); };
    CFun hm = [&](cplx k) { return c0 * model_weight(g.model, g.alpha, k) * split_spatial(g.model, k * D).minus * G(k); };
    auto rp = tail_integral(hp, D, k0, g.alpha, tt);
    auto rm = tail_integral(hm, -D, k0, g.alpha, tt);
    out.value += rp.value + rm.value;
    out.err += rp.abs_error + rm.abs_error;
    return out;
}

// W(s) = int_0^inf weight(k) spatial(k D) e^{-iks} dk
QuadratureResult<cplx> spectral_kernel(const PairGeometry& g, double s, const QuadTol& tol) {
    const double D = g.dist;
    const double k1 = D > 0.0 ? std::max(1.0, 2.0 / D) : 1.0;
    auto f = [&](double k) {
        return model_weight(g.model, g.alpha, k).real() * model_spatial(g.model, k * D) * std::exp(-kI * k * s);
    };
    std::vector<double> pts;
    append_panels(pts, 0.0, k1, std::min(1.0, kPi / std::max(D + std::abs(s), 1e-300)));
    auto r = integrate_adaptive(f, pts, tol);
    QuadTol tt = with_atol(tol, 0.1 * tol.rtol * std::abs(r.value) + tol.atol);
    auto add = [&](const QuadratureResult<cplx>& x) {
        r.value += x.value;
        r.abs_error += x.abs_error;
        r.evaluations += x.evaluations;
    };
    if (!split_kernel(g)) {
        CFun h = [&](cplx k) { return model_weight(g.model, g.alpha, k) * spatial_c(g.model, k * D); };
        add(tail_integral(h, -s, k1, g.alpha, tt, D));
        return r;
    }
    CFun hp = [&](cplx k) { return model_weight(g.model, g.alpha, k) * split_spatial(g.model, k * D).plus; };
    CFun hm = [&](cplx k) { return model_weight(g.model, g.alpha, k) * split_spatial(g.model, k * D).minus; };
    add(tail_integral(hp, D - s, k1, g.alpha, tt));
    add(tail_integral(hm, -D - s, k1, g.alpha, tt));
    return r;
}

// With `difference` set, only the change from the Gaussian value is integrated:
// the cropped u-integral minus its Gaussian counterpart, supported on |r| < 2c.
Reduced nonlocal_time_domain_reduced(const PairGeometry& g, double atol, const QuadTol& tol,
                                     bool difference = false) {
    const double pref = model_prefactor(g.model, g.alpha);
    const double ang = angular_factor(g);
    const double wbar = mean_gap(g), delta = g.wa - g.wb;
    Reduced out;
    out.log_factor = 0.5 * wbar * wbar;
    if (ang == 0.0) return out;
    const bool cropped = g.switching.variant == SwitchingVariant::cropped;
    const double c = crop_c(g);
    const double reach = cropped ? 2.0 * c : 12.0;
    const double u0 = g.ta + g.tb;
    const cplx phase0 = std::exp(kI * wbar * u0);
    // orderings: A at the later time, then B at the later time
    const double s0[2] = {g.ta - g.tb, g.tb - g.ta};
    const double dl[2] = {delta, -delta};
    const double full = difference ? 0.0 : std::sqrt(2.0 * kPi);
    auto u_integral = [&](double r) -> cplx {
        if (!cropped) return full;
        const double h = 2.0 * c - std::abs(r);
        if (h <= 0.0) return full - std::sqrt(2.0 * kPi);
        const cplx tail = std::sqrt(kPi / 2.0) * std::exp(0.5 * (wbar * wbar - h * h) + kI * wbar * h) *
                          faddeeva_w((wbar + kI * h) / kSqrt2);
        return full - 2.0 * tail.real();
    };
    auto gsum = [&](double s) {
        cplx v = 0.0;
        for (int o = 0; o < 2; ++o) {
            const double r = s - s0[o];
            if (std::abs(r) >= reach) continue;
            v += 0.5 * phase0 * std::exp(kI * dl[o] * s / 2.0) * std::exp(-0.5 * r * r) * u_integral(r);
        }
        return v;
    };
    // absolute floor for W from the scale of int weight(k) dk
    auto wabs = integrate_to_infinity([&](double k) { return model_weight(g.model, g.alpha, k).real(); }, 0.0,
                                      1.0 / g.alpha);
    QuadTol wt = tol;
    wt.rtol = std::min(tol.rtol * 1e-4, 1e-13);
    wt.atol = 1e-15 * wabs.value;
    auto f = [&](double s) {
        cplx gv = gsum(s);
        if (gv == 0.0) return cplx(0.0);
        return gv * spectral_kernel(g, s, wt).value;
    };
    std::vector<double> pts;
    const double lo = std::max(0.0, std::min(s0[0], s0[1]) - reach);
    const double hi = std::max(0.0, std::max(s0[0], s0[1]) + reach);
    if (!(hi > lo)) return out;
    std::vector<double> marks{lo, hi};
    for (double x : {s0[0], s0[1], g.dist, s0[0] - reach, s0[0] + reach, s0[1] - reach, s0[1] + reach}) {
        if (x > lo && x < hi) marks.push_back(x);
        for (double e : {-1.0, 1.0})
            if (x + e > lo && x + e < hi) marks.push_back(x + e);
    }
    std::sort(marks.begin(), marks.end());
    for (std::size_t i = 0; i + 1 < marks.size(); ++i) append_panels(pts, marks[i], marks[i + 1], 1.0);
    QuadTol st = with_atol(tol, atol);
    QuadratureResult<cplx> r;
    if (difference) st.max_evals = std::min<std::size_t>(st.max_evals, 100000);
    try {
        r = integrate_adaptive(f, pts, st);
    } catch (const convergence_error& e) {
        // The cropping correction oscillates at frequency wbar with amplitude
        // up to exp((wbar^2 - h^2)/2); its cancellation can exceed the requested
        // precision. Keep the estimate when it is still meaningful.
        if (!difference || !(e.error < std::abs(e.estimate))) throw;
        r.value = e.estimate;
        r.abs_error = e.error;
        out.converged = false;
    }
    const double c0 = -pref / (kPi * kPi) * ang;
    out.value = c0 * r.value;
    out.err = std::abs(c0) * r.abs_error;
    return out;
}

// Gaussian value in momentum space plus the cropping correction in the time domain.
Reduced nonlocal_cropped_reduced(const PairGeometry& g, double atol, const QuadTol& tol) {
    Reduced base = nonlocal_reduced(g, atol, tol);
    Reduced corr = nonlocal_time_domain_reduced(g, atol, tol, true);
    base.value += corr.value;
    base.err += corr.err;
    base.converged = base.converged && corr.converged;
    return base;
}

// Absolute error allowed in the cross terms. N2 = |M| - L is only known to
// rtol L, so the floor is a tenth of that on top of the user's atol.
double noise_atol(const QuadTol& tol, double l_scaled, double log_factor, double log_scale) {
    return std::max((tol.atol + 0.1 * tol.rtol) * l_scaled * std::exp(log_factor - log_scale), 1e-300);
}

}  // namespace

std::string to_string(ModelKind m) {
    switch (m) {
        case ModelKind::em_dipole: return "em";
        case ModelKind::udw_scalar: return "udw";
        case ModelKind::udw_derivative: return "derivative";
    }
    return "em";
}

ModelKind model_from_string(const std::string& s) {
    if (s == "em" || s == "em_dipole") return ModelKind::em_dipole;
    if (s == "udw" || s == "scalar" || s == "udw_scalar") return ModelKind::udw_scalar;
    if (s == "derivative" || s == "udw_derivative") return ModelKind::udw_derivative;
    throw domain_error("unknown model '" + s + "'");
}

cplx model_weight(ModelKind m, double alpha, cplx k) {
    const cplx den = 4.0 * alpha * alpha * k * k + 9.0;
    const cplx d2 = den * den;
    cplx num = 1.0;
    for (int i = 0; i < weight_power(m); ++i) num *= k;
    return mutation_factor(ClosedForm::model_weight) * num / (d2 * d2 * d2);
}

double model_spatial(ModelKind m, double x) {
    return is_em(m) ? j0_plus_j2(x) : spherical_bessel_j(0, x);
}

double model_prefactor(ModelKind m, double alpha) {
    return is_em(m) ? 49152.0 * alpha * alpha : 32768.0 * alpha * alpha * alpha * alpha;
}

PairGeometry geometry_of(const DetectorPair& pair) {
    validate(pair.atom_a);
    validate(pair.atom_b);
    validate(pair.switching);
    const AtomSpec& a = pair.atom_a;
    const AtomSpec& b = pair.atom_b;
    if (a.switching_width != b.switching_width) throw domain_error("pair: switching widths must match");
    if (a.a0 != b.a0) throw domain_error("pair: Bohr radii must match");
    const double T = a.switching_width;
    PairGeometry g;
    g.model = pair.model;
    g.alpha = a.a0 / T;
    g.wa = a.omega * T;
    g.wb = b.omega * T;
    Vec3 sep{b.position[0] - a.position[0], b.position[1] - a.position[1], b.position[2] - a.position[2]};
    const double d = std::sqrt(sep[0] * sep[0] + sep[1] * sep[1] + sep[2] * sep[2]);
    g.dist = d / T;
    g.ta = a.switching_center / T;
    g.tb = b.switching_center / T;
    g.coupling2 = pair.coupling * pair.coupling;
    g.switching = pair.switching;
    if (is_em(pair.model)) {
        Mat3 ra = rotation_matrix(a.orientation), rb = rotation_matrix(b.orientation);
        Vec3 na{ra[0][2], ra[1][2], ra[2][2]}, nb{rb[0][2], rb[1][2], rb[2][2]};
        g.cos_theta = na[0] * nb[0] + na[1] * nb[1] + na[2] * nb[2];
        if (d > 0.0) {
            Vec3 cr{sep[1] * na[2] - sep[2] * na[1], sep[2] * na[0] - sep[0] * na[2], sep[0] * na[1] - sep[1] * na[0]};
            const double off = std::sqrt(cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]);
            if (off > 1e-9 * d) throw domain_error("pair: EM separation must lie along atom A's symmetry axis");
        }
    }
    return g;
}

cplx time_integral_reduced(double wa, double wb, cplx k, double ta, double tb) {
    const double t = tb - ta, delta = wa - wb;
    const cplx q(-0.5 * t * t, 0.5 * (wa + wb) * (ta + tb));
    const cplx a = 2.0 * k - delta;
    const cplx p1 = -a * a / 8.0 + kI * k * t + kI * (tb * (wa + wb) - t * wa);
    const cplx p2 = p1 - k * (delta + 2.0 * kI * t);
    const cplx z1 = (2.0 * t + kI * (2.0 * k - delta)) / (2.0 * kSqrt2);
    const cplx z2 = (-2.0 * t + kI * (2.0 * k + delta)) / (2.0 * kSqrt2);
    return 0.5 * kPi * mutation_factor(ClosedForm::time_integral) * (exp_erfc(p1, q, z1) + exp_erfc(p2, q, z2));
}

cplx time_integral_closed(double omega_a, double omega_b, double k, double t_a, double t_b, double T) {
    if (!(T > 0.0)) throw domain_error("time_integral_closed: T must be positive");
    const double s = T * (omega_a + omega_b);
    return T * T * std::exp(-s * s / 8.0) *
           time_integral_reduced(omega_a * T, omega_b * T, k * T, t_a / T, t_b / T);
}

double local_term(const DetectorPair& pair, char which, double* err, const QuadTol& tol) {
    if (which != 'A' && which != 'B' && which != 'a' && which != 'b') throw domain_error("local_term: which must be A or B");
    PairGeometry g = geometry_of(pair);
    const double w = (which == 'A' || which == 'a') ? g.wa : g.wb;
    Reduced r = local_reduced(g, w, 1e-300, tol);
    const double f = g.coupling2 * std::exp(-r.log_factor);
    if (err) *err = r.err * f;
    return r.value.real() * f;
}

namespace {

enum class Which { cross, nonlocal };

// Single off-diagonal term with its absolute tolerance tied to the local noise.
cplx single_term(const DetectorPair& pair, Which which, double* err, const QuadTol& tol) {
    PairGeometry g = geometry_of(pair);
    Reduced la = local_reduced(g, g.wa, 1e-300, tol);
    const double wbar = mean_gap(g);
    const double atol = std::max(tol.atol * la.value.real() * std::exp(0.5 * wbar * wbar - la.log_factor), 1e-300);
    Reduced r;
    if (which == Which::cross)
        r = cross_reduced(g, atol, tol);
    else if (g.switching.variant == SwitchingVariant::gaussian)
        r = nonlocal_reduced(g, atol, tol);
    else
        r = nonlocal_cropped_reduced(g, atol, tol);
    const double f = g.coupling2 * std::exp(-r.log_factor);
    if (err) *err = r.err * f;
    return r.value * f;
}

}  // namespace

cplx cross_noise_term(const DetectorPair& pair, double* err, const QuadTol& tol) {
    return single_term(pair, Which::cross, err, tol);
}

cplx nonlocal_term(const DetectorPair& pair, double* err, const QuadTol& tol) {
    return single_term(pair, Which::nonlocal, err, tol);
}

cplx nonlocal_term_time_domain(const DetectorPair& pair, double* err, const QuadTol& tol) {
    PairGeometry g = geometry_of(pair);
    Reduced la = local_reduced(g, g.wa, 1e-300, tol);
    const double wbar = mean_gap(g);
    const double atol = std::max(tol.atol * la.value.real() * std::exp(0.5 * wbar * wbar - la.log_factor), 1e-300);
    Reduced m = nonlocal_time_domain_reduced(g, atol, tol);
    const double f = g.coupling2 * std::exp(-m.log_factor);
    if (err) *err = m.err * f;
    return m.value * f;
}

HarvestTerms make_terms(double s_L_aa, double s_L_bb, cplx s_L_ab, cplx s_M, double log_scale) {
    HarvestTerms h;
    h.log_scale = log_scale;
    h.s_L_aa = s_L_aa;
    h.s_L_bb = s_L_bb;
    h.s_L_ab = s_L_ab;
    h.s_M = s_M;
    const double f = std::exp(-log_scale);
    h.L_aa = s_L_aa * f;
    h.L_bb = s_L_bb * f;
    h.L_ab = s_L_ab * f;
    h.M = s_M * f;
    return h;
}

HarvestTerms harvest(const DetectorPair& pair, const QuadTol& tol) {
    PairGeometry g = geometry_of(pair);
    const double log_scale = 0.5 * std::min(g.wa, g.wb) * std::min(g.wa, g.wb);
    Reduced la = local_reduced(g, g.wa, 1e-300, tol);
    Reduced lb = g.wa == g.wb ? la : local_reduced(g, g.wb, 1e-300, tol);
    auto to_scaled = [&](double v, double lf) { return v * std::exp(log_scale - lf); };
    const double l_scaled = 0.5 * (to_scaled(la.value.real(), la.log_factor) + to_scaled(lb.value.real(), lb.log_factor));
    const double wbar = mean_gap(g);
    const double atol = noise_atol(tol, l_scaled, 0.5 * wbar * wbar, log_scale);
    Reduced lab = cross_reduced(g, atol, tol);
    Reduced m = g.switching.variant == SwitchingVariant::gaussian ? nonlocal_reduced(g, atol, tol)
                                                                  : nonlocal_cropped_reduced(g, atol, tol);
    const double c2 = g.coupling2;
    HarvestTerms h = make_terms(c2 * to_scaled(la.value.real(), la.log_factor),
                                c2 * to_scaled(lb.value.real(), lb.log_factor),
                                c2 * lab.value * std::exp(log_scale - lab.log_factor),
                                c2 * m.value * std::exp(log_scale - m.log_factor), log_scale);
    h.converged = m.converged;
    h.s_err_L_aa = c2 * to_scaled(la.err, la.log_factor);
    h.s_err_L_bb = c2 * to_scaled(lb.err, lb.log_factor);
    h.s_err_L_ab = c2 * to_scaled(lab.err, lab.log_factor);
    h.s_err_M = c2 * to_scaled(m.err, m.log_factor);
    const double f = std::exp(-log_scale);
    h.err_L_aa = h.s_err_L_aa * f;
    h.err_L_bb = h.s_err_L_bb * f;
    h.err_L_ab = h.s_err_L_ab * f;
    h.err_M = h.s_err_M * f;
    return h;
}

Decomposition em_decomposition_local(double k, double a0) {
    const double r0 = radial_overlap(0, k, a0), r2 = radial_overlap(2, k, a0);
    Decomposition d;
    d.identity = (r0 * r0 + 2.0 * r2 * r2) / 12.0;
    d.dyadic = (r0 - 2.0 * r2) * (r0 - 2.0 * r2) / 36.0;
    d.total = d.identity - d.dyadic;
    return d;
}

DecompositionM em_decomposition_nonlocal(double k, double a0) {
    const double r0 = radial_overlap(0, k, a0), r2 = radial_overlap(2, k, a0);
    DecompositionM d;
    d.identity_j0 = (r0 * r0 + 2.0 * r2 * r2) / 12.0;
    d.identity_j2 = 2.0 * (2.0 * r0 * r2 - r2 * r2) / 12.0;
    const double dy = (r0 - 2.0 * r2) * (r0 - 2.0 * r2) / 36.0;
    d.dyadic_j0 = dy;
    d.dyadic_j2 = -2.0 * dy;
    d.total_j0 = d.identity_j0 - d.dyadic_j0;
    d.total_j2 = d.identity_j2 - d.dyadic_j2;
    return d;
}

double negativity2(double L_aa, double L_bb, double abs_M) {
    const double s = L_aa + L_bb, dl = L_aa - L_bb;
    return 0.5 * (std::sqrt(dl * dl + 4.0 * abs_M * abs_M) - s);
}

double negativity2_error(const HarvestTerms& t) { return t.err_M + t.err_L_aa + t.err_L_bb; }

TwoQubitState assemble_state(const HarvestTerms& t) {
    if (!std::isfinite(t.L_aa) || !std::isfinite(t.L_bb) || !std::isfinite(std::abs(t.L_ab)) ||
        !std::isfinite(std::abs(t.M)))
        throw domain_error("assemble_state: non-finite terms");
    if (t.L_aa + t.L_bb > 1.0) throw domain_error("assemble_state: L_aa + L_bb > 1, perturbation theory invalid");
    TwoQubitState s;
    s.rho[0][0] = 1.0 - t.L_aa - t.L_bb;
    s.rho[0][3] = std::conj(t.M);
    s.rho[1][1] = t.L_aa;
    s.rho[1][2] = t.L_ab;
    s.rho[2][1] = std::conj(t.L_ab);
    s.rho[2][2] = t.L_bb;
    s.rho[3][0] = t.M;
    s.negativity2 = negativity2(t.L_aa, t.L_bb, std::abs(t.M));
    s.negativity = std::max(0.0, s.negativity2);
    s.concurrence = 2.0 * std::max(0.0, std::abs(t.M) - std::sqrt(t.L_aa * t.L_bb));
    return s;
}

PositivityReport positivity_report(const HarvestTerms& t, double coupling) {
    const double c2 = coupling * coupling;
    const double laa = c2 * t.L_aa, lbb = c2 * t.L_bb, lab = c2 * std::abs(t.L_ab), m = c2 * std::abs(t.M);
    PositivityReport r;
    const double a = 1.0 - laa - lbb;
    const double root1 = std::sqrt(a * a + 4.0 * m * m);
    r.E1 = 0.5 * (a + root1);
    r.E2_fourth_order = 0.5 * (a - root1);
    const double root2 = std::sqrt((laa - lbb) * (laa - lbb) + 4.0 * lab * lab);
    r.E3 = 0.5 * (laa + lbb + root2);
    r.E4 = 0.5 * (laa + lbb - root2);
    r.cauchy_schwarz_gap = laa * lbb - lab * lab;
    // checks run on the scaled terms, which do not underflow
    const bool scaled = t.log_scale != 0.0;
    const double saa = c2 * (scaled ? t.s_L_aa : t.L_aa), sbb = c2 * (scaled ? t.s_L_bb : t.L_bb);
    const double sab = c2 * std::abs(scaled ? t.s_L_ab : t.L_ab);
    const double serr = c2 * (scaled ? t.s_err_L_aa + t.s_err_L_bb + t.s_err_L_ab : t.err_L_aa + t.err_L_bb + t.err_L_ab);
    const double stol = 10.0 * serr;
    r.tolerance = 10.0 * c2 * (t.err_L_aa + t.err_L_bb + t.err_L_ab);
    r.local_nonnegative = saa >= -stol && sbb >= -stol;
    const double sroot = std::sqrt((saa - sbb) * (saa - sbb) + 4.0 * sab * sab);
    r.e3_ok = 0.5 * (saa + sbb + sroot) >= -stol;
    r.e4_ok = 0.5 * (saa + sbb - sroot) >= -stol;
    r.cauchy_schwarz_ok = saa * sbb - sab * sab >= -stol * (saa + sbb + sab);
    return r;
}

}  // namespace vh

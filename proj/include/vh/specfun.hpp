#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace vh {

using cplx = std::complex<double>;

struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

struct overflow_error : std::overflow_error {
    using std::overflow_error::overflow_error;
};

// Quadrature gave up; carries the best estimate and its error bound.
struct convergence_error : std::runtime_error {
    cplx estimate;
    double error;
    convergence_error(const std::string& what, cplx est, double err)
        : std::runtime_error(what), estimate(est), error(err) {}
};

// w(z) = exp(-z^2) erfc(-iz)
cplx faddeeva_w(cplx z);

cplx erfc_complex(cplx z);

// exp(p) * erfc(z) where the caller supplies q = p - z^2 in closed form.
// Neither exp(p) nor exp(-z^2) is formed unless the result needs it.
cplx exp_erfc(cplx p, cplx q, cplx z);

// e^{-T^2(Omega^2+k^2)/2} [E(k,t) + E(k,-t)],
// E(k,t) = e^{ikt} erfc((t + i T^2 k)/(sqrt2 T)).
cplx scaled_time_kernel(double k, double t_ba, double T, double omega);

// Same bracket with the e^{-T^2 Omega^2/2} factor removed; valid for complex k.
cplx time_bracket_reduced(cplx k, double t_ba, double T);

double spherical_bessel_j(int l, double x);

// 3 j1(x)/x = j0(x) + j2(x)
double j0_plus_j2(double x);

struct QuadTol {
    double atol = 1e-16;
    double rtol = 1e-10;
    std::size_t max_evals = 4'000'000;
};

template <class V>
struct QuadratureResult {
    V value{};
    double abs_error = 0.0;
    std::size_t evaluations = 0;
};

namespace detail {

template <class V>
struct Segment {
    double a, b;
    V value;
    double err;
    double floor;  // rounding part of err
    bool operator<(const Segment& o) const { return err < o.err; }
};

template <class V, class F>
Segment<V> gk21(F& f, double a, double b) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
    using G = boost::math::quadrature::gauss<double, 10>;
    static const auto& xk = GK::abscissa();
    static const auto& wk = GK::weights();
    static const auto& wg = G::weights();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    V fc = f(c);
    V kron = fc * wk[0];
    V gauss{};
    double resabs = std::abs(fc) * wk[0];
    V fv[21];
    fv[0] = fc;
    for (std::size_t j = 1; j < xk.size(); ++j) {
        V f1 = f(c - h * xk[j]);
        V f2 = f(c + h * xk[j]);
        fv[2 * j - 1] = f1;
        fv[2 * j] = f2;
        kron += wk[j] * (f1 + f2);
        resabs += wk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) gauss += wg[(j - 1) / 2] * (f1 + f2);
    }
    // the 10-point Gauss rule has no centre node
    V mean = kron * 0.5;
    double resasc = wk[0] * std::abs(fc - mean);
    for (std::size_t j = 1; j < xk.size(); ++j)
        resasc += wk[j] * (std::abs(fv[2 * j - 1] - mean) + std::abs(fv[2 * j] - mean));
    double err = std::abs((kron - gauss) * h);
    resasc *= std::abs(h);
    resabs *= std::abs(h);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    double floor = 0.0;
    if (resabs > std::numeric_limits<double>::min() / (50 * eps)) {
        floor = 50 * eps * resabs;
        err = std::max(err, floor);
    }
    return {a, b, kron * h, err, floor};
}

inline std::complex<double> to_cplx(double v) { return {v, 0.0}; }
inline std::complex<double> to_cplx(std::complex<double> v) { return v; }

}  // namespace detail

// Globally adaptive Gauss-Kronrod (21 point) over consecutive breakpoints.
template <class F>
auto integrate_adaptive(F&& f, const std::vector<double>& pts, const QuadTol& tol = {})
    -> QuadratureResult<decltype(f(0.0))> {
    using V = decltype(f(0.0));
    if (pts.size() < 2) throw domain_error("integrate_adaptive: need at least two points");
    std::priority_queue<detail::Segment<V>> heap;
    QuadratureResult<V> r;
    V total{};
    double err = 0.0, floor = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i + 1] == pts[i]) continue;
        auto s = detail::gk21<V>(f, pts[i], pts[i + 1]);
        r.evaluations += 21;
        total += s.value;
        err += s.err;
        floor += s.floor;
        heap.push(s);
    }
    // Stops early, without throwing, once the error is all rounding: splitting
    // further cannot lower it. abs_error then exceeds the request.
    while (!heap.empty() && err > std::max(tol.atol, tol.rtol * std::abs(total)) && err > 1.001 * floor) {
        if (r.evaluations >= tol.max_evals) {
            throw convergence_error("quadrature did not converge", detail::to_cplx(total), err);
        }
        auto s = heap.top();
        heap.pop();
        double m = 0.5 * (s.a + s.b);
        if (!(m > s.a && m < s.b)) {
            throw convergence_error("quadrature interval underflow", detail::to_cplx(total), err);
        }
        auto l = detail::gk21<V>(f, s.a, m);
        auto u = detail::gk21<V>(f, m, s.b);
        r.evaluations += 42;
        total += l.value + u.value - s.value;
        err += l.err + u.err - s.err;
        floor += l.floor + u.floor - s.floor;
        heap.push(l);
        heap.push(u);
    }
    // re-sum to shed the drift of the running update
    V sum{};
    double esum = 0.0;
    std::vector<detail::Segment<V>> segs;
    segs.reserve(heap.size());
    while (!heap.empty()) {
        segs.push_back(heap.top());
        heap.pop();
    }
    std::sort(segs.begin(), segs.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
    for (auto& s : segs) {
        sum += s.value;
        esum += s.err;
    }
    r.value = sum;
    r.abs_error = esum;
    return r;
}

// int_a^inf f(x) dx with x = a + scale * s/(1-s).
template <class F>
auto integrate_to_infinity(F&& f, double a, double scale, const QuadTol& tol = {})
    -> QuadratureResult<decltype(f(0.0))> {
    auto g = [&](double s) {
        double one = 1.0 - s;
        return f(a + scale * s / one) * (scale / (one * one));
    };
    return integrate_adaptive(g, {0.0, 0.5, 0.9, 0.99, 0.999, 1.0}, tol);
}

// int_{K0}^inf g(k) e^{i nu k} dk, with the contour turned onto K0 + i sign(nu) y,
// y in [0, Y]. g must be analytic in the strip swept by the segment and
// decay at infinity; Y = inf maps the segment to [0, inf).
QuadratureResult<cplx> integrate_rotated_tail(const std::function<cplx(cplx)>& g, double k0, double nu,
                                              double y_max, const QuadTol& tol = {});

struct DampedKernelSpec {
    double damping_width = 1.0;  // T, with damping exp(-T^2 (k - center)^2 / 2)
    double center = 0.0;
    std::vector<double> oscillation_lengths;  // periods in k
    std::function<double(double)> integrand;
};

struct DampedKernelSpecC {
    double damping_width = 1.0;
    double center = 0.0;
    std::vector<double> oscillation_lengths;
    std::function<cplx(double)> integrand;
};

double damped_cutoff(double width, double center);
std::vector<double> damped_panels(double width, double center, const std::vector<double>& lengths);

QuadratureResult<double> integrate_damped(const DampedKernelSpec& spec, const QuadTol& tol = {});
QuadratureResult<cplx> integrate_damped(const DampedKernelSpecC& spec, const QuadTol& tol = {});

}  // namespace vh

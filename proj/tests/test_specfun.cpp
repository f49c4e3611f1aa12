#include <doctest.h>

#include <cmath>
#include <random>

#include "vh/specfun.hpp"

using vh::cplx;

namespace {
double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }
}  // namespace

TEST_CASE("faddeeva_w known values") {
    CHECK(rel(vh::faddeeva_w({0, 0}), {1, 0}) < 1e-15);
    CHECK(rel(vh::faddeeva_w({0, 1}), {0.42758357615580700, 0}) < 1e-12);
    double x = 1e6;
    cplx asym = cplx(0, 1) / (std::sqrt(M_PI) * x);
    CHECK(rel(vh::faddeeva_w({x, 0}), asym) < 1e-9);
}

TEST_CASE("erfc_complex known values") {
    CHECK(rel(vh::erfc_complex({0, 0}), {1, 0}) < 1e-15);
    CHECK(rel(vh::erfc_complex({1, 0}), {0.15729920705028513, 0}) < 1e-13);
    cplx z(0.3, 0.7);
    CHECK(std::abs(vh::erfc_complex(-z) - (2.0 - vh::erfc_complex(z))) < 1e-13);
    CHECK(rel(vh::erfc_complex({0.5, 0}), {std::erfc(0.5), 0}) < 1e-14);
}

TEST_CASE("erfc reflection and conjugation on random points") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int n = 0;
    while (n < 1000) {
        cplx z(20 * u(rng), 20 * u(rng));
        if (std::abs(z) > 20) continue;
        ++n;
        // erfc grows like exp(-z^2) off the real axis; only check where finite
        if (std::real(-z * z) > 700) continue;
        cplx e = vh::erfc_complex(z), em = vh::erfc_complex(-z);
        double scale = std::max(1.0, std::max(std::abs(e), std::abs(em)));
        CHECK(std::abs(e + em - 2.0) / scale < 1e-13);
        CHECK(std::abs(vh::erfc_complex(std::conj(z)) - std::conj(e)) / std::max(1.0, std::abs(e)) < 1e-13);
    }
}

TEST_CASE("scaled_time_kernel") {
    // t_ba = 0: 2 Re erfc(i T k / sqrt2) = 2 before damping
    for (double k : {0.0, 0.5, 3.0, 10.0}) {
        cplx v = vh::scaled_time_kernel(k, 0.0, 1.0, 0.0);
        CHECK(std::abs(v.real() - 2.0 * std::exp(-k * k / 2)) < 1e-13 * std::abs(v));
    }
    // fused against the direct formula where the latter is representable
    double T = 1.0, k = 5.0, t = 3.0, w = 0.7;
    auto E = [&](double tt) {
        return std::exp(cplx(0, k * tt)) * vh::erfc_complex((tt + cplx(0, T * T * k)) / (std::sqrt(2.0) * T));
    };
    cplx naive = std::exp(-T * T * (w * w + k * k) / 2) * (E(t) + E(-t));
    CHECK(rel(vh::scaled_time_kernel(k, t, T, w), naive) < 1e-11);
    cplx big = vh::scaled_time_kernel(200.0, 3.0, 1.0, 1.0);
    CHECK(std::isfinite(big.real()));
    CHECK(std::isfinite(big.imag()));
    CHECK_THROWS_AS(vh::scaled_time_kernel(1.0, 1.0, 0.0, 1.0), vh::domain_error);
}

TEST_CASE("spherical_bessel_j") {
    CHECK(vh::spherical_bessel_j(0, 0.0) == 1.0);
    CHECK(vh::spherical_bessel_j(2, 0.0) == 0.0);
    CHECK(std::abs(vh::spherical_bessel_j(0, M_PI)) < 1e-16);
    CHECK(std::abs(vh::spherical_bessel_j(2, 1.0) / 0.062035052011373860 - 1) < 1e-13);
    CHECK_THROWS_AS(vh::spherical_bessel_j(5, 1.0), vh::domain_error);
    CHECK_THROWS_AS(vh::spherical_bessel_j(0, -1.0), vh::domain_error);
}

TEST_CASE("spherical Bessel recurrence") {
    for (int l = 1; l <= 3; ++l) {
        for (int i = 0; i <= 200; ++i) {
            double x = 0.1 * std::pow(1000.0, i / 200.0);
            double lhs = vh::spherical_bessel_j(l - 1, x) + vh::spherical_bessel_j(l + 1, x);
            double rhs = (2 * l + 1) / x * vh::spherical_bessel_j(l, x);
            double scale = std::abs(vh::spherical_bessel_j(l - 1, x)) + std::abs(vh::spherical_bessel_j(l + 1, x));
            CHECK(std::abs(lhs - rhs) <= 1e-11 * scale);
        }
    }
}

TEST_CASE("j0_plus_j2 matches 3 j1(x)/x") {
    for (double x : {1e-4, 0.1, 1.0, 7.3, 55.0}) {
        double a = vh::j0_plus_j2(x);
        double b = vh::spherical_bessel_j(0, x) + vh::spherical_bessel_j(2, x);
        CHECK(std::abs(a - b) < 1e-14);
    }
}

TEST_CASE("integrate_damped moments") {
    vh::DampedKernelSpec g{std::sqrt(2.0), 0.0, {}, [](double k) { return std::exp(-k * k); }};
    auto r = vh::integrate_damped(g);
    CHECK(std::abs(r.value - std::sqrt(M_PI) / 2) < 1e-12);
    CHECK(r.abs_error >= 0);
    CHECK(r.evaluations > 0);
    vh::DampedKernelSpec g3{std::sqrt(2.0), 0.0, {}, [](double k) { return k * k * k * std::exp(-k * k); }};
    CHECK(std::abs(vh::integrate_damped(g3).value - 0.5) < 1e-12);
}

TEST_CASE("integrate_damped oscillatory against a dense Romberg grid") {
    auto f = [](double k) { return std::exp(-k * k) * vh::spherical_bessel_j(0, 10 * k); };
    vh::DampedKernelSpec s{std::sqrt(2.0), 0.0, {2 * M_PI / 10}, f};
    auto r = vh::integrate_damped(s);
    // Romberg on [0, 30], 2^20 intervals (trapezoid + two Richardson steps)
    const int n = 1 << 20;
    const double a = 0, b = 30;
    auto trap = [&](int m) {
        double h = (b - a) / m, s2 = 0.5 * (f(a) + f(b));
        for (int i = 1; i < m; ++i) s2 += f(a + i * h);
        return s2 * h;
    };
    double t1 = trap(n / 4), t2 = trap(n / 2), t3 = trap(n);
    double r1 = (4 * t2 - t1) / 3, r2 = (4 * t3 - t2) / 3;
    double romberg = (16 * r2 - r1) / 15;
    CHECK(std::abs(r.value - romberg) < 1e-10 * std::max(1.0, std::abs(romberg)));
}

TEST_CASE("integrate_damped is linear") {
    auto f = [](double k) { return k * std::exp(-k * k / 2) * std::cos(3 * k); };
    auto g = [](double k) { return std::exp(-k * k / 2) * vh::spherical_bessel_j(2, 4 * k); };
    vh::DampedKernelSpec sf{1.0, 0.0, {2 * M_PI / 4}, f}, sg{1.0, 0.0, {2 * M_PI / 4}, g};
    vh::DampedKernelSpec sh{1.0, 0.0, {2 * M_PI / 4}, [&](double k) { return 2.5 * f(k) - 0.75 * g(k); }};
    auto If = vh::integrate_damped(sf), Ig = vh::integrate_damped(sg), Ih = vh::integrate_damped(sh);
    double tol = Ih.abs_error + 2.5 * If.abs_error + 0.75 * Ig.abs_error + 1e-14;
    CHECK(std::abs(Ih.value - (2.5 * If.value - 0.75 * Ig.value)) <= tol);
}

TEST_CASE("integrate_adaptive reports non-convergence with its estimate") {
    vh::QuadTol tol;
    tol.max_evals = 100;
    tol.rtol = 1e-15;
    tol.atol = 0;
    try {
        vh::integrate_adaptive([](double x) { return std::sin(200 * x) / std::sqrt(x + 1e-9); }, {0.0, 10.0}, tol);
        FAIL("expected convergence_error");
    } catch (const vh::convergence_error& e) {
        CHECK(e.error > 0);
        CHECK(std::isfinite(e.estimate.real()));
    }
}

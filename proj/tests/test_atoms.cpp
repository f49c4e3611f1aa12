#include <doctest.h>

#include <cmath>
#include <random>

#include "vh/atoms.hpp"
#include "vh/oracle.hpp"

namespace {
const double overlap0 = 128 * std::sqrt(6.0) / 243;

template <class F>
double radial_integral(F f, double a0) {
    return vh::integrate_adaptive(f, {0.0, a0, 5 * a0, 20 * a0, 80 * a0}).value;
}
}  // namespace

TEST_CASE("radial_R normalization, nodes and overlap") {
    for (double a0 : {0.5, 1.0, 3.0}) {
        CHECK(std::abs(radial_integral([&](double r) { return std::pow(vh::radial_R(1, 0, r, a0) * r, 2); }, a0) - 1) < 1e-12);
        CHECK(std::abs(radial_integral([&](double r) { return std::pow(vh::radial_R(2, 1, r, a0) * r, 2); }, a0) - 1) < 1e-12);
        CHECK(std::abs(radial_integral([&](double r) { return std::pow(vh::radial_R(2, 0, r, a0) * r, 2); }, a0) - 1) < 1e-12);
        CHECK(std::abs(vh::radial_R(2, 0, 2 * a0, a0)) < 1e-15);
        double ov = radial_integral([&](double r) { return vh::radial_R(2, 1, r, a0) * vh::radial_R(1, 0, r, a0) * r * r * r; }, a0);
        CHECK(std::abs(ov / (overlap0 * a0) - 1) < 1e-12);
    }
    CHECK_THROWS_AS(vh::radial_R(3, 0, 1.0, 1.0), vh::domain_error);
}

TEST_CASE("smearing_vector of atom A") {
    vh::AtomSpec A;
    A.a0 = 1.0;
    auto F = vh::smearing_vector(A, {0, 0, 1});
    CHECK(std::abs(F[0]) < 1e-17);
    CHECK(std::abs(F[1]) < 1e-17);
    CHECK(std::abs(F[2] - std::exp(-1.5) / (4 * M_PI * std::sqrt(2.0))) < 1e-15);
    std::mt19937_64 rng(13);
    std::normal_distribution<double> g;
    for (int i = 0; i < 200; ++i) {
        vh::Vec3 x{g(rng), g(rng), g(rng)};
        auto p = vh::smearing_vector(A, x);
        auto m = vh::smearing_vector(A, {-x[0], -x[1], -x[2]});
        for (int c = 0; c < 3; ++c) CHECK(std::abs(p[c] - m[c]) < 1e-15);
        // printed form: psi_e^* x psi_g = (4 pi sqrt2 a0^4)^{-1} z e^{-3r/2a0} x
        double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        double amp = x[2] * std::exp(-1.5 * r) / (4 * M_PI * std::sqrt(2.0));
        for (int c = 0; c < 3; ++c) CHECK(std::abs(p[c] - amp * x[c]) < 1e-14 * std::max(1.0, std::abs(amp)));
    }
}

TEST_CASE("smearing_vector of a rotated atom") {
    vh::AtomSpec B;
    B.orientation = {0, M_PI / 2, 0};
    auto F = vh::smearing_vector(B, {0, 0, 1.3});
    for (auto& c : F) CHECK(std::abs(c) < 1e-16);
    vh::AtomSpec A, Bs;
    Bs.orientation = {0.3, 1e-9, -0.2};
    vh::Vec3 x{0.4, -0.7, 1.1};
    auto fa = vh::smearing_vector(A, x), fb = vh::smearing_vector(Bs, x);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(fa[c] - fb[c]) < 1e-9);
}

TEST_CASE("1s -> 2s dipole vanishes over all space") {
    // z-component of psi_20^* z psi_10 over r and cos(theta); Y00^2 = 1/4pi
    auto fz = [&](double r) {
        double radial = vh::radial_R(2, 0, r, 1.0) * vh::radial_R(1, 0, r, 1.0) / (4 * M_PI);
        return vh::integrate_adaptive([&](double c) { return 2 * M_PI * r * r * radial * r * c; }, {-1.0, 0.3, 1.0}).value;
    };
    CHECK(std::abs(radial_integral(fz, 1.0)) < 1e-12);
    vh::AtomSpec A;
    CHECK_THROWS_AS(vh::smearing_vector(A, {0, 0, 1}, vh::Transition::s1_to_2s), vh::domain_error);
}

TEST_CASE("smearing_scalar") {
    vh::AtomSpec A;
    A.a0 = 1.7;
    CHECK(std::abs(vh::smearing_scalar(A, {0, 0, 2 * A.a0})) < 1e-17);
    CHECK(std::abs(vh::smearing_scalar(A, {0, 0, 0}) - 1 / (2 * std::sqrt(2.0) * M_PI * std::pow(A.a0, 3))) < 1e-15);
    // int F d^3x = 0 since 1s and 2s are orthogonal
    double total = radial_integral([&](double r) { return 4 * M_PI * r * r * vh::smearing_scalar(A, {r, 0, 0}); }, A.a0);
    CHECK(std::abs(total) < 1e-13);
}

TEST_CASE("switching") {
    vh::AtomSpec A;
    A.switching_center = 2.0;
    A.switching_width = 1.5;
    vh::SwitchingKind g{}, c{vh::SwitchingVariant::cropped, 8.0};
    CHECK(vh::switching(g, 2.0, A) == 1.0);
    CHECK(std::abs(vh::switching(g, 3.5, A) - std::exp(-1.0)) < 1e-16);
    double sigma = 1.5 / std::sqrt(2.0);
    CHECK(vh::switching(c, 2.0 + 8.01 * sigma, A) == 0.0);
    CHECK(vh::switching(c, 2.0 - 8.01 * sigma, A) == 0.0);
    CHECK(vh::switching(c, 2.0 + 7.99 * sigma, A) > 0.0);
    CHECK(vh::switching(g, 2.0 + 8.01 * sigma, A) > 0.0);
    CHECK(std::abs(vh::crop_half_width(c, 1.5) - 8 * sigma) < 1e-15);
    CHECK_THROWS_AS(vh::validate(vh::SwitchingKind{vh::SwitchingVariant::cropped, 0.0}), vh::domain_error);
}

TEST_CASE("radial_overlap closed forms") {
    CHECK(std::abs(vh::radial_overlap(0, 0.0, 1.0) / overlap0 - 1) < 1e-11);
    CHECK(std::abs(vh::radial_overlap(0, 0.0, 2.5) / (2.5 * overlap0) - 1) < 1e-11);
    CHECK(vh::radial_overlap(2, 0.0, 1.0) == 0.0);
    double q = vh::radial_overlap_quadrature(0, 1.0, 1.0);
    CHECK(std::abs(vh::radial_overlap(0, 1.0, 1.0) / q - 1) < 1e-11);
    for (int i = 0; i < 50; ++i) {
        double ak = 1e-3 * std::pow(1e6, i / 49.0);
        for (int l : {0, 2}) {
            double c = vh::radial_overlap(l, ak, 1.0);
            auto b = vh::radial_bruteforce(l, ak, 1.0);
            CHECK(std::abs(c - b.value) <= 1e-10 * std::abs(b.value));
        }
    }
}

TEST_CASE("radial_overlap general l by quadrature") {
    for (int l : {1, 3, 4}) {
        double v = vh::radial_overlap(l, 0.8, 1.0);
        auto b = vh::radial_bruteforce(l, 0.8, 1.0);
        CHECK(std::abs(v - b.value) <= 1e-9 * std::abs(b.value));
    }
}

TEST_CASE("wavefunction_overlap_log10") {
    CHECK(vh::wavefunction_overlap_log10(0.0, 1.0) == 0.0);
    CHECK(std::abs(vh::wavefunction_overlap_log10(1e4, 1.0) / -4343 - 1) < 0.01);
    CHECK(std::abs(vh::wavefunction_overlap_log10(1e3, 1.0) / -434.3 - 1) < 0.02);
    CHECK(std::isfinite(vh::wavefunction_overlap_log10(1e8, 1.0)));
}

#include "vh/angular.hpp"
#include "vh/mutation.hpp"

#include <cmath>
#include <cstdlib>

#include <boost/multiprecision/cpp_int.hpp>

namespace vh {

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

cpp_int factorial(int n) {
    cpp_int f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

double factorial_d(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

bool triangle(int a, int b, int c) { return c >= std::abs(a - b) && c <= a + b; }

}  // namespace

double wigner_3j(const ThreeJ& t) {
    const int j1 = t.l1, j2 = t.l2, j3 = t.l3, m1 = t.m1, m2 = t.m2, m3 = t.m3;
    if (j1 < 0 || j2 < 0 || j3 < 0) return 0.0;
    if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m3) > j3) return 0.0;
    if (m1 + m2 + m3 != 0 || !triangle(j1, j2, j3)) return 0.0;
    if (m1 == 0 && m2 == 0 && m3 == 0 && (j1 + j2 + j3) % 2 != 0) return 0.0;

    cpp_rational sq(factorial(j1 + j2 - j3) * factorial(j1 - j2 + j3) * factorial(-j1 + j2 + j3),
                    factorial(j1 + j2 + j3 + 1));
    sq *= cpp_rational(factorial(j1 + m1) * factorial(j1 - m1) * factorial(j2 + m2) * factorial(j2 - m2) *
                       factorial(j3 + m3) * factorial(j3 - m3));
    cpp_rational sum = 0;
    const int kmin = std::max({0, j2 - j3 - m1, j1 - j3 + m2});
    const int kmax = std::min({j1 + j2 - j3, j1 - m1, j2 + m2});
    for (int k = kmin; k <= kmax; ++k) {
        cpp_int den = factorial(k) * factorial(j3 - j2 + k + m1) * factorial(j3 - j1 + k - m2) *
                      factorial(j1 + j2 - j3 - k) * factorial(j1 - k - m1) * factorial(j2 - k + m2);
        cpp_rational term(1, den);
        sum += (k % 2 == 0) ? term : cpp_rational(-term);
    }
    int phase = j1 - j2 - m3;
    double sign = (phase % 2 == 0) ? 1.0 : -1.0;
    return sign * std::sqrt(sq.convert_to<double>()) * sum.convert_to<double>();
}

namespace {

// Closed form with the terminating 2F1(mu-l, -m-l; mu-m+1; -tan^2(b/2)) written as
// a polynomial in cos(b/2), sin(b/2); requires mu >= m.
double small_d_ordered(int l, int mu, int m, double beta) {
    const double c = std::cos(0.5 * beta), s = std::sin(0.5 * beta);
    const double norm = std::sqrt(factorial_d(l - m) * factorial_d(l + mu) / (factorial_d(l + m) * factorial_d(l - mu)));
    const int nmax = std::min(l - mu, l + m);
    double coef = 1.0 / factorial_d(mu - m);
    double sum = 0.0;
    for (int n = 0; n <= nmax; ++n) {
        sum += coef * std::pow(c, 2 * l + m - mu - 2 * n) * std::pow(s, mu - m + 2 * n);
        // ratio of successive hypergeometric terms, argument -tan^2
        coef *= -double(mu - l + n) * double(-m - l + n) / (double(mu - m + 1 + n) * double(n + 1));
    }
    return norm * sum;
}

double small_d(int l, int mu, int m, double beta) {
    if (mu >= m) return small_d_ordered(l, mu, m, beta);
    double v = small_d_ordered(l, m, mu, beta);
    return ((mu - m) % 2 == 0) ? v : -v;
}

Mat3 rz(double a) {
    double c = std::cos(a), s = std::sin(a);
    return {{{c, -s, 0}, {s, c, 0}, {0, 0, 1}}};
}

Mat3 ry(double a) {
    double c = std::cos(a), s = std::sin(a);
    return {{{c, 0, s}, {0, 1, 0}, {-s, 0, c}}};
}

Mat3 mul(const Mat3& a, const Mat3& b) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
    return r;
}

}  // namespace

cplx wigner_D(int l, int mu, int m, const EulerAngles& a) {
    if (l < 0 || std::abs(mu) > l || std::abs(m) > l) throw domain_error("wigner_D: index out of range");
    const cplx phase = std::exp(cplx(0.0, mu * a.psi + m * a.phi));
    return mutation_factor(ClosedForm::wigner_d) * phase * small_d(l, mu, m, a.theta);
}

Mat3 rotation_matrix(const EulerAngles& a) { return mul(mul(rz(-a.psi), ry(-a.theta)), rz(-a.phi)); }

cplx sph_harm(int l, int m, double theta, double phi) {
    if (l < 0 || std::abs(m) > l) throw domain_error("sph_harm: index out of range");
    const int am = std::abs(m);
    double p = std::sph_legendre(unsigned(l), unsigned(am), theta);
    cplx y = p * std::exp(cplx(0.0, am * phi));
    if (m < 0) {
        y = std::conj(y);
        if (am % 2 == 1) y = -y;
    }
    return y;
}

cplx sph_harm(int l, int m, const Vec3& d) {
    double r = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    if (r == 0.0) throw domain_error("sph_harm: zero direction");
    double ct = std::clamp(d[2] / r, -1.0, 1.0);
    return sph_harm(l, m, std::acos(ct), std::atan2(d[1], d[0]));
}

cplx rotate_harmonic(int l, int m, const EulerAngles& a, double theta, double phi) {
    if (l < 0 || std::abs(m) > l) throw domain_error("rotate_harmonic: index out of range");
    cplx s = 0.0;
    for (int mu = -l; mu <= l; ++mu) s += sph_harm(l, mu, theta, phi) * wigner_D(l, mu, m, a);
    return s;
}

namespace {

constexpr double kFourPi = 4.0 * 3.14159265358979323846;

double three(int l1, int m1, int l2, int m2, int l3, int m3) {
    return std::sqrt((2 * l1 + 1) * (2 * l2 + 1) * (2 * l3 + 1) / kFourPi) * wigner_3j({l1, l2, l3, 0, 0, 0}) *
           wigner_3j({l1, l2, l3, m1, m2, m3});
}

// int Y*_{l1m1} Y_{l2m2} Y*_{l3m3} Y_{l4m4}
double four_conj(int l1, int m1, int l2, int m2, int l3, int m3, int l4, int m4) {
    const int mu = -m1 - m3;
    if (m2 + m4 + mu != 0) return 0.0;
    double pre = std::sqrt(double((2 * l1 + 1) * (2 * l2 + 1) * (2 * l3 + 1) * (2 * l4 + 1)));
    double sum = 0.0;
    for (int lam = std::abs(l1 - l3); lam <= l1 + l3; ++lam) {
        if (!triangle(l2, l4, lam) || std::abs(mu) > lam) continue;
        sum += (2 * lam + 1) / kFourPi * pre * wigner_3j({l1, l3, lam, 0, 0, 0}) *
               wigner_3j({l1, l3, lam, -m1, -m3, -mu}) * wigner_3j({l2, l4, lam, 0, 0, 0}) *
               wigner_3j({l2, l4, lam, m2, m4, mu});
    }
    return sum;
}

// int Y1 Y2 Y3 Y4 Y5 (no conjugates)
double five(const std::array<int, 5>& l, const std::array<int, 5>& m) {
    if (m[0] + m[1] + m[2] + m[3] + m[4] != 0) return 0.0;
    double pre = 1.0;
    for (int li : l) pre *= 2 * li + 1;
    pre = std::sqrt(pre / kFourPi);
    const int M = m[0] + m[1], Mp = m[3] + m[4];
    // (-1)^{m3} restores the phase from Y_{lam,M} (-1)^M = Y*_{lam,-M}
    const double ph = (std::abs(m[2]) % 2 == 0) ? 1.0 : -1.0;
    double sum = 0.0;
    for (int lam = std::abs(l[0] - l[1]); lam <= l[0] + l[1]; ++lam) {
        if (std::abs(M) > lam) continue;
        double a = wigner_3j({l[0], l[1], lam, 0, 0, 0}) * wigner_3j({l[0], l[1], lam, m[0], m[1], -M});
        if (a == 0.0) continue;
        for (int lp = std::abs(l[3] - l[4]); lp <= l[3] + l[4]; ++lp) {
            if (std::abs(Mp) > lp) continue;
            double b = wigner_3j({l[3], l[4], lp, 0, 0, 0}) * wigner_3j({l[3], l[4], lp, m[3], m[4], -Mp});
            if (b == 0.0) continue;
            double c = wigner_3j({l[2], lp, lam, 0, 0, 0}) * wigner_3j({l[2], lp, lam, m[2], Mp, M});
            sum += (2 * lam + 1) * (2 * lp + 1) / kFourPi * pre * a * b * c;
        }
    }
    return ph * sum;
}

}  // namespace

double gaunt_integral(const std::vector<HarmonicIndex>& idx) {
    const std::size_t n = idx.size();
    if (n < 3 || n > 5) throw domain_error("gaunt_integral: need 3 to 5 harmonics");
    // Y*_{lm} = (-1)^m Y_{l,-m}
    std::array<int, 5> l{}, m{};
    double sign = mutation_factor(ClosedForm::gaunt);
    for (std::size_t i = 0; i < n; ++i) {
        if (idx[i].l < 0 || std::abs(idx[i].m) > idx[i].l) throw domain_error("gaunt_integral: index out of range");
        l[i] = idx[i].l;
        m[i] = idx[i].m;
        if (idx[i].conjugated) {
            m[i] = -m[i];
            if (std::abs(idx[i].m) % 2 == 1) sign = -sign;
        }
    }
    int msum = 0;
    for (std::size_t i = 0; i < n; ++i) msum += m[i];
    if (msum != 0) return 0.0;
    if (n == 3) return sign * three(l[0], m[0], l[1], m[1], l[2], m[2]);
    if (n == 4) {
        // Y1 Y3 written as conjugates: Y_{l,m} = (-1)^m Y*_{l,-m}
        double s2 = ((std::abs(m[0]) + std::abs(m[2])) % 2 == 0) ? 1.0 : -1.0;
        return sign * s2 * four_conj(l[0], -m[0], l[1], m[1], l[2], -m[2], l[3], m[3]);
    }
    return sign * five(l, m);
}

Mat3 polarization_completeness(const Vec3& k) {
    double r = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    if (!(r > 0.0)) throw domain_error("polarization_completeness: zero wave vector");
    Vec3 kh{k[0] / r, k[1] / r, k[2] / r};
    // seed with the axis least aligned with k
    int ax = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(kh[i]) < std::abs(kh[ax])) ax = i;
    Vec3 a{0, 0, 0};
    a[ax] = 1.0;
    Vec3 e1{kh[1] * a[2] - kh[2] * a[1], kh[2] * a[0] - kh[0] * a[2], kh[0] * a[1] - kh[1] * a[0]};
    double n1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
    for (double& v : e1) v /= n1;
    Vec3 e2{kh[1] * e1[2] - kh[2] * e1[1], kh[2] * e1[0] - kh[0] * e1[2], kh[0] * e1[1] - kh[1] * e1[0]};
    Mat3 p{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) p[i][j] = mutation_factor(ClosedForm::polarization) * (e1[i] * e1[j] + e2[i] * e2[j]);
    return p;
}

}  // namespace vh

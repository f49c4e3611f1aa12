#include "vh/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <random>

#include "vh/atoms.hpp"

namespace vh {

namespace {

constexpr double kPi = 3.14159265358979323846;
const cplx kI(0.0, 1.0);

double rel(cplx a, cplx b, double floor = 0.0) {
    const double s = std::max({std::abs(a), std::abs(b), floor});
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return v;
}

std::vector<double> logspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a * std::pow(b / a, double(i) / (n - 1));
    return v;
}

// Accumulates the worst case of a family of comparisons.
struct Worst {
    OracleReport r;
    Worst(std::string name, std::string family, double tol) {
        r.name = std::move(name);
        r.family = std::move(family);
        r.tolerance = tol;
        r.cases = 0;
        r.pass = true;
    }
    void add(cplx closed, cplx brute, double err, std::size_t evals = 0) {
        if (r.cases == 0 || !(err <= r.rel_err)) {
            r.closed_form = std::abs(closed);
            r.brute_force = std::abs(brute);
            if (r.cases == 0 || err > r.rel_err || std::isnan(err)) r.rel_err = err;
        }
        ++r.cases;
        r.budget += evals;
        if (!(err <= r.tolerance)) r.pass = false;
    }
    void fail(const std::string& why) {
        r.pass = false;
        r.note = why;
    }
};

// Spherical Hankel halves: j_l(x) = (h1(x) + h2(x)) / 2.
cplx hankel(int l, cplx x, int kind) {
    const cplx s = kind == 1 ? kI : -kI;
    cplx sum = 0.0;
    double fact = 1.0;
    for (int m = 0; m <= l; ++m) {
        if (m > 0) fact *= double((l + m) * (l - m + 1)) / double(m);
        sum += std::pow(s, m) * fact / std::pow(2.0 * x, m);
    }
    return std::pow(-s, l + 1) * std::exp(s * x) / x * sum;
}

}  // namespace

QuadratureResult<cplx> time_integral_bruteforce(double wa, double wb, double k, double ta, double tb, double T,
                                                double rtol) {
    if (!(T > 0.0)) throw domain_error("time_integral_bruteforce: T must be positive");
    const double sigma = T / std::sqrt(2.0);
    const double lo = std::min(ta, tb) - 10.0 * sigma, hi = std::max(ta, tb) + 10.0 * sigma;
    auto chi = [T](double t, double c) { return std::exp(-(t - c) * (t - c) / (T * T)); };
    QuadTol inner_tol;
    inner_tol.rtol = rtol * 0.1;
    inner_tol.atol = 1e-300;
    QuadTol outer_tol;
    outer_tol.rtol = rtol;
    outer_tol.atol = 1e-300;
    auto panels = [&](double a, double b) {
        const double osc = std::max({std::abs(wa) + std::abs(k), std::abs(wb) + std::abs(k), 1.0 / T});
        const int n = std::max(1, int(std::ceil((b - a) * osc / (4.0 * kPi))));
        return linspace(a, b, n + 1);
    };
    QuadratureResult<cplx> out;
    // One ordering: chi_x(t1) chi_y(t2) e^{i(wx t1 + wy t2) - ik(t1 - t2)} over t2 < t1. When
    // x is switched on later most of the mass sits below the diagonal and the
    // cancellation-free route is the full plane minus the region t2 > t1.
    auto ordering = [&](double wx, double cx, double wy, double cy) {
        const bool complement = cx > cy;
        double inner_err = 0.0;
        auto outer = [&](double t1) {
            auto f = [&](double t2) {
                return std::exp(kI * ((wx - k) * t1 + (wy + k) * t2)) * chi(t1, cx) * chi(t2, cy);
            };
            const double a = complement ? t1 : lo, b = complement ? hi : t1;
            if (b <= a) return cplx(0.0);
            // Inner integrals that straddle a switching peak can stall on
            // rounding; they are weighted by a negligible chi_x(t1), so the
            // estimate is kept and its error carried into the total.
            const std::vector<double> pts = panels(a, b);
            QuadTol tol = inner_tol;
            tol.max_evals = 84 * pts.size();
            try {
                auto r = integrate_adaptive(f, pts, tol);
                out.evaluations += r.evaluations;
                return r.value;
            } catch (const convergence_error& e) {
                out.evaluations += tol.max_evals;
                inner_err = std::max(inner_err, e.error);
                return e.estimate;
            }
        };
        auto r = integrate_adaptive(outer, panels(lo, hi), outer_tol);
        out.abs_error += r.abs_error + inner_err * (hi - lo);
        if (!complement) return r.value;
        const double sp = std::sqrt(kPi) * T;
        const cplx full = sp * std::exp(kI * (wx - k) * cx - 0.25 * T * T * (wx - k) * (wx - k)) * sp *
                          std::exp(kI * (wy + k) * cy - 0.25 * T * T * (wy + k) * (wy + k));
        return full - r.value;
    };
    out.value = ordering(wa, ta, wb, tb) + ordering(wb, tb, wa, ta);
    return out;
}

double sphere_quadrature(const std::vector<HarmonicIndex>& idx) {
    using G = boost::math::quadrature::gauss<double, 64>;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    constexpr int nphi = 128;
    cplx total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (double c : {x[i], -x[i]}) {
            const double theta = std::acos(c);
            for (int j = 0; j < nphi; ++j) {
                const double phi = 2.0 * kPi * j / nphi;
                cplx p = 1.0;
                for (const auto& h : idx) {
                    cplx y = sph_harm(h.l, h.m, theta, phi);
                    p *= h.conjugated ? std::conj(y) : y;
                }
                total += w[i] * p;
            }
        }
    }
    return (total * (2.0 * kPi / nphi)).real();
}

QuadratureResult<double> radial_bruteforce(int l, double k, double a0) {
    if (l < 0 || l > 4) throw domain_error("radial_bruteforce: l outside 0..4");
    if (k < 0.0 || !(a0 > 0.0)) throw domain_error("radial_bruteforce: need k >= 0, a0 > 0");
    QuadTol tol;
    tol.rtol = 1e-13;
    tol.atol = 1e-300;
    if (a0 * k <= 1.0 || l == 4) {
        auto f = [&](double r) {
            return r * r * r * radial_R(2, 1, r, a0) * radial_R(1, 0, r, a0) * spherical_bessel_j(l, k * r);
        };
        const double rmax = 60.0 * a0;
        double step = a0;
        if (k > 0.0) step = std::min(step, kPi / k);
        const int n = std::min(200000, int(std::ceil(rmax / step)));
        return integrate_adaptive(f, linspace(0.0, rmax, n + 1), tol);
    }
    // r^3 R21 R10 = r^4 e^{-3r/2a0} / (sqrt6 a0^4)
    const double norm = 1.0 / (std::sqrt(6.0) * std::pow(a0, 4));
    QuadratureResult<double> out;
    for (int kind : {1, 2}) {
        const cplx c = 1.5 / a0 - (kind == 1 ? kI : -kI) * k;
        const cplx dir = std::abs(c) / c;  // c * r real and positive along r = s dir
        auto f = [&](double s) {
            const cplx r = s * dir;
            if (s == 0.0) return cplx(0.0);
            return 0.5 * norm * r * r * r * r * std::exp(-1.5 * r / a0) * hankel(l, k * r, kind) * dir;
        };
        const double smax = 100.0 / std::abs(c);
        std::vector<double> pts = linspace(0.0, smax, 41);
        auto r = integrate_adaptive(f, pts, tol);
        out.value += r.value.real();
        out.abs_error += r.abs_error;
        out.evaluations += r.evaluations;
    }
    return out;
}

cplx rotation_bruteforce(int l, int m, const EulerAngles& a, const Vec3& d) {
    const Mat3 R = rotation_matrix(a);
    Vec3 x{};
    for (int i = 0; i < 3; ++i) x[i] = R[0][i] * d[0] + R[1][i] * d[1] + R[2][i] * d[2];
    return sph_harm(l, m, x);
}

double partial_transpose_min_eigenvalue(const Mat4& rho) {
    // basis index = a + 2 b with a, b the excitation of A and B
    Eigen::Matrix4cd pt;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const int ai = i % 2, bi = i / 2, aj = j % 2, bj = j / 2;
            pt(i, j) = rho[std::size_t(ai + 2 * bj)][std::size_t(aj + 2 * bi)];
        }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(pt, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

namespace {

void time_family(std::vector<OracleReport>& out) {
    {
        Worst w("time_integral.grid", "time", 1e-8);
        for (double k : linspace(0.0, 20.0, 10))
            for (double t : linspace(0.0, 12.0, 10)) {
                const cplx c = time_integral_closed(1.0, 1.0, k, 0.0, t, 1.0);
                auto b = time_integral_bruteforce(1.0, 1.0, k, 0.0, t, 1.0);
                w.add(c, b.value, rel(c, b.value), b.evaluations);
            }
        out.push_back(w.r);
    }
    {
        Worst w("time_integral.unequal_gaps", "time", 1e-8);
        for (auto [k, t, T] : {std::tuple{0.5, 0.0, 1.0}, {3.0, 2.5, 1.0}, {1.0, 7.0, 1.0}, {0.8, 3.0, 2.0}}) {
            const double wa = 1.0 / T, wb = 1.5 / T;
            const cplx c = time_integral_closed(wa, wb, k / T, -1.0, t - 1.0, T);
            auto b = time_integral_bruteforce(wa, wb, k / T, -1.0, t - 1.0, T);
            w.add(c, b.value, rel(c, b.value), b.evaluations);
        }
        out.push_back(w.r);
    }
    {
        // equal gaps: |closed| = (pi T^2 / 2) e^{-T^2(Omega^2+k^2)/2} |E(k,t) + E(k,-t)|
        Worst w("time_integral.bracket_form", "time", 1e-11);
        for (double k : linspace(0.0, 20.0, 11))
            for (double t : linspace(0.0, 12.0, 7)) {
                const cplx c = time_integral_closed(1.0, 1.0, k, 0.0, t, 1.0);
                const cplx b = 0.5 * kPi * scaled_time_kernel(k, t, 1.0, 1.0);
                w.add(std::abs(c), std::abs(b), rel(std::abs(c), std::abs(b)));
            }
        out.push_back(w.r);
    }
    {
        // time shift changes only the phase
        Worst w("time_integral.shift", "time", 1e-12);
        for (double k : {0.3, 2.0, 9.0}) {
            const cplx a = time_integral_closed(1.0, 1.3, k, 0.0, 2.0, 1.0);
            const cplx b = time_integral_closed(1.0, 1.3, k, 5.0, 7.0, 1.0);
            w.add(std::abs(a), std::abs(b), rel(std::abs(a), std::abs(b)));
        }
        out.push_back(w.r);
    }
    {
        // the local time factor: int int chi(t1) chi(t2) e^{-i nu (t1 - t2)} = pi T^2 e^{-T^2 nu^2 / 2}
        Worst w("time_integral.full_plane", "time", 1e-8);
        for (double nu : {0.0, 0.7, 1.5, 3.0}) {
            QuadTol tol;
            tol.rtol = 1e-12;
            tol.atol = 1e-18;
            std::size_t evals = 0;
            auto outer = [&](double t1) {
                auto f = [&](double t2) { return std::exp(-t1 * t1 - t2 * t2 - kI * nu * (t1 - t2)); };
                auto r = integrate_adaptive(f, linspace(-7.1, 7.1, 9), tol);
                evals += r.evaluations;
                return r.value;
            };
            auto r = integrate_adaptive(outer, linspace(-7.1, 7.1, 9), tol);
            const double c = kPi * std::exp(-nu * nu / 2.0);
            w.add(c, r.value, rel(c, r.value), evals);
        }
        out.push_back(w.r);
    }
}

void radial_family(std::vector<OracleReport>& out) {
    for (int l : {0, 2}) {
        Worst w("radial_overlap.l" + std::to_string(l), "radial", 1e-10);
        for (double ak : logspace(1e-3, 1e3, 50)) {
            const double c = radial_overlap(l, ak, 1.0);
            auto b = radial_bruteforce(l, ak, 1.0);
            w.add(c, b.value, rel(c, b.value), b.evaluations);
        }
        out.push_back(w.r);
    }
    {
        Worst w("radial_overlap.k0", "radial", 1e-11);
        for (double a0 : {0.5, 1.0, 3.0}) {
            const double exact = 128.0 * std::sqrt(6.0) / 243.0 * a0;
            const double c = radial_overlap(0, 0.0, a0);
            auto b = radial_bruteforce(0, 0.0, a0);
            w.add(c, exact, rel(c, exact), 0);
            w.add(b.value, exact, rel(b.value, exact), b.evaluations);
        }
        out.push_back(w.r);
    }
}

void angular_family(std::vector<OracleReport>& out) {
    std::mt19937_64 rng(20240611);
    std::vector<std::pair<int, int>> lm;
    for (int l = 0; l <= 3; ++l)
        for (int m = -l; m <= l; ++m) lm.push_back({l, m});
    std::uniform_int_distribution<std::size_t> pick(0, lm.size() - 1);

    // Conjugation patterns follow the usual integrals: Y* Y Y, Y* Y Y* Y, Y* Y Y* Y Y.
    auto msum = [](const std::vector<HarmonicIndex>& v) {
        int s = 0;
        for (auto& h : v) s += h.conjugated ? -h.m : h.m;
        return s;
    };
    Worst sel("gaunt.selection_rule", "angular", 1e-14);
    for (int n : {3, 4, 5}) {
        Worst w("gaunt." + std::to_string(n) + "_harmonics", "angular", 1e-10);
        std::vector<std::vector<HarmonicIndex>> sets;
        if (n == 3) {
            for (auto [l1, m1] : lm)
                for (auto [l2, m2] : lm)
                    for (int l3 = 0; l3 <= 3; ++l3) {
                        const int m3 = m1 - m2;
                        if (std::abs(m3) > l3) continue;
                        sets.push_back({{l1, m1, true}, {l2, m2, false}, {l3, m3, false}});
                    }
        } else {
            while (sets.size() < 300) {
                std::vector<HarmonicIndex> v;
                for (int i = 0; i < n - 1; ++i) {
                    auto [l, m] = lm[pick(rng)];
                    v.push_back({l, m, i == 0 || i == 2});
                }
                // close the m sum with the last harmonic when possible
                const int need = -msum(v);
                std::vector<int> ls;
                for (int l = std::abs(need); l <= 3; ++l) ls.push_back(l);
                if (ls.empty()) continue;
                v.push_back({ls[sets.size() % ls.size()], need, false});
                sets.push_back(v);
            }
        }
        for (const auto& s : sets) {
            const double c = gaunt_integral(s), b = sphere_quadrature(s);
            w.add(c, b, std::abs(c - b) / std::max(1.0, std::abs(b)));
        }
        out.push_back(w.r);
        for (int i = 0; i < 20; ++i) {
            std::vector<HarmonicIndex> v;
            for (int j = 0; j < n; ++j) {
                auto [l, m] = lm[pick(rng)];
                v.push_back({l, m, j % 2 == 0});
            }
            if (msum(v) == 0) continue;
            const double c = gaunt_integral(v), b = sphere_quadrature(v);
            sel.add(c, b, std::max(std::abs(c), std::abs(b)));
        }
    }
    out.push_back(sel.r);
    {
        Worst w("wigner_d.rotation", "angular", 1e-12);
        std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi), u(-1.0, 1.0);
        for (int i = 0; i < 100; ++i) {
            const EulerAngles a{ang(rng), 0.5 * ang(rng), ang(rng)};
            const double ct = u(rng), ph = ang(rng), st = std::sqrt(1.0 - ct * ct);
            const Vec3 d{st * std::cos(ph), st * std::sin(ph), ct};
            for (int l = 0; l <= 2; ++l)
                for (int m = -l; m <= l; ++m) {
                    const cplx c = rotate_harmonic(l, m, a, std::acos(ct), ph);
                    const cplx b = rotation_bruteforce(l, m, a, d);
                    w.add(c, b, std::abs(c - b));
                }
        }
        out.push_back(w.r);
    }
    {
        Worst w("polarization.completeness", "angular", 1e-14);
        std::normal_distribution<double> g;
        for (int i = 0; i < 1000; ++i) {
            const Vec3 k{g(rng), g(rng), g(rng)};
            const double n = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
            const Mat3 p = polarization_completeness(k);
            double err = 0.0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    const double exact = (a == b ? 1.0 : 0.0) - k[a] * k[b] / (n * n);
                    err = std::max(err, std::abs(p[a][b] - exact));
                }
            w.add(1.0, 1.0, err);
        }
        out.push_back(w.r);
    }
}

void decomposition_family(std::vector<OracleReport>& out) {
    {
        // identity part minus dyadic part against the model weight 49152 a0^2 k^3/(4u+9)^6
        Worst w("decomposition.local", "decomposition", 1e-12);
        for (double ak : logspace(1e-3, 1e3, 100)) {
            const double a0 = 1.0, k = ak / a0;
            const Decomposition d = em_decomposition_local(k, a0);
            const double c = d.total * k * k * k;
            const double b = (model_prefactor(ModelKind::em_dipole, a0) * model_weight(ModelKind::em_dipole, a0, k)).real();
            w.add(c, b, rel(c, b));
        }
        out.push_back(w.r);
    }
    {
        Worst w("decomposition.nonlocal", "decomposition", 1e-12);
        for (double ak : logspace(1e-3, 1e3, 100)) {
            const DecompositionM d = em_decomposition_nonlocal(ak, 1.0);
            const double u = ak * ak;
            const double b = 49152.0 / std::pow(4.0 * u + 9.0, 6);
            w.add(d.total_j0, b, rel(d.total_j0, b));
            w.add(d.total_j2, b, rel(d.total_j2, b));
        }
        out.push_back(w.r);
    }
    {
        Worst w("model_weight.derivative_ratio", "decomposition", 1e-12);
        for (double ak : logspace(1e-3, 1e3, 100)) {
            const cplx s = model_weight(ModelKind::udw_scalar, 1.0, ak);
            const cplx d = model_weight(ModelKind::udw_derivative, 1.0, ak);
            w.add(d / s, ak * ak, rel(d / s, ak * ak));
        }
        out.push_back(w.r);
    }
}

void harvesting_family(std::vector<OracleReport>& out) {
    DetectorPair pair;
    pair.atom_a.a0 = 0.001 / 12.0;
    pair.atom_a.omega = 12.0;
    pair.atom_b = pair.atom_a;
    pair.atom_b.position = {0.0, 0.0, 11.0};
    pair.atom_b.switching_center = 10.0;
    {
        // local term against a plain quadrature of its defining k integral
        Worst w("local_term.em", "harvesting", 1e-8);
        double err = 0.0;
        const double c = local_term(pair, 'A', &err);
        const double a0 = pair.atom_a.a0, W = pair.atom_a.omega;
        auto f = [&](double k) {
            const double den = 4.0 * a0 * a0 * k * k + 9.0;
            return 49152.0 / kPi * a0 * a0 * k * k * k * std::exp(-0.5 * (W + k) * (W + k)) / std::pow(den, 6);
        };
        QuadTol tol;
        tol.rtol = 1e-12;
        tol.atol = 1e-300;
        auto b = integrate_adaptive(f, linspace(0.0, 40.0, 41), tol);
        w.add(c, b.value, rel(c, b.value), b.evaluations);
        out.push_back(w.r);
    }
    {
        // k-space M against the independent time-domain representation
        Worst w("nonlocal_term.time_domain", "harvesting", 1e-6);
        DetectorPair p = pair;
        p.atom_a.a0 = 0.001;
        p.atom_a.omega = 1.0;
        p.atom_b = p.atom_a;
        p.atom_b.position = {0.0, 0.0, 1.0};
        p.atom_b.switching_center = 1.0;
        try {
            const cplx c = nonlocal_term(p);
            const cplx b = nonlocal_term_time_domain(p);
            w.add(c, b, rel(c, b));
        } catch (const std::exception& e) {
            w.fail(e.what());
        }
        out.push_back(w.r);
    }
    {
        Worst w("cross_noise.coincident", "harvesting", 1e-8);
        DetectorPair p = pair;
        p.atom_b.position = {0.0, 0.0, 0.0};
        p.atom_b.switching_center = 0.0;
        const double l = local_term(p, 'A');
        const cplx x = cross_noise_term(p);
        w.add(l, x, rel(l, x));
        out.push_back(w.r);
    }
    {
        Worst w("negativity.partial_transpose", "harvesting", 1e-12);
        for (auto [laa, lbb, m] : {std::tuple{0.2, 0.4, 0.35}, {0.3, 0.3, 0.5}, {0.01, 0.02, 0.03}, {1e-3, 2e-3, 2e-3}}) {
            const HarvestTerms t = make_terms(laa, lbb, 0.0, cplx(m * 0.6, m * 0.8));
            const TwoQubitState s = assemble_state(t);
            const double b = -partial_transpose_min_eigenvalue(s.rho);
            w.add(s.negativity2, b, std::abs(s.negativity2 - b) / std::max(std::abs(b), 1e-3));
        }
        out.push_back(w.r);
    }
}

}  // namespace

std::vector<OracleReport> run_all() {
    std::vector<OracleReport> out;
    time_family(out);
    radial_family(out);
    angular_family(out);
    decomposition_family(out);
    harvesting_family(out);
    return out;
}

}  // namespace vh

// One line per acceptance criterion; exits 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "vh/harvesting.hpp"
#include "vh/mutation.hpp"
#include "vh/oracle.hpp"
#include "vh/survey.hpp"

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

const std::vector<vh::OracleReport>& oracles() {
    static const std::vector<vh::OracleReport> r = [] {
        vh::clear_mutations();
        return vh::run_all();
    }();
    return r;
}

Outcome from_oracles(std::initializer_list<const char*> names) {
    Outcome o{true, ""};
    for (const char* n : names) {
        auto it = std::find_if(oracles().begin(), oracles().end(), [&](const auto& r) { return r.name == n; });
        if (it == oracles().end()) return {false, std::string("missing oracle ") + n};
        o.pass = o.pass && it->pass;
        o.detail += n + fmt(" %.1e/%.0e (%g cases); ", it->rel_err, it->tolerance, double(it->cases));
    }
    return o;
}

vh::Params base(vh::ModelKind m, double wT, double d, double tba) {
    vh::Params p;
    p.model = m;
    p.a0_omega = 0.001;
    p.omega_T = wT;
    p.d_over_T = d;
    p.tba_over_T = tba;
    return p;
}

Outcome c1() {
    double worst = 0, worst_m = 0;
    for (int i = 0; i < 100; ++i) {
        double k = 1e-3 * std::pow(1e6, i / 99.0);
        double u = k * k;
        double lhs = 663552 * (16 * u * u - 8 * u + 9) - 24576 * (20 * u - 9) * (20 * u - 9);
        double rhs = 49152 * (4 * u + 9) * (4 * u + 9);
        worst = std::max(worst, std::abs(lhs - rhs) / rhs);
        auto d = vh::em_decomposition_local(k, 1.0);
        double want = 49152 / std::pow(4 * u + 9, 6);
        worst = std::max(worst, std::abs(d.identity - d.dyadic - want) / want);
        auto m = vh::em_decomposition_nonlocal(k, 1.0);
        // (j0 + j2) kernel: equal coefficients, magnitude of the local integrand
        worst_m = std::max(worst_m, std::abs(m.total_j0 - want) / want);
        worst_m = std::max(worst_m, std::abs(m.total_j2 - want) / want);
    }
    return {worst <= 1e-12 && worst_m <= 1e-12, fmt("L identity %.1e, M (j0+j2) kernel %.1e", worst, worst_m)};
}

Outcome c2() { return from_oracles({"time_integral.grid", "time_integral.unequal_gaps"}); }

Outcome c3() { return from_oracles({"radial_overlap.l0", "radial_overlap.l2", "radial_overlap.k0"}); }

Outcome c4() {
    return from_oracles({"gaunt.3_harmonics", "gaunt.4_harmonics", "gaunt.5_harmonics", "wigner_d.rotation",
                         "polarization.completeness"});
}

Outcome c5() {
    auto p = base(vh::ModelKind::em_dipole, 1.0, 1.0, 1.0);
    double M0 = vh::evaluate_point(p).abs_M, worst = 0;
    for (double th : {M_PI / 6, M_PI / 4, M_PI / 3}) {
        p.theta = th;
        double M = vh::evaluate_point(p).abs_M;
        worst = std::max(worst, std::abs(M - M0 * std::cos(th)) / (M0 * std::cos(th)));
    }
    bool zeros = true;
    for (double d : {0.5, 1.0, 5.0}) {
        p.theta = M_PI / 2;
        p.d_over_T = d;
        zeros = zeros && vh::evaluate_point(p).N == 0.0;
    }
    return {worst <= 1e-9 && zeros, fmt("cos law %.1e, N(pi/2) == 0: ", worst) + (zeros ? "yes" : "no")};
}

Outcome c6() {
    bool ok = true;
    double worst_cs = INFINITY;
    int n = 0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            auto pair = vh::make_pair(base(vh::ModelKind::em_dipole, 12.0, 4.0 * i, 4.0 * j));
            auto terms = vh::harvest(pair);
            auto rep = vh::positivity_report(terms);
            ok = ok && rep.all_ok();
            worst_cs = std::min(worst_cs, rep.cauchy_schwarz_gap / (terms.L_aa * terms.L_bb));
            ++n;
        }
    return {ok, fmt("%g points, min (L_AA L_BB - |L_AB|^2)/(L_AA L_BB) = %.3g", n, worst_cs)};
}

Outcome c7() {
    const double sigma = 1 / std::sqrt(2.0);
    // Gaussian switching: first harvestable point with d - t_BA >= 9 sigma
    vh::Params found;
    vh::PointResult g;
    bool have = false;
    for (double t : {0.0, 1.0, 2.0, 3.0}) {
        for (double d : {t + 9 * sigma + 0.1, t + 9 * sigma + 1.0}) {
            auto p = base(vh::ModelKind::em_dipole, 12.0, d, t);
            auto r = vh::evaluate_point(p);
            if (r.harvestable) {
                found = p;
                g = r;
                have = true;
                break;
            }
        }
        if (have) break;
    }
    if (!have) return {false, "no harvestable Gaussian point at d - t_BA >= 9 sigma"};
    auto pc = found;
    pc.switching = {vh::SwitchingVariant::cropped, 8.0};
    auto c = vh::evaluate_point(pc);
    bool n_ok = c.converged && c.N2 > 10 * c.err_N2 && c.N2 > 0;
    double diff = std::abs(c.N2 - g.N2) / std::abs(g.N2);
    bool diff_ok = diff < 1e-15;
    return {n_ok && diff_ok,
            fmt("d=%.3f t_BA=%.0f: N_gauss=%.3e, N_cropped=%.3e", found.d_over_T, found.tba_over_T, g.N, c.N) +
                fmt(" (err %.1e), |dN2|/N2=%.2e", c.err_N2, diff)};
}

Outcome c8() {
    double v = vh::wavefunction_overlap_log10(1e4, 1.0);
    return {std::abs(v / -4343 - 1) <= 0.01, fmt("log10 overlap(1e4 a0) = %.2f", v)};
}

Outcome c9() {
    vh::ScanOptions o;
    auto r = vh::model_comparison({"d_over_T", 0.0, 30.0, 121, vh::Spacing::linear},
                                  base(vh::ModelKind::em_dipole, 13.0, 0.0, 10.0), o);
    int em = -1, udw = -1;
    for (std::size_t i = 0; i < r.models.size(); ++i) {
        if (r.models[i] == vh::ModelKind::em_dipole) em = int(i);
        if (r.models[i] == vh::ModelKind::udw_scalar) udw = int(i);
    }
    double reach_em = -1, reach_udw = -1;
    bool stronger = true;
    int inside = 0;
    for (const auto& row : r.rows) {
        double d = row.coords[0];
        if (row.values[em].harvestable) reach_em = d;
        if (row.values[udw].harvestable) reach_udw = d;
        if (d < 10.0) {
            ++inside;
            stronger = stronger && row.values[em].N > row.values[udw].N;
        }
    }
    return {r.all_converged() && reach_em < reach_udw && stronger,
            fmt("reach EM %.2f < UdW %.2f; N_EM > N_UdW at all %g points with d < t_BA: ", reach_em, reach_udw, inside) +
                (stronger ? "yes" : "no")};
}

Outcome c10() {
    const double tba = 10.0, band = 8 / std::sqrt(2.0);
    vh::Axis w{"omega_T", 0.5, 20.0, 20, vh::Spacing::linear}, d{"d_over_T", 0.0, 30.0, 20, vh::Spacing::linear};
    auto r = vh::harvestability_map(w, d, base(vh::ModelKind::em_dipole, 1.0, 0.0, tba));
    std::map<double, double> min_w;  // d -> smallest harvestable Omega T
    bool spacelike = false;
    for (const auto& row : r.rows) {
        double wt = row.coords[0], dd = row.coords[1];
        if (!row.values[0].harvestable) continue;
        if (dd - tba >= band) spacelike = true;
        auto it = min_w.find(dd);
        if (it == min_w.end() || wt < it->second) min_w[dd] = wt;
    }
    bool mono = true;
    double prev = -1, bad_d = NAN, bad_prev = NAN, bad_w = NAN;
    for (auto [dd, wt] : min_w) {
        if (wt < prev && mono) {
            mono = false;
            bad_d = dd;
            bad_w = wt;
            bad_prev = prev;
        }
        prev = std::max(prev, wt);
    }
    std::string detail = std::string("spacelike harvesting: ") + (spacelike ? "yes" : "no") + "; min Omega T nondecreasing in d: ";
    detail += mono ? "yes" : fmt("no (%.2f at d=%.2f after %.2f)", bad_w, bad_d, bad_prev);
    return {r.all_converged() && spacelike && mono, detail};
}

Outcome c11() {
    double worst = 0;
    for (double alpha : {1e-3, 1e-1, 1.0})
        for (int i = 0; i < 200; ++i) {
            double k = 1e-3 * std::pow(1e6, i / 199.0);
            auto s = vh::model_weight(vh::ModelKind::udw_scalar, alpha, k);
            auto dv = vh::model_weight(vh::ModelKind::udw_derivative, alpha, k);
            worst = std::max(worst, std::abs(dv / s - k * k) / (k * k));
        }
    double pref = vh::model_prefactor(vh::ModelKind::udw_derivative, 0.1) / vh::model_prefactor(vh::ModelKind::udw_scalar, 0.1);
    return {worst <= 1e-12 && pref == 1.0, fmt("max |ratio/k^2 - 1| = %.1e, prefactor ratio %g", worst, pref)};
}

int run_cli(const std::string& env) {
    std::string cmd = env + " '" VH_CLI_PATH "' selfcheck > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Outcome c12() {
    int clean = run_cli("VH_MUTATE=");
    std::string caught, missed;
    for (int c = 0; c < static_cast<int>(vh::ClosedForm::count); ++c) {
        std::string name = vh::to_string(static_cast<vh::ClosedForm>(c));
        int rc = run_cli("VH_MUTATE=" + name + ":1e-6");
        (rc == 1 ? caught : missed) += name + " ";
    }
    return {clean == 0 && missed.empty(),
            fmt("selfcheck exit %g; mutations caught: ", clean) + caught + (missed.empty() ? "" : "missed: " + missed)};
}

}  // namespace

int main() {
    const std::vector<std::function<Outcome()>> criteria = {c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12};
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %2zu: %s  %s [%.1fs]\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str(), s);
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed ? 1 : 0;
}

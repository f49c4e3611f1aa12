#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include "vh/survey.hpp"

namespace {
vh::ScanResult small_scan(unsigned threads) {
    vh::ScanGrid g;
    g.axes = {{"d_over_T", 0.0, 12.0, 4, vh::Spacing::linear}, {"tba_over_T", 0.0, 10.0, 3, vh::Spacing::linear}};
    g.fixed.omega_T = 6.0;
    g.models = {vh::ModelKind::em_dipole, vh::ModelKind::udw_scalar};
    vh::ScanOptions o;
    o.threads = threads;
    return vh::run_scan(g, o);
}
std::string csv(const vh::ScanResult& r) {
    std::ostringstream os;
    vh::write_csv(os, r);
    return os.str();
}
}  // namespace

TEST_CASE("axis values") {
    vh::Axis lin{"omega_T", 1, 3, 3, vh::Spacing::linear};
    CHECK(lin.values() == std::vector<double>{1, 2, 3});
    vh::Axis lg{"omega_T", 1, 100, 3, vh::Spacing::log};
    auto v = lg.values();
    CHECK(v[1] == doctest::Approx(10).epsilon(1e-15));
    CHECK(v.back() == 100);
    CHECK_THROWS_AS((vh::Axis{"omega_T", 0, 1, 3, vh::Spacing::log}.values()), vh::domain_error);
    CHECK_THROWS_AS((vh::Axis{"omega_T", 1, 1, 3, vh::Spacing::linear}.values()), vh::domain_error);
    CHECK_THROWS_AS((vh::Axis{"omega_T", 0, 1, 1, vh::Spacing::linear}.values()), vh::domain_error);
}

TEST_CASE("params by name") {
    vh::Params p;
    for (const char* n : {"a0_omega", "omega_T", "omega_T_b", "d_over_T", "tba_over_T", "psi", "theta", "phi", "coupling",
                          "crop_sigmas"}) {
        vh::set_param(p, n, 0.25);
        CHECK(vh::get_param(p, n) == 0.25);
    }
    CHECK_THROWS_AS(vh::set_param(p, "speed", 1.0), vh::domain_error);
}

TEST_CASE("make_pair geometry") {
    vh::Params p;
    p.omega_T = 4;
    p.a0_omega = 0.002;
    p.d_over_T = 3;
    p.tba_over_T = 2;
    auto pair = vh::make_pair(p);
    CHECK(pair.atom_a.a0 == doctest::Approx(0.0005));
    CHECK(pair.atom_b.position[2] == 3.0);
    CHECK(pair.atom_b.switching_center - pair.atom_a.switching_center == 2.0);
    CHECK(pair.atom_b.omega == 4.0);
}

TEST_CASE("rows are clamped and deterministic across thread counts") {
    auto a = small_scan(1);
    auto b = small_scan(3);
    REQUIRE(a.rows.size() == 12);
    for (const auto& row : a.rows)
        for (const auto& v : row.values) CHECK(v.N == std::max(0.0, v.N2));
    // canonical order: last axis fastest
    CHECK(a.rows[1].coords == std::vector<double>{0.0, 5.0});
    CHECK(a.rows[3].coords == std::vector<double>{4.0, 0.0});
    CHECK(csv(a) == csv(b));
    CHECK(csv(a) == csv(small_scan(1)));
}

TEST_CASE("csv layout") {
    auto s = csv(small_scan(2));
    std::istringstream is(s);
    std::string line, header;
    int comments = 0, data = 0;
    while (std::getline(is, line)) {
        if (line.rfind("#", 0) == 0) {
            ++comments;
            continue;
        }
        if (header.empty()) {
            header = line;
            continue;
        }
        ++data;
        CHECK(line.find(' ') == std::string::npos);
    }
    CHECK(comments > 3);
    CHECK(data == 12);
    CHECK(header.rfind("d_over_T,tba_over_T,", 0) == 0);
    CHECK(header.find("N_em") != std::string::npos);
    CHECK(header.find("N_udw") != std::string::npos);
    CHECK(vh::format_double(0.1) == "0.10000000000000001");
    CHECK(vh::format_double(NAN) == "nan");
}

TEST_CASE("json output parses as an object with rows") {
    vh::ScanGrid g;
    g.axes = {{"d_over_T", 0.0, 2.0, 2, vh::Spacing::linear}};
    std::ostringstream os;
    vh::write_json(os, vh::run_scan(g));
    auto s = os.str();
    CHECK(s.front() == '{');
    CHECK(s.find("\"rows\"") != std::string::npos);
}

TEST_CASE("optimal orientations") {
    auto o = vh::optimal_orientations();
    CHECK(o.size() == 96);
    std::set<std::tuple<double, double, double>> triples;
    std::set<std::vector<long>> distinct;  // rotation matrices, rounded
    const double id = vh::projection_objective({});
    CHECK(id == doctest::Approx(3.0));
    for (const auto& a : o) {
        triples.insert({a.psi, a.theta, a.phi});
        std::vector<long> key;
        for (const auto& row : vh::rotation_matrix(a))
            for (double x : row) key.push_back(std::lround(x * 1e9));
        distinct.insert(key);
        CHECK(vh::projection_objective(a) >= id - 1e-12);
    }
    CHECK(triples.size() == 96);
    CHECK(distinct.size() == 64);
}

TEST_CASE("orientation scan zeros at theta = pi/2") {
    vh::Params p;
    auto r = vh::orientation_scan(p, {"theta", 0, M_PI, 3, vh::Spacing::linear});
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows[1].values[0].N == 0.0);
    CHECK(r.rows[0].values[0].N > 0.0);
}

TEST_CASE("non-convergence is reported per row") {
    vh::ScanGrid g;
    g.axes = {{"d_over_T", 1.0, 2.0, 2, vh::Spacing::linear}};
    vh::ScanOptions o;
    o.tol.max_evals = 50;
    o.tol.rtol = 1e-13;
    auto r = vh::run_scan(g, o);
    CHECK_FALSE(r.all_converged());
    CHECK_FALSE(r.rows[0].values[0].error.empty());
    CHECK(std::isnan(r.rows[0].values[0].N2));
}

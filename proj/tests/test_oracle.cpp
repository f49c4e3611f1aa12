#include <doctest.h>

#include <string>

#include "vh/mutation.hpp"
#include "vh/oracle.hpp"

namespace {
bool all_pass(const std::vector<vh::OracleReport>& r) {
    for (const auto& x : r)
        if (!x.pass) return false;
    return true;
}
}  // namespace

TEST_CASE("every oracle passes") {
    vh::clear_mutations();
    auto r = vh::run_all();
    CHECK(r.size() >= 20);
    for (const auto& x : r) {
        INFO(x.name << " rel_err " << x.rel_err << " tol " << x.tolerance);
        CHECK(x.pass);
        CHECK(x.tolerance > 0);
    }
}

TEST_CASE("each single mutation is caught") {
    for (int c = 0; c < static_cast<int>(vh::ClosedForm::count); ++c) {
        auto cf = static_cast<vh::ClosedForm>(c);
        vh::clear_mutations();
        vh::set_mutation(cf, 1e-6);
        INFO(vh::to_string(cf));
        CHECK_FALSE(all_pass(vh::run_all()));
    }
    vh::clear_mutations();
}

TEST_CASE("partial transpose oracle") {
    vh::Mat4 rho{};
    rho[0][0] = 0.5;
    rho[3][3] = 0.5;
    rho[0][3] = 0.5;
    rho[3][0] = 0.5;  // Bell state, min eigenvalue of the transpose is -1/2
    CHECK(vh::partial_transpose_min_eigenvalue(rho) == doctest::Approx(-0.5).epsilon(1e-14));
}

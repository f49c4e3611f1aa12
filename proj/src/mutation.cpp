#include "vh/mutation.hpp"

#include <array>
#include <atomic>
#include <cstdlib>
#include <stdexcept>

#include "vh/specfun.hpp"

namespace vh {

namespace {

constexpr std::size_t kCount = std::size_t(ClosedForm::count);

std::array<std::atomic<double>, kCount>& table() {
    static std::array<std::atomic<double>, kCount> t;
    static const bool init = [] {
        for (auto& v : t) v = 1.0;
        const char* env = std::getenv("VH_MUTATE");
        if (!env || !*env) return true;
        std::string s(env);
        double eps = 1e-6;
        auto colon = s.find(':');
        if (colon != std::string::npos) {
            eps = std::strtod(s.c_str() + colon + 1, nullptr);
            s.resize(colon);
        }
        for (std::size_t i = 0; i < kCount; ++i)
            if (to_string(ClosedForm(i)) == s) t[i] = 1.0 + eps;
        return true;
    }();
    (void)init;
    return t;
}

}  // namespace

std::string to_string(ClosedForm c) {
    switch (c) {
        case ClosedForm::time_integral: return "time_integral";
        case ClosedForm::radial_overlap: return "radial_overlap";
        case ClosedForm::gaunt: return "gaunt";
        case ClosedForm::wigner_d: return "wigner_d";
        case ClosedForm::polarization: return "polarization";
        case ClosedForm::model_weight: return "model_weight";
        case ClosedForm::count: break;
    }
    throw domain_error("unknown closed form");
}

double mutation_factor(ClosedForm c) { return table()[std::size_t(c)].load(std::memory_order_relaxed); }

void set_mutation(ClosedForm c, double eps) { table()[std::size_t(c)] = 1.0 + eps; }

void clear_mutations() {
    for (auto& v : table()) v = 1.0;
}

}  // namespace vh

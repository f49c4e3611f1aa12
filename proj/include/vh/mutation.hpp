#pragma once

#include <string>

namespace vh {

// Closed forms that can be perturbed to check that the oracles notice.
enum class ClosedForm { time_integral, radial_overlap, gaunt, wigner_d, polarization, model_weight, count };

std::string to_string(ClosedForm c);

// 1 + eps for the mutated closed form, 1 otherwise. The initial state comes from
// VH_MUTATE=<name>[:eps] (eps defaults to 1e-6).
double mutation_factor(ClosedForm c);
void set_mutation(ClosedForm c, double eps);
void clear_mutations();

}  // namespace vh

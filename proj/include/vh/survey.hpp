#pragma once

#include <cmath>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "vh/harvesting.hpp"

namespace vh {

enum class Spacing { linear, log };

struct Axis {
    std::string name;  // one of the Params field names below
    double min = 0.0, max = 1.0;
    int count = 2;
    Spacing spacing = Spacing::linear;
    std::vector<double> values() const;
};

// Dimensionless inputs, T = 1.
struct Params {
    ModelKind model = ModelKind::em_dipole;
    double a0_omega = 0.001;
    double omega_T = 1.0;
    double omega_T_b = std::numeric_limits<double>::quiet_NaN();  // NaN: same as omega_T
    double d_over_T = 1.0;
    double tba_over_T = 1.0;
    double psi = 0.0, theta = 0.0, phi = 0.0;
    double coupling = 1.0;
    SwitchingKind switching{};
};

// Names accepted by set_param / get_param: a0_omega, omega_T, omega_T_b,
// d_over_T, tba_over_T, psi, theta, phi, coupling, crop_sigmas.
void set_param(Params& p, const std::string& name, double v);
double get_param(const Params& p, const std::string& name);

DetectorPair make_pair(const Params& p);

struct PointResult {
    double L_aa = 0.0, L_bb = 0.0, abs_L_ab = 0.0, abs_M = 0.0;
    double N2 = 0.0, N = 0.0, concurrence = 0.0;
    double err_N2 = 0.0;
    // Scaled by exp(log_scale): keeps sign and ratios when the physical values underflow.
    double log_scale = 0.0;
    double N2_scaled = 0.0, err_N2_scaled = 0.0;
    bool harvestable = false;
    bool converged = true;
    std::string error;
};

// threshold_factor: a point is harvestable when N2 exceeds this multiple of its error.
PointResult evaluate_point(const Params& p, const QuadTol& tol = {}, double threshold_factor = 10.0);

struct ScanGrid {
    std::vector<Axis> axes;
    Params fixed;
    std::vector<ModelKind> models;  // empty: fixed.model
};

struct ScanRow {
    std::vector<double> coords;
    std::vector<PointResult> values;  // one per model
};

struct ScanResult {
    std::vector<std::string> axis_names;
    std::vector<ModelKind> models;
    Params fixed;
    QuadTol tol;
    double threshold_factor = 10.0;
    std::vector<ScanRow> rows;
    bool all_converged() const;
};

struct ScanOptions {
    QuadTol tol{};
    unsigned threads = 1;
    double threshold_factor = 10.0;
};

// Rows in row-major order over the axes (last axis fastest), independent of threads.
ScanResult run_scan(const ScanGrid& grid, const ScanOptions& opt = {});

ScanResult orientation_scan(const Params& fixed, const Axis& theta_axis, const ScanOptions& opt = {});
ScanResult harvestability_map(const Axis& omega_axis, const Axis& distance_axis, const Params& fixed,
                              const ScanOptions& opt = {});
ScanResult spacetime_map(const Axis& distance_axis, const Axis& delay_axis, const Params& fixed,
                         const ScanOptions& opt = {});
ScanResult model_comparison(const Axis& distance_axis, const Params& fixed, const ScanOptions& opt = {});

std::vector<EulerAngles> optimal_orientations();

// Sum of |projections| of B's frame axes onto A's frame axes.
double projection_objective(const EulerAngles& a);

// Comment header plus one line per row; floats with 17 significant digits.
void write_csv(std::ostream& os, const ScanResult& r, const std::vector<std::string>& columns = {});
void write_json(std::ostream& os, const ScanResult& r);
std::string format_double(double v);

// Column names available to write_csv for a result (per-model columns are
// suffixed with _<model> when several models are present).
std::vector<std::string> default_columns(const ScanResult& r);

}  // namespace vh

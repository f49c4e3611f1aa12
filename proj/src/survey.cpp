#include "vh/survey.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <ostream>
#include <set>
#include <thread>
#include <tuple>

#include "json.hpp"

namespace vh {

namespace {

constexpr double kPi = 3.14159265358979323846;

double omega_b(const Params& p) { return std::isnan(p.omega_T_b) ? p.omega_T : p.omega_T_b; }

}  // namespace

std::vector<double> Axis::values() const {
    if (count < 2) throw domain_error("axis '" + name + "': count must be at least 2");
    if (!(max > min)) throw domain_error("axis '" + name + "': max must exceed min");
    if (spacing == Spacing::log && !(min > 0.0)) throw domain_error("axis '" + name + "': log axis needs min > 0");
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i) {
        const double f = double(i) / double(count - 1);
        v[i] = spacing == Spacing::linear ? min + (max - min) * f : min * std::pow(max / min, f);
    }
    return v;
}

void set_param(Params& p, const std::string& n, double v) {
    if (n == "a0_omega") p.a0_omega = v;
    else if (n == "omega_T") p.omega_T = v;
    else if (n == "omega_T_b") p.omega_T_b = v;
    else if (n == "d_over_T") p.d_over_T = v;
    else if (n == "tba_over_T") p.tba_over_T = v;
    else if (n == "psi") p.psi = v;
    else if (n == "theta") p.theta = v;
    else if (n == "phi") p.phi = v;
    else if (n == "coupling") p.coupling = v;
    else if (n == "crop_sigmas") p.switching.crop_sigmas = v;
    else throw domain_error("unknown parameter '" + n + "'");
}

double get_param(const Params& p, const std::string& n) {
    if (n == "a0_omega") return p.a0_omega;
    if (n == "omega_T") return p.omega_T;
    if (n == "omega_T_b") return omega_b(p);
    if (n == "d_over_T") return p.d_over_T;
    if (n == "tba_over_T") return p.tba_over_T;
    if (n == "psi") return p.psi;
    if (n == "theta") return p.theta;
    if (n == "phi") return p.phi;
    if (n == "coupling") return p.coupling;
    if (n == "crop_sigmas") return p.switching.crop_sigmas;
    throw domain_error("unknown parameter '" + n + "'");
}

DetectorPair make_pair(const Params& p) {
    if (!(p.a0_omega > 0.0)) throw domain_error("a0_omega must be positive");
    if (!(p.omega_T > 0.0) || !(omega_b(p) > 0.0)) throw domain_error("omega_T must be positive");
    if (p.d_over_T < 0.0) throw domain_error("d_over_T must be non-negative");
    DetectorPair pair;
    pair.model = p.model;
    pair.coupling = p.coupling;
    pair.switching = p.switching;
    // a0 is fixed by atom A's gap: a0 = (a0 Omega) / Omega_A
    const double a0 = p.a0_omega / p.omega_T;
    pair.atom_a.a0 = a0;
    pair.atom_a.omega = p.omega_T;
    pair.atom_b = pair.atom_a;
    pair.atom_b.omega = omega_b(p);
    pair.atom_b.position = {0.0, 0.0, p.d_over_T};
    pair.atom_b.switching_center = p.tba_over_T;
    pair.atom_b.orientation = {p.psi, p.theta, p.phi};
    return pair;
}

PointResult evaluate_point(const Params& p, const QuadTol& tol, double threshold_factor) {
    PointResult r;
    DetectorPair pair = make_pair(p);
    try {
        HarvestTerms h = harvest(pair, tol);
        r.L_aa = h.L_aa;
        r.L_bb = h.L_bb;
        r.abs_L_ab = std::abs(h.L_ab);
        r.abs_M = std::abs(h.M);
        r.log_scale = h.log_scale;
        r.N2_scaled = negativity2(h.s_L_aa, h.s_L_bb, std::abs(h.s_M));
        r.err_N2_scaled = h.s_err_M + h.s_err_L_aa + h.s_err_L_bb;
        const double f = std::exp(-h.log_scale);
        r.N2 = r.N2_scaled * f;
        r.N = std::max(0.0, r.N2);
        r.err_N2 = r.err_N2_scaled * f;
        r.concurrence = 2.0 * std::max(0.0, r.abs_M - std::sqrt(r.L_aa * r.L_bb));
        r.harvestable = r.N2_scaled > threshold_factor * r.err_N2_scaled;
        r.converged = h.converged;
    } catch (const convergence_error& e) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        r.L_aa = r.L_bb = r.abs_L_ab = r.abs_M = r.N2 = r.N = r.N2_scaled = nan;
        r.err_N2 = r.err_N2_scaled = nan;
        r.converged = false;
        r.error = e.what();
    }
    return r;
}

bool ScanResult::all_converged() const {
    for (const auto& row : rows)
        for (const auto& v : row.values)
            if (!v.converged) return false;
    return true;
}

ScanResult run_scan(const ScanGrid& grid, const ScanOptions& opt) {
    ScanResult out;
    out.fixed = grid.fixed;
    out.tol = opt.tol;
    out.threshold_factor = opt.threshold_factor;
    out.models = grid.models.empty() ? std::vector<ModelKind>{grid.fixed.model} : grid.models;
    std::vector<std::vector<double>> axis_vals;
    std::size_t total = 1;
    for (const auto& ax : grid.axes) {
        get_param(grid.fixed, ax.name);  // validates the name
        out.axis_names.push_back(ax.name);
        axis_vals.push_back(ax.values());
        total *= axis_vals.back().size();
    }
    out.rows.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
        std::size_t rem = i;
        std::vector<double> c(axis_vals.size());
        for (std::size_t a = axis_vals.size(); a-- > 0;) {
            c[a] = axis_vals[a][rem % axis_vals[a].size()];
            rem /= axis_vals[a].size();
        }
        out.rows[i].coords = c;
        out.rows[i].values.resize(out.models.size());
    }
    const std::size_t jobs = total * out.models.size();
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs; j = next++) {
            const std::size_t row = j / out.models.size(), m = j % out.models.size();
            Params p = grid.fixed;
            p.model = out.models[m];
            for (std::size_t a = 0; a < out.axis_names.size(); ++a) set_param(p, out.axis_names[a], out.rows[row].coords[a]);
            out.rows[row].values[m] = evaluate_point(p, opt.tol, opt.threshold_factor);
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(opt.threads, unsigned(jobs)));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return out;
}

ScanResult orientation_scan(const Params& fixed, const Axis& theta_axis, const ScanOptions& opt) {
    if (fixed.model != ModelKind::em_dipole) throw domain_error("orientation_scan: EM model required");
    Axis ax = theta_axis;
    ax.name = "theta";
    return run_scan({{ax}, fixed, {}}, opt);
}

ScanResult harvestability_map(const Axis& omega_axis, const Axis& distance_axis, const Params& fixed,
                              const ScanOptions& opt) {
    Axis o = omega_axis, d = distance_axis;
    o.name = "omega_T";
    d.name = "d_over_T";
    return run_scan({{o, d}, fixed, {}}, opt);
}

ScanResult spacetime_map(const Axis& distance_axis, const Axis& delay_axis, const Params& fixed,
                         const ScanOptions& opt) {
    Axis d = distance_axis, t = delay_axis;
    d.name = "d_over_T";
    t.name = "tba_over_T";
    return run_scan({{d, t}, fixed, {}}, opt);
}

ScanResult model_comparison(const Axis& distance_axis, const Params& fixed, const ScanOptions& opt) {
    Axis d = distance_axis;
    d.name = "d_over_T";
    Params p = fixed;
    p.psi = p.theta = p.phi = 0.0;  // parallel orbitals
    return run_scan({{d}, p, {ModelKind::em_dipole, ModelKind::udw_scalar, ModelKind::udw_derivative}}, opt);
}

std::vector<EulerAngles> optimal_orientations() {
    const double th1 = std::acos(1.0 / 3.0);
    const double th2 = std::acos(-2.0 / 3.0);
    const double ps1 = std::atan(0.5), ps2 = std::atan(2.0);
    std::vector<EulerAngles> out;
    std::set<std::tuple<double, double, double>> seen;
    auto add = [&](double a, double b, double c) {
        if (seen.insert({a, b, c}).second) out.push_back({a, b, c});
    };
    for (int n = 0; n < 4; ++n)
        for (int m = 0; m < 4; ++m) add(kPi / 4 + n * kPi / 2, th1, kPi / 4 + m * kPi / 2);
    for (int n = 0; n < 4; ++n)
        for (int m = 0; m < 4; ++m) add(kPi / 4 + n * kPi / 2, kPi - th1, kPi / 4 + m * kPi / 2);
    for (int n = 0; n < 4; ++n)
        for (int l = 1; l <= 8; ++l) add(ps1 + n * kPi / 2, th2, l * kPi / 2 - ps1);
    for (int n = 0; n < 4; ++n)
        for (int l = 1; l <= 8; ++l) add(ps2 + n * kPi / 2, th2, l * kPi / 2 - ps2);
    return out;
}

double projection_objective(const EulerAngles& a) {
    Mat3 r = rotation_matrix(a);
    double s = 0.0;
    for (const auto& row : r)
        for (double x : row) s += std::abs(x);
    return s;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

double column_value(const PointResult& p, const std::string& c) {
    if (c == "L_aa") return p.L_aa;
    if (c == "L_bb") return p.L_bb;
    if (c == "abs_L_ab") return p.abs_L_ab;
    if (c == "abs_M") return p.abs_M;
    if (c == "N2") return p.N2;
    if (c == "N") return p.N;
    if (c == "concurrence") return p.concurrence;
    if (c == "err_N2") return p.err_N2;
    if (c == "log_scale") return p.log_scale;
    if (c == "N2_scaled") return p.N2_scaled;
    if (c == "err_N2_scaled") return p.err_N2_scaled;
    if (c == "harvestable") return p.harvestable ? 1.0 : 0.0;
    if (c == "converged") return p.converged ? 1.0 : 0.0;
    throw domain_error("unknown column '" + c + "'");
}

const std::vector<std::string> kValueColumns = {"L_aa",      "L_bb",      "abs_L_ab",      "abs_M",
                                                 "N2",        "N",         "concurrence",   "err_N2",
                                                 "log_scale", "N2_scaled", "err_N2_scaled", "harvestable",
                                                 "converged"};

bool is_int_column(const std::string& c) {
    return c.rfind("harvestable", 0) == 0 || c.rfind("converged", 0) == 0;
}

}  // namespace

std::vector<std::string> default_columns(const ScanResult& r) {
    std::vector<std::string> cols = r.axis_names;
    for (const auto& c : kValueColumns) {
        if (r.models.size() == 1) {
            cols.push_back(c);
        } else {
            for (auto m : r.models) cols.push_back(c + "_" + to_string(m));
        }
    }
    return cols;
}

void write_csv(std::ostream& os, const ScanResult& r, const std::vector<std::string>& columns) {
    const std::vector<std::string> cols = columns.empty() ? default_columns(r) : columns;
    os << "# vacharvest scan\n";
    os << "# models:";
    for (auto m : r.models) os << ' ' << to_string(m);
    os << '\n';
    os << "# fixed:";
    for (const char* n : {"a0_omega", "omega_T", "omega_T_b", "d_over_T", "tba_over_T", "psi", "theta", "phi",
                          "coupling", "crop_sigmas"}) {
        if (std::find(r.axis_names.begin(), r.axis_names.end(), n) != r.axis_names.end()) continue;
        os << ' ' << n << '=' << format_double(get_param(r.fixed, n));
    }
    os << '\n';
    os << "# switching: " << (r.fixed.switching.variant == SwitchingVariant::gaussian ? "gaussian" : "cropped") << '\n';
    os << "# tolerance: rtol=" << format_double(r.tol.rtol) << " atol=" << format_double(r.tol.atol) << '\n';
    os << "# threshold_factor: " << format_double(r.threshold_factor) << '\n';
    os << "# version: " << VH_VERSION_STRING << '\n';
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const auto& row : r.rows) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i) os << ',';
            const std::string& c = cols[i];
            auto ax = std::find(r.axis_names.begin(), r.axis_names.end(), c);
            if (ax != r.axis_names.end()) {
                os << format_double(row.coords[std::size_t(ax - r.axis_names.begin())]);
                continue;
            }
            std::size_t mi = 0;
            std::string base = c;
            if (r.models.size() > 1) {
                auto us = c.rfind('_');
                if (us == std::string::npos) throw domain_error("column '" + c + "' needs a model suffix");
                const ModelKind m = model_from_string(c.substr(us + 1));
                mi = std::size_t(std::find(r.models.begin(), r.models.end(), m) - r.models.begin());
                if (mi >= r.models.size()) throw domain_error("column '" + c + "': model not in result");
                base = c.substr(0, us);
            }
            const double v = column_value(row.values[mi], base);
            if (is_int_column(c))
                os << (v != 0.0 ? 1 : 0);
            else
                os << format_double(v);
        }
        os << '\n';
    }
}

void write_json(std::ostream& os, const ScanResult& r) {
    using nlohmann::json;
    auto num = [](double v) -> json {
        if (std::isfinite(v)) return v;
        return nullptr;
    };
    json j;
    j["axes"] = r.axis_names;
    std::vector<std::string> models;
    for (auto m : r.models) models.push_back(to_string(m));
    j["models"] = models;
    json fixed;
    for (const char* n : {"a0_omega", "omega_T", "omega_T_b", "d_over_T", "tba_over_T", "psi", "theta", "phi",
                          "coupling", "crop_sigmas"})
        fixed[n] = num(get_param(r.fixed, n));
    fixed["switching"] = r.fixed.switching.variant == SwitchingVariant::gaussian ? "gaussian" : "cropped";
    j["fixed"] = fixed;
    j["tolerance"] = {{"rtol", r.tol.rtol}, {"atol", r.tol.atol}};
    j["threshold_factor"] = r.threshold_factor;
    j["version"] = VH_VERSION_STRING;
    json rows = json::array();
    for (const auto& row : r.rows) {
        json jr;
        jr["coords"] = row.coords;
        json vals = json::array();
        for (const auto& v : row.values) {
            json jv;
            for (const auto& c : kValueColumns) {
                if (is_int_column(c))
                    jv[c] = column_value(v, c) != 0.0;
                else
                    jv[c] = num(column_value(v, c));
            }
            if (!v.error.empty()) jv["error"] = v.error;
            vals.push_back(jv);
        }
        jr["values"] = vals;
        rows.push_back(jr);
    }
    j["rows"] = rows;
    os << j.dump(2) << '\n';
}

}  // namespace vh

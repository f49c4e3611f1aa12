// vh: single points, scans, figure data and the self-check.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vh/oracle.hpp"
#include "vh/survey.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitConvergence = 3;
constexpr double kPi = 3.14159265358979323846;

struct Common {
    std::string model = "em";
    std::string format = "csv";
    std::string switching = "gaussian";
    double crop_sigmas = 8.0;
    double tol_rel = 1e-10;
    double tol_abs = 1e-16;
    double threshold_factor = 10.0;
    unsigned threads = 1;
    bool strict = false;
};

void add_common(CLI::App* app, Common& c, bool with_model = true) {
    if (with_model)
        app->add_option("--model", c.model, "em | udw | derivative")->envname("VH_MODEL")->capture_default_str();
    app->add_option("--format", c.format, "csv | json")
        ->envname("VH_FORMAT")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app->add_option("--switching", c.switching, "gaussian | cropped")
        ->envname("VH_SWITCHING")
        ->check(CLI::IsMember({"gaussian", "cropped"}))
        ->capture_default_str();
    app->add_option("--crop-sigmas", c.crop_sigmas, "cropping half-width in sigma = T/sqrt2")
        ->envname("VH_CROP_SIGMAS")
        ->capture_default_str();
    app->add_option("--tol-rel", c.tol_rel, "relative quadrature tolerance")->envname("VH_TOL_REL")->capture_default_str();
    app->add_option("--tol-abs", c.tol_abs, "absolute tolerance, in units of the local noise")
        ->envname("VH_TOL_ABS")
        ->capture_default_str();
    app->add_option("--threshold-factor", c.threshold_factor, "harvestable when N2 > factor x error")
        ->envname("VH_THRESHOLD_FACTOR")
        ->capture_default_str();
    app->add_option("--threads", c.threads, "worker threads")->envname("VH_THREADS")->capture_default_str();
    app->add_flag("--strict", c.strict, "exit 3 when any point fails to converge")->envname("VH_STRICT");
}

void add_params(CLI::App* app, vh::Params& p) {
    app->add_option("--a0-omega", p.a0_omega, "a0 Omega")->envname("VH_A0_OMEGA")->capture_default_str();
    app->add_option("--omega-T", p.omega_T, "Omega T (atom A; both unless --omega-T-b)")
        ->envname("VH_OMEGA_T")
        ->capture_default_str();
    app->add_option("--omega-T-b", p.omega_T_b, "Omega_B T")->envname("VH_OMEGA_T_B");
    app->add_option("--d", p.d_over_T, "d / T")->envname("VH_D")->capture_default_str();
    app->add_option("--tba", p.tba_over_T, "t_BA / T")->envname("VH_TBA")->capture_default_str();
    app->add_option("--psi", p.psi, "Euler angle psi")->envname("VH_PSI")->capture_default_str();
    app->add_option("--theta", p.theta, "Euler angle theta")->envname("VH_THETA")->capture_default_str();
    app->add_option("--phi", p.phi, "Euler angle phi")->envname("VH_PHI")->capture_default_str();
    app->add_option("--coupling", p.coupling, "coupling e")->envname("VH_COUPLING")->capture_default_str();
}

vh::QuadTol tolerance(const Common& c) {
    if (!(c.tol_rel > 0.0) || !(c.tol_abs >= 0.0)) throw vh::domain_error("tolerances must be positive");
    vh::QuadTol t;
    t.rtol = c.tol_rel;
    t.atol = c.tol_abs;
    return t;
}

void apply(const Common& c, vh::Params& p) {
    p.model = vh::model_from_string(c.model);
    p.switching.variant = c.switching == "cropped" ? vh::SwitchingVariant::cropped : vh::SwitchingVariant::gaussian;
    p.switching.crop_sigmas = c.crop_sigmas;
    if (c.threads == 0) throw vh::domain_error("--threads must be at least 1");
}

vh::ScanOptions scan_options(const Common& c) {
    vh::ScanOptions o;
    o.tol = tolerance(c);
    o.threads = c.threads;
    o.threshold_factor = c.threshold_factor;
    return o;
}

// compute

int cmd_compute(const Common& c, vh::Params p) {
    apply(c, p);
    const vh::PointResult r = vh::evaluate_point(p, tolerance(c), c.threshold_factor);
    const std::vector<std::pair<const char*, double>> fields = {
        {"L_aa", r.L_aa},           {"L_bb", r.L_bb},           {"abs_L_ab", r.abs_L_ab},
        {"abs_M", r.abs_M},         {"N2", r.N2},               {"N", r.N},
        {"concurrence", r.concurrence}, {"err_N2", r.err_N2},   {"log_scale", r.log_scale},
        {"N2_scaled", r.N2_scaled}, {"err_N2_scaled", r.err_N2_scaled}};
    if (c.format == "json") {
        nlohmann::json j;
        j["model"] = vh::to_string(p.model);
        for (auto& [k, v] : fields) j[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
        j["harvestable"] = r.harvestable;
        j["converged"] = r.converged;
        if (!r.error.empty()) j["error"] = r.error;
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << "model," << vh::to_string(p.model) << '\n';
        for (auto& [k, v] : fields) std::cout << k << ',' << vh::format_double(v) << '\n';
        std::cout << "harvestable," << (r.harvestable ? 1 : 0) << '\n';
        std::cout << "converged," << (r.converged ? 1 : 0) << '\n';
        if (!r.error.empty()) std::cout << "error," << r.error << '\n';
    }
    return r.converged ? 0 : kExitConvergence;
}

// scan

vh::Axis parse_axis(const std::string& s) {
    // name:min:max:count[:log]
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    if (parts.size() < 4 || parts.size() > 5) throw vh::domain_error("axis '" + s + "': expected name:min:max:count[:log]");
    vh::Axis a;
    a.name = parts[0];
    try {
        a.min = std::stod(parts[1]);
        a.max = std::stod(parts[2]);
        a.count = std::stoi(parts[3]);
    } catch (const std::exception&) {
        throw vh::domain_error("axis '" + s + "': bad number");
    }
    if (parts.size() == 5) {
        if (parts[4] == "log") a.spacing = vh::Spacing::log;
        else if (parts[4] != "linear") throw vh::domain_error("axis '" + s + "': spacing must be linear or log");
    }
    a.values();  // validates
    return a;
}

void write_result(std::ostream& os, const Common& c, const vh::ScanResult& r, const std::vector<std::string>& cols = {}) {
    if (c.format == "json") vh::write_json(os, r);
    else vh::write_csv(os, r, cols);
}

int finish_scan(const Common& c, const vh::ScanResult& r) {
    if (!r.all_converged()) {
        std::size_t bad = 0;
        for (const auto& row : r.rows)
            for (const auto& v : row.values) bad += v.converged ? 0 : 1;
        std::cerr << "vh: " << bad << " point(s) did not converge\n";
        if (c.strict) return kExitConvergence;
    }
    return 0;
}

int cmd_scan(const Common& c, vh::Params p, const std::vector<std::string>& axes, const std::vector<std::string>& models,
             const std::string& output) {
    apply(c, p);
    vh::ScanGrid g;
    g.fixed = p;
    for (const auto& a : axes) g.axes.push_back(parse_axis(a));
    for (const auto& m : models) g.models.push_back(vh::model_from_string(m));
    const vh::ScanResult r = vh::run_scan(g, scan_options(c));
    if (output.empty() || output == "-") {
        write_result(std::cout, c, r);
    } else {
        std::ofstream f(output, std::ios::binary);
        if (!f) throw vh::domain_error("cannot write '" + output + "'");
        write_result(f, c, r);
    }
    return finish_scan(c, r);
}

// figures

struct FigureSpec {
    vh::ScanResult result;
    std::vector<std::string> columns;
    std::string plot;
};

std::string lightcone_lines(double tba) {
    std::ostringstream s;
    const double w = 8.0 / std::sqrt(2.0);
    s << "set arrow from graph 0, first " << tba - w << " to graph 1, first " << tba - w << " nohead dt 2 lc 'black'\n";
    s << "set arrow from graph 0, first " << tba + w << " to graph 1, first " << tba + w << " nohead dt 2 lc 'black'\n";
    return s.str();
}

void write_plot(const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw vh::domain_error("cannot write '" + path + "'");
    f << body;
}

int cmd_figure(const Common& c, const std::string& name, const std::string& dir, int points, int grid,
               vh::Params over, const std::set<std::string>& given) {
    const vh::ScanOptions opt = scan_options(c);
    auto fixed = [&](std::initializer_list<std::pair<const char*, double>> defaults) {
        vh::Params p;
        apply(c, p);
        for (auto [k, v] : defaults) vh::set_param(p, k, v);
        // explicit flags override the caption settings
        for (const char* k : {"a0_omega", "omega_T", "omega_T_b", "d_over_T", "tba_over_T", "psi", "theta", "phi",
                              "coupling"})
            if (given.count(k)) vh::set_param(p, k, vh::get_param(over, k));
        return p;
    };
    std::filesystem::create_directories(dir);
    const std::string csv = (std::filesystem::path(dir) / (name + ".csv")).string();
    const std::string plt = (std::filesystem::path(dir) / (name + ".plt")).string();
    std::ofstream out(csv, std::ios::binary);
    if (!out) throw vh::domain_error("cannot write '" + csv + "'");
    int rc = 0;
    std::ostringstream plot;
    plot << "set datafile separator ','\nset terminal pngcairo size 900,650\nset output '" << name << ".png'\n";
    if (name == "fig3") {
        // three d/T curves at full light contact d = t_BA
        vh::Params p = fixed({{"a0_omega", 0.001}, {"omega_T", 1.0}});
        p.model = vh::ModelKind::em_dipole;
        vh::Axis th{"theta", 0.0, 2.0 * kPi, points, vh::Spacing::linear};
        bool first = true;
        plot << "set xlabel 'theta'\nset ylabel 'N'\nset logscale y\nset key top center\nplot ";
        int block = 0;
        for (double d : {1.0, 1.15, 1.25}) {
            p.d_over_T = d;
            p.tba_over_T = given.count("tba_over_T") ? over.tba_over_T : d;
            vh::ScanResult r = vh::orientation_scan(p, th, opt);
            r.axis_names = {"theta"};
            std::ostringstream s;
            vh::write_csv(s, r, {"theta", "N2", "N", "err_N2", "converged"});
            std::string text = s.str();
            if (!first) {
                // keep only the data rows, behind a blank line
                std::size_t pos = text.find("\ntheta,");
                text = text.substr(text.find('\n', pos + 1) + 1);
                out << '\n';
            }
            out << text;
            first = false;
            rc = std::max(rc, finish_scan(c, r));
            plot << (block ? ", " : "") << "'" << name << ".csv' index " << block << " using 1:3 with lines title 'd/T="
                 << d << "'";
            ++block;
        }
        plot << '\n';
        out.close();
        write_plot(plt, plot.str());
        return rc;
    }
    FigureSpec f;
    if (name == "fig4") {
        vh::Params p = fixed({{"a0_omega", 0.001}, {"tba_over_T", 10.0}});
        f.result = vh::harvestability_map({"omega_T", 0.5, 20.0, grid, vh::Spacing::linear},
                                          {"d_over_T", 0.0, 30.0, grid, vh::Spacing::linear}, p, opt);
        f.columns = {"omega_T", "d_over_T", "N", "N2_scaled", "err_N2_scaled", "harvestable", "converged"};
        plot << "set xlabel 'Omega T'\nset ylabel 'd/T'\nset palette defined (0 'grey80', 1 'dark-red')\n"
             << "set cbrange [0:1]\nunset colorbox\n" << lightcone_lines(p.tba_over_T)
             << "plot '" << name << ".csv' using 1:2:6 with points pt 5 ps 1.2 palette notitle\n";
    } else if (name == "fig5a" || name == "fig5b") {
        vh::Params p = fixed({{"a0_omega", 0.001}, {"omega_T", 12.0}});
        const bool zoom = name == "fig5b";
        f.result = vh::spacetime_map({"d_over_T", zoom ? 4.0 : 0.0, zoom ? 10.0 : 20.0, grid, vh::Spacing::linear},
                                     {"tba_over_T", 0.0, zoom ? 3.0 : 20.0, grid, vh::Spacing::linear}, p, opt);
        f.columns = {"d_over_T", "tba_over_T", "N", "N2", "err_N2", "N2_scaled", "harvestable", "converged"};
        const double w = 8.0 / std::sqrt(2.0), s = 1.0 / std::sqrt(2.0);
        plot << "set xlabel 'd/T'\nset ylabel 't_BA/T'\nset view map\n";
        if (zoom) {
            plot << "set logscale cb\n";
            for (int n : {8, 9, 10, 11, 12, 13})
                plot << "set arrow from " << n * s << ",0 to " << n * s + 3.0 << ",3 nohead dt 2 lc 'white'\n";
        } else {
            plot << "set arrow from " << w << ",0 to 20," << 20 - w << " nohead dt 2 lc 'white'\n";
            plot << "set arrow from 0," << w << " to " << 20 - w << ",20 nohead dt 2 lc 'white'\n";
        }
        plot << "splot '" << name << ".csv' using 1:2:3 with points pt 5 ps 1 palette notitle\n";
    } else if (name == "fig7") {
        vh::Params p = fixed({{"a0_omega", 0.001}, {"omega_T", 13.0}, {"tba_over_T", 10.0}});
        f.result = vh::model_comparison({"d_over_T", 0.0, 30.0, points, vh::Spacing::linear}, p, opt);
        f.columns = {"d_over_T", "N_em", "N_udw", "N_derivative", "N2_em", "N2_udw", "N2_derivative"};
        plot << "set xlabel 'd/T'\nset ylabel 'N'\nset logscale y\n"
             << "set arrow from " << p.tba_over_T - 8 / std::sqrt(2.0) << ", graph 0 to "
             << p.tba_over_T - 8 / std::sqrt(2.0) << ", graph 1 nohead dt 2 lc 'black'\n"
             << "set arrow from " << p.tba_over_T + 8 / std::sqrt(2.0) << ", graph 0 to "
             << p.tba_over_T + 8 / std::sqrt(2.0) << ", graph 1 nohead dt 2 lc 'black'\n"
             << "plot '" << name << ".csv' using 1:2 with lines title 'EM', '' using 1:3 with lines dt 2 title 'UdW', "
             << "'' using 1:4 with lines dt 3 title 'UdW derivative'\n";
    } else {
        throw vh::domain_error("unknown figure '" + name + "'");
    }
    vh::write_csv(out, f.result, f.columns);
    out.close();
    write_plot(plt, plot.str());
    return finish_scan(c, f.result);
}

// selfcheck

struct Check {
    std::string name;
    bool pass;
    std::string detail;
};

// Invariants of the assembled engine, run after the oracles.
std::vector<Check> invariant_suite() {
    std::vector<Check> out;
    vh::Params p;
    p.a0_omega = 0.001;
    p.omega_T = 1.0;
    p.d_over_T = 1.0;
    p.tba_over_T = 1.0;
    const vh::PointResult base = vh::evaluate_point(p);
    {
        double worst = 0.0;
        for (double th : {kPi / 6, kPi / 4, kPi / 3}) {
            vh::Params q = p;
            q.theta = th;
            const vh::PointResult r = vh::evaluate_point(q);
            worst = std::max(worst, std::abs(r.abs_M - base.abs_M * std::abs(std::cos(th))) / (base.abs_M * std::cos(th)));
        }
        out.push_back({"orientation.cos_law", worst <= 1e-9, vh::format_double(worst)});
    }
    {
        vh::Params q = p;
        q.theta = kPi / 2;
        const vh::PointResult r = vh::evaluate_point(q);
        out.push_back({"orientation.perpendicular", r.N == 0.0, vh::format_double(r.abs_M)});
    }
    {
        vh::Params q = p;
        q.d_over_T = 3.0;
        q.tba_over_T = 0.0;
        const vh::PointResult r = vh::evaluate_point(q);
        out.push_back({"locality.L", std::abs(r.L_aa - base.L_aa) <= 1e-10 * base.L_aa, vh::format_double(r.L_aa)});
    }
    {
        const vh::HarvestTerms h = vh::harvest(vh::make_pair(p));
        const vh::PositivityReport rep = vh::positivity_report(h);
        out.push_back({"positivity", rep.all_ok(), vh::format_double(rep.cauchy_schwarz_gap)});
    }
    {
        out.push_back({"negativity.clamp", base.N == std::max(0.0, base.N2), vh::format_double(base.N)});
    }
    return out;
}

int cmd_selfcheck(const std::string& format) {
    bool ok = true;
    std::vector<vh::OracleReport> reports = vh::run_all();
    std::vector<Check> inv;
    try {
        inv = invariant_suite();
    } catch (const std::exception& e) {
        inv.push_back({"invariants", false, e.what()});
    }
    for (const auto& r : reports) ok = ok && r.pass;
    for (const auto& c : inv) ok = ok && c.pass;
    if (format == "json") {
        nlohmann::json j;
        for (const auto& r : reports)
            j["oracles"].push_back({{"name", r.name},
                                    {"family", r.family},
                                    {"closed_form", r.closed_form},
                                    {"brute_force", r.brute_force},
                                    {"rel_err", r.rel_err},
                                    {"tolerance", r.tolerance},
                                    {"cases", r.cases},
                                    {"budget", r.budget},
                                    {"pass", r.pass},
                                    {"note", r.note}});
        for (const auto& c : inv) j["invariants"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
        j["pass"] = ok;
        std::cout << j.dump(2) << '\n';
    } else {
        std::printf("%-32s %-14s %-24s %-24s %-10s %-8s %-6s %-10s %s\n", "oracle", "family", "closed_form",
                    "brute_force", "rel_err", "tol", "cases", "budget", "result");
        for (const auto& r : reports)
            std::printf("%-32s %-14s %-24.17g %-24.17g %-10.3e %-8.0e %-6zu %-10zu %s%s%s\n", r.name.c_str(),
                        r.family.c_str(), r.closed_form, r.brute_force, r.rel_err, r.tolerance, r.cases, r.budget,
                        r.pass ? "PASS" : "FAIL", r.note.empty() ? "" : "  ", r.note.c_str());
        std::printf("\n%-32s %-24s %s\n", "invariant", "value", "result");
        for (const auto& c : inv) std::printf("%-32s %-24s %s\n", c.name.c_str(), c.detail.c_str(), c.pass ? "PASS" : "FAIL");
        std::printf("\nselfcheck: %s\n", ok ? "PASS" : "FAIL");
    }
    return ok ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
    std::cout.imbue(std::locale::classic());
    CLI::App app{"Entanglement harvesting between hydrogenlike atoms"};
    app.require_subcommand(1);
    app.set_version_flag("--version", VH_VERSION_STRING);

    Common common;
    vh::Params params;

    auto* compute = app.add_subcommand("compute", "evaluate one configuration");
    add_common(compute, common, false);
    compute->add_option("--model", common.model, "em | udw | derivative")->envname("VH_MODEL")->required();
    add_params(compute, params);

    auto* scan = app.add_subcommand("scan", "evaluate a grid");
    add_common(scan, common);
    add_params(scan, params);
    std::vector<std::string> axes, models;
    std::string output;
    scan->add_option("--axis", axes, "name:min:max:count[:log], repeatable")->required();
    scan->add_option("--models", models, "evaluate several models side by side")->delimiter(',');
    scan->add_option("-o,--output", output, "output file (default stdout)")->envname("VH_OUTPUT");

    auto* figure = app.add_subcommand("figure", "write <name>.csv and <name>.plt");
    add_common(figure, common, false);
    vh::Params fig_over;
    add_params(figure, fig_over);
    std::string fig_name, fig_dir = ".";
    int fig_points = 200, fig_grid = 40;
    figure->add_option("name", fig_name, "fig3 | fig4 | fig5a | fig5b | fig7")
        ->required()
        ->check(CLI::IsMember({"fig3", "fig4", "fig5a", "fig5b", "fig7"}));
    figure->add_option("--dir", fig_dir, "output directory")->envname("VH_OUTPUT_DIR")->capture_default_str();
    figure->add_option("--points", fig_points, "points per curve (fig3, fig7)")->capture_default_str();
    figure->add_option("--grid", fig_grid, "points per axis (fig4, fig5a, fig5b)")->capture_default_str();

    auto* selfcheck = app.add_subcommand("selfcheck", "run the oracles and invariant checks");
    std::string sc_format = "table";
    selfcheck->add_option("--format", sc_format, "table | json")->check(CLI::IsMember({"table", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*compute) return cmd_compute(common, params);
        if (*scan) return cmd_scan(common, params, axes, models, output);
        if (*figure) {
            std::set<std::string> given;
            const std::vector<std::pair<const char*, const char*>> flag_names = {
                {"--a0-omega", "a0_omega"}, {"--omega-T", "omega_T"}, {"--omega-T-b", "omega_T_b"},
                {"--d", "d_over_T"},        {"--tba", "tba_over_T"},  {"--psi", "psi"},
                {"--theta", "theta"},       {"--phi", "phi"},         {"--coupling", "coupling"}};
            for (auto [flag, key] : flag_names)
                if (figure->count(flag) > 0) given.insert(key);
            return cmd_figure(common, fig_name, fig_dir, fig_points, fig_grid, fig_over, given);
        }
        if (*selfcheck) return cmd_selfcheck(sc_format);
    } catch (const vh::domain_error& e) {
        std::cerr << "vh: " << e.what() << '\n';
        return kExitConfig;
    } catch (const vh::convergence_error& e) {
        std::cerr << "vh: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const std::exception& e) {
        std::cerr << "vh: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitConfig;
}

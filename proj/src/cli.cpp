#include "llcomb/cli.hpp"

#include "llcomb/comb_model.hpp"
#include "llcomb/continuation.hpp"
#include "llcomb/diagram.hpp"
#include "llcomb/errors.hpp"
#include "llcomb/io.hpp"
#include "llcomb/spectral_bvp.hpp"
#include "llcomb/time_evolution.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>
#include <sstream>

#ifndef LLCOMB_PRESET_DIR
#define LLCOMB_PRESET_DIR "presets"
#endif

namespace llcomb {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double unset = std::numeric_limits<double>::quiet_NaN();

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string preset;
    std::string config;
    std::string out = "out";
    CLI::Option* out_opt = nullptr;
};

struct ParamFlags {
    std::string mode;
    double f = unset;
    double zeta = unset;
    double d = unset;
};

void add_common(CLI::App* sub, Common& c, bool with_out) {
    sub->add_option("--preset", c.preset, "Preset name or JSON file");
    sub->add_option("--config", c.config, "JSON configuration file");
    if (with_out) c.out_opt = sub->add_option("--out", c.out, "Output directory");
}

void add_params(CLI::App* sub, ParamFlags& p, bool with_mode) {
    if (with_mode) sub->add_option("--mode", p.mode, "Trivial curve: hat (f fixed) or bar (zeta fixed)")->check(CLI::IsMember({"hat", "bar"}));
    sub->add_option("--f", p.f, "Forcing");
    sub->add_option("--zeta", p.zeta, "Detuning");
    sub->add_option("--d", p.d, "Dispersion (nonzero)");
}

void require(double v, const char* flag) {
    if (std::isnan(v)) throw UsageError(std::string("missing ") + flag);
}

// Parameters of a run: the active entry is set to 0 and carried by the points.
std::pair<Mode, Parameters> resolve(const ParamFlags& pf) {
    if (pf.mode.empty()) throw UsageError("missing --mode (hat or bar)");
    const Mode mode = mode_from_string(pf.mode);
    require(pf.d, "--d");
    Parameters p{pf.d, 0.0, 0.0};
    if (mode == Mode::hat) {
        require(pf.f, "--f");
        p.f = pf.f;
    } else {
        require(pf.zeta, "--zeta");
        p.zeta = pf.zeta;
    }
    if (p.d == 0.0) throw UsageError("--d must be nonzero");
    validate(p);
    return {mode, p};
}

fs::path output_dir(const Common& c) {
    if (c.out_opt && c.out_opt->count() > 0) return c.out;
    if (const char* env = std::getenv("COMB_OUT_DIR"); env && *env) return env;
    return c.out;
}

std::vector<BifurcationCandidate> enumerate(Mode mode, const Parameters& p, bool include_k0 = false) {
    EnumerationOptions opt;
    opt.include_k0 = include_k0;
    return mode == Mode::hat ? enumerate_bifpoints_hat(p.f, p.d, opt) : enumerate_bifpoints_bar(p.zeta, p.d, opt);
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(10);
    ss << v;
    return ss.str();
}

// ---- presets and config files ------------------------------------------------

json load_json_file(const fs::path& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw UsageError(path.string() + ": " + e.what());
    }
}

fs::path find_preset(const std::string& name) {
    const fs::path direct(name);
    if (direct.extension() == ".json" && fs::exists(direct)) return direct;
    const fs::path p = preset_directory() / (name + ".json");
    if (!fs::exists(p)) throw UsageError("unknown preset '" + name + "' (looked for " + p.string() + ")");
    return p;
}

std::string value_string(const json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw UsageError("option '" + key + "' must be a string, number or boolean");
}

// Installs the values of `obj` as option defaults of `sub`. Keys known only to other
// subcommands are skipped; keys no subcommand knows are an error.
void apply_defaults(CLI::App& app, CLI::App* sub, const json& obj, const std::string& origin) {
    if (!obj.is_object()) throw UsageError(origin + ": expected a JSON object of options");
    for (const auto& [key, value] : obj.items()) {
        if (key == "preset" || key == "config") throw UsageError(origin + ": '" + key + "' cannot be nested");
        const std::string flag = "--" + key;
        if (CLI::Option* opt = sub->get_option_no_throw(flag)) {
            opt->default_val(value_string(value, key));
            continue;
        }
        bool known = false;
        for (const CLI::App* other : app.get_subcommands({}))
            if (other->get_option_no_throw(flag)) known = true;
        if (!known) throw UsageError(origin + ": unknown option '" + key + "'");
    }
}

std::string scan_flag(const std::vector<std::string>& args, const std::string& flag) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == flag && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind(flag + "=", 0) == 0) return args[i].substr(flag.size() + 1);
    }
    return {};
}

void apply_preset_and_config(CLI::App& app, const std::vector<std::string>& args) {
    CLI::App* sub = nullptr;
    for (const auto& a : args) {
        if (!a.empty() && a[0] == '-') continue;
        sub = app.get_subcommand_no_throw(a);
        break;
    }
    if (!sub) return;
    if (const std::string preset = scan_flag(args, "--preset"); !preset.empty()) {
        const fs::path path = find_preset(preset);
        const json j = load_json_file(path);
        if (!j.contains("options")) throw UsageError(path.string() + ": missing 'options'");
        apply_defaults(app, sub, j.at("options"), path.string());
    }
    if (const std::string config = scan_flag(args, "--config"); !config.empty()) {
        if (!fs::exists(config)) throw UsageError(config + ": no such config file");
        apply_defaults(app, sub, load_json_file(config), config);
    }
}

// ---- verification ---------------------------------------------------------------

struct VerifyTolerances {
    double residual = 1e-8;
    double identity = 1e-8;
};

void check_solution(const FieldState& s, const Parameters& p, const std::string& where, const VerifyTolerances& tol,
                    std::vector<std::string>& issues) {
    const ValidationReport r = validate_solution(s, p);
    if (!(r.residual <= tol.residual)) issues.push_back(where + ": residual " + fmt(r.residual));
    if (!(std::abs(r.mean_identity_defect) <= tol.identity))
        issues.push_back(where + ": mean identity defect " + fmt(r.mean_identity_defect));
    if (!(std::abs(r.energy_identity_defect) <= tol.identity))
        issues.push_back(where + ": energy identity defect " + fmt(r.energy_identity_defect));
    if (r.nonconstant && !r.bound_ok())
        issues.push_back(where + ": sup norm " + fmt(r.linf) + " exceeds the a priori bound " + fmt(r.linf_bound));
    if (r.nonconstant && !r.window_ok(p.d, p.zeta))
        issues.push_back(where + ": nonconstant solution outside the detuning window");
}

std::vector<std::string> verify_branch(const Branch& b, const VerifyTolerances& tol) {
    std::vector<std::string> issues;
    if (b.points.empty()) issues.emplace_back("branch has no points");
    for (std::size_t i = 0; i < b.points.size(); ++i) {
        const BranchPoint& pt = b.points[i];
        const std::string where = "point " + std::to_string(i);
        if (!std::isfinite(pt.param)) {
            issues.push_back(where + ": parameter is not finite");
            continue;
        }
        const Parameters p = with_active_param(b.params, b.mode, pt.param);
        check_solution(pt.state, p, where, tol, issues);
        const double l2 = l2norm(pt.state);
        if (!(std::abs(l2 - pt.l2norm) <= 1e-12 * std::max(1.0, l2)))
            issues.push_back(where + ": stored L2 norm " + fmt(pt.l2norm) + " differs from " + fmt(l2));
        if (pt.det_sign < -1 || pt.det_sign > 1) issues.push_back(where + ": det_sign out of range");
        if (pt.min_eig != 0.0 && pt.det_sign != 0 && sign_of(pt.min_eig) != pt.det_sign)
            issues.push_back(where + ": min_eig sign disagrees with det_sign");
    }
    for (std::size_t i = 0; i < b.events.size(); ++i) {
        const BranchEvent& e = b.events[i];
        const std::string where = "event " + std::to_string(i) + " (" + std::string(to_string(e.kind)) + ")";
        if (e.index < 0 || e.index >= static_cast<int>(b.points.size())) {
            issues.push_back(where + ": index out of range");
            continue;
        }
        if (!std::isfinite(e.param)) issues.push_back(where + ": parameter is not finite");
        if (e.state) check_solution(*e.state, with_active_param(b.params, b.mode, e.param), where, tol, issues);
    }
    return issues;
}

// ---- subcommands --------------------------------------------------------------------

struct BifpointsCmd {
    Common common;
    ParamFlags params;
    bool include_k0 = false;
    std::string format = "csv";
};

int run_bifpoints(const BifpointsCmd& c, std::ostream& out) {
    const auto [mode, p] = resolve(c.params);
    const auto cands = enumerate(mode, p, c.include_k0);
    out << (c.format == "json" ? format_candidates_json(cands) : format_candidates_csv(cands));
    return exit_ok;
}

struct BoundsCmd {
    Common common;
    ParamFlags params;
};

int run_bounds(const BoundsCmd& c, std::ostream& out) {
    require(c.params.d, "--d");
    require(c.params.f, "--f");
    if (c.params.d == 0.0) throw UsageError("--d must be nonzero");
    const Parameters p{c.params.d, std::isnan(c.params.zeta) ? 0.0 : c.params.zeta, c.params.f};
    validate(p);
    std::set<int> ks;
    for (const auto& cand : enumerate_bifpoints_hat(p.f, p.d)) ks.insert(cand.k);
    out << format_bounds_json(p, bounds_report(p), std::vector<int>(ks.begin(), ks.end()));
    return exit_ok;
}

struct ContinueCmd {
    Common common;
    ParamFlags params;
    int k = -1;
    int sigma = 0;
    int coord_sign = 0;
    double eps = 1e-3;
    int n = 256;
    double ds = 0.02;
    double ds_min = 1e-6;
    double ds_max = 0.25;
    int max_steps = 2000;
    bool no_eigen = false;
    std::string name;
    std::string from;
    int switch_at_index = -1;
};

void print_events(const Branch& b, std::ostream& out) {
    out << "points " << b.points.size() << ", terminal " << (b.mode == Mode::hat ? "zeta " : "f ")
        << fmt(b.points.back().param) << "\n";
    for (const auto& e : b.events) {
        out << "event " << to_string(e.kind) << " at point " << e.index << " param " << fmt(e.param);
        if (e.candidate) out << " candidate k=" << e.candidate->k << " sigma=" << e.candidate->sigma;
        if (e.kind == EventKind::trivial_return) out << " distance " << fmt(e.distance);
        if (e.kind == EventKind::turning_point && e.state)
            out << " minima " << count_minima_abs(*e.state) << " maxima " << count_maxima_abs(*e.state);
        if (!e.note.empty()) out << " (" << e.note << ")";
        out << "\n";
    }
}

int run_continue(const ContinueCmd& c, std::ostream& out) {
    ContinuationConfig cfg;
    cfg.ds_init = c.ds;
    cfg.ds_min = c.ds_min;
    cfg.ds_max = c.ds_max;
    cfg.max_steps = c.max_steps;
    cfg.monitor_eigenvalues = !c.no_eigen;
    validate(cfg);
    if (c.n < 8) throw UsageError("--n must be at least 8");

    BranchPoint start;
    Branch branch;
    Mode mode{};
    Parameters p;
    std::string name = c.name;
    if (!c.from.empty()) {
        if (c.switch_at_index < 0) throw UsageError("--from requires --switch-at INDEX");
        const Branch parent = read_branch(c.from);
        if (c.switch_at_index >= static_cast<int>(parent.points.size()))
            throw UsageError("--switch-at " + std::to_string(c.switch_at_index) + " is beyond the " +
                             std::to_string(parent.points.size()) + " points of " + c.from);
        mode = parent.mode;
        p = parent.params;
        start = switch_at(parent, c.switch_at_index, c.eps);
        branch.origin.file = c.from;
        branch.origin.parent_index = c.switch_at_index;
        if (name.empty()) name = fs::path(c.from).stem().string() + "_sw" + std::to_string(c.switch_at_index);
    } else {
        if (c.switch_at_index >= 0) throw UsageError("--switch-at requires --from BRANCH.csv");
        std::tie(mode, p) = resolve(c.params);
        if (c.k < 1) throw UsageError("--k must be at least 1");
        if (c.sigma != 1 && c.sigma != -1) throw UsageError("--sigma must be 1 or -1");
        std::vector<BifurcationCandidate> matches;
        for (const auto& cand : enumerate(mode, p))
            if (cand.k == c.k && cand.sigma == c.sigma && (c.coord_sign == 0 || sign_of(cand.coord) == c.coord_sign))
                matches.push_back(cand);
        if (matches.empty())
            throw UsageError("no bifurcation point with k=" + std::to_string(c.k) + " sigma=" + std::to_string(c.sigma) +
                             " (see the bifpoints command)");
        if (matches.size() > 1) {
            std::string msg = "selector is ambiguous; add --coord-sign. Matches:";
            for (const auto& m : matches) msg += " coord=" + fmt(m.coord) + " param=" + fmt(m.param) + ";";
            throw UsageError(msg);
        }
        start = branch_switch(matches.front(), p.d, c.eps, Grid(c.n));
        branch.origin.candidate = matches.front();
        if (name.empty())
            name = "branch_" + std::string(to_string(mode)) + "_k" + std::to_string(c.k) + (c.sigma > 0 ? "_s+1" : "_s-1");
    }
    branch.origin.eps = c.eps;

    Branch result = continue_branch(start, p, mode, cfg);
    result.origin = branch.origin;
    const fs::path path = output_dir(c.common) / (name + ".csv");
    write_branch(path, result);
    out << "wrote " << path.string() << "\n";
    print_events(result, out);
    if (result.find_event(EventKind::ds_min_exhausted))
        throw NumericalFailure("continuation stopped: step size fell below ds_min (partial branch written)");
    return exit_ok;
}

struct EvolveCmd {
    Common common;
    ParamFlags params;
    int n = 256;
    double dt = 1e-3;
    double total_time = 1000.0;
    double zeta0 = -5.0;
    double zeta1 = 2.67;
    std::string ramp;
    double noise = 1e-14;
    std::uint64_t seed = 0;
    int sample_every = 100;
    double drift_window = 10.0;
    std::string init;
    std::string name = "evolve";
};

RampSchedule parse_ramp(const std::string& text, double total) {
    std::vector<std::pair<double, double>> knots;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw UsageError("--ramp expects t:zeta pairs separated by commas");
        try {
            knots.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
        } catch (const std::logic_error&) {
            throw UsageError("--ramp: malformed knot '" + item + "'");
        }
    }
    return {knots, total};
}

int run_evolve(const EvolveCmd& c, std::ostream& out) {
    require(c.params.f, "--f");
    require(c.params.d, "--d");
    if (c.params.d == 0.0) throw UsageError("--d must be nonzero");
    const Parameters p{c.params.d, 0.0, c.params.f};
    const RampSchedule ramp =
        c.ramp.empty() ? RampSchedule::soliton_capture(c.total_time, c.zeta0, c.zeta1) : parse_ramp(c.ramp, c.total_time);

    FieldState u0;
    if (!c.init.empty()) {
        u0 = read_state(c.init);
    } else {
        if (c.n < 8) throw UsageError("--n must be at least 8");
        const auto cs = constant_solutions(ramp(0.0), p.f);
        u0 = FieldState::constant(Grid(c.n), cs.front().a1, cs.front().a2);
    }

    EvolveOptions opt;
    opt.dt = c.dt;
    opt.sample_every = c.sample_every;
    opt.noise_amp = c.noise;
    opt.seed = c.seed;
    DriftMonitor monitor(ramp.total_time() - c.drift_window);
    opt.observer = [&monitor](double t, double z, const FieldState& s) { monitor(t, z, s); };
    const Trajectory tr = evolve(u0, ramp, p, opt);

    const fs::path dir = output_dir(c.common);
    write_file_atomic(dir / (c.name + ".trajectory.csv"), format_trajectory_csv(tr));
    write_state(dir / (c.name + ".final.csv"), tr.final_state);
    write_file_atomic(dir / (c.name + ".spectrum.csv"), format_spectrum_csv(tr.final_state));
    out << "wrote " << (dir / (c.name + ".trajectory.csv")).string() << "\n";
    out << "status " << to_string(tr.status) << " at t " << fmt(tr.final_time) << "\n";
    if (tr.status == EvolveStatus::blow_up) throw NumericalFailure("evolution blew up");
    out << "final L2 norm " << fmt(tr.l2norms.back()) << ", maxima of |a| " << count_maxima_abs(tr.final_state)
        << ", minima of |a| " << count_minima_abs(tr.final_state) << "\n";
    out << "L2 drift over the last " << fmt(c.drift_window) << " time units " << fmt(monitor.drift(tr.final_state))
        << "\n";
    return exit_ok;
}

struct VerifyCmd {
    Common common;
    ParamFlags params;
    std::vector<std::string> files;
    double residual_tol = 1e-8;
    double identity_tol = 1e-8;
};

int run_verify(const VerifyCmd& c, std::ostream& out) {
    const VerifyTolerances tol{c.residual_tol, c.identity_tol};
    bool failed = false;
    for (const auto& file : c.files) {
        const std::string text = read_file(file);
        const std::string header = text.substr(0, text.find('\n'));
        std::vector<std::string> issues;
        if (header.rfind("step,param,l2norm,min_eig,event", 0) == 0) {
            issues = verify_branch(read_branch(file), tol);
        } else if (header.rfind("x,a1,a2", 0) == 0) {
            require(c.params.d, "--d (needed for state files)");
            require(c.params.f, "--f (needed for state files)");
            require(c.params.zeta, "--zeta (needed for state files)");
            check_solution(parse_state_csv(text, file), {c.params.d, c.params.zeta, c.params.f}, "state", tol, issues);
        } else {
            throw UsageError(file + ": neither a branch file nor a state file");
        }
        out << file << ": " << (issues.empty() ? "ok" : std::to_string(issues.size()) + " violation(s)") << "\n";
        for (const auto& s : issues) out << "  " << s << "\n";
        failed = failed || !issues.empty();
    }
    if (failed) throw NumericalFailure("verification failed");
    return exit_ok;
}

struct DiagramCmd {
    Common common;
    ParamFlags params;
    std::vector<std::string> files;
    std::vector<std::string> labels;
    std::vector<std::string> colors;
    bool no_trivial = false;
    bool no_bifpoints = false;
    double xmin = unset;
    double xmax = unset;
    std::string title;
    std::string name = "diagram.svg";
};

int run_diagram(const DiagramCmd& c, std::ostream& out) {
    DiagramSpec spec;
    spec.trivial_overlay = !c.no_trivial;
    spec.mark_bifpoints = !c.no_bifpoints;
    spec.title = c.title;
    for (std::size_t i = 0; i < c.files.size(); ++i) {
        DiagramBranch db;
        db.branch = read_branch(c.files[i]);
        db.label = i < c.labels.size() ? c.labels[i] : fs::path(c.files[i]).stem().string();
        if (i < c.colors.size()) db.color = c.colors[i];
        spec.branches.push_back(std::move(db));
    }
    if (!c.params.mode.empty() || spec.branches.empty()) {
        std::tie(spec.mode, spec.params) = resolve(c.params);
    } else {
        spec.mode = spec.branches.front().branch.mode;
        spec.params = spec.branches.front().branch.params;
    }
    if (std::isnan(c.xmin) != std::isnan(c.xmax)) throw UsageError("--xmin and --xmax go together");
    if (!std::isnan(c.xmin)) spec.param_range = std::pair{c.xmin, c.xmax};
    const std::string svg = render_diagram_svg(spec);
    const fs::path path = output_dir(c.common) / c.name;
    write_file_atomic(path, svg);
    out << "wrote " << path.string() << "\n";
    return exit_ok;
}

} // namespace

fs::path preset_directory() {
    if (const char* env = std::getenv("LLCOMB_PRESET_DIR"); env && *env) return env;
    return LLCOMB_PRESET_DIR;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stationary and dynamic frequency combs of the Lugiato-Lefever equation", "llcomb"};
    app.require_subcommand(1);

    BifpointsCmd bif;
    auto* s_bif = app.add_subcommand("bifpoints", "Bifurcation points on a trivial curve");
    add_common(s_bif, bif.common, false);
    add_params(s_bif, bif.params, true);
    s_bif->add_flag("--include-k0", bif.include_k0, "Also list folds of the trivial curve (k = 0)");
    s_bif->add_option("--format", bif.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    BoundsCmd bnd;
    auto* s_bnd = app.add_subcommand("bounds", "A priori bounds for (f, d)");
    add_common(s_bnd, bnd.common, false);
    add_params(s_bnd, bnd.params, false);

    ContinueCmd con;
    auto* s_con = app.add_subcommand("continue", "Switch at a bifurcation point and continue the branch");
    add_common(s_con, con.common, true);
    add_params(s_con, con.params, true);
    s_con->add_option("--k", con.k, "Mode number of the bifurcation point");
    s_con->add_option("--sigma", con.sigma, "Root family (1 or -1)");
    s_con->add_option("--coord-sign", con.coord_sign, "Sign of t (or s) when k, sigma match several points")
        ->check(CLI::IsMember({-1, 0, 1}));
    s_con->add_option("--eps", con.eps, "Switching amplitude; its sign selects the half of the curve");
    s_con->add_option("--n", con.n, "Collocation nodes");
    s_con->add_option("--ds", con.ds, "Initial arclength step");
    s_con->add_option("--ds-min", con.ds_min, "Smallest arclength step");
    s_con->add_option("--ds-max", con.ds_max, "Largest arclength step");
    s_con->add_option("--max-steps", con.max_steps, "Step limit");
    s_con->add_flag("--no-eigen", con.no_eigen, "Skip the eigenvalue monitor");
    s_con->add_option("--name", con.name, "Base name of the branch files");
    s_con->add_option("--from", con.from, "Stored branch to switch from (with --switch-at)");
    s_con->add_option("--switch-at", con.switch_at_index, "Point index of --from at which to switch");

    DiagramCmd dia;
    auto* s_dia = app.add_subcommand("diagram", "Render branches as an SVG bifurcation diagram");
    add_common(s_dia, dia.common, true);
    add_params(s_dia, dia.params, true);
    s_dia->add_option("files", dia.files, "Branch CSV files");
    s_dia->add_option("--labels", dia.labels, "Legend labels, in file order")->delimiter(',');
    s_dia->add_option("--colors", dia.colors, "Branch colors, in file order")->delimiter(',');
    s_dia->add_flag("--no-trivial", dia.no_trivial, "Omit the trivial curve");
    s_dia->add_flag("--no-bifpoints", dia.no_bifpoints, "Omit bifurcation point markers");
    s_dia->add_option("--xmin", dia.xmin, "Lower end of the parameter axis");
    s_dia->add_option("--xmax", dia.xmax, "Upper end of the parameter axis");
    s_dia->add_option("--title", dia.title, "Title");
    s_dia->add_option("--name", dia.name, "Output file name");

    EvolveCmd evo;
    auto* s_evo = app.add_subcommand("evolve", "Split-step evolution under a detuning ramp");
    add_common(s_evo, evo.common, true);
    add_params(s_evo, evo.params, false);
    s_evo->add_option("--n", evo.n, "Collocation nodes");
    s_evo->add_option("--dt", evo.dt, "Time step");
    s_evo->add_option("--T", evo.total_time, "Final time");
    s_evo->add_option("--zeta0", evo.zeta0, "Initial detuning of the default ramp");
    s_evo->add_option("--zeta1", evo.zeta1, "Final detuning of the default ramp");
    s_evo->add_option("--ramp", evo.ramp, "Explicit ramp knots t:zeta,t:zeta,...");
    s_evo->add_option("--noise", evo.noise, "Uniform noise amplitude added to the initial state");
    s_evo->add_option("--seed", evo.seed, "Noise seed");
    s_evo->add_option("--sample-every", evo.sample_every, "Steps between samples");
    s_evo->add_option("--drift-window", evo.drift_window, "Window for the stationarity measure");
    s_evo->add_option("--init", evo.init, "Initial state file (default: lowest constant solution)");
    s_evo->add_option("--name", evo.name, "Base name of the output files");

    VerifyCmd ver;
    auto* s_ver = app.add_subcommand("verify", "Re-check stored branches and states");
    add_common(s_ver, ver.common, false);
    add_params(s_ver, ver.params, false);
    s_ver->add_option("files", ver.files, "Branch or state CSV files")->required();
    s_ver->add_option("--residual-tol", ver.residual_tol, "Largest accepted residual (max norm)");
    s_ver->add_option("--identity-tol", ver.identity_tol, "Largest accepted integral identity defect");

    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

    try {
        try {
            apply_preset_and_config(app, args);
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            const int rc = app.exit(e, out, err);
            return rc == 0 ? exit_ok : exit_usage;
        }
        if (s_bif->parsed()) return run_bifpoints(bif, out);
        if (s_bnd->parsed()) return run_bounds(bnd, out);
        if (s_con->parsed()) return run_continue(con, out);
        if (s_dia->parsed()) return run_diagram(dia, out);
        if (s_evo->parsed()) return run_evolve(evo, out);
        if (s_ver->parsed()) return run_verify(ver, out);
        return exit_usage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_usage;
    } catch (const PreconditionError& e) {
        err << "refused: " << e.what() << "\n";
        return exit_usage;
    } catch (const DomainError& e) {
        err << "refused: " << e.what() << "\n";
        return exit_usage;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << "\n";
        return exit_usage;
    } catch (const NumericalFailure& e) {
        err << "failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const ConvergenceError& e) {
        err << "failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const SingularJacobianError& e) {
        err << "failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const TheoryViolation& e) {
        err << "failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << "\n";
        return exit_numerical;
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"llcomb"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace llcomb

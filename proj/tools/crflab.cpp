// crflab: command-line front end.
//
//   crflab gen --family hex --radius 3 --out hex3.tri
//   crflab flow --tri deg7.tri --geometry hyperbolic --u0 -3 --out run.json
//   crflab hexlab --N 30 --l2 0.05 --out decay.csv
//   crflab vel --tri hex16.tri --radii 4,8,12
//   crflab layout --tri hex4.tri --out hex4.svg
//   crflab check geometry-derivatives
//
// Exit status: 0 success, 1 monitor or assertion failure, 2 input error.
// Every subcommand accepts --config <file.json>, an object whose keys are
// flag names; flags given on the command line win.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crflab/crflab.hpp"

using namespace crflab;
using report::Json;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kInputError = 2;

struct Common {
    std::string config;
    std::uint64_t seed = 20240611;
    unsigned threads = 0;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "JSON file of flag values");
    sub->add_option("--seed", c.seed, "Seed for random initial data");
    sub->add_option("--threads", c.threads, "Worker cap (overrides CRFLAB_THREADS)");
}

std::string json_scalar(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) {
        std::ostringstream s;
        s.precision(17);
        s << v.get<double>();
        return s.str();
    }
    return v.dump();
}

// Fills options absent from the command line with values from the config
// file and re-runs their callbacks.
void apply_config(CLI::App* sub, const std::string& path) {
    const Json cfg = report::read_json(path);
    if (!cfg.is_object()) throw InputError(path + ": config must be a JSON object");
    for (const auto& [key, value] : cfg.items()) {
        CLI::Option* opt = nullptr;
        try {
            opt = sub->get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            throw InputError(path + ": unknown key '" + key + "' for " + sub->get_name());
        }
        if (opt->count() > 0 || key == "config") continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) opt->add_result("true");
        } else if (value.is_array()) {
            for (const auto& x : value) opt->add_result(json_scalar(x));
        } else {
            opt->add_result(json_scalar(value));
        }
        opt->run_callback();
    }
}

// Config echo: every option of the subcommand with its effective value.
Json typed(const std::string& s) {
    const Json j = Json::parse(s, nullptr, false);
    return !j.is_discarded() && (j.is_number() || j.is_boolean()) ? j : Json(s);
}

Json echo(const CLI::App* sub) {
    Json out = {{"command", sub->get_name()}};
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help" || name == "config") continue;
        if (opt->count() > 0) {
            Json values = Json::array();
            for (const auto& r : opt->results()) values.push_back(typed(r));
            out[name] = opt->get_items_expected_max() > 1 ? values : values.back();
        } else if (const std::string d = opt->get_default_str(); !d.empty() && d != "{}" && d != "[]") {
            out[name] = typed(d);
        }
    }
    return out;
}

std::shared_ptr<const Triangulation> load_tri(const std::string& path) {
    if (path.empty()) throw InputError("--tri is required");
    return std::make_shared<const Triangulation>(load(path));
}

template <class T>
void write_text(const std::string& path, const T& writer) {
    if (path.empty() || path == "-") {
        writer(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw InputError("cannot open '" + path + "' for writing");
    writer(out);
}

// ---------------------------------------------------------------------------

struct GenArgs {
    std::string family;
    int d = 0;
    int radius = 0;
    double phi = 0.0;
    std::string out;
};

int run_gen(const GenArgs& a) {
    Triangulation t = [&] {
        if (a.radius < 1) throw InputError("--radius must be >= 1");
        if (a.family == "hex") {
            if (a.d != 0 && a.d != 6) throw InputError("hex family has degree 6");
            return build_hexagonal(a.radius);
        }
        if (a.family == "constdeg") {
            if (a.d == 0) throw InputError("constdeg family needs --d");
            return build_constant_degree(a.d, a.radius);
        }
        throw InputError("unknown family '" + a.family + "' (hex, constdeg)");
    }();
    if (a.phi != 0.0) {
        std::vector<EdgeAngle> angles;
        for (const Edge& e : t.edges()) angles.push_back({e.first, e.second, a.phi});
        t = Triangulation(t.vertex_count(), t.faces(), t.root(), angles, t.family_degree());
    }
    write_text(a.out, [&](std::ostream& out) { write_triangulation(t, out); });
    std::cerr << "gen: " << t.vertex_count() << " vertices, " << t.face_count() << " faces, radius " << t.radius()
              << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------

struct FlowArgs {
    std::string tri;
    std::string geometry = "euclidean";
    double phi = std::nan("");
    double u0 = std::nan("");
    double perturb_l2 = 0.0;
    double khat = 0.0;
    int radius = 0;
    std::vector<int> radii;
    int inner = 2;
    double tol = 1e-8;
    double t_max = 50.0;
    double sample_interval = 0.5;
    std::string stepper = "rk45";
    double step = 0.05;
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    bool no_barrier = false;
    std::string out;
    std::string csv;
    std::string metric_out;
};

PackingMetric initial_metric(const Triangulation& t, const Truncation& tr, const FlowArgs& a, std::uint64_t seed) {
    const Geometry g = geometry_from_string(a.geometry);
    const double u0 = std::isnan(a.u0) ? (g == Geometry::euclidean ? 0.0 : -3.0) : a.u0;
    if (g == Geometry::hyperbolic && !(u0 < 0.0)) throw InputError("hyperbolic initial factor must be negative");
    PackingMetric m = constant_metric(t, g, u0);
    if (!std::isnan(a.phi)) {
        if (!(a.phi >= 0.0 && a.phi <= kPi / 2)) throw InputError("--phi must lie in [0, pi/2]");
        m.phi.assign(m.phi.size(), a.phi);
    }
    if (a.perturb_l2 > 0.0) {
        // Uniform per interior vertex, rescaled to the requested l2 norm.
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        std::vector<double> delta(tr.interior.size());
        double norm = 0.0;
        for (double& x : delta) x = d(rng), norm += x * x;
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < delta.size(); ++i) m.u[tr.interior[i]] += a.perturb_l2 * delta[i] / norm;
    }
    validate_metric(t, m);
    return m;
}

FlowProblem flow_problem(const FlowArgs& a, std::shared_ptr<const Triangulation> t, int radius, std::uint64_t seed) {
    FlowProblem p;
    p.truncation = truncate(t, radius);
    p.metric0 = initial_metric(*t, p.truncation, a, seed);
    if (a.khat != 0.0) {
        if (!(a.khat < kTwoPi)) throw InputError("--khat must be below 2 pi");
        p.target.assign(p.truncation.interior.size(), a.khat);
    }
    p.t_max = a.t_max;
    p.tolerance = a.tol;
    p.sample_interval = a.sample_interval;
    p.barrier = !a.no_barrier;
    p.integrator.kind = stepper_from_string(a.stepper);
    p.integrator.fixed_step = a.step;
    p.integrator.abs_tol = a.abs_tol;
    p.integrator.rel_tol = a.rel_tol;
    return p;
}

int run_flow(const FlowArgs& a, const Common& c, const Json& config) {
    auto t = load_tri(a.tri);
    if (!a.radii.empty()) {
        FlowProblem settings = flow_problem(a, t, a.radii.front(), c.seed);
        const ExhaustionReport rep =
            solve_exhaustion(t, settings.metric0, a.khat, a.radii, a.inner, settings);
        write_text(a.out, [&](std::ostream& out) { report::write_json(report::exhaustion_report(rep, config), out); });
        bool ok = true;
        for (const auto& f : rep.failures)
            if (!f.empty()) ok = false, std::cerr << "flow: " << f << '\n';
        for (std::size_t i = 0; i < rep.discrepancies.size(); ++i)
            std::cerr << "flow: radii " << rep.radii[i] << "->" << rep.radii[i + 1] << " discrepancy "
                      << rep.discrepancies[i] << '\n';
        return ok ? kOk : kFailure;
    }
    const FlowProblem p = flow_problem(a, t, a.radius > 0 ? a.radius : t->radius(), c.seed);
    const Trajectory traj = solve_finite(p);
    const Json rep = report::flow_report(p, traj, config);
    write_text(a.out, [&](std::ostream& out) { report::write_json(rep, out); });
    if (!a.csv.empty()) write_text(a.csv, [&](std::ostream& out) { report::write_flow_csv(traj, out); });
    if (!a.metric_out.empty())
        report::write_json(report::metric_to_json(metric_at(p, traj, traj.final_sample())), a.metric_out);
    std::cerr << "flow: " << to_string(traj.status) << " at t = " << traj.samples.back().t << ", residual "
              << traj.final_residual << '\n';
    const bool monitors = rep["max_principle"]["ok"].get<bool>() && rep["curvature_bounds"]["ok"].get<bool>();
    if (!monitors) std::cerr << "flow: monitor violation\n";
    if (traj.status == FlowStatus::step_failure || traj.status == FlowStatus::barrier_violation) {
        std::cerr << "flow: " << traj.message << '\n';
        return kFailure;
    }
    return monitors ? kOk : kFailure;
}

// ---------------------------------------------------------------------------

struct HexArgs {
    int N = 30;
    double l2 = 0.05;
    std::string boundary = "zero-dirichlet";
    double t_max = 200.0;
    double sample_interval = 2.0;
    std::vector<double> snapshots;
    std::string out;
    std::string json;
};

int run_hexlab(const HexArgs& a, const Common& c, const Json& config) {
    if (!(a.l2 >= 0.0)) throw InputError("--l2 must be non-negative");
    const hex::HexField u0 = hex::random_field(a.N, a.l2, c.seed, hex::boundary_rule_from_string(a.boundary));
    hex::EvolveConfig cfg;
    cfg.t_max = a.t_max;
    cfg.sample_interval = a.sample_interval;
    cfg.snapshot_times = a.snapshots;
    const hex::EvolveResult r = hex::evolve(u0, cfg);
    write_text(a.out, [&](std::ostream& out) { hex::write_csv(r, out); });
    if (!a.json.empty()) report::write_json(report::hexlab_report(r, config), a.json);
    if (r.status != hex::EvolveStatus::completed) {
        std::cerr << "hexlab: " << to_string(r.status) << ": " << r.message << '\n';
        return kFailure;
    }
    const double slack = 10.0 * std::max(cfg.integrator.abs_tol, cfg.integrator.rel_tol);
    bool ok = true;
    for (std::size_t k = 1; k < r.samples.size(); ++k)
        if (r.samples[k].l2 > r.samples[k - 1].l2) {
            std::cerr << "hexlab: l2 increased at t = " << r.samples[k].t << '\n';
            ok = false;
        }
    // The decay inequality is only claimed inside the small-data ball.
    if (a.l2 <= hex::epsilon2())
        for (const auto& s : r.samples)
            if (s.decay_residual > slack) {
                std::cerr << "hexlab: decay residual " << s.decay_residual << " at t = " << s.t << '\n';
                ok = false;
            }
    const auto& last = r.samples.back();
    std::cerr << "hexlab: t = " << last.t << ", l2 " << last.l2 << ", linf " << last.linf << ", energy " << last.energy
              << '\n';
    return ok ? kOk : kFailure;
}

// ---------------------------------------------------------------------------

struct VelArgs {
    std::string tri;
    std::vector<int> radii;
    std::vector<VertexId> seeds;
    double tol = 1e-9;
    double plateau = 0.05;
    bool dump_weights = false;
    std::string out;
};

int run_vel(const VelArgs& a, const Json& config) {
    auto t = load_tri(a.tri);
    if (a.radii.empty()) throw InputError("--radii is required");
    vel::VelConfig cfg;
    cfg.tol = a.tol;
    const std::vector<VertexId> seeds = a.seeds.empty() ? std::vector<VertexId>{t->root()} : a.seeds;
    const vel::TrendReport rep = vel::classify(*t, seeds, a.radii, cfg, a.plateau);
    write_text(a.out, [&](std::ostream& out) { report::write_json(report::vel_report(rep, config, a.dump_weights), out); });
    bool ok = true;
    for (const auto& e : rep.entries) {
        std::cerr << "vel: radius " << e.radius << " VEL " << e.estimate.vel << " gap " << e.estimate.gap << '\n';
        ok = ok && e.estimate.converged;
    }
    std::cerr << "vel: " << to_string(rep.label) << '\n';
    return ok ? kOk : kFailure;
}

// ---------------------------------------------------------------------------

struct LayoutArgs {
    std::string tri;
    std::string metric;
    std::string geometry = "euclidean";
    double u0 = std::nan("");
    int radius = 0;
    bool show_edges = false;
    bool no_circles = false;
    double scale = 100.0;
    std::string out;
    std::string json;
};

int run_layout(const LayoutArgs& a, const Json& config) {
    auto t = load_tri(a.tri);
    PackingMetric m;
    if (!a.metric.empty()) {
        m = report::metric_from_json(report::read_json(a.metric), *t);
    } else {
        const Geometry g = geometry_from_string(a.geometry);
        m = constant_metric(*t, g, std::isnan(a.u0) ? (g == Geometry::euclidean ? 0.0 : -1.0) : a.u0);
    }
    const Truncation tr = truncate(t, a.radius > 0 ? a.radius : t->radius());
    const Embedding e = embed(tr, m);
    const LayoutFidelity fid = fidelity(e, *t, m);
    SvgOptions opt;
    opt.show_edges = a.show_edges;
    opt.show_circles = !a.no_circles;
    opt.scale = a.scale;
    write_text(a.out, [&](std::ostream& out) { write_svg(e, out, opt); });
    if (!a.json.empty()) report::write_json(report::layout_report(e, fid, config), a.json);
    std::cerr << "layout: " << e.vertices.size() << " circles, holonomy residual " << e.holonomy_residual << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------

int run_check(const std::string& suite) {
    const std::vector<std::string> names =
        suite == "all" ? checks::suite_names() : std::vector<std::string>{suite};
    bool ok = true;
    for (const auto& name : names) {
        const checks::CheckResult r = checks::run_suite(name);
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.seconds << " s): " << r.summary() << '\n';
        for (const auto& f : r.failures) std::cout << "  " << f << '\n';
        ok = ok && r.passed;
    }
    return ok ? kOk : kFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Combinatorial Ricci flow lab"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    Common common;

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Write a triangulation file");
    gen_cmd->add_option("--family", gen.family, "hex or constdeg");
    gen_cmd->add_option("--d", gen.d, "Vertex degree for constdeg (>= 7)");
    gen_cmd->add_option("--radius", gen.radius, "Combinatorial radius");
    gen_cmd->add_option("--phi", gen.phi, "Constant intersection angle written for every edge");
    gen_cmd->add_option("--out", gen.out, "Output path (default stdout)");
    add_common(gen_cmd, common);

    FlowArgs flow;
    auto* flow_cmd = app.add_subcommand("flow", "Run the finite flow or an exhaustion sequence");
    flow_cmd->add_option("--tri", flow.tri, "Triangulation file");
    flow_cmd->add_option("--geometry", flow.geometry, "euclidean or hyperbolic");
    flow_cmd->add_option("--phi", flow.phi, "Constant intersection angle (default: from file)");
    flow_cmd->add_option("--u0", flow.u0, "Constant initial factor (default 0, hyperbolic -3)");
    flow_cmd->add_option("--perturb-l2", flow.perturb_l2, "Seeded interior perturbation of this l2 norm");
    flow_cmd->add_option("--khat", flow.khat, "Constant target curvature");
    flow_cmd->add_option("--radius", flow.radius, "Truncation radius (default: file radius)");
    flow_cmd->add_option("--radii", flow.radii, "Increasing radii for an exhaustion run")->delimiter(',');
    flow_cmd->add_option("--inner", flow.inner, "Inner ball radius for exhaustion discrepancies");
    flow_cmd->add_option("--tol", flow.tol, "Sup-norm curvature tolerance");
    flow_cmd->add_option("--t-max", flow.t_max, "Time horizon");
    flow_cmd->add_option("--sample-interval", flow.sample_interval, "Sampling interval");
    flow_cmd->add_option("--stepper", flow.stepper, "rk45 or rk4");
    flow_cmd->add_option("--step", flow.step, "RK4 step");
    flow_cmd->add_option("--abs-tol", flow.abs_tol, "RK45 absolute tolerance");
    flow_cmd->add_option("--rel-tol", flow.rel_tol, "RK45 relative tolerance");
    flow_cmd->add_flag("--no-barrier", flow.no_barrier, "Do not abort on barrier violation");
    flow_cmd->add_option("--out", flow.out, "JSON report path (default stdout)");
    flow_cmd->add_option("--csv", flow.csv, "CSV of t, m, M, energy");
    flow_cmd->add_option("--metric-out", flow.metric_out, "Final metric as JSON, input for layout");
    add_common(flow_cmd, common);

    HexArgs hexa;
    auto* hex_cmd = app.add_subcommand("hexlab", "Evolve a perturbation of the hexagonal packing");
    hex_cmd->add_option("--N", hexa.N, "Ball radius");
    hex_cmd->add_option("--l2", hexa.l2, "l2 norm of the seeded initial field");
    hex_cmd->add_option("--boundary", hexa.boundary, "zero-dirichlet or frozen-ring");
    hex_cmd->add_option("--t-max", hexa.t_max, "Time horizon");
    hex_cmd->add_option("--sample-interval", hexa.sample_interval, "Sampling interval");
    hex_cmd->add_option("--snapshots", hexa.snapshots, "Snapshot times")->delimiter(',');
    hex_cmd->add_option("--out", hexa.out, "CSV path (default stdout)");
    hex_cmd->add_option("--json", hexa.json, "JSON report with snapshots");
    add_common(hex_cmd, common);

    VelArgs vela;
    auto* vel_cmd = app.add_subcommand("vel", "Vertex extremal length trend");
    vel_cmd->add_option("--tri", vela.tri, "Triangulation file");
    vel_cmd->add_option("--radii", vela.radii, "Increasing radii")->delimiter(',');
    vel_cmd->add_option("--seeds", vela.seeds, "Seed set A (default: root)")->delimiter(',');
    vel_cmd->add_option("--tol", vela.tol, "Separation tolerance");
    vel_cmd->add_option("--plateau", vela.plateau, "Relative change read as a plateau");
    vel_cmd->add_flag("--dump-weights", vela.dump_weights, "Include the optimal m per radius");
    vel_cmd->add_option("--out", vela.out, "JSON report path (default stdout)");
    add_common(vel_cmd, common);

    LayoutArgs lay;
    auto* lay_cmd = app.add_subcommand("layout", "Lay out a packing and write SVG");
    lay_cmd->add_option("--tri", lay.tri, "Triangulation file");
    lay_cmd->add_option("--metric", lay.metric, "Metric JSON (from flow --metric-out)");
    lay_cmd->add_option("--geometry", lay.geometry, "Geometry for a constant metric");
    lay_cmd->add_option("--u0", lay.u0, "Constant factor when no metric file is given");
    lay_cmd->add_option("--radius", lay.radius, "Truncation radius (default: file radius)");
    lay_cmd->add_flag("--show-edges", lay.show_edges, "Draw edges");
    lay_cmd->add_flag("--no-circles", lay.no_circles, "Omit circles");
    lay_cmd->add_option("--scale", lay.scale, "Drawing units per model unit");
    lay_cmd->add_option("--out", lay.out, "SVG path (default stdout)");
    lay_cmd->add_option("--json", lay.json, "JSON dump of centers and radii");
    add_common(lay_cmd, common);

    std::string suite = "all";
    auto* check_cmd = app.add_subcommand("check", "Run an invariant suite");
    check_cmd->add_option("suite", suite, "geometry-derivatives, max-principle, hexlab-identities, vel-oracle or all");
    add_common(check_cmd, common);

    for (CLI::App* sub : app.get_subcommands([](CLI::App*) { return true; }))
        for (CLI::Option* opt : sub->get_options()) opt->multi_option_policy(opt->get_items_expected_max() > 1
                                                                                  ? CLI::MultiOptionPolicy::TakeAll
                                                                                  : CLI::MultiOptionPolicy::TakeLast);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        if (!common.config.empty()) apply_config(sub, common.config);
        if (common.threads > 0) setenv("CRFLAB_THREADS", std::to_string(common.threads).c_str(), 1);
        const Json config = echo(sub);
        if (sub == gen_cmd) return run_gen(gen);
        if (sub == flow_cmd) return run_flow(flow, common, config);
        if (sub == hex_cmd) return run_hexlab(hexa, common, config);
        if (sub == vel_cmd) return run_vel(vela, config);
        if (sub == lay_cmd) return run_layout(lay, config);
        return run_check(suite);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const DegenerateTriangle& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kFailure;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kFailure;
    }
}

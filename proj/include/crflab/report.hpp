#pragma once

// JSON and CSV serialization of run results. Doubles go through the JSON
// library's shortest round-trip formatting, so equal runs give byte-equal
// files. Key order is fixed by the library's sorted objects.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "crflab/flow.hpp"
#include "crflab/hexlab.hpp"
#include "crflab/layout.hpp"
#include "crflab/vel.hpp"

namespace crflab::report {

using Json = nlohmann::json;

/// FNV-1a over the canonical text serialization, as 16 hex digits.
inline std::string triangulation_hash(const Triangulation& t) {
    std::ostringstream text;
    write_triangulation(t, text);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text.str()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << h;
    return hex.str();
}

inline Json to_json(const IntegratorConfig& c) {
    return {{"stepper", to_string(c.kind)}, {"abs_tol", c.abs_tol},       {"rel_tol", c.rel_tol},
            {"max_step", c.max_step},       {"initial_step", c.initial_step}, {"fixed_step", c.fixed_step},
            {"min_step", c.min_step}};
}

inline Json to_json(const IntegrationStats& s) {
    return {{"accepted", s.accepted},
            {"rejected", s.rejected},
            {"rhs_evaluations", s.rhs_evaluations},
            {"invalid_states", s.invalid_states}};
}

namespace detail {

inline Json summary(const std::vector<double>& xs) {
    if (xs.empty()) return {{"count", 0}};
    double lo = xs.front(), hi = xs.front();
    for (double x : xs) lo = std::min(lo, x), hi = std::max(hi, x);
    return {{"count", xs.size()}, {"min", lo}, {"max", hi}};
}

}

/// Problem echo: triangulation hash, geometry, angle and target summaries,
/// stepper settings.
inline Json problem_echo(const FlowProblem& p) {
    const Triangulation& t = *p.truncation.parent;
    std::vector<double> phi;
    for (std::uint32_t f : p.truncation.faces)
        for (int a = 0; a < 3; ++a) phi.push_back(p.metric0.phi[*t.edge_index(t.faces()[f][a], t.faces()[f][(a + 1) % 3])]);
    std::vector<double> u0;
    for (VertexId v : p.truncation.vertices) u0.push_back(p.metric0.u[v]);
    return {{"triangulation_hash", triangulation_hash(t)},
            {"vertices", t.vertex_count()},
            {"truncation_radius", p.truncation.radius},
            {"interior_vertices", p.truncation.interior.size()},
            {"geometry", to_string(p.metric0.geometry)},
            {"phi", detail::summary(phi)},
            {"u0", detail::summary(u0)},
            {"khat", p.target.empty() ? Json{{"constant", 0.0}} : detail::summary(p.target)},
            {"t_max", p.t_max},
            {"tolerance", p.tolerance},
            {"sample_interval", p.sample_interval},
            {"barrier", p.barrier},
            {"integrator", to_json(p.integrator)}};
}

inline Json to_json(const MonitorRecord& r) {
    return {{"t", r.t},         {"m", r.m},           {"M", r.M},
            {"m_star", r.m_star}, {"M_star", r.M_star}, {"energy", r.energy},
            {"max_rate", r.max_rate}, {"step", r.step}, {"k_min", r.k_min},
            {"k_max", r.k_max}, {"degree_margin", r.degree_margin}, {"min_increment", r.min_increment},
            {"max_u", r.max_u}, {"barrier_margin", r.barrier_margin}};
}

inline Json to_json(const MaxPrincipleReport& r) {
    return {{"asserted", r.asserted},         {"min_nondecreasing", r.min_nondecreasing},
            {"max_nonincreasing", r.max_nonincreasing}, {"worst_min_drop", r.worst_min_drop},
            {"worst_max_rise", r.worst_max_rise}, {"slack", r.slack}, {"ok", r.ok()}};
}

inline Json to_json(const CurvatureBoundReport& r) {
    return {{"degree_bound", r.degree_bound},     {"uniform_bound", r.uniform_bound},
            {"nonpositive", r.nonpositive},       {"worst_degree_margin", r.worst_degree_margin},
            {"max_abs_curvature", r.max_abs_curvature}, {"uniform_limit", r.uniform_limit},
            {"slack", r.slack},                   {"ok", r.ok()}};
}

inline Json to_json(const Trajectory& traj) {
    Json samples = Json::array();
    for (const auto& s : traj.samples) samples.push_back({{"t", s.t}, {"u", s.u}, {"k", s.k}});
    Json monitors = Json::array();
    for (const auto& r : traj.monitors) monitors.push_back(to_json(r));
    return {{"status", to_string(traj.status)},
            {"final_residual", traj.final_residual},
            {"vertices", traj.vertices},
            {"interior", traj.interior},
            {"barrier", traj.barrier},
            {"samples", std::move(samples)},
            {"monitors", std::move(monitors)},
            {"stats", to_json(traj.stats)},
            {"message", traj.message}};
}

/// Full flow report. Wall time is left out so equal inputs give equal files.
inline Json flow_report(const FlowProblem& p, const Trajectory& traj, const Json& config) {
    return {{"config", config},
            {"problem", problem_echo(p)},
            {"trajectory", to_json(traj)},
            {"max_principle", to_json(max_principle_monitor(p, traj))},
            {"curvature_bounds", to_json(curvature_bound_monitor(traj, monitor_slack(p.integrator)))}};
}

inline Json exhaustion_report(const ExhaustionReport& r, const Json& config) {
    Json runs = Json::array();
    for (std::size_t i = 0; i < r.trajectories.size(); ++i)
        runs.push_back({{"radius", r.radii[i]},
                        {"status", to_string(r.trajectories[i].status)},
                        {"final_residual", r.trajectories[i].final_residual},
                        {"failure", r.failures[i]}});
    return {{"config", config},
            {"radii", r.radii},
            {"inner_radius", r.inner_radius},
            {"inner_vertices", r.inner_vertices},
            {"discrepancies", r.discrepancies},
            {"runs", std::move(runs)}};
}

/// CSV of (t, m, M, energy) from the monitor series.
inline void write_flow_csv(const Trajectory& traj, std::ostream& out) {
    const auto old = out.precision(17);
    out << "t,m,M,energy\n";
    for (const auto& r : traj.monitors) out << r.t << ',' << r.m << ',' << r.M << ',' << r.energy << '\n';
    out.precision(old);
}

inline Json metric_to_json(const PackingMetric& m) {
    return {{"geometry", to_string(m.geometry)}, {"u", m.u}, {"phi", m.phi}};
}

/// Reads {"geometry", "u", optional "phi"}; angles default to the
/// triangulation's own.
inline PackingMetric metric_from_json(const Json& j, const Triangulation& t) {
    try {
        PackingMetric m;
        m.geometry = geometry_from_string(j.at("geometry").get<std::string>());
        m.u = j.at("u").get<std::vector<double>>();
        m.phi = j.contains("phi") ? j.at("phi").get<std::vector<double>>() : t.phi();
        validate_metric(t, m);
        return m;
    } catch (const Json::exception& e) {
        throw InputError(std::string("malformed metric: ") + e.what());
    }
}

inline Json hexlab_report(const hex::EvolveResult& r, const Json& config) {
    Json samples = Json::array();
    for (const auto& s : r.samples)
        samples.push_back({{"t", s.t},
                           {"l2", s.l2},
                           {"linf", s.linf},
                           {"energy", s.energy},
                           {"ddt_l2sq", s.ddt_l2sq},
                           {"decay_residual", s.decay_residual},
                           {"ddt_energy", s.ddt_energy},
                           {"d2u_l2", s.d2u_l2}});
    Json snapshots = Json::array();
    for (const auto& s : r.snapshots) snapshots.push_back({{"t", s.t}, {"values", hex::row_major_values(s.field)}});
    return {{"config", config},
            {"status", to_string(r.status)},
            {"message", r.message},
            {"radius", r.final_field.radius()},
            {"boundary", to_string(r.final_field.rule())},
            {"samples", std::move(samples)},
            {"snapshots", std::move(snapshots)},
            {"final", hex::row_major_values(r.final_field)},
            {"stats", to_json(r.stats)}};
}

/// Per-radius VEL, gap, iterations and the trend label; with `dump_weights`
/// the optimal m as (vertex id, weight) pairs over its support.
inline Json vel_report(const vel::TrendReport& rep, const Json& config, bool dump_weights) {
    Json entries = Json::array();
    for (const auto& e : rep.entries) {
        Json row = {{"radius", e.radius},
                    {"sphere_size", e.sphere_size},
                    {"vel", e.estimate.vel},
                    {"norm_sq", e.estimate.norm_sq},
                    {"gap", e.estimate.gap},
                    {"iterations", e.estimate.iterations},
                    {"constraints", e.estimate.constraints},
                    {"certificate_paths", e.estimate.certificate_paths.size()},
                    {"converged", e.estimate.converged}};
        if (dump_weights) {
            Json m = Json::array();
            for (VertexId v = 0; v < e.estimate.m.size(); ++v)
                if (e.estimate.m[v] > 0.0) m.push_back({v, e.estimate.m[v]});
            row["m"] = std::move(m);
        }
        entries.push_back(std::move(row));
    }
    return {{"config", config},
            {"entries", std::move(entries)},
            {"monotone", rep.monotone},
            {"last_relative_change", rep.last_relative_change},
            {"label", to_string(rep.label)}};
}

/// Centers and radii in model coordinates plus the rendered disk circles.
inline Json layout_report(const Embedding& e, const LayoutFidelity& fid, const Json& config) {
    Json circles = Json::array();
    for (VertexId v : e.vertices)
        circles.push_back({{"vertex", v},
                           {"center", {e.centers[v].real(), e.centers[v].imag()}},
                           {"radius", e.radii[v]},
                           {"render_center", {e.render_centers[v].real(), e.render_centers[v].imag()}},
                           {"render_radius", e.render_radii[v]}});
    return {{"config", config},
            {"geometry", to_string(e.geometry)},
            {"holonomy_residual", e.holonomy_residual},
            {"worst_face", e.worst_face},
            {"faces", e.faces.size()},
            {"max_length_error", fid.max_length_error},
            {"max_tangency_error", fid.max_tangency_error},
            {"circles", std::move(circles)}};
}

inline void write_json(const Json& j, std::ostream& out) { out << j.dump(2) << '\n'; }

inline void write_json(const Json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open '" + path + "' for writing");
    write_json(j, out);
    if (!out) throw InputError("failed writing '" + path + "'");
}

inline Json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
}

} // namespace crflab::report

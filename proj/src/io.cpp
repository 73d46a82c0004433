#include "nsq/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "nsq/errors.hpp"

namespace nsq::io {

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
T get_or(const json& j, const char* key, T def) {
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return def;
    return j.at(key).get<T>();
}

Vec vec_from(const json& j) {
    Vec v(Eigen::Index(j.size()));
    for (size_t i = 0; i < j.size(); ++i) v[Eigen::Index(i)] = j.at(i).get<double>();
    return v;
}

json vec_to(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Vec weights_vector(const std::string& w, int d) {
    if (w == "geometric") return spread_vector(d, true);
    if (w == "uniform") return spread_vector(d, false);
    throw std::invalid_argument("unknown weights '" + w + "' (geometric|uniform)");
}

}  // namespace

json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json loop_to_json(const FourierLoop& x) {
    json c = json::array();
    for (int k = -x.order(); k <= x.order(); ++k) c.push_back(vec_to(x.coeff(k)));
    return json{{"d", x.pairs()}, {"K", x.order()}, {"coeffs", c}};
}

FourierLoop loop_from_json(const json& j) {
    const int d = j.at("d").get<int>();
    const int K = j.at("K").get<int>();
    const json& c = j.at("coeffs");
    if (int(c.size()) != 2 * K + 1) throw DimensionError("loop file: expected 2K+1 coefficient vectors");
    FourierLoop x(d, K);
    for (int k = -K; k <= K; ++k) {
        const json& v = c.at(size_t(k + K));
        if (int(v.size()) != 2 * d) throw DimensionError("loop file: coefficient length differs from 2d");
        x.coeff(k) = vec_from(v);
    }
    return x;
}

MapPtr map_from_json(const json& j, int d, json* resolved) {
    const std::string kind = get_or<std::string>(j, "kind", "identity");
    json r{{"kind", kind}};
    MapPtr out;
    if (kind == "identity") {
        out = make_identity(d);
    } else if (kind == "rotation") {
        std::vector<double> ang = get_or<std::vector<double>>(j, "angles", std::vector<double>(size_t(d), 0.3));
        r["angles"] = ang;
        out = make_rotation(d, ang);
    } else if (kind == "shear") {
        const double c = get_or(j, "c", 0.5);
        r["c"] = c;
        out = make_shear(d, c);
    } else if (kind == "mixing") {
        const double c = get_or(j, "c", 0.2);
        const std::string w = get_or<std::string>(j, "weights", "uniform");
        r["c"] = c;
        r["weights"] = w;
        out = make_mixing(d, c, weights_vector(w, d));
    } else if (kind == "plane_wave") {
        const double eps = get_or(j, "eps", 0.01);
        const std::string w = get_or<std::string>(j, "weights", "geometric");
        r["eps"] = eps;
        r["weights"] = w;
        out = make_plane_wave(d, eps, weights_vector(w, d));
    } else if (kind == "bump_flow") {
        BumpFlowParams p;
        p.n0 = get_or(j, "n0", 1);
        p.amplitude = get_or(j, "amplitude", p.amplitude);
        p.width = get_or(j, "width", p.width);
        p.steps = get_or(j, "steps", 0);
        if (j.contains("center")) p.center = vec_from(j.at("center"));
        r["n0"] = p.n0;
        r["amplitude"] = p.amplitude;
        r["width"] = p.width;
        r["steps"] = p.steps;
        r["center"] = p.center.size() ? vec_to(p.center) : json::array();
        out = make_bump_flow(d, p);
    } else if (kind == "elementary") {
        const int n0 = get_or(j, "n0", 1);
        const double eps = get_or(j, "eps", 0.0);
        r["n0"] = n0;
        r["eps"] = eps;
        out = elementary_decompose_example(d, n0, eps);
    } else if (kind == "composition") {
        std::vector<MapPtr> maps;
        json rm = json::array();
        for (const auto& m : j.at("maps")) {
            json sub;
            maps.push_back(map_from_json(m, d, &sub));
            rm.push_back(sub);
        }
        r["maps"] = rm;
        out = make_composition(std::move(maps));
    } else if (kind == "inverse") {
        json sub;
        out = make_inverse(map_from_json(j.at("map"), d, &sub));
        r["map"] = sub;
    } else {
        throw std::invalid_argument("unknown map kind '" + kind + "'");
    }
    if (resolved) *resolved = r;
    return out;
}

HamPtr hamiltonian_from_json(const json& j, int d, json* resolved) {
    const std::string v = get_or<std::string>(j, "variant", "zero");
    json r{{"variant", v}};
    HamPtr out;
    if (v == "zero") {
        out = make_zero();
    } else if (v == "quadratic") {
        const double mu = get_or(j, "mu", std::numbers::pi);
        r["mu"] = mu;
        out = make_quadratic(mu);
    } else if (v == "F") {
        const double rr = get_or(j, "r", 3.0);
        const double delta = get_or(j, "delta", 0.05);
        const double m = get_or(j, "m", 4.0);
        const bool checked = get_or(j, "checked", true);
        r["delta"] = delta;
        r["r"] = rr;
        r["m"] = m;
        r["checked"] = checked;
        out = make_F(checked ? build_g(delta, rr, m) : ramp_profile(delta, rr, m));
    } else if (v == "K") {
        json ri;
        HamPtr inner = hamiltonian_from_json(j.at("inner"), d, &ri);
        const int N = get_or(j, "N", 1);
        const double m = get_or(j, "m", 4.0);
        const double mu = get_or(j, "mu", 3.5);
        const double Mb = get_or(j, "M_big", 8.0);
        r["inner"] = ri;
        r["N"] = N;
        r["m"] = m;
        r["mu"] = mu;
        r["M_big"] = Mb;
        out = make_K(inner, QuadraticQ{N}, build_rho(m, mu, Mb), d);
    } else if (v == "restricted") {
        json rb;
        HamPtr base = hamiltonian_from_json(j.at("base"), d, &rb);
        const int n = get_or(j, "n", 1);
        r["base"] = rb;
        r["n"] = n;
        out = restrict_to(base, n, d);
    } else if (v == "pushforward") {
        json rb, rm;
        HamPtr base = hamiltonian_from_json(j.at("base"), d, &rb);
        MapPtr phi = map_from_json(j.at("map"), d, &rm);
        r["base"] = rb;
        r["map"] = rm;
        out = pushforward(base, phi);
    } else {
        throw std::invalid_argument("unknown hamiltonian variant '" + v + "'");
    }
    if (resolved) *resolved = r;
    return out;
}

FlowConfig flow_from_json(const json& j, FlowConfig f) {
    if (!j.is_object()) return f;
    f.h = get_or(j, "h", f.h);
    f.T = get_or(j, "T", f.T);
    f.eps_grad = get_or(j, "eps_grad", f.eps_grad);
    f.refine_budget = get_or(j, "refine_budget", f.refine_budget);
    f.chain_budget = get_or(j, "chain_budget", f.chain_budget);
    f.chain_gap = get_or(j, "chain_gap", f.chain_gap);
    f.dedup = get_or(j, "dedup", f.dedup);
    f.max_candidates = get_or(j, "max_candidates", f.max_candidates);
    f.record_every = get_or(j, "record_every", f.record_every);
    f.blowup = get_or(j, "blowup", f.blowup);
    f.monotone_tol = get_or(j, "monotone_tol", f.monotone_tol);
    f.link_tol = get_or(j, "link_tol", f.link_tol);
    f.gamma_count = get_or(j, "gamma_count", f.gamma_count);
    if (j.contains("counts")) {
        const json& c = j.at("counts");
        f.counts.n_minus = get_or(c, "n_minus", f.counts.n_minus);
        f.counts.n_zero = get_or(c, "n_zero", f.counts.n_zero);
        f.counts.n_s = get_or(c, "n_s", f.counts.n_s);
    }
    if (!(f.h > 0.0) || !(f.T > 0.0)) throw DomainError("flow: h and T must be positive");
    return f;
}

json flow_to_json(const FlowConfig& f) {
    return json{{"h", f.h},
                {"T", f.T},
                {"eps_grad", f.eps_grad},
                {"refine_budget", f.refine_budget},
                {"chain_budget", f.chain_budget},
                {"chain_gap", f.chain_gap},
                {"dedup", f.dedup},
                {"max_candidates", f.max_candidates},
                {"record_every", f.record_every},
                {"blowup", f.blowup},
                {"monotone_tol", f.monotone_tol},
                {"link_tol", f.link_tol},
                {"gamma_count", f.gamma_count},
                {"counts", {{"n_minus", f.counts.n_minus}, {"n_zero", f.counts.n_zero}, {"n_s", f.counts.n_s}}}};
}

NonsqueezeConfig nonsqueeze_from_json(const json& j, json* resolved) {
    NonsqueezeConfig c;
    const json space = j.value("space", json::object());
    const json trunc = j.value("truncation", json::object());
    const json ns = j.value("nonsqueeze", json::object());
    const json link = j.value("linking", json::object());
    c.d = get_or(space, "d", c.d);
    c.K = get_or(trunc, "K", c.K);
    c.M = get_or(trunc, "M", c.M);
    c.r = get_or(ns, "r", c.r);
    c.m = get_or(ns, "m", c.m);
    c.mu = get_or(ns, "mu", c.mu);
    c.M_big = get_or(ns, "M_big", c.M_big);
    c.delta = get_or(ns, "delta", c.delta);
    c.N = get_or(ns, "N", c.N);
    c.N_max = get_or(ns, "N_max", c.N_max);
    const std::string mode = get_or<std::string>(ns, "mode", "fit");
    if (mode == "fit")
        c.mode = FitMode::Fit;
    else if (mode == "strict")
        c.mode = FitMode::Strict;
    else
        throw std::invalid_argument("nonsqueeze.mode must be fit or strict");
    c.ladder = get_or<std::vector<int>>(ns, "ladder", {});
    c.newton_iters = get_or(ns, "newton_iters", c.newton_iters);
    c.newton_starts = get_or(ns, "newton_starts", c.newton_starts);
    c.residual_tol = get_or(ns, "residual_tol", c.residual_tol);
    c.collar_samples = get_or(ns, "collar_samples", c.collar_samples);
    c.eta = get_or(ns, "eta", c.eta);
    c.bisection_steps = get_or(ns, "bisection_steps", c.bisection_steps);
    c.shell.samples = get_or(ns, "shell_samples", c.shell.samples);
    c.alpha = get_or(link, "alpha", c.alpha);
    c.tau = get_or(link, "tau", c.tau);
    c.gamma_count = get_or(link, "gamma_count", c.gamma_count);
    c.flow = flow_from_json(j.value("flow", json::object()));
    c.flow.seed = get_or<unsigned long long>(j, "seed", c.flow.seed);
    json rmap;
    c.map = map_from_json(j.value("map", json{{"kind", "identity"}}), c.d, &rmap);
    if (c.ladder.empty())
        for (int n = 1; n <= c.d; ++n) c.ladder.push_back(n);
    if (resolved) {
        json r;
        r["space"] = {{"d", c.d}};
        r["truncation"] = {{"K", c.K}, {"M", c.M > 0 ? c.M : default_grid(c.K)}};
        r["nonsqueeze"] = {{"r", c.r},
                           {"m", c.m},
                           {"mu", c.mu},
                           {"M_big", c.M_big},
                           {"delta", c.delta},
                           {"N", c.N},
                           {"N_max", c.N_max},
                           {"mode", mode},
                           {"ladder", c.ladder},
                           {"newton_iters", c.newton_iters},
                           {"newton_starts", c.newton_starts},
                           {"residual_tol", c.residual_tol},
                           {"collar_samples", c.collar_samples},
                           {"eta", c.eta},
                           {"bisection_steps", c.bisection_steps},
                           {"shell_samples", c.shell.samples}};
        r["linking"] = {{"alpha", c.alpha}, {"tau", c.tau}, {"gamma_count", c.gamma_count},
                        {"auto_alpha", !(c.alpha > 0.0)}, {"auto_tau", !(c.tau > 0.0)}};
        r["flow"] = flow_to_json(c.flow);
        r["map"] = rmap;
        r["seed"] = c.flow.seed;
        *resolved = r;
    }
    return c;
}

json action_report_json(const ActionReport& r) {
    return json{{"a", r.a_value},
                {"b", r.b_value},
                {"total", r.total},
                {"grad_h12_norm", hs_norm(r.grad_h12, 0.5)},
                {"residual", r.grad_l2_residual},
                {"grad_h12", loop_to_json(r.grad_h12)}};
}

json trace_json(const MinimaxTrace& tr, bool with_loops) {
    json j{{"seed", tr.seed},
           {"h_used", tr.h_used},
           {"restarts", tr.restarts},
           {"samples", tr.sample_count},
           {"chain_insertions", tr.chain_insertions},
           {"initial_sup", tr.initial_sup},
           {"c_estimate", tr.c_estimate},
           {"c_time", tr.times.empty() ? 0.0 : tr.times[size_t(tr.c_index)]},
           {"c_linked", tr.c_linked},
           {"geometry_ok", tr.geometry_ok},
           {"boundary_max", tr.boundary_max},
           {"gamma_inf", tr.gamma_inf},
           {"max_monotone_violation", tr.max_monotone_violation},
           {"times", tr.times},
           {"sup", tr.sup_estimates},
           {"witness_grad", tr.witness_grad}};
    std::vector<int> linked(tr.linked.begin(), tr.linked.end());
    j["linked"] = linked;
    j["candidate_grad"] = tr.candidate_grad;
    j["candidate_action"] = tr.candidate_action;
    if (with_loops) {
        json w = json::array(), c = json::array();
        for (const auto& x : tr.witnesses) w.push_back(loop_to_json(x));
        for (const auto& x : tr.ps_candidates) c.push_back(loop_to_json(x));
        j["witnesses"] = w;
        j["ps_candidates"] = c;
    }
    return j;
}

std::string trace_csv(const MinimaxTrace& tr) {
    std::string s = "t,sup,grad\n";
    for (size_t i = 0; i < tr.times.size(); ++i)
        s += g17(tr.times[i]) + "," + g17(tr.sup_estimates[i]) + "," + g17(tr.witness_grad[i]) + "\n";
    return s;
}

std::string decay_csv(const DecayFit& f) {
    std::string s = "k,norm\n";
    for (size_t k = 1; k < f.mode_norms.size(); ++k) s += std::to_string(k) + "," + g17(f.mode_norms[k]) + "\n";
    return s;
}

std::string profile_g_csv(const ProfileG& g, int samples) {
    std::string s = "t,g,dg\n";
    const double hi = 1.25 * g.r;
    for (int i = 0; i <= samples; ++i) {
        const double t = hi * i / samples;
        s += g17(t) + "," + g17(g.value(t)) + "," + g17(g.d1(t)) + "\n";
    }
    return s;
}

std::string profile_rho_csv(const ProfileRho& rho, int samples) {
    std::string s = "t,rho,drho\n";
    const double hi = 2.0 * rho.M_big;
    for (int i = 0; i <= samples; ++i) {
        const double t = hi * i / samples;
        s += g17(t) + "," + g17(rho.value(t)) + "," + g17(rho.d1(t)) + "\n";
    }
    return s;
}

json decay_json(const DecayFit& f) {
    return json{{"exponent", number(f.exponent)},
                {"constant", f.constant},
                {"fit_residual", f.residual},
                {"kmin", f.kmin},
                {"kmax", f.kmax},
                {"mode_norms", f.mode_norms}};
}

json candidate_json(const PSCandidate& c) {
    return json{{"action", c.action},
                {"grad_norm_h12", c.grad_norm_h12},
                {"h1_norm", c.h1_norm},
                {"uniform_energy_spread", c.uniform_energy_spread},
                {"residual", c.residual}};
}

json level_verdict_json(const LevelVerdict& v) {
    json items = json::array();
    for (const auto& c : v.items)
        items.push_back(json{{"included", c.included},
                             {"pass", c.pass},
                             {"action", c.action},
                             {"grad", c.grad},
                             {"d_mean", c.d_mean},
                             {"d_spread", c.d_spread},
                             {"resonant", c.resonant},
                             {"xi", c.xi},
                             {"xi_residual", c.xi_residual},
                             {"bound", c.bound},
                             {"plus_minus_one", c.plus_minus_one},
                             {"minus_norm", c.minus_norm},
                             {"one_norm", c.one_norm}});
    return json{{"pass", v.pass}, {"excluded", v.excluded}, {"items", items}};
}

json nonsqueeze_report_json(const NonsqueezeReport& rep, bool with_loops) {
    json j;
    j["map_kind"] = to_string(rep.map_kind);
    j["r_requested"] = rep.r_requested;
    j["r_used"] = rep.r_used;
    j["fitted"] = rep.fitted;
    j["obstruction"] = rep.obstruction;
    j["g"] = {{"delta", rep.delta},
              {"max_slope", rep.g_max_slope},
              {"slope_cap_violated", rep.slope_cap_violated},
              {"minimal_feasible_r", rep.minimal_feasible_r}};
    j["N"] = rep.N;
    j["rho"] = {{"m", rep.rho.m},
                {"mu", rep.rho.mu},
                {"M_big", rep.rho.M_big},
                {"doublings", rep.rho.doublings},
                {"adjusted", rep.rho.adjusted}};
    j["collar"] = number(rep.collar);
    j["eta"] = rep.eta;
    j["boundedness_sigma"] = rep.sigma;
    json rows = json::array();
    for (const auto& r : rep.rows) {
        json cands = json::array();
        for (const auto& c : r.candidates)
            cands.push_back(json{{"action", c.action},
                                 {"grad", c.grad},
                                 {"residual", c.residual},
                                 {"refined", c.refined},
                                 {"support", to_string(c.support)},
                                 {"verdict_pass", c.verdict_pass},
                                 {"d_mean", c.d_mean},
                                 {"resonant", c.resonant},
                                 {"xi", c.xi}});
        json row{{"n", r.n},
                 {"alpha", r.alpha},
                 {"alpha_hit_bound", r.alpha_hit_bound},
                 {"tau", r.tau},
                 {"tau_hit_bound", r.tau_hit_bound},
                 {"boundary_max", r.boundary_max},
                 {"inf_gamma", r.inf_gamma},
                 {"sup_sigma", r.sup_sigma},
                 {"c_estimate", r.c_estimate},
                 {"c_linked", r.c_linked},
                 {"linked_all_times", r.linked_all},
                 {"samples", r.samples},
                 {"restarts", r.restarts},
                 {"h_used", r.h_used},
                 {"final_sup", r.final_sup},
                 {"orbit_action", r.orbit_action},
                 {"orbit_residual", r.orbit_residual},
                 {"newton_iterations", r.newton_iterations},
                 {"newton_stagnated", r.newton_stagnated},
                 {"newton_start_time", r.trace.times.empty() ? 0.0 : r.trace.times[size_t(r.newton_start)]},
                 {"orbit_support", to_string(r.orbit_support)},
                 {"level_in_range", r.level_ok},
                 {"sandwich_ok", r.sandwich_ok},
                 {"straddling", r.straddling},
                 {"outside_verdict", r.outside_verdict},
                 {"grad_K", r.grad_K},
                 {"grad_F_pulled_back", r.grad_F_pulled},
                 {"candidates", cands}};
        if (with_loops) row["orbit"] = loop_to_json(r.orbit);
        rows.push_back(row);
    }
    j["ladder"] = rows;
    j["trend"] = {{"c_monotone", rep.c_monotone}, {"c_stabilizing", rep.c_stabilizing}};
    return j;
}

json admissibility_json(const AdmissibilityReport& rep) {
    json rows = json::array();
    for (const auto& r : rep.rows)
        rows.push_back(json{{"n", r.n},
                            {"proj_forward", r.proj_forward},
                            {"proj_inverse", r.proj_inverse},
                            {"comm_forward", r.comm_forward},
                            {"comm_inverse", r.comm_inverse}});
    return json{{"rows", rows},
                {"proj_decaying", rep.proj_decaying},
                {"comm_decaying", rep.comm_decaying},
                {"flagged", rep.flagged}};
}

}  // namespace nsq::io

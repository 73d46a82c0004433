// Batch front end: action, minimax, nonsqueeze, diagnose, verify.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nsq/errors.hpp"
#include "nsq/io.hpp"
#include "nsq/verify.hpp"

namespace fs = std::filesystem;
using nsq::io::json;

namespace {

struct Common {
    std::string config;
    std::optional<unsigned long long> seed;
    std::string out = ".";
    int threads = 1;
};

json load_config(const Common& o) {
    json j = o.config.empty() ? json::object() : nsq::io::read_json(o.config);
    if (o.seed) j["seed"] = *o.seed;
    return j;
}

std::string out_path(const Common& o, const std::string& name) {
    fs::create_directories(o.out);
    return (fs::path(o.out) / name).string();
}

int grid_of(const json& j, int K) {
    const int M = j.value("truncation", json::object()).value("M", 0);
    return M > 0 ? M : nsq::default_grid(K);
}

nsq::FourierLoop loop_from_config(const json& lj, int d, int K, json* resolved) {
    if (lj.contains("coeffs")) {
        nsq::FourierLoop x = nsq::io::loop_from_json(lj);
        if (x.pairs() != d) throw nsq::DimensionError("loop has d=" + std::to_string(x.pairs()));
        *resolved = {{"source", "inline"}, {"K", x.order()}};
        return x.with_order(K);
    }
    const std::string preset = lj.value("preset", "e_plus");
    json r{{"preset", preset}};
    nsq::FourierLoop x(d, K);
    if (preset == "e_plus") {
        x = nsq::e_plus(d, K);
    } else if (preset == "zero") {
    } else if (preset == "circle") {
        // e^{2 pi J t} v with v = amplitude * e_pair
        const double a = lj.value("amplitude", 0.5);
        const int pair = lj.value("pair", 0);
        if (pair < 0 || pair >= d) throw nsq::DimensionError("circle pair outside 0..d-1");
        nsq::Vec v = nsq::Vec::Zero(2 * d);
        v[pair] = a;
        x.coeff(1) = v;
        r["amplitude"] = a;
        r["pair"] = pair;
    } else {
        throw std::invalid_argument("unknown loop preset '" + preset + "'");
    }
    *resolved = r;
    return x;
}

json envelope(const std::string& cmd, const json& resolved, json report) {
    return json{{"command", cmd}, {"config", resolved}, {"report", std::move(report)}};
}

void note_time(const char* what, std::chrono::steady_clock::time_point t0) {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fprintf(stderr, "%s: %.2f s\n", what, s);
}

int cmd_action(const Common& o, const std::string& loop_path) {
    const json j = load_config(o);
    const int d = j.value("space", json::object()).value("d", 1);
    const int K = j.value("truncation", json::object()).value("K", 16);
    const int M = grid_of(j, K);
    json rh, rl;
    const nsq::HamPtr H = nsq::io::hamiltonian_from_json(j.value("hamiltonian", json::object()), d, &rh);
    const json ljson = loop_path.empty() ? j.value("loop", json::object()) : nsq::io::read_json(loop_path);
    const nsq::FourierLoop x = loop_from_config(ljson, d, K, &rl);
    if (!loop_path.empty()) rl["file"] = loop_path;
    const nsq::ActionReport rep = nsq::evaluate_action(x, *H, M);
    const json resolved{{"space", {{"d", d}}}, {"truncation", {{"K", K}, {"M", M}}}, {"hamiltonian", rh}, {"loop", rl}};
    nsq::io::write_text(out_path(o, "action.json"), nsq::io::dump(envelope("action", resolved, nsq::io::action_report_json(rep))));
    std::printf("total=%.17g residual=%.3g\n", rep.total, rep.grad_l2_residual);
    return 0;
}

int cmd_minimax(const Common& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const json j = load_config(o);
    const int d = j.value("space", json::object()).value("d", 1);
    const int K = j.value("truncation", json::object()).value("K", 16);
    const int M = grid_of(j, K);
    json rh;
    const nsq::HamPtr H = nsq::io::hamiltonian_from_json(j.value("hamiltonian", json::object()), d, &rh);
    const json link = j.value("linking", json::object());
    const int n = link.value("n", d);
    if (n < 1 || n > d) throw nsq::DimensionError("linking.n outside 1..d");
    nsq::FlowConfig fc = nsq::io::flow_from_json(j.value("flow", json::object()));
    fc.seed = j.value("seed", fc.seed);
    fc.M = M;
    fc.threads = o.threads;
    fc.gamma_count = link.value("gamma_count", fc.gamma_count);

    nsq::LinkingSets sets;
    sets.d = d;
    sets.K = K;
    const double alpha = link.value("alpha", 0.0), tau = link.value("tau", 0.0);
    bool tau_bound = false, alpha_bound = false;
    if (tau > 0.0) {
        sets.tau = tau;
    } else {
        const nsq::SweepResult ts = nsq::tau_sweep(*H, sets, n, fc.counts, M);
        sets.tau = ts.value;
        tau_bound = ts.hit_bound;
    }
    if (alpha > 0.0) {
        sets.alpha = alpha;
    } else {
        const nsq::SweepResult as = nsq::alpha_sweep(*H, sets, n, fc.gamma_count, M);
        sets.alpha = as.value;
        alpha_bound = as.hit_bound;
    }
    const nsq::MinimaxTrace tr = nsq::estimate_minimax(*H, sets, n, fc);

    const json resolved{{"space", {{"d", d}}},
                        {"truncation", {{"K", K}, {"M", M}}},
                        {"hamiltonian", rh},
                        {"linking",
                         {{"n", n},
                          {"alpha", sets.alpha},
                          {"tau", sets.tau},
                          {"gamma_count", fc.gamma_count},
                          {"auto_alpha", !(alpha > 0.0)},
                          {"auto_tau", !(tau > 0.0)}}},
                        {"flow", nsq::io::flow_to_json(fc)},
                        {"seed", fc.seed}};
    json rep = nsq::io::trace_json(tr, true);
    rep["alpha_hit_bound"] = alpha_bound;
    rep["tau_hit_bound"] = tau_bound;
    nsq::io::write_text(out_path(o, "minimax.json"), nsq::io::dump(envelope("minimax", resolved, rep)));
    nsq::io::write_text(out_path(o, "minimax_trace.csv"), nsq::io::trace_csv(tr));
    if (!tr.witnesses.empty()) {
        const nsq::FourierLoop& w = tr.witnesses[size_t(tr.witness_index)];
        nsq::io::write_text(out_path(o, "minimax_decay.csv"), nsq::io::decay_csv(nsq::decay_fit(nsq::grad_b_h12(w, *H, M))));
    }
    std::printf("c_estimate=%.17g linked=%d samples=%d\n", tr.c_estimate, int(tr.c_linked), tr.sample_count);
    note_time("minimax", t0);
    return 0;
}

int cmd_nonsqueeze(const Common& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const json j = load_config(o);
    json resolved;
    nsq::NonsqueezeConfig cfg = nsq::io::nonsqueeze_from_json(j, &resolved);
    cfg.flow.threads = o.threads;
    const nsq::NonsqueezeReport rep = nsq::run_nonsqueeze(cfg);
    nsq::io::write_text(out_path(o, "nonsqueeze.json"),
                        nsq::io::dump(envelope("nonsqueeze", resolved, nsq::io::nonsqueeze_report_json(rep, true))));
    nsq::io::write_text(out_path(o, "profile_g.csv"), nsq::io::profile_g_csv(rep.g, 400));
    nsq::io::write_text(out_path(o, "profile_rho.csv"), nsq::io::profile_rho_csv(rep.rho, 400));
    for (const auto& row : rep.rows) {
        const std::string tag = "_n" + std::to_string(row.n) + ".csv";
        nsq::io::write_text(out_path(o, "nonsqueeze_trace" + tag), nsq::io::trace_csv(row.trace));
        nsq::io::write_text(out_path(o, "nonsqueeze_orbit_decay" + tag), nsq::io::decay_csv(nsq::decay_fit(row.orbit)));
        std::printf("n=%d c=%.10g orbit_action=%.10g residual=%.3g sandwich=%d level=%d\n", row.n, row.c_estimate,
                    row.orbit_action, row.orbit_residual, int(row.sandwich_ok), int(row.level_ok));
    }
    note_time("nonsqueeze", t0);
    return 0;
}

int cmd_diagnose(const Common& o, const std::string& trace_path, double eta_in) {
    const json j = load_config(o);
    const int d = j.value("space", json::object()).value("d", 1);
    const int K = j.value("truncation", json::object()).value("K", 16);
    const int M = grid_of(j, K);
    json rh;
    const nsq::HamPtr H = nsq::io::hamiltonian_from_json(j.value("hamiltonian", json::object()), d, &rh);
    const json tj = nsq::io::read_json(trace_path);
    const json& tr = tj.contains("report") ? tj.at("report") : tj;

    std::vector<nsq::FourierLoop> loops;
    for (const char* key : {"witnesses", "ps_candidates"})
        if (tr.contains(key))
            for (const auto& l : tr.at(key)) loops.push_back(nsq::io::loop_from_json(l).with_order(K));
    if (loops.empty()) throw std::invalid_argument("trace has no loops (witnesses / ps_candidates)");

    const nsq::CappedK* Kc = nsq::as_capped(*H);
    const auto* F = dynamic_cast<const nsq::RadialF*>(H.get());
    double eta = eta_in;
    if (Kc && !(eta > 0.0)) eta = 0.5 * nsq::measure_collar(*Kc, d, 4000, 1.0, j.value("seed", 1ULL));

    json items = json::array();
    std::vector<nsq::PSCandidate> cands;
    std::vector<nsq::PSCandidate> outside;
    size_t best = 0;
    for (size_t i = 0; i < loops.size(); ++i) {
        const nsq::PSCandidate c = nsq::make_candidate(loops[i], *H, M);
        const nsq::DecayFit before = nsq::decay_fit(nsq::grad_b_h12(loops[i], *H, M));
        const nsq::FourierLoop sm = nsq::smooth_once(loops[i], *H, M);
        const nsq::DecayFit after = nsq::decay_fit(nsq::grad_b_h12(sm, *H, M));
        json it = nsq::io::candidate_json(c);
        it["decay"] = nsq::io::decay_json(before);
        it["decay_smoothed"] = nsq::io::decay_json(after);
        if (Kc) {
            const nsq::Support s = nsq::classify_support(loops[i], *H, eta, M);
            it["support"] = nsq::to_string(s);
            if (s == nsq::Support::Outside) outside.push_back(c);
        }
        items.push_back(it);
        cands.push_back(c);
        if (c.grad_norm_h12 < cands[best].grad_norm_h12) best = i;
    }
    json rep{{"candidates", items}};
    if (F) rep["level_sign_radial"] = nsq::io::level_verdict_json(nsq::level_sign_radial(cands, *F, M));
    if (Kc) {
        rep["eta"] = eta;
        rep["level_sign_outside"] = nsq::io::level_verdict_json(nsq::level_sign_quadratic_tail(outside, *Kc, M));
    }
    const json resolved{{"space", {{"d", d}}}, {"truncation", {{"K", K}, {"M", M}}}, {"hamiltonian", rh},
                        {"trace", trace_path}, {"eta", eta}};
    nsq::io::write_text(out_path(o, "diagnose.json"), nsq::io::dump(envelope("diagnose", resolved, rep)));
    nsq::io::write_text(out_path(o, "diagnose_decay.csv"),
                        nsq::io::decay_csv(nsq::decay_fit(nsq::grad_b_h12(loops[best], *H, M))));
    std::printf("candidates=%zu best_grad=%.3g\n", loops.size(), cands[best].grad_norm_h12);
    return 0;
}

json suite_json(const nsq::SuiteResult& r) {
    json m = json::object();
    for (const auto& [k, v] : r.metrics) m[k] = nsq::io::number(v);
    return json{{"suite", r.name}, {"pass", r.pass}, {"metrics", m}, {"notes", r.notes}};
}

int cmd_verify(const Common& o, const std::string& suite) {
    const auto& names = nsq::suite_names();
    std::vector<std::string> todo;
    if (suite == "all")
        todo = names;
    else if (std::find(names.begin(), names.end(), suite) != names.end())
        todo = {suite};
    else {
        std::fprintf(stderr, "unknown suite '%s'; expected one of:", suite.c_str());
        for (const auto& n : names) std::fprintf(stderr, " %s", n.c_str());
        std::fprintf(stderr, " all\n");
        return 2;
    }
    const unsigned long long seed = o.seed.value_or(1);
    json out = json::array();
    bool ok = true;
    for (const auto& name : todo) {
        const auto t0 = std::chrono::steady_clock::now();
        const nsq::SuiteResult r = nsq::run_suite(name, seed);
        note_time(name.c_str(), t0);
        ok = ok && r.pass;
        out.push_back(suite_json(r));
        std::printf("%s %s\n", name.c_str(), r.pass ? "PASS" : "FAIL");
    }
    const json doc{{"seed", seed}, {"pass", ok}, {"suites", out}};
    nsq::io::write_text(out_path(o, suite == "all" ? "verify.json" : "verify_" + suite + ".json"), nsq::io::dump(doc));
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nsq: loop-space action, minimax flow and nonsqueeze experiments"};
    app.require_subcommand(1);
    Common o;
    auto common = [&](CLI::App* sub, bool need_config) {
        auto* c = sub->add_option("--config", o.config, "JSON config");
        if (need_config) c->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "overrides the config seed");
        sub->add_option("--out", o.out, "output directory")->capture_default_str();
        sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    };

    std::string loop_path, trace_path, suite;
    double eta = 0.0;
    auto* a = app.add_subcommand("action", "evaluate the action and its gradients on one loop");
    common(a, true);
    a->add_option("--loop", loop_path, "loop JSON {d, K, coeffs}; default: config.loop");
    auto* mm = app.add_subcommand("minimax", "linking-set gradient-flow minimax");
    common(mm, true);
    auto* ns = app.add_subcommand("nonsqueeze", "full F, K, K_n pipeline");
    common(ns, true);
    auto* dg = app.add_subcommand("diagnose", "PS diagnostics on the loops of a minimax report");
    common(dg, true);
    dg->add_option("--trace", trace_path, "minimax.json")->required()->check(CLI::ExistingFile);
    dg->add_option("--eta", eta, "collar margin for support classes; default: half the measured collar");
    auto* vf = app.add_subcommand("verify", "property suites");
    common(vf, false);
    vf->add_option("suite", suite, "adjoint|gradient|decay|transport|admissibility|flow|dichotomy|all")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*a) return cmd_action(o, loop_path);
        if (*mm) return cmd_minimax(o);
        if (*ns) return cmd_nonsqueeze(o);
        if (*dg) return cmd_diagnose(o, trace_path, eta);
        if (*vf) return cmd_verify(o, suite);
    } catch (const nsq::ConstraintError& e) {
        std::cerr << json{{"error", "constraint"}, {"message", e.what()}}.dump() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "invalid_input"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}

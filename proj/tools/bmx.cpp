#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bmx/bmx.hpp"

namespace fs = std::filesystem;
using namespace bmx;

namespace {

// ---------------------------------------------------------------------------
// Budgets

using Budget = std::map<std::string, double>;

const std::map<std::string, Budget>& budget_presets() {
    static const std::map<std::string, Budget> p{
        {"quick",
         {{"S", 1000}, {"psd_outer", 100}, {"psd_inner", 50}, {"cmi_ny", 40}, {"cmi_outer", 20}, {"cmi_inner", 10},
          {"cmi_post", 200}, {"n_prior", 60}, {"n_mc", 20}, {"n_y", 20}, {"ppc_inner", 100}, {"decomp_mc", 200},
          {"R", 20}, {"boot_S", 1000}, {"S_ref", 4000}}},
        {"default",
         {{"S", 4000}, {"psd_outer", 300}, {"psd_inner", 100}, {"cmi_ny", 200}, {"cmi_outer", 40}, {"cmi_inner", 25},
          {"cmi_post", 1000}, {"n_prior", 200}, {"n_mc", 40}, {"n_y", 100}, {"ppc_inner", 200}, {"decomp_mc", 2000},
          {"R", 100}, {"boot_S", 2000}, {"S_ref", 20000}}},
        {"full",
         {{"S", 10000}, {"psd_outer", 500}, {"psd_inner", 200}, {"cmi_ny", 400}, {"cmi_outer", 50},
          {"cmi_inner", 40}, {"cmi_post", 2000}, {"n_prior", 400}, {"n_mc", 60}, {"n_y", 200}, {"ppc_inner", 500},
          {"decomp_mc", 5000}, {"R", 500}, {"boot_S", 2000}, {"S_ref", 20000}}}};
    return p;
}

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

double parse_number(const std::string& k, const std::string& v) {
    try {
        std::size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::logic_error&) {
        throw UsageError("'" + k + "' needs a number, got '" + v + "'");
    }
}

std::map<std::string, double> parse_assignments(const std::string& s) {
    std::map<std::string, double> out;
    for (const auto& item : split_list(s)) {
        auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("expected key=value, got '" + item + "'");
        out[item.substr(0, eq)] = parse_number(item.substr(0, eq), item.substr(eq + 1));
    }
    return out;
}

// "quick", "default", "full", or "[preset,]key=value,..." on top of a preset.
Budget parse_budget(const std::string& spec, std::string& canonical) {
    std::string preset = "default";
    std::string rest;
    for (const auto& item : split_list(spec)) {
        if (item.find('=') == std::string::npos) preset = item;
        else rest += (rest.empty() ? "" : ",") + item;
    }
    auto it = budget_presets().find(preset);
    if (it == budget_presets().end()) throw UsageError("unknown budget preset '" + preset + "' (quick, default, full)");
    Budget b = it->second;
    for (const auto& [k, v] : parse_assignments(rest)) {
        if (!b.count(k)) throw UsageError("unknown budget key '" + k + "'");
        if (!(v > 0)) throw UsageError("budget '" + k + "' must be positive");
        b[k] = v;
    }
    canonical = preset;
    for (const auto& [k, v] : b)
        if (v != it->second.at(k)) canonical += "," + k + "=" + RunConfig::num(v);
    return b;
}

std::size_t count(const Budget& b, const char* k) { return static_cast<std::size_t>(b.at(k)); }

FisherBudget fisher_budget(const Budget& b) {
    FisherBudget f;
    f.n_prior = count(b, "n_prior");
    f.n_mc = count(b, "n_mc");
    f.n_y = count(b, "n_y");
    f.S_post = count(b, "S");
    return f;
}

// ---------------------------------------------------------------------------
// Shared options and output plumbing

struct Common {
    std::string model, pair, hp, budget = "default", out, format = "json,csv,svg,txt", data;
    std::uint64_t seed = 1;
};

void add_common(CLI::App* app, Common& c, bool wants_model, bool wants_pair) {
    if (wants_model) app->add_option("--model", c.model, "builtin model name");
    if (wants_pair) app->add_option("--pair", c.pair, "builtin expansion pair name");
    app->add_option("--hp", c.hp, "hyperparameters as key=value,...");
    app->add_option("--seed", c.seed, "master seed")->capture_default_str();
    app->add_option("--budget", c.budget, "quick | default | full, optionally followed by key=value overrides")
        ->capture_default_str();
    app->add_option("--out", c.out, "output directory (default out/<command>-<config hash>)");
    app->add_option("--format", c.format, "subset of json,csv,svg,txt")->capture_default_str();
}

struct Run {
    RunConfig cfg;
    Budget budget;
    fs::path dir;
    std::vector<std::string> written;

    Run(const std::string& command, const std::string& target, const Common& c,
        const std::map<std::string, std::string>& options = {}) {
        cfg.command = command;
        cfg.target = target;
        cfg.hyper = parse_assignments(c.hp);
        cfg.seed = c.seed;
        budget = parse_budget(c.budget, cfg.budget);
        cfg.options = options;
        cfg.formats = split_list(c.format);
        for (const auto& f : cfg.formats)
            if (f != "json" && f != "csv" && f != "svg" && f != "txt") throw UsageError("unknown format '" + f + "'");
        dir = c.out.empty() ? fs::path("out") / (command + "-" + cfg.hash()) : fs::path(c.out);
        cfg.out_dir = dir.string();
    }

    std::string stamp() const {
        return "config_hash=" + cfg.hash() + " seed=" + std::to_string(cfg.seed) + " version=" + kVersion;
    }

    void put(const std::string& format, const std::string& file, const std::string& content) {
        if (!cfg.wants(format)) return;
        write_file(dir / file, content);
        written.push_back(file);
    }
    void put_json(const std::string& file, const json& j) { put("json", file, j.dump(2) + "\n"); }
    void put_txt(const std::string& file, const std::string& body) { put("txt", file, "# " + stamp() + "\n" + body); }

    void finish() const {
        std::cout << "wrote " << written.size() << " file(s) to " << dir.string() << "\n";
    }
};

json error_json(const Error& e, const std::string& hint) {
    json j{{"error", e.what()}, {"kind", to_string(e.kind())}};
    if (!hint.empty() && e.kind() == ErrorKind::capability) j["hint"] = hint;
    return j;
}

// Default dataset: the outlier pair for the student-t model, otherwise one draw from the prior predictive.
DataSet default_data(const ModelSpec& model, std::uint64_t seed) {
    if (model.name == "student-t-outlier") return make_data({-10.0, 10.0}, {}, "student-t-y");
    Rng r = Rng(seed).split(0x44415441);
    auto theta = model.sample_prior(r);
    DataSet y = model.sample_data(theta, model.n_obs, r);
    y.name = model.name + "-simulated";
    return y;
}

DataSet load_data(const Common& c, const ModelSpec& model) {
    return c.data.empty() ? default_data(model, c.seed) : read_dataset_csv(c.data);
}

PosteriorDraws draws_for(const ModelSpec& model, const HyperParams& hp, const DataSet& y, std::size_t S,
                         std::uint64_t seed) {
    if (model.name == "student-t-outlier") {
        double lo = hp.count("lo") ? hp.at("lo") : -15.0, hi = hp.count("hi") ? hp.at("hi") : 15.0;
        return grid_posterior(model, y, {{lo, hi}}, 2001);
    }
    return posterior_draws(model, y, S, seed);
}

// Local maxima of a smoothed weighted histogram that rise above a quarter of the tallest peak.
int mode_count(const PosteriorDraws& d, std::size_t col) {
    const int bins = 60;
    auto x = column_of(d, col);
    double lo = *std::min_element(x.begin(), x.end()), hi = *std::max_element(x.begin(), x.end());
    if (!(hi > lo)) return 1;
    std::vector<double> h(bins, 0.0), s(bins, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        int b = std::clamp(static_cast<int>((x[i] - lo) / (hi - lo) * bins), 0, bins - 1);
        h[static_cast<std::size_t>(b)] += d.weight(i);
    }
    for (int b = 0; b < bins; ++b)
        for (int k = std::max(0, b - 2); k <= std::min(bins - 1, b + 2); ++k) s[b] += h[k] / 5.0;
    double top = *std::max_element(s.begin(), s.end());
    int modes = 0;
    double valley = top;
    bool rising = false;
    for (int b = 0; b < bins; ++b) {
        double prev = b ? s[b - 1] : 0.0, next = b + 1 < bins ? s[b + 1] : 0.0;
        valley = std::min(valley, s[b]);
        if (s[b] >= prev && s[b] > next && s[b] > 0.25 * top) {
            // Count a new mode only after a dip to below half of this peak.
            if (!rising || valley < 0.5 * s[b]) ++modes;
            rising = true;
            valley = s[b];
        }
    }
    return std::max(modes, 1);
}

// ---------------------------------------------------------------------------
// examples

int cmd_examples(const Common& c, const std::string& only) {
    Run run("examples", "regression-suite", c, {{"only", only}});
    std::vector<CriterionResult> results;
    for (const auto& e : regression_suite()) {
        if (!only.empty() && e.group != only && std::to_string(e.id) != only) continue;
        results.push_back(run_timed(e, c.seed));
        const auto& r = results.back();
        std::printf("[%s] %d %-48s (%.1f s)\n", r.pass() ? "PASS" : "FAIL", r.id, r.title.c_str(), r.seconds);
        for (const auto& l : r.lines)
            std::printf("    %s %-62s paper/ref %-12s est %-12s tol %-9s %s\n", l.pass ? "ok  " : "FAIL",
                        l.name.c_str(), fmt(l.reference).c_str(), fmt(l.estimate).c_str(), fmt(l.tolerance).c_str(),
                        l.note.c_str());
    }
    if (results.empty()) throw UsageError("--only '" + only + "' matches no check group");

    bool all = true;
    json j = meta_json(run.cfg);
    j["criteria"] = json::array();
    CsvWriter csv(run.cfg, {"id", "group", "check", "reference", "estimate", "tolerance", "pass", "note"});
    std::ostringstream txt;
    for (const auto& r : results) {
        all = all && r.pass();
        json lines = json::array();
        txt << (r.pass() ? "PASS " : "FAIL ") << r.id << " " << r.title << "\n";
        for (const auto& l : r.lines) {
            lines.push_back({{"check", l.name}, {"reference", l.reference}, {"estimate", l.estimate},
                             {"tolerance", l.tolerance}, {"pass", l.pass}, {"note", l.note}});
            csv.row({std::to_string(r.id), r.group, "\"" + l.name + "\"", fmt(l.reference), fmt(l.estimate),
                     fmt(l.tolerance), l.pass ? "1" : "0", "\"" + l.note + "\""});
            txt << "  " << (l.pass ? "ok   " : "FAIL ") << l.name << ": ref " << fmt(l.reference) << ", est "
                << fmt(l.estimate) << ", tol " << fmt(l.tolerance) << (l.note.empty() ? "" : " (" + l.note + ")")
                << "\n";
        }
        j["criteria"].push_back(
            {{"id", r.id}, {"group", r.group}, {"title", r.title}, {"pass", r.pass()}, {"checks", lines}});
    }
    j["all_pass"] = all;
    run.put_json("examples.json", j);
    run.put("csv", "examples.csv", csv.str());
    run.put_txt("examples.txt", txt.str());
    run.finish();
    std::cout << (all ? "all checks passed" : "some checks failed") << "\n";
    return all ? 0 : 1;
}

// ---------------------------------------------------------------------------
// diagnose

int cmd_diagnose(const Common& c, double eps) {
    if (c.model.empty()) throw UsageError("diagnose needs --model");
    Run run("diagnose", c.model, c, {{"data", c.data}, {"eps", RunConfig::num(eps)}});
    const auto& b = run.budget;
    ModelSpec model = builtin_model(c.model, run.cfg.hyper);
    DataSet y = load_data(c, model);
    FisherBudget fb = fisher_budget(b);
    Rng root(c.seed);

    json j = meta_json(run.cfg);
    j["data"] = {{"name", y.name}, {"n", y.size()}, {"grouped", y.grouped()}};
    std::ostringstream txt;
    txt << "model " << model.name << ", n = " << y.size() << "\n";
    std::vector<std::pair<std::string, bool>> checks;
    double analytic_mi = std::numeric_limits<double>::quiet_NaN();

    if (model.analytic.linear_gaussian) {
        auto g = gaussian_mi_cmi(model);
        analytic_mi = g.mi_full.value;
        j["analytic"] = {{"mi", g.mi_full.value}, {"cmi", g.cmi.value}};
        txt << "analytic mi " << fmt(g.mi_full.value) << ", cmi " << fmt(g.cmi.value) << "\n";
    }

    try {
        CmiOptions o;
        o.n_y = count(b, "cmi_ny");
        o.S_outer = count(b, "cmi_outer");
        o.n_inner = count(b, "cmi_inner");
        o.S_post = count(b, "cmi_post");
        Rng r = root.split(1);
        auto e = estimate_cmi(model, o, r);
        j["cmi_mc"] = to_json(e);
        txt << "nested-MC cmi " << fmt(e.value) << " (s.e. " << fmt(e.std_error) << ")\n";
    } catch (const Error& e) {
        j["cmi_mc"] = error_json(e, "the model needs an evaluable likelihood and a posterior sampler");
    }

    PosteriorDraws draws = draws_for(model, run.cfg.hyper, y, count(b, "S"), root.split(2).key());
    j["posterior"] = {{"sampler", to_string(draws.sampler)}, {"draws", draws.size()},
                      {"warnings", draws.warnings}};

    try {
        PsdOptions o;
        o.S_outer = count(b, "psd_outer");
        o.n_inner = count(b, "psd_inner");
        o.S_mix = std::min<std::size_t>(draws.size(), 2000);
        Rng r = root.split(3);
        auto e = estimate_psd(y, model, draws, o, r);
        j["psd"] = to_json(e);
        txt << "psd " << fmt(e.value) << " (s.e. " << fmt(e.std_error) << ")\n";
    } catch (const Error& e) {
        j["psd"] = error_json(e, "the psd needs an evaluable likelihood density");
    }

    json bounds = json::object();
    double full_bound = std::numeric_limits<double>::quiet_NaN(), weak_bound = full_bound;
    for (BoundVariant v : {BoundVariant::full, BoundVariant::weak}) {
        const char* name = v == BoundVariant::full ? "full" : "weak";
        try {
            Rng r = root.split(v == BoundVariant::full ? 4 : 5);
            auto bv = mi_upper_bound(model, v, FisherBlock::full, fb, r);
            bounds[name] = to_json(bv);
            (v == BoundVariant::full ? full_bound : weak_bound) = bv.value;
            txt << name << " mi bound " << fmt(bv.value) << "\n";
        } catch (const Error& e) {
            bounds[name] = error_json(e, "the bound needs a log-concave prior; use the MC estimators instead");
        }
    }
    j["mi_bounds"] = bounds;

    try {
        Rng r = root.split(6);
        auto ef = prior_expected_fisher(model, FisherBlock::full, fb, r);
        auto ev = sym_eigen(ef.matrix).values;
        j["fisher_spectrum"] = to_json(ev);
        j["fisher_trace"] = {{"value", ef.trace()}, {"std_error", ef.trace_se()}};
        if (run.cfg.wants("csv")) {
            CsvWriter w(run.cfg, {"index", "eigenvalue"});
            for (Eigen::Index i = 0; i < ev.size(); ++i) w.row({std::to_string(i + 1), fmt(ev(i))});
            run.put("csv", "spectrum.csv", w.str());
        }
    } catch (const Error& e) {
        j["fisher_spectrum"] = error_json(e, "the expected Fisher information needs prior and data samplers");
    }

    try {
        Rng r = root.split(7);
        auto t = cmi_trace_term(model, fb, r);
        j["cmi_trace_term"] = {{"value", t.value}, {"std_error", t.std_error}, {"d", t.d}};
        txt << "cmi trace term " << fmt(t.value) << " (d = " << t.d << ")\n";
    } catch (const Error& e) {
        j["cmi_trace_term"] = error_json(e, "the trace term needs a posterior sampler and Fisher information");
    }

    json weak = json::array();
    bool any_weak = false;
    for (std::size_t k = 0; k < model.d_shared; ++k) {
        std::string pname = k < model.param_names.size() ? model.param_names[k] : "p" + std::to_string(k + 1);
        try {
            auto v = weak_id_verdict(model, y, {static_cast<int>(k)}, eps, draws, root.split(100 + k).key());
            any_weak = any_weak || v.weak;
            weak.push_back({{"parameter", pname}, {"gap", v.gap}, {"std_error", v.std_error}, {"weak", v.weak},
                            {"method", to_string(v.method)}});
            txt << "entropy gap " << pname << " " << fmt(v.gap) << (v.weak ? " (weakly identified)" : "") << "\n";
        } catch (const Error& e) {
            weak.push_back({{"parameter", pname}, {"error", e.what()}});
        }
    }
    j["weak_identification"] = weak;

    const int modes = mode_count(draws, 0);
    j["flags"] = {{"psd_reported", j["psd"].contains("value")}, {"bimodal", modes > 1}, {"modes", modes},
                  {"weakly_identified", any_weak}};
    txt << "posterior modes in the first coordinate: " << modes << "\n";

    if (std::isfinite(analytic_mi) && std::isfinite(full_bound)) {
        checks.push_back({"analytic mi <= bound", analytic_mi <= full_bound + 1e-12});
        if (std::isfinite(weak_bound)) checks.push_back({"bound <= weak bound", full_bound <= weak_bound + 1e-12});
    }
    json cj = json::object();
    bool ok = true;
    for (const auto& [name, pass] : checks) {
        cj[name] = pass;
        ok = ok && pass;
        txt << (pass ? "ok   " : "FAIL ") << name << "\n";
    }
    j["checks"] = cj;
    run.put_json("diagnose.json", j);
    run.put_txt("diagnose.txt", txt.str());
    run.put("csv", "data.csv", dataset_csv(y, "# " + run.stamp()));
    std::cout << txt.str();
    run.finish();
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// expand-compare

int cmd_expand_compare(const Common& c, int R) {
    if (c.pair.empty()) throw UsageError("expand-compare needs --pair");
    Run run("expand-compare", c.pair, c, {{"R", std::to_string(R)}});
    ExpansionPair pair = builtin_pair(c.pair, run.cfg.hyper);
    FisherBudget fb = fisher_budget(run.budget);
    Rng root(c.seed);

    Rng r1 = root.split(1);
    auto t = tradeoff_report(pair, fb, r1, R);
    json j = meta_json(run.cfg);
    j["tradeoff"] = to_json(t);
    std::ostringstream txt;
    txt << t.text_table();

    try {
        Rng r2 = root.split(2);
        auto d = mi_decomposition(pair, count(run.budget, "decomp_mc"), r2);
        j["mi_decomposition"] = {{"mi_base", to_json(d.mi_base)},
                                 {"mi_exp", to_json(d.mi_exp)},
                                 {"delta_exp", to_json(d.delta_exp)},
                                 {"delta_post", to_json(d.delta_post)},
                                 {"identity_residual", d.identity_residual},
                                 {"identity_se", d.identity_se},
                                 {"identity_holds", d.identity_holds}};
        txt << "mi_exp " << fmt(d.mi_exp.value) << " = mi_base " << fmt(d.mi_base.value) << " + delta_exp "
            << fmt(d.delta_exp.value) << " + delta_post " << fmt(d.delta_post.value) << "\n";
    } catch (const Error& e) {
        j["mi_decomposition"] = error_json(e, "the decomposition needs evidence oracles or a linear-Gaussian pair");
    }

    if (run.cfg.wants("csv")) {
        CsvWriter w(run.cfg, {"spectrum", "index", "value"});
        auto emit = [&](const char* name, const std::vector<double>& v) {
            for (std::size_t i = 0; i < v.size(); ++i) w.row({name, std::to_string(i + 1), fmt(v[i])});
        };
        emit("iota", t.iota);
        emit("iota_cond", t.iota_cond);
        emit("iota_exp", t.iota_exp);
        run.put("csv", "spectra.csv", w.str());
    }

    if (pair.name == "simple-reg-2obs") {
        CsvWriter w(run.cfg, {"rho", "mi_bound_base", "mi_bound_exp", "cmi_term_base", "cmi_term_exp",
                              "analytic_mi_exp", "analytic_cmi_exp"});
        std::vector<double> mi, cmi;
        json sweep = json::array();
        for (double rho : {0.0, 0.25, 0.5, 0.75, 0.9}) {
            auto hp = run.cfg.hyper;
            hp["rho"] = rho;
            auto p = builtin_pair("simple-reg-2obs", hp);
            Rng r = root.split(1000 + static_cast<std::uint64_t>(rho * 100));
            auto s = tradeoff_report(p, fb, r, R);
            auto g = gaussian_mi_cmi(p.expanded);
            mi.push_back(s.mi_bound_exp);
            cmi.push_back(s.cmi_term_exp);
            w.row({fmt(rho), fmt(s.mi_bound_base), fmt(s.mi_bound_exp), fmt(s.cmi_term_base), fmt(s.cmi_term_exp),
                   fmt(g.mi.value), fmt(g.cmi.value)});
            sweep.push_back({{"rho", rho}, {"mi_bound_exp", s.mi_bound_exp}, {"cmi_term_exp", s.cmi_term_exp},
                             {"analytic_mi_exp", g.mi.value}, {"analytic_cmi_exp", g.cmi.value}});
        }
        double rc = spearman(mi, cmi);
        j["correlation_sweep"] = {{"points", sweep}, {"rank_correlation", rc}};
        txt << "correlation sweep: rank correlation of mi bound and cmi term " << fmt(rc) << "\n";
        run.put("csv", "correlation_sweep.csv", w.str());
    }

    bool ok = t.trace_bound.holds;
    if (t.dilution.classification == Dilution::totally_diluting) ok = ok && t.diluting_inequality;
    else if (t.dilution.classification == Dilution::totally_concentrating) ok = ok && t.nondiluting_inequality;
    j["checks_pass"] = ok;
    run.put_json("tradeoff.json", j);
    run.put_txt("tradeoff.txt", txt.str());
    std::cout << txt.str();
    run.finish();
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// ppc

int cmd_ppc(const Common& c, std::string stats, std::string projections) {
    if (c.model.empty()) throw UsageError("ppc needs --model");
    const bool student = c.model == "student-t-outlier";
    if (stats.empty()) stats = student ? "neg-first,coord2" : "mean";
    if (projections.empty()) projections = "1";
    Run run("ppc", c.model, c, {{"data", c.data}, {"stat", stats}, {"proj", projections}});
    ModelSpec model = builtin_model(c.model, run.cfg.hyper);
    DataSet y = load_data(c, model);
    Rng root(c.seed);
    PosteriorDraws draws = draws_for(model, run.cfg.hyper, y, count(run.budget, "S"), root.split(1).key());

    std::vector<Projection> projs;
    for (const auto& p : split_list(projections)) {
        double k = parse_number("--proj", p);
        if (k < 1 || k != std::floor(k)) throw UsageError("--proj takes 1-based parameter indices");
        projs.push_back(coordinate_projection(model, static_cast<std::size_t>(k) - 1));
    }

    json j = meta_json(run.cfg);
    j["data"] = {{"name", y.name}, {"n", y.size()}};
    j["posterior"] = {{"sampler", to_string(draws.sampler)}, {"draws", draws.size()}};
    j["checks"] = json::array();
    std::ostringstream txt;
    std::uint64_t stream = 10;
    for (const auto& sname : split_list(stats)) {
        TestStatistic T = statistic::by_name(sname);
        Rng r = root.split(stream++);
        auto res = conditional_pppv(model, y, draws, T, count(run.budget, "ppc_inner"), r);
        json cj = to_json(res);
        cj["mass_below_0.01"] = mass_below(res, draws, 0.01);
        cj["mass_below_0.05"] = mass_below(res, draws, 0.05);
        cj["scatters"] = json::array();
        txt << "statistic " << T.name << ": T(y) " << fmt(res.t_obs) << ", marginal p " << fmt(res.marginal_p)
            << ", mass with p < 0.01 " << fmt(mass_below(res, draws, 0.01)) << "\n";
        for (const auto& proj : projs) {
            auto pts = check_scatter(res, draws, proj);
            double rc = scatter_rank_correlation(pts);
            cj["scatters"].push_back({{"projection", proj.name}, {"rank_correlation", std::isfinite(rc) ? json(rc) : json(nullptr)}});
            txt << "  projection " << proj.name << ": rank correlation " << fmt(rc) << "\n";
            const std::string base = "ppc-" + T.name + "-" + proj.name;
            if (run.cfg.wants("csv")) {
                CsvWriter w(run.cfg, {"draw", "projection", "conditional_p", "weight"});
                for (const auto& p : pts)
                    w.row({std::to_string(p.draw_index), fmt(p.projection), fmt(p.conditional_p), fmt(p.weight)});
                run.put("csv", base + ".csv", w.str());
            }
            if (run.cfg.wants("svg")) {
                SvgScatter svg;
                svg.title = "conditional p for " + T.name + " (marginal p " + fmt(res.marginal_p) + ")";
                svg.x_label = proj.name;
                svg.reference = res.marginal_p;
                svg.comment = run.stamp();
                for (const auto& p : pts) {
                    svg.x.push_back(p.projection);
                    svg.y.push_back(p.conditional_p);
                    svg.weight.push_back(p.weight);
                }
                run.put("svg", base + ".svg", svg.render());
            }
        }
        j["checks"].push_back(cj);
    }
    run.put_json("ppc.json", j);
    run.put_txt("ppc.txt", txt.str());
    std::cout << txt.str();
    run.finish();
    return 0;
}

// ---------------------------------------------------------------------------
// bootstrap

int cmd_bootstrap(const Common& c, bool generate, int M, int L) {
    std::string model_name = c.model.empty() ? "grouped-expanded" : c.model;
    if (!generate && c.data.empty()) throw UsageError("bootstrap needs --data FILE or --generate");
    Run run("bootstrap", model_name, c,
            {{"data", c.data}, {"generate", generate ? "1" : "0"}, {"M", std::to_string(M)}, {"L", std::to_string(L)}});
    ModelSpec model = builtin_model(model_name, run.cfg.hyper);
    std::vector<DataSet> data;
    if (generate) {
        data = grouped_datasets(c.seed, M, L);
        for (const auto& y : data) run.put("csv", "data-" + y.name + ".csv", dataset_csv(y, "# " + run.stamp()));
    } else {
        data.push_back(read_dataset_csv(c.data));
    }
    BootConfig cfg;
    cfg.R = count(run.budget, "R");
    cfg.S = count(run.budget, "boot_S");
    cfg.S_ref = count(run.budget, "S_ref");
    cfg.seed = c.seed;

    json j = meta_json(run.cfg);
    j["design"] = {{"R", cfg.R}, {"M_new", cfg.M_new}, {"L_new", cfg.L_new}, {"M", cfg.M}, {"S", cfg.S},
                   {"S_ref", cfg.S_ref}};
    j["datasets"] = json::array();
    CsvWriter table(run.cfg, {"dataset", "variance_ratio", "sigma_obs", "same_posterior", "same_posterior_se",
                              "new_posterior", "new_posterior_se", "same_prior", "same_prior_se", "new_prior",
                              "new_prior_se"});
    CsvWriter hist(run.cfg, {"bin_left", "bin_right", "count", "scheme", "dataset", "source"});
    std::ostringstream txt;
    txt << "dataset  var-ratio  same/post  new/post  same/prior  new/prior\n";
    for (const auto& y : data) {
        const int cost_same = scheme_cost(Scheme::same_subpops, cfg, y.num_groups());
        const int cost_new = scheme_cost(Scheme::new_subpops, cfg, y.num_groups());
        if (cost_same != cost_new)
            std::cerr << "note: designs differ in cost (" << cost_same << " vs " << cost_new << ") for " << y.name
                      << "\n";
        auto cmp = compare_schemes(model, y, cfg);
        json dj{{"dataset", y.name}, {"variance_ratio", cmp.variance_ratio}, {"sigma_obs", cmp.sigma_obs},
                {"cost", {cost_same, cost_new}}, {"cells", json::array()}};
        std::vector<std::string> row{y.name, fmt(cmp.variance_ratio), fmt(cmp.sigma_obs)};
        txt << y.name << "  " << fmt(cmp.variance_ratio);
        for (Source src : {Source::posterior, Source::prior})
            for (Scheme s : {Scheme::same_subpops, Scheme::new_subpops}) {
                const auto& cell = cmp.cell(s, src);
                dj["cells"].push_back(to_json(cell));
                row.push_back(fmt(cell.rho_bar));
                row.push_back(fmt(cell.rho_se));
                txt << "  " << fmt(cell.rho_bar);
            }
        txt << "\n";
        table.row(row);
        for (std::size_t k = 0; k < cmp.cells.size(); ++k)
            for (const auto& bin : cmp.histograms[k])
                hist.row({fmt(bin.left), fmt(bin.right), std::to_string(bin.count), to_string(cmp.cells[k].scheme),
                          y.name, to_string(cmp.cells[k].source)});
        j["datasets"].push_back(dj);
    }
    run.put("csv", "boot_table.csv", table.str());
    run.put("csv", "boot_histograms.csv", hist.str());
    run.put_json("bootstrap.json", j);
    run.put_txt("bootstrap.txt", txt.str());
    std::cout << txt.str();
    run.finish();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Identifiability and falsifiability diagnostics for Bayesian model expansion"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    Common common;

    auto* ex = app.add_subcommand("examples", "run the closed-form regression suite and print a pass/fail table");
    std::string only;
    ex->add_option("--only", only, "restrict to a group (analytic, cmi, ppc, fisher, bounds, tradeoff, bootstrap)");
    add_common(ex, common, false, false);

    auto* dg = app.add_subcommand("diagnose", "MI/CMI estimates, bounds, spectra and weak-identification verdicts");
    double eps = 0.1;
    add_common(dg, common, true, false);
    dg->add_option("--data", common.data, "dataset CSV (group,obs_index,value)");
    dg->add_option("--eps", eps, "entropy-gap threshold for weak identification")->capture_default_str();

    auto* xc = app.add_subcommand("expand-compare", "tradeoff table, dilution classification and delta terms");
    int R = 1;
    add_common(xc, common, false, true);
    xc->add_option("--R", R, "constant in psi2(x) = x/(1+Rx)")->capture_default_str()->check(CLI::PositiveNumber);

    auto* pc = app.add_subcommand("ppc", "conditional and marginal posterior predictive checks");
    std::string stats, projections;
    add_common(pc, common, true, false);
    pc->add_option("--data", common.data, "dataset CSV (group,obs_index,value)");
    pc->add_option("--stat", stats, "statistics: neg-first, mean, group-mean-sd, constant, coordK, window-sdK");
    pc->add_option("--proj", projections, "1-based parameter indices to plot against");

    auto* bs = app.add_subcommand("bootstrap", "posterior-bootstrap comparison of sampling designs");
    bool generate = false;
    int M = 2, L = 20;
    add_common(bs, common, true, false);
    bs->add_option("--data", common.data, "grouped dataset CSV (group,obs_index,value)");
    bs->add_flag("--generate", generate, "regenerate the three simulated grouped datasets");
    bs->add_option("--M", M, "points per group for --generate")->capture_default_str()->check(CLI::PositiveNumber);
    bs->add_option("--L", L, "groups for --generate")->capture_default_str()->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*ex) return cmd_examples(common, only);
        if (*dg) return cmd_diagnose(common, eps);
        if (*xc) return cmd_expand_compare(common, R);
        if (*pc) return cmd_ppc(common, stats, projections);
        if (*bs) return cmd_bootstrap(common, generate, M, L);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}

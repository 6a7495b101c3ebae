// phaselab command-line front end.
//
//   phaselab <command> --config <file> [--out dir] [--format csv,json,svg] [--seed k]
//
// commands: phase_diagram, rates, free_energy, soh, hysteresis
// exit codes: 0 ok, 1 config error, 2 numerical failure

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "phaselab/phaselab.hpp"

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace phaselab;

namespace {

// ---------------------------------------------------------------------------
// config

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

double get_number(const json& obj, const std::string& key, double def) {
    if (!obj.contains(key)) return def;
    if (!obj[key].is_number()) throw ConfigError("'" + key + "' must be a number");
    return obj[key].get<double>();
}

long long get_int(const json& obj, const std::string& key, long long def) {
    if (!obj.contains(key)) return def;
    if (!obj[key].is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
    return obj[key].get<long long>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& def) {
    if (!obj.contains(key)) return def;
    if (!obj[key].is_string()) throw ConfigError("'" + key + "' must be a string");
    return obj[key].get<std::string>();
}

std::vector<double> get_array(const json& obj, const std::string& key) {
    if (!obj.contains(key) || !obj[key].is_array()) throw ConfigError("'" + key + "' must be an array of numbers");
    std::vector<double> v;
    for (const auto& x : obj[key]) {
        if (!x.is_number()) throw ConfigError("'" + key + "' must be an array of numbers");
        v.push_back(x.get<double>());
    }
    return v;
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

ModelCoefficients build_model(const json& cfg, int n) {
    if (!cfg.contains("model")) throw ConfigError("missing 'model'");
    const json& m = cfg["model"];
    if (!m.is_object()) throw ConfigError("'model' must be an object");
    std::string preset = lower(get_string(m, "preset", ""));
    try {
        if (preset == "constant") {
            check_keys(m, {"preset", "nu0", "tau0"}, "model");
            return presets::constant(get_number(m, "nu0", 1.0), get_number(m, "tau0", 1.0));
        }
        if (preset == "linear") {
            check_keys(m, {"preset", "tau0"}, "model");
            return presets::linear(get_number(m, "tau0", 1.0));
        }
        if (preset == "hysteresis") {
            check_keys(m, {"preset"}, "model");
            return presets::hysteresis();
        }
        if (preset == "regularized_1" || preset == "regularized_2") {
            check_keys(m, {"preset", "epsilon", "tau0"}, "model");
            if (!m.contains("epsilon")) throw ConfigError(preset + " needs 'epsilon'");
            double eps = get_number(m, "epsilon", 0.0), tau0 = get_number(m, "tau0", 1.0 / 3.0);
            return preset == "regularized_1" ? presets::regularized1(eps, tau0) : presets::regularized2(eps, tau0);
        }
        if (preset == "custom_beta") {
            check_keys(m, {"preset", "beta"}, "model");
            if (!m.contains("beta")) throw ConfigError("custom_beta needs 'beta'");
            return presets::custom_beta(get_number(m, "beta", 0.5), n);
        }
        if (preset == "user") {
            check_keys(m, {"preset", "name", "J", "nu", "tau"}, "model");
            return presets::user_table(get_string(m, "name", "user"), get_array(m, "J"), get_array(m, "nu"),
                                       get_array(m, "tau"));
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
    throw ConfigError("unknown model preset '" + preset + "'");
}

std::vector<double> build_rho_grid(const json& cfg) {
    if (!cfg.contains("rho_grid")) throw ConfigError("missing 'rho_grid'");
    const json& g = cfg["rho_grid"];
    std::vector<double> v;
    if (g.is_array()) {
        v = get_array(cfg, "rho_grid");
    } else if (g.is_object()) {
        check_keys(g, {"min", "max", "count"}, "rho_grid");
        double lo = get_number(g, "min", NAN), hi = get_number(g, "max", NAN);
        long long count = get_int(g, "count", 0);
        if (count < 1) throw ConfigError("rho_grid.count must be >= 1");
        if (!(lo > 0.0) || !(hi >= lo)) throw ConfigError("rho_grid needs 0 < min <= max");
        for (long long i = 0; i < count; ++i) v.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
    } else {
        throw ConfigError("'rho_grid' must be an array or {min, max, count}");
    }
    if (v.empty()) throw ConfigError("rho grid is empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0)) throw ConfigError("rho grid values must be positive");
        if (i && !(v[i] > v[i - 1])) throw ConfigError("rho grid must be strictly increasing");
    }
    return v;
}

struct Output {
    fs::path dir;
    bool csv = true, json_out = false, svg = false;

    void table(const std::string& name, const Table& t) const {
        if (csv) write_csv((dir / (name + ".csv")).string(), t);
    }
    void plot(const std::string& name, const Plot& p) const {
        if (svg) write_svg((dir / (name + ".svg")).string(), p);
    }
    void document(const std::string& name, const json& j) const {
        if (!json_out) return;
        std::ofstream f(dir / (name + ".json"), std::ios::binary);
        f << j.dump(2) << '\n';
    }
};

json table_json(const Table& t) {
    json o = json::object();
    for (std::size_t k = 0; k < t.columns.size(); ++k) {
        json col = json::array();
        for (const auto& r : t.rows) {
            if (std::isfinite(r[k])) col.push_back(r[k]);
            else col.push_back(nullptr);
        }
        o[t.columns[k]] = col;
    }
    return o;
}

double stability_code(Stability s) {
    switch (s) {
        case Stability::Stable: return 1.0;
        case Stability::Unstable: return -1.0;
        default: return 0.0;
    }
}

const char* palette(std::size_t i) {
    static const char* c[] = {"#1f4e9c", "#c0392b", "#27864a", "#8e44ad", "#d68910", "#17a2b8"};
    return c[i % 6];
}

// Stable points solid, unstable dashed; NaN separates pieces.
void add_branch_series(Plot& plot, const Branch& br, std::size_t color, bool free_energy) {
    Series solid, dashed;
    solid.color = dashed.color = palette(color);
    dashed.dashed = true;
    solid.name = br.id == 0 ? "uniform" : "branch " + std::to_string(br.id);
    for (std::size_t i = 0; i < br.points.size(); ++i) {
        const auto& p = br.points[i];
        double y = free_energy ? p.free_energy : p.c1;
        bool st = p.stability == Stability::Stable;
        // shared endpoints keep the two styles connected
        bool prev_st = i > 0 && br.points[i - 1].stability == Stability::Stable;
        if (i > 0 && st != prev_st) {
            const auto& q = br.points[i - 1];
            double yq = free_energy ? q.free_energy : q.c1;
            (st ? solid : dashed).x.push_back(q.rho);
            (st ? solid : dashed).y.push_back(yq);
        }
        (st ? solid : dashed).x.push_back(p.rho);
        (st ? solid : dashed).y.push_back(y);
        (st ? dashed : solid).x.push_back(NAN);
        (st ? dashed : solid).y.push_back(NAN);
    }
    plot.series.push_back(solid);
    if (!dashed.x.empty()) plot.series.push_back(dashed);
}

Table diagram_table(const PhaseDiagram& pd) {
    Table t;
    t.columns = {"rho", "branch", "kappa", "c1", "stability", "free_energy"};
    for (const auto& br : pd.branches)
        for (const auto& p : br.points)
            t.add({p.rho, double(br.id), p.kappa, p.c1, stability_code(p.stability), p.free_energy});
    return t;
}

json critical_json(const ModelCoefficients& m, int n) {
    json o;
    try {
        auto cd = critical_densities(m, n);
        o["rho_c"] = std::isfinite(cd.rho_c) ? json(cd.rho_c) : json(nullptr);
        o["rho_star"] = cd.rho_star;
        o["kappa_star"] = cd.kappa_star;
    } catch (const std::exception& e) {
        o["error"] = e.what();
    }
    return o;
}

// ---------------------------------------------------------------------------
// commands

const std::set<std::string> kCommon = {"model", "n", "out", "format", "seed"};

std::set<std::string> with(std::set<std::string> s, std::initializer_list<std::string> more) {
    s.insert(more);
    return s;
}

int dimension(const json& cfg) {
    long long n = get_int(cfg, "n", 2);
    if (n != 2 && n != 3) throw ConfigError("n must be 2 or 3");
    return static_cast<int>(n);
}

struct Prepared {
    json cfg;
    int n = 2;
    ModelCoefficients model;
};

Prepared prepare(const json& cfg, const std::set<std::string>& allowed, bool needs_j = true) {
    check_keys(cfg, allowed, "config");
    Prepared p;
    p.cfg = cfg;
    p.n = dimension(cfg);
    p.model = build_model(cfg, p.n);
    if (needs_j && !p.model.j_enabled)
        throw ConfigError("this command needs a model with k(0) = 0 (the constant model has no compatibility equation)");
    return p;
}

void cmd_phase_diagram(const json& cfg, const Output& out) {
    auto P = prepare(cfg, with(kCommon, {"rho_grid"}));
    auto grid = build_rho_grid(cfg);
    PhaseDiagram pd;
    try {
        pd = phase_diagram(P.model, P.n, grid);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    auto t = diagram_table(pd);
    out.table("phase_diagram", t);

    json crit = critical_json(P.model, P.n);
    auto fit = critical_exponent_fit(P.model, P.n);

    Plot plot;
    plot.title = "phase diagram (" + P.model.name + ", n=" + std::to_string(P.n) + ")";
    plot.xlabel = "rho";
    plot.ylabel = "c1";
    for (std::size_t b = 0; b < pd.branches.size(); ++b) add_branch_series(plot, pd.branches[b], b, false);
    Series marks;
    marks.name = "rho_c, rho_*";
    marks.markers = true;
    marks.color = "#000000";
    if (crit.contains("rho_c") && crit["rho_c"].is_number()) {
        marks.x.push_back(crit["rho_c"].get<double>());
        marks.y.push_back(0.0);
    }
    if (crit.contains("rho_star")) {
        marks.x.push_back(crit["rho_star"].get<double>());
        marks.y.push_back(order_parameter_c(crit["kappa_star"].get<double>(), P.n));
    }
    plot.series.push_back(marks);
    out.plot("phase_diagram", plot);

    json doc;
    doc["command"] = "phase_diagram";
    doc["config"] = cfg;
    doc["critical"] = crit;
    json ex;
    if (fit.beta) {
        ex["beta"] = *fit.beta;
        ex["alpha0"] = *fit.alpha0;
        ex["r_squared"] = fit.r_squared;
    } else {
        ex["beta"] = nullptr;
        ex["reason"] = fit.reason;
    }
    doc["critical_exponent"] = ex;
    doc["table"] = table_json(t);
    json folds = json::array();
    for (const auto& f : pd.folds)
        folds.push_back({{"branch", f.branch}, {"rho", f.rho_last_good}, {"kappa", f.kappa_last_good},
                         {"message", f.message}});
    doc["folds"] = folds;
    doc["warnings"] = pd.warnings;
    out.document("phase_diagram", doc);
}

void cmd_rates(const json& cfg, const Output& out) {
    auto P = prepare(cfg, with(kCommon, {"rho_grid"}));
    auto grid = build_rho_grid(cfg);
    auto table = build_ratio_table(P.model, P.n, grid.back());
    double rc = critical_density_rho_c(P.model, P.n);
    Table t;
    t.columns = {"rho", "lambda_0", "kappa", "lambda_kappa", "bound_n_minus_1"};
    std::vector<std::string> warnings;
    std::size_t filled = 0;
    for (double rho : grid) {
        double l0 = NAN, kap = NAN, lk = NAN;
        if (rho < rc) l0 = rate_uniform(P.model, P.n, rho);
        auto sol = solve_compatibility(P.model, P.n, rho, table);
        for (auto& w : sol.warnings) warnings.push_back(w);
        for (std::size_t i = sol.roots.size(); i-- > 1;)
            if (sol.roots[i].stability == Stability::Stable) {
                kap = sol.roots[i].kappa;
                lk = rate_vmf(P.model, P.n, rho, kap);
                break;
            }
        if (std::isfinite(l0) || std::isfinite(lk)) ++filled;
        t.add({rho, l0, kap, lk, double(P.n - 1)});
    }
    if (filled == 0) {
        warnings.push_back("empty table: no rho in the grid has a stable equilibrium");
        std::cerr << "warning: empty rate table\n";
    }
    out.table("rates", t);
    Plot plot;
    plot.title = "convergence rates (" + P.model.name + ", n=" + std::to_string(P.n) + ")";
    plot.xlabel = "rho";
    plot.ylabel = "rate";
    Series a, b, c;
    a.name = "lambda_0";
    b.name = "lambda_kappa";
    b.color = palette(1);
    c.name = "n-1";
    c.color = "#888888";
    c.dashed = true;
    for (const auto& r : t.rows) {
        a.x.push_back(r[0]);
        a.y.push_back(r[1]);
        b.x.push_back(r[0]);
        b.y.push_back(r[3]);
        c.x.push_back(r[0]);
        c.y.push_back(r[4]);
    }
    plot.series = {a, b, c};
    out.plot("rates", plot);
    json doc;
    doc["command"] = "rates";
    doc["config"] = cfg;
    doc["rho_c"] = std::isfinite(rc) ? json(rc) : json(nullptr);
    doc["table"] = table_json(t);
    doc["warnings"] = warnings;
    out.document("rates", doc);
}

void cmd_free_energy(const json& cfg, const Output& out) {
    auto P = prepare(cfg, with(kCommon, {"rho_grid"}));
    auto grid = build_rho_grid(cfg);
    auto pd = phase_diagram(P.model, P.n, grid);
    Table t;
    t.columns = {"rho", "branch", "kappa", "stability", "free_energy", "uniform_free_energy"};
    for (const auto& br : pd.branches)
        for (const auto& p : br.points)
            t.add({p.rho, double(br.id), p.kappa, stability_code(p.stability), p.free_energy,
                   p.rho * std::log(p.rho)});
    out.table("free_energy", t);
    auto cross = free_energy_crossing(P.model, P.n);

    Plot plot;
    plot.title = "free energy minus rho ln rho (" + P.model.name + ", n=" + std::to_string(P.n) + ")";
    plot.xlabel = "rho";
    plot.ylabel = "F - rho ln rho";
    // shift by the uniform baseline so the branches are distinguishable
    PhaseDiagram shifted = pd;
    for (auto& br : shifted.branches)
        for (auto& p : br.points) p.free_energy -= p.rho * std::log(p.rho);
    for (std::size_t b = 0; b < shifted.branches.size(); ++b) add_branch_series(plot, shifted.branches[b], b, true);
    if (cross) {
        Series mk;
        mk.name = "rho_1";
        mk.markers = true;
        mk.color = "#000000";
        mk.x = {cross->rho1};
        mk.y = {0.0};
        plot.series.push_back(mk);
    }
    out.plot("free_energy", plot);
    json doc;
    doc["command"] = "free_energy";
    doc["config"] = cfg;
    if (cross) doc["rho_1"] = {{"rho", cross->rho1}, {"kappa", cross->kappa1}, {"sign_changes", cross->sign_changes}};
    else doc["rho_1"] = nullptr;
    doc["table"] = table_json(t);
    doc["warnings"] = pd.warnings;
    out.document("free_energy", doc);
}

void cmd_soh(const json& cfg, const Output& out) {
    auto P = prepare(cfg, with(kCommon, {"rho_grid", "branch", "k2", "gci_grid"}), false);
    auto grid = build_rho_grid(cfg);
    SohOptions opt;
    std::string br = lower(get_string(cfg, "branch", "largest"));
    if (br == "largest") opt.branch = BranchSelect::Largest;
    else if (br == "smallest") opt.branch = BranchSelect::Smallest;
    else throw ConfigError("branch must be 'largest' or 'smallest'");
    opt.k2 = get_number(cfg, "k2", 0.0);
    long long gg = get_int(cfg, "gci_grid", 2048);
    if (gg < 16 || gg > (1 << 20)) throw ConfigError("gci_grid must be in [16, 2^20]");
    opt.gci_grid = static_cast<int>(gg);
    auto scan = hyperbolicity_scan(P.model, P.n, grid, opt);
    Table t;
    t.columns = {"rho",          "kappa",     "c1",              "c2",          "theta", "delta", "hyperbolic",
                 "lambda0",      "lambda_kappa", "theta_alt", "theta_diverging", "dkappa_drho", "k2"};
    // lambda0 is nan on the ordered side of rho_c
    for (const auto& s : scan.rows)
        t.add({s.rho, s.kappa, s.c1, s.c2, s.theta, s.delta, s.hyperbolic ? 1.0 : 0.0, s.lambda0_rate,
               s.lambda_kappa_rate, s.theta_alt, s.theta_diverging ? 1.0 : 0.0, s.dkappa_drho, s.k2});
    out.table("soh", t);
    Plot plot;
    plot.title = "Theta (" + P.model.name + ", n=" + std::to_string(P.n) + ")";
    plot.xlabel = "rho";
    plot.ylabel = "Theta";
    Series th, zero;
    th.name = "Theta";
    zero.name = "0";
    zero.color = "#888888";
    zero.dashed = true;
    for (const auto& s : scan.rows) {
        th.x.push_back(s.rho);
        th.y.push_back(s.theta);
    }
    if (!scan.rows.empty()) {
        zero.x = {scan.rows.front().rho, scan.rows.back().rho};
        zero.y = {0.0, 0.0};
    }
    plot.series = {th, zero};
    out.plot("soh", plot);
    json doc;
    doc["command"] = "soh";
    doc["config"] = cfg;
    doc["table"] = table_json(t);
    doc["sign_changes"] = scan.sign_changes;
    json fails = json::array();
    for (const auto& f : scan.failures) fails.push_back({{"rho", f.first}, {"message", f.second}});
    doc["failures"] = fails;
    out.document("soh", doc);
}

void cmd_hysteresis(const json& cfg, const Output& out, std::uint64_t seed) {
    auto P = prepare(cfg, with(kCommon, {"engine", "scheme", "protocol", "particles"}));
    if (P.n != 2) throw ConfigError("hysteresis runs are on the circle only (n = 2)");
    std::string engine = lower(get_string(cfg, "engine", "kinetic"));
    if (engine != "kinetic" && engine != "particle") throw ConfigError("engine must be 'kinetic' or 'particle'");

    HysteresisProtocol p;
    double rho_const = NAN;
    if (cfg.contains("protocol")) {
        const json& pj = cfg["protocol"];
        check_keys(pj, {"T", "epsilon", "t_end", "dt", "m", "record_every", "perturbation", "rho_constant"},
                   "protocol");
        p.T = get_number(pj, "T", p.T);
        p.epsilon = get_number(pj, "epsilon", p.epsilon);
        p.t_end = get_number(pj, "t_end", 2.0 * p.T);
        p.dt = get_number(pj, "dt", p.dt);
        p.m = static_cast<int>(get_int(pj, "m", p.m));
        p.record_every = static_cast<int>(get_int(pj, "record_every", p.record_every));
        p.perturbation = get_number(pj, "perturbation", p.perturbation);
        rho_const = get_number(pj, "rho_constant", NAN);
        if (pj.contains("rho_constant")) {
            if (!(rho_const > 0.0)) throw ConfigError("rho_constant must be positive");
            p.rho_of_t = [rho_const](double) { return rho_const; };
        }
    }
    try {
        validate(p);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("protocol: ") + e.what());
    }
    KineticScheme scheme = KineticScheme::Central;
    std::string sch = lower(get_string(cfg, "scheme", "central"));
    if (sch == "weighted") scheme = KineticScheme::Weighted;
    else if (sch != "central") throw ConfigError("scheme must be 'central' or 'weighted'");

    std::size_t N = 10000;
    ParticleRunOptions popt;
    if (cfg.contains("particles")) {
        const json& pj = cfg["particles"];
        check_keys(pj, {"N", "realizations", "drift"}, "particles");
        long long n = get_int(pj, "N", 10000);
        if (n < 1) throw ConfigError("particles.N must be >= 1");
        N = static_cast<std::size_t>(n);
        popt.realizations = static_cast<int>(get_int(pj, "realizations", 1));
        if (popt.realizations < 1) throw ConfigError("particles.realizations must be >= 1");
        std::string d = lower(get_string(pj, "drift", "exact"));
        if (d == "euler") popt.drift = DriftScheme::Euler;
        else if (d != "exact") throw ConfigError("particles.drift must be 'exact' or 'euler'");
    }

    Trace tr;
    ParticleEnsemble last;
    if (engine == "kinetic") {
        tr = run_hysteresis(P.model, p, scheme);
    } else {
        popt.final_state = &last;
        tr = run_hysteresis_particles(P.model, p, N, seed, popt);
    }
    Table t;
    if (engine == "kinetic") {
        t.columns = {"t", "rho", "c1", "free_energy"};
        for (std::size_t i = 0; i < tr.times.size(); ++i)
            t.add({tr.times[i], tr.rho[i], tr.order_parameter[i], tr.free_energy[i]});
    } else {
        t.columns = {"t", "rho", "c1"};
        for (std::size_t i = 0; i < tr.times.size(); ++i) t.add({tr.times[i], tr.rho[i], tr.order_parameter[i]});
    }
    out.table("trace", t);
    if (engine == "particle" && out.csv) {
        std::ofstream f(out.dir / "snapshot.csv", std::ios::binary);
        write_snapshot_csv(f, last);
    }

    // theoretical overlay: stable equilibria over the visited densities
    double rlo = *std::min_element(tr.rho.begin(), tr.rho.end());
    double rhi = *std::max_element(tr.rho.begin(), tr.rho.end());
    std::vector<double> grid;
    const int G = 301;
    if (rhi - rlo < 1e-12) grid = {rlo};
    else
        for (int i = 0; i < G; ++i) grid.push_back(rlo + (rhi - rlo) * i / (G - 1));
    auto pd = phase_diagram(P.model, P.n, grid);
    Table theory = diagram_table(pd);
    out.table("theory", theory);

    auto loop = analyze_loop(tr);
    Plot plot;
    plot.title = std::string(engine == "kinetic" ? "kinetic" : "particle") + " hysteresis loop";
    plot.xlabel = "rho";
    plot.ylabel = "c1";
    Series sim;
    sim.name = "simulation";
    sim.x = tr.rho;
    sim.y = tr.order_parameter;
    plot.series.push_back(sim);
    for (std::size_t b = 0; b < pd.branches.size(); ++b) {
        Plot tmp;
        add_branch_series(tmp, pd.branches[b], 1, false);
        for (auto& s : tmp.series) {
            s.name = b == 0 && !s.dashed ? "theory" : "";
            plot.series.push_back(s);
        }
    }
    out.plot("hysteresis", plot);

    json doc;
    doc["command"] = "hysteresis";
    doc["engine"] = engine;
    doc["config"] = cfg;
    doc["seed"] = seed;
    json la;
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    la["up_jump_rho"] = num(loop.up_jump_rho);
    la["down_jump_rho"] = num(loop.down_jump_rho);
    la["area"] = loop.area;
    la["floor"] = num(loop.floor);
    la["upper_plateau"] = loop.upper_plateau;
    doc["loop"] = la;
    if (engine == "kinetic") {
        doc["max_mass_drift"] = tr.max_mass_drift;
        doc["min_value"] = tr.min_value;
        doc["positivity_violated"] = tr.positivity_violated;
    } else {
        doc["rayleigh_baseline"] = rayleigh_baseline(N);
    }
    doc["trace"] = table_json(t);
    doc["theory"] = table_json(theory);
    out.document("hysteresis", doc);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"phaselab: phase transitions in alignment models"};
    std::string command, config_path, out_dir, formats;
    long long seed = -1;
    app.add_option("command", command, "phase_diagram | rates | free_energy | soh | hysteresis")->required();
    app.add_option("--config", config_path, "JSON config file")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--format", formats, "comma-separated list of csv, json, svg");
    app.add_option("--seed", seed, "RNG seed for the particle engine");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    json cfg;
    Output out;
    std::uint64_t run_seed = 1;
    try {
        std::ifstream f(config_path);
        if (!f) throw ConfigError("cannot read config file " + config_path);
        try {
            cfg = json::parse(f);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!cfg.is_object()) throw ConfigError("config must be a JSON object");

        if (out_dir.empty()) out_dir = get_string(cfg, "out", "out");
        if (formats.empty()) {
            if (cfg.contains("format")) {
                if (cfg["format"].is_string()) formats = cfg["format"].get<std::string>();
                else if (cfg["format"].is_array())
                    for (const auto& x : cfg["format"]) formats += (formats.empty() ? "" : ",") + x.get<std::string>();
                else throw ConfigError("'format' must be a string or an array");
            } else {
                formats = "csv";
            }
        }
        out.csv = out.json_out = out.svg = false;
        std::stringstream ss(formats);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = lower(tok);
            if (tok == "csv") out.csv = true;
            else if (tok == "json") out.json_out = true;
            else if (tok == "svg") out.svg = true;
            else if (!tok.empty()) throw ConfigError("unknown format '" + tok + "'");
        }
        if (seed >= 0) run_seed = static_cast<std::uint64_t>(seed);
        else run_seed = static_cast<std::uint64_t>(get_int(cfg, "seed", 1));
        out.dir = out_dir;
        std::error_code ec;
        fs::create_directories(out.dir, ec);
        if (ec) throw ConfigError("cannot create output directory " + out_dir);

        if (command == "phase_diagram") cmd_phase_diagram(cfg, out);
        else if (command == "rates") cmd_rates(cfg, out);
        else if (command == "free_energy") cmd_free_energy(cfg, out);
        else if (command == "soh") cmd_soh(cfg, out);
        else if (command == "hysteresis") cmd_hysteresis(cfg, out, run_seed);
        else throw ConfigError("unknown command '" + command + "'");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

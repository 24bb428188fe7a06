#include <fftw3.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "vesp/checks.hpp"
#include "vesp/config.hpp"
#include "vesp/initial_data.hpp"
#include "vesp/io.hpp"
#include "vesp/linear/ensembles.hpp"
#include "vesp/svg.hpp"
#include "vesp/viscoelastic/checkpoint.hpp"
#include "vesp/viscoelastic/experiments.hpp"
#include "vesp/viscoelastic/reformulation.hpp"
#include "vesp/viscoelastic/simulate.hpp"

using namespace vesp;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "1.0.0";

enum Exit { ok = 0, check_failed = 1, config_error = 2, numerical_abort = 3 };

struct Options {
    std::string config;
    std::string out;
    std::optional<std::int64_t> seed;
    std::optional<std::int64_t> grid;
    std::optional<double> mu;
    bool dry_run = false;
    bool no_svg = false;
    std::string which;
    double corrupt_cutoff = 0.0;
};

struct Context {
    const Config& cfg;
    fs::path out;
    bool svg = true;

    void write(const std::string& name, const std::string& text) const {
        std::ofstream os(out / name, std::ios::binary);
        if (!os) throw PreconditionError("cannot write " + (out / name).string());
        os << text;
    }
    void plot(const std::string& name, const LinePlot& p) const {
        if (svg) write(name, p.render());
    }
};

struct Outcome {
    int code = ok;
    json summary = json::object();
};

using Runner = std::function<Outcome(const Context&)>;

struct Command {
    std::string name;
    std::string help;
    std::vector<KeySpec> schema;
    Runner run;
};

// --- schema pieces ---------------------------------------------------------------

KeySpec key(std::string name, KeyType t, std::string fallback, std::string help,
            std::vector<std::string> choices = {}) {
    return {std::move(name), t, std::move(fallback), std::move(help), std::move(choices)};
}

std::vector<KeySpec> grid_keys(int n) {
    return {key("dim", KeyType::integer, "2", "spatial dimension (2 or 3)"),
            key("grid", KeyType::integer, std::to_string(n), "points per dimension, a power of two >= 16"),
            key("length", KeyType::real, "6.283185307179586", "period of the box")};
}

std::vector<KeySpec> data_keys() {
    return {key("q_lo", KeyType::integer, "0", "lowest dyadic block of the data"),
            key("q_hi", KeyType::integer, "2", "highest dyadic block of the data"),
            key("flow_steps", KeyType::integer, "64", "RK4 steps of the deformation flow"),
            key("b_min", KeyType::real, "0.1", "required lower bound on 1 + a")};
}

std::vector<KeySpec> join(std::vector<std::vector<KeySpec>> parts) {
    std::vector<KeySpec> out;
    for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

Grid grid_of(const Config& c) {
    Grid g{static_cast<int>(c.integer("dim")), static_cast<int>(c.integer("grid")), c.real("length")};
    try {
        g.validate();
    } catch (const PreconditionError& e) {
        throw ConfigError(std::string("config keys dim/grid/length: ") + e.what());
    }
    return g;
}

void positive(const Config& c, const std::string& k) {
    if (!(c.real(k) > 0.0)) throw ConfigError("config key '" + k + "' must be positive");
}
void at_least(const Config& c, const std::string& k, std::int64_t lo) {
    if (c.integer(k) < lo) throw ConfigError("config key '" + k + "' must be >= " + std::to_string(lo));
}

DataSpec data_spec(const Config& c) {
    DataSpec d;
    d.seed = static_cast<std::uint64_t>(c.integer("seed"));
    d.amplitude = c.real("amplitude");
    d.q_lo = static_cast<int>(c.integer("q_lo"));
    d.q_hi = static_cast<int>(c.integer("q_hi"));
    d.flow_steps = static_cast<int>(c.integer("flow_steps"));
    if (d.amplitude < 0.0) throw ConfigError("config key 'amplitude' must be nonnegative");
    if (d.q_lo > d.q_hi) throw ConfigError("config keys 'q_lo'/'q_hi' need q_lo <= q_hi");
    at_least(c, "flow_steps", 1);
    return d;
}

SimConfig sim_config(const Config& c) {
    SimConfig s;
    s.mu = c.real("mu");
    s.b_min = c.real("b_min");
    s.n_cut = c.real("n_cut");
    s.cfl = c.real("cfl");
    s.det_abort = c.real("det_abort");
    positive(c, "mu");
    positive(c, "cfl");
    positive(c, "det_abort");
    if (s.n_cut < 0.0) throw ConfigError("config key 'n_cut' must be >= 0");
    if (!(s.b_min > 0.0 && s.b_min < 1.0)) throw ConfigError("config key 'b_min' must lie in (0, 1)");
    return s;
}

RunConfig run_config(const Config& c) {
    RunConfig r;
    r.T = c.real("T");
    r.dt = c.real("dt");
    r.cadence = static_cast<int>(c.integer("cadence"));
    positive(c, "T");
    positive(c, "dt");
    at_least(c, "cadence", 1);
    return r;
}

json config_json(const Config& c) {
    json j = json::object();
    for (const auto& k : c.schema()) {
        switch (k.type) {
            case KeyType::integer: j[k.name] = c.integer(k.name); break;
            case KeyType::real: j[k.name] = c.real(k.name); break;
            case KeyType::boolean: j[k.name] = c.boolean(k.name); break;
            case KeyType::text: j[k.name] = c.text(k.name); break;
            case KeyType::real_list: j[k.name] = c.reals(k.name); break;
            case KeyType::integer_list: j[k.name] = c.integers(k.name); break;
        }
    }
    return j;
}

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// --- lp-check ----------------------------------------------------------------------

json suite_json(const CheckSuite& s) {
    json arr = json::array();
    for (const auto& c : s.checks)
        arr.push_back({{"name", c.name}, {"value", num(c.value)}, {"lo", num(c.lo)}, {"hi", num(c.hi)}, {"pass", c.pass}});
    return arr;
}

std::string suite_csv(const CheckSuite& s) {
    CsvWriter csv({"check", "value", "lo", "hi", "pass"});
    for (const auto& c : s.checks) csv.row({c.name, fmt17(c.value), fmt17(c.lo), fmt17(c.hi), c.pass ? "1" : "0"});
    return csv.str();
}

Outcome report_suite(const CheckSuite& suite, const std::string& what) {
    Outcome o;
    for (const auto& c : suite.checks)
        std::printf("%s %-22s %.6g\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value);
    if (!suite.pass()) {
        std::string names;
        for (const auto& n : suite.failures()) names += (names.empty() ? "" : ", ") + n;
        std::fprintf(stderr, "%s failed: %s\n", what.c_str(), names.c_str());
        o.code = check_failed;
    }
    o.summary["checks"] = suite_json(suite);
    return o;
}

Command lp_check_command(const double& corrupt) {
    return {"lp-check", "Littlewood-Paley invariants: partition of unity, Bernstein ratios, quasi-orthogonality",
            join({grid_keys(128),
                  {key("seed", KeyType::integer, "1", "ensemble seed"),
                   key("members", KeyType::integer, "20", "random fields in the Bernstein ensemble")}}),
            [&corrupt](const Context& ctx) {
                const Grid g = grid_of(ctx.cfg);
                at_least(ctx.cfg, "members", 1);
                CutoffFamily fam;
                fam.distortion = corrupt;
                const CheckSuite suite = lp_check_suite(g, fam, static_cast<std::uint64_t>(ctx.cfg.integer("seed")),
                                                        static_cast<int>(ctx.cfg.integer("members")));
                ctx.write("lp_check.csv", suite_csv(suite));
                LinePlot p{"Dyadic cutoffs", "|xi|", "weight", false, false, {}};
                const auto c = dyadic_cutoffs(g, fam);
                PlotSeries sum{"sum", {}, {}};
                std::vector<PlotSeries> blocks;
                for (int q = c.qmin; q <= c.qmax; ++q) blocks.push_back({"q=" + std::to_string(q), {}, {}});
                const int samples = 400;
                for (int i = 1; i <= samples; ++i) {
                    const double r = g.max_radius() * i / samples;
                    double acc = fam.chi_q(r, c.qmin);
                    for (int q = c.qmin; q <= c.qmax; ++q) {
                        const double w = fam.phi_q(r, q);
                        acc += w;
                        blocks[q - c.qmin].x.push_back(r);
                        blocks[q - c.qmin].y.push_back(w);
                    }
                    sum.x.push_back(r);
                    sum.y.push_back(acc);
                }
                p.series = blocks;
                p.series.push_back(sum);
                ctx.plot("cutoffs.svg", p);
                return report_suite(suite, "lp-check");
            }};
}

// --- bony-check --------------------------------------------------------------------

Command bony_check_command() {
    return {"bony-check", "Bony reconstruction T_f g + T_g f + R(f, g) = fg over a seeded ensemble",
            join({grid_keys(128),
                  {key("seed", KeyType::integer, "77", "ensemble seed"),
                   key("pairs", KeyType::integer, "50", "random pairs"),
                   key("tol", KeyType::real, "1e-10", "largest accepted relative residual")}}),
            [](const Context& ctx) {
                const Grid g = grid_of(ctx.cfg);
                at_least(ctx.cfg, "pairs", 1);
                positive(ctx.cfg, "tol");
                const CheckSuite suite =
                    bony_check_suite(g, static_cast<std::uint64_t>(ctx.cfg.integer("seed")),
                                     static_cast<int>(ctx.cfg.integer("pairs")), ctx.cfg.real("tol"));
                const auto& res = suite.checks.front().samples;
                CsvWriter csv({"pair", "residual"});
                PlotSeries s{"relative residual", {}, {}};
                for (std::size_t k = 0; k < res.size(); ++k) {
                    csv.row({static_cast<double>(k), res[k]});
                    s.x.push_back(static_cast<double>(k));
                    s.y.push_back(std::max(res[k], 1e-18));
                }
                ctx.write("bony_check.csv", csv.str());
                ctx.plot("bony_residuals.svg", {"Bony reconstruction", "pair", "residual", false, true, {s}});
                return report_suite(suite, "bony-check");
            }};
}

// --- estimates ---------------------------------------------------------------------

json estimate_json(const EstimateReport& r) {
    json j{{"name", r.name}, {"lhs", num(r.lhs)}, {"ratio", num(r.ratio)}, {"fitted_C", num(r.fitted_C)},
           {"c_max", r.c_max}, {"pass", r.pass}};
    for (const auto& [k, v] : r.rhs_components) j["rhs"][k] = num(v);
    for (const auto& [k, v] : r.info) j["info"][k] = num(v);
    return j;
}

Outcome run_product(const Context& ctx, const Grid& g) {
    const Config& c = ctx.cfg;
    Outcome o;
    at_least(c, "ensembles", 1);
    CsvWriter csv({"estimate", "ensemble", "member", "seed", "lhs", "rhs", "ratio"});
    LinePlot plot{"Product estimates: max ratio per ensemble", "ensemble", "max ratio", false, true, {}};
    bool pass = true;
    for (auto id : all_product_estimates()) {
        const ProductSpread ps = product_spread(id, g, static_cast<std::uint64_t>(c.integer("seed")),
                                                static_cast<int>(c.integer("ensembles")),
                                                static_cast<int>(c.integer("members")), c.real("c_max"));
        PlotSeries s{estimate_name(id), {}, {}};
        for (std::size_t e = 0; e < ps.ensembles.size(); ++e) {
            const auto& rep = ps.ensembles[e];
            for (std::size_t k = 0; k < rep.samples.size(); ++k) {
                const auto& smp = rep.samples[k];
                csv.row({estimate_name(id), std::to_string(e), std::to_string(k), std::to_string(smp.seed),
                         fmt17(smp.lhs), fmt17(smp.rhs), fmt17(smp.ratio)});
            }
            s.x.push_back(static_cast<double>(e));
            s.y.push_back(rep.max_ratio);
        }
        plot.series.push_back(s);
        const bool ok = ps.pass(c.real("max_spread"));
        pass = pass && ok;
        std::printf("%s %-18s max_ratio %.6g spread %.4g\n", ok ? "PASS" : "FAIL", estimate_name(id).c_str(),
                    ps.max_ratio, ps.spread);
        o.summary["estimates"].push_back(
            {{"name", estimate_name(id)}, {"max_ratio", num(ps.max_ratio)}, {"spread", num(ps.spread)}, {"pass", ok}});
    }
    ctx.write("estimates.csv", csv.str());
    ctx.plot("estimates.svg", plot);
    if (!pass) o.code = check_failed;
    return o;
}

Command estimates_command() {
    return {"estimates", "A-priori estimate checks with fitted constants over seeded ensembles",
            join({{key("which", KeyType::text, "product", "estimate family",
                       {"transport", "momentum", "mixed", "product"})},
                  grid_keys(32),
                  {key("seed", KeyType::integer, "1", "ensemble seed"),
                   key("members", KeyType::integer, "20", "ensemble size"),
                   key("ensembles", KeyType::integer, "3", "independent ensembles (product only)"),
                   key("mu", KeyType::real, "1", "viscosity"),
                   key("s", KeyType::real, "1", "regularity index of the checked norm"),
                   key("T", KeyType::real, "1", "final time of each linear run"),
                   key("dt", KeyType::real, "0.01", "time step"),
                   key("c_max", KeyType::real, "1000", "largest accepted fitted constant"),
                   key("max_spread", KeyType::real, "10", "largest accepted max/min ratio of fitted constants"),
                   key("max_reduced_C", KeyType::real, "10",
                       "largest accepted constant in the constant-coefficient reduction")}}),
            [](const Context& ctx) {
                const Config& c = ctx.cfg;
                const Grid g = grid_of(c);
                at_least(c, "members", 1);
                positive(c, "mu");
                positive(c, "T");
                positive(c, "dt");
                const std::string which = c.text("which");
                if (which == "product") return run_product(ctx, g);

                EnsembleConfig ec;
                ec.grid = g;
                ec.seed = static_cast<std::uint64_t>(c.integer("seed"));
                ec.members = static_cast<int>(c.integer("members"));
                ec.mu = c.real("mu");
                ec.s = c.real("s");
                ec.T = c.real("T");
                ec.dt = c.real("dt");
                ec.c_max = c.real("c_max");
                const EnsembleSummary es = which == "transport" ? transport_ensemble(ec)
                                           : which == "momentum" ? momentum_ensemble(ec)
                                                                 : mixed_ensemble(ec);
                std::vector<std::string> rhs_keys;
                for (const auto& [k, v] : es.reports.front().rhs_components) rhs_keys.push_back(k);
                std::vector<std::string> header{"member", "lhs", "ratio", "fitted_C", "pass"};
                for (const auto& k : rhs_keys) header.push_back("rhs_" + k);
                CsvWriter csv(header);
                PlotSeries s{"fitted C", {}, {}};
                for (std::size_t k = 0; k < es.reports.size(); ++k) {
                    const auto& r = es.reports[k];
                    std::vector<std::string> row{std::to_string(k), fmt17(r.lhs), fmt17(r.ratio), fmt17(r.fitted_C),
                                                 r.pass ? "1" : "0"};
                    for (const auto& key : rhs_keys) row.push_back(fmt17(r.rhs_components.at(key)));
                    csv.row(row);
                    s.x.push_back(static_cast<double>(k));
                    s.y.push_back(r.fitted_C);
                }
                ctx.write("estimates.csv", csv.str());
                ctx.plot("estimates.svg", {"Fitted constants: " + which, "member", "C", false, true, {s}});

                Outcome o;
                bool pass = es.pass(c.real("max_spread"));
                std::printf("%s %-10s C in [%.6g, %.6g] spread %.4g\n", pass ? "PASS" : "FAIL", which.c_str(),
                            es.min_C, es.max_C, es.spread);
                o.summary["ensemble"] = {{"name", es.name},   {"min_C", num(es.min_C)}, {"max_C", num(es.max_C)},
                                         {"spread", num(es.spread)}, {"all_pass", es.all_pass}, {"pass", pass}};
                for (const auto& r : es.reports) o.summary["members"].push_back(estimate_json(r));
                if (which != "mixed") {
                    const EstimateReport red = which == "transport" ? transport_reduction(ec) : momentum_reduction(ec);
                    const bool rok = red.pass && red.fitted_C <= c.real("max_reduced_C");
                    std::printf("%s %-10s C = %.6g\n", rok ? "PASS" : "FAIL", red.name.c_str(), red.fitted_C);
                    o.summary["reduction"] = estimate_json(red);
                    o.summary["reduction"]["pass"] = rok;
                    pass = pass && rok;
                }
                if (!pass) o.code = check_failed;
                return o;
            }};
}

// --- linear-spectrum ---------------------------------------------------------------

Command linear_spectrum_command() {
    return {"linear-spectrum", "Eigenvalues of the linearized (E, d) mode system against |xi|",
            {key("mu", KeyType::real, "1", "viscosity"),
             key("xi_min", KeyType::real, "0.01", "smallest |xi| of the table"),
             key("xi_max", KeyType::real, "1000", "largest |xi| of the table"),
             key("points", KeyType::integer, "601", "log-spaced samples")},
            [](const Context& ctx) {
                const Config& c = ctx.cfg;
                const double mu = c.real("mu"), lo = c.real("xi_min"), hi = c.real("xi_max");
                positive(c, "mu");
                positive(c, "xi_min");
                if (!(hi > lo)) throw ConfigError("config key 'xi_max' must exceed xi_min");
                at_least(c, "points", 2);
                const int n = static_cast<int>(c.integer("points"));
                std::vector<double> xi;
                for (int k = 0; k < n; ++k) xi.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1)));
                const auto rows = mixed_decay_spectrum(mu, xi);

                CsvWriter csv({"xi", "re_slow", "im_slow", "re_fast", "im_fast", "discriminant", "regime"});
                PlotSeries ps{"-Re slow", {}, {}}, pf{"-Re fast", {}, {}}, pi{"|Im|", {}, {}};
                double below = 0.0, above = inf;
                for (const auto& r : rows) {
                    const double disc = r.xi * r.xi * (0.25 * mu * mu * r.xi * r.xi - 1.0);
                    csv.row({fmt17(r.xi), fmt17(r.slow.real()), fmt17(r.slow.imag()), fmt17(r.fast.real()),
                             fmt17(r.fast.imag()), fmt17(disc), regime_name(r.regime)});
                    if (disc < 0.0) below = std::max(below, r.xi);
                    if (disc > 0.0) above = std::min(above, r.xi);
                    ps.x.push_back(r.xi);
                    ps.y.push_back(-r.slow.real());
                    pf.x.push_back(r.xi);
                    pf.y.push_back(-r.fast.real());
                    pi.x.push_back(r.xi);
                    pi.y.push_back(std::abs(r.slow.imag()));
                }
                ctx.write("spectrum.csv", csv.str());
                ctx.plot("spectrum.svg", {"Mode eigenvalues", "|xi|", "rate", true, true, {ps, pf, pi}});

                const double boundary = 2.0 / mu;
                const bool bracketed = below <= boundary && boundary <= above && below > 0.0 && std::isfinite(above);
                const double lam = mode_eigenvalues(100.0 / mu, mu).slow.real();
                const double damp_err = std::abs(lam * mu + 1.0);
                Outcome o;
                o.summary = {{"regime_boundary", boundary},
                             {"last_negative_discriminant", num(below)},
                             {"first_positive_discriminant", num(above)},
                             {"boundary_bracketed", bracketed},
                             {"slow_rate_at_100_over_mu", lam},
                             {"slow_rate_relative_error", damp_err}};
                std::printf("%s regime boundary 2/mu = %.6g in [%.6g, %.6g]\n", bracketed ? "PASS" : "FAIL", boundary,
                            below, above);
                std::printf("%s slow rate at |xi| = 100/mu: %.8g (relative error %.3g vs -1/mu)\n",
                            damp_err <= 0.01 ? "PASS" : "FAIL", lam, damp_err);
                if (!bracketed || damp_err > 0.01) o.code = check_failed;
                return o;
            }};
}

// --- simulate ----------------------------------------------------------------------

std::vector<KeySpec> sim_keys() {
    return {key("mu", KeyType::real, "1", "viscosity"),
            key("n_cut", KeyType::real, "0", "Friedrichs radius in |xi| units, 0 for the dealias radius"),
            key("cfl", KeyType::real, "0.5", "CFL cap on dt max|u| n / L"),
            key("det_abort", KeyType::real, "0.01", "abandon a run once max |det(I + E) - 1| exceeds this"),
            key("T", KeyType::real, "1", "final time"),
            key("dt", KeyType::real, "0.01", "time step"),
            key("cadence", KeyType::integer, "10", "diagnostics every cadence-th step")};
}

SimState initial_state(const Grid& g, const DataSpec& d, const SimConfig& s) {
    if (d.amplitude == 0.0) return rest_state(g);
    return admissible_state(g, d, s.mu, s.b_min);
}

std::string diagnostics_csv(const std::vector<DiagnosticsRow>& rows) {
    CsvWriter csv({"t", "div_u", "det", "div_ET", "compat", "a_norm", "u_norm", "u_diss", "E_norm", "Y", "kinetic",
                   "energy"});
    for (const auto& r : rows)
        csv.row({r.t, r.div_u, r.det, r.div_ET, r.compat, r.a_norm, r.u_norm, r.u_diss, r.E_norm, r.Y, r.kinetic,
                 r.energy});
    return csv.str();
}

Command simulate_command() {
    return {"simulate", "Nonlinear solver from admissible data, with diagnostics and the bootstrap monitor",
            join({grid_keys(64),
                  {key("seed", KeyType::integer, "1", "data seed"),
                   key("amplitude", KeyType::real, "0.01", "size of each data component, 0 for the rest state")},
                  data_keys(), sim_keys(),
                  {key("checkpoint", KeyType::boolean, "true", "write initial and final state binaries"),
                   key("bootstrap", KeyType::boolean, "true", "evaluate the bootstrap bounds along the run"),
                   key("bootstrap_C", KeyType::real, "1", "constant in the bootstrap smallness condition"),
                   key("bootstrap_lambda", KeyType::real, "1", "velocity remainder threshold factor")}}),
            [](const Context& ctx) {
                const Config& c = ctx.cfg;
                const Grid g = grid_of(c);
                const DataSpec d = data_spec(c);
                const SimConfig sc = sim_config(c);
                RunConfig rc = run_config(c);
                rc.store_states = c.boolean("bootstrap");
                const SimState s0 = initial_state(g, d, sc);
                const SimRun run = simulate(s0, sc, rc);

                ctx.write("diagnostics.csv", diagnostics_csv(run.rows));
                if (c.boolean("checkpoint")) {
                    write_state((ctx.out / "state_initial.bin").string(), s0);
                    if (!run.states.empty()) write_state((ctx.out / "state_final.bin").string(), run.final_state());
                }
                PlotSeries det{"det(I+E) - 1", {}, {}}, dET{"div E^T", {}, {}}, cmp{"compatibility", {}, {}},
                    dvu{"div u", {}, {}}, Y{"Y", {}, {}}, en{"energy", {}, {}};
                double max_det = 0, max_dET = 0, max_cmp = 0, max_Y = 0;
                for (const auto& r : run.rows) {
                    for (auto [s, v] : {std::pair{&det, r.det}, {&dET, r.div_ET}, {&cmp, r.compat}, {&dvu, r.div_u}}) {
                        s->x.push_back(r.t);
                        s->y.push_back(v);
                    }
                    Y.x.push_back(r.t);
                    Y.y.push_back(r.Y);
                    en.x.push_back(r.t);
                    en.y.push_back(r.energy);
                    max_det = std::max(max_det, r.det);
                    max_dET = std::max(max_dET, r.div_ET);
                    max_cmp = std::max(max_cmp, r.compat);
                    max_Y = std::max(max_Y, r.Y);
                }
                ctx.plot("constraints.svg", {"Constraint residuals", "t", "residual", false, true, {det, dET, cmp, dvu}});
                ctx.plot("norms.svg", {"Y functional and energy", "t", "value", false, false, {Y, en}});

                Outcome o;
                const double a0 = alpha(s0, sc.mu);
                o.summary = {{"aborted", run.aborted},
                             {"abort_reason", run.abort_reason},
                             {"abort_time", run.aborted ? num(run.abort_time) : json(nullptr)},
                             {"steps", run.steps},
                             {"alpha", a0},
                             {"max_div_u", run.max_div},
                             {"max_det", max_det},
                             {"max_div_ET", max_dET},
                             {"max_compat", max_cmp},
                             {"max_Y", max_Y},
                             {"max_Y_over_alpha", a0 > 0.0 ? num(max_Y / a0) : json(0.0)}};
                if (!run.rows.empty()) o.summary["final_energy"] = run.rows.back().energy;
                if (!run.aborted && !run.states.empty()) {
                    const DReformulation dr = d_reformulation(run.final_state(), sc);
                    o.summary["reformulation"] = {{"recovery", dr.recovery_residual},
                                                  {"E_residual", dr.E_residual},
                                                  {"d_residual", dr.d_residual}};
                }
                if (c.boolean("bootstrap") && !run.aborted && run.states.size() >= 2) {
                    BootstrapConfig bc;
                    bc.C = c.real("bootstrap_C");
                    bc.lambda = c.real("bootstrap_lambda");
                    const BootstrapReport br = bootstrap_monitor(run, sc, bc);
                    std::vector<std::string> header{"t"};
                    for (const auto& cond : br.conditions) {
                        header.push_back(cond.name + "_lhs");
                        header.push_back(cond.name + "_bound");
                    }
                    CsvWriter csv(header);
                    for (std::size_t i = 0; i < br.times.size(); ++i) {
                        std::vector<double> row{br.times[i]};
                        for (const auto& cond : br.conditions) {
                            row.push_back(cond.lhs[i]);
                            row.push_back(cond.bound[i]);
                        }
                        csv.row(row);
                    }
                    ctx.write("bootstrap.csv", csv.str());
                    json conds = json::array();
                    for (const auto& cond : br.conditions)
                        conds.push_back({{"name", cond.name}, {"min_margin", num(cond.min_margin)}});
                    o.summary["bootstrap"] = {{"N0", br.N0},
                                              {"all_hold", br.all_hold()},
                                              {"first_violation", num(br.first_violation)},
                                              {"conditions", conds}};
                }
                std::printf("steps %d  max div u %.3g  max det %.3g  max div E^T %.3g  max compat %.3g  max Y/alpha %s\n",
                            run.steps, run.max_div, max_det, max_dET, max_cmp,
                            a0 > 0.0 ? std::to_string(max_Y / a0).c_str() : "n/a");
                if (run.aborted) {
                    std::fprintf(stderr, "simulate aborted at t = %.6g: %s\n", run.abort_time, run.abort_reason.c_str());
                    o.code = numerical_abort;
                }
                return o;
            }};
}

// --- sweep -------------------------------------------------------------------------

Command sweep_command() {
    return {"sweep", "Small-data sweep of max_t Y / alpha over an amplitude ladder and seeds",
            join({grid_keys(64),
                  {key("seeds", KeyType::integer_list, "1,2", "data seeds"),
                   key("amplitudes", KeyType::real_list, "0.001,0.003,0.01,0.03", "ascending amplitude ladder")},
                  data_keys(), sim_keys(),
                  {key("max_variation", KeyType::real, "2", "largest accepted max/min ratio of max_t Y / alpha")}}),
            [](const Context& ctx) {
                const Config& c = ctx.cfg;
                const Grid g = grid_of(c);
                const SimConfig sc = sim_config(c);
                RunConfig rc = run_config(c);
                DataSpec base;
                base.q_lo = static_cast<int>(c.integer("q_lo"));
                base.q_hi = static_cast<int>(c.integer("q_hi"));
                base.flow_steps = static_cast<int>(c.integer("flow_steps"));
                if (base.q_lo > base.q_hi) throw ConfigError("config keys 'q_lo'/'q_hi' need q_lo <= q_hi");
                at_least(c, "flow_steps", 1);
                const auto amps = c.reals("amplitudes");
                if (amps.empty()) throw ConfigError("config key 'amplitudes' is empty");
                for (std::size_t i = 0; i < amps.size(); ++i)
                    if (amps[i] < 0.0 || (i > 0 && !(amps[i] > amps[i - 1])))
                        throw ConfigError("config key 'amplitudes' must be nonnegative and ascending");
                std::vector<std::uint64_t> seeds;
                for (auto s : c.integers("seeds")) {
                    if (s < 0) throw ConfigError("config key 'seeds' must hold nonnegative integers");
                    seeds.push_back(static_cast<std::uint64_t>(s));
                }
                if (seeds.empty()) throw ConfigError("config key 'seeds' is empty");

                const auto rows = small_data_sweep(g, amps, seeds, base, sc, rc);
                CsvWriter csv({"seed", "amplitude", "alpha", "max_Y", "ratio", "max_det", "aborted", "abort_reason"});
                std::map<std::uint64_t, PlotSeries> per_seed;
                double lo = inf, hi = 0.0;
                bool aborted = false;
                json arr = json::array();
                for (const auto& r : rows) {
                    csv.row({std::to_string(r.seed), fmt17(r.amplitude), fmt17(r.alpha), fmt17(r.max_Y), fmt17(r.ratio),
                             fmt17(r.max_det), r.aborted ? "1" : "0", r.abort_reason});
                    arr.push_back({{"seed", r.seed}, {"amplitude", r.amplitude}, {"alpha", r.alpha},
                                   {"ratio", num(r.ratio)}, {"aborted", r.aborted}});
                    aborted = aborted || r.aborted;
                    if (r.amplitude > 0.0) {
                        lo = std::min(lo, r.ratio);
                        hi = std::max(hi, r.ratio);
                        auto& s = per_seed[r.seed];
                        s.name = "seed " + std::to_string(r.seed);
                        s.x.push_back(r.amplitude);
                        s.y.push_back(r.ratio);
                    }
                }
                ctx.write("sweep.csv", csv.str());
                LinePlot p{"max_t Y / alpha across the ladder", "amplitude", "ratio", true, false, {}};
                for (auto& [k, s] : per_seed) p.series.push_back(s);
                ctx.plot("sweep.svg", p);

                Outcome o;
                const double variation = hi > 0.0 ? hi / lo : 1.0;
                const bool bounded = variation <= c.real("max_variation");
                o.summary = {{"M_emp", hi}, {"variation", num(variation)}, {"bounded", bounded},
                             {"any_aborted", aborted}, {"rows", arr}};
                std::printf("%s M_emp %.6g variation %.4g%s\n", bounded && !aborted ? "PASS" : "FAIL", hi, variation,
                            aborted ? " (a run aborted)" : "");
                if (aborted) o.code = numerical_abort;
                else if (!bounded) o.code = check_failed;
                return o;
            }};
}

// --- gen-data ----------------------------------------------------------------------

Command gen_data_command() {
    return {"gen-data", "Admissible initial data with an admissibility certificate",
            join({grid_keys(64),
                  {key("seed", KeyType::integer, "1", "data seed"),
                   key("amplitude", KeyType::real, "0.01", "size of each data component"),
                   key("mu", KeyType::real, "1", "viscosity of the hybrid deformation norm")},
                  data_keys()}),
            [](const Context& ctx) {
                const Config& c = ctx.cfg;
                const Grid g = grid_of(c);
                const DataSpec d = data_spec(c);
                positive(c, "mu");
                const double mu = c.real("mu"), b_min = c.real("b_min");
                if (!(b_min > 0.0 && b_min < 1.0)) throw ConfigError("config key 'b_min' must lie in (0, 1)");
                if (!(d.amplitude < 1.0 - b_min)) throw ConfigError("config key 'amplitude' must stay below 1 - b_min");
                SimState s = rest_state(g);
                s.a = generate_density(g, d, b_min);
                s.u = generate_velocity(g, d);
                const Deformation def = generate_deformation_for_norm(g, d, d.amplitude, mu);
                s.E = def.E;
                write_state((ctx.out / "initial.bin").string(), s);

                const Certificate& cert = def.certificate;
                const double floor = 1.0 + min_value(inverse(s.a));
                json j{{"certificate",
                        {{"det", cert.det},
                         {"div_ET", cert.div_ET},
                         {"compat", cert.compat},
                         {"tol", cert.tol},
                         {"flow_time", cert.flow_time},
                         {"pass", cert.pass()}}},
                       {"norms",
                        {{"density", density_norm(s.a)},
                         {"velocity", velocity_norm(s.u)},
                         {"deformation", deformation_norm(s.E, mu)},
                         {"alpha", alpha(s, mu)},
                         {"min_one_plus_a", floor},
                         {"max_div_u", max_divergence(s.u)}}},
                       {"spec", config_json(c)}};
                ctx.write("certificate.json", j.dump(2) + "\n");
                Outcome o;
                o.summary = j;
                const bool ok = cert.pass() && floor >= b_min;
                std::printf("%s det %.3g div E^T %.3g compat %.3g (tol %.1g)\n", ok ? "PASS" : "FAIL", cert.det,
                            cert.div_ET, cert.compat, cert.tol);
                if (!ok) o.code = check_failed;
                return o;
            }};
}

// --- driver ------------------------------------------------------------------------

void apply_flags(Config& cfg, const std::string& cmd, const Options& opt) {
    auto over = [&](const std::string& flag, const std::string& k, const std::string& v) {
        if (!cfg.has(k)) throw ConfigError("option " + flag + " does not apply to " + cmd);
        cfg.set(k, v);
    };
    if (opt.seed) over("--seed", cfg.has("seeds") ? "seeds" : "seed", std::to_string(*opt.seed));
    if (opt.grid) over("--grid", "grid", std::to_string(*opt.grid));
    if (opt.mu) over("--mu", "mu", fmt17(*opt.mu));
    if (!opt.which.empty()) over("--which", "which", opt.which);
}

int execute(const Command& cmd, const Options& opt) {
    Config cfg(cmd.schema);
    if (!opt.config.empty()) cfg.load(opt.config);
    apply_flags(cfg, cmd.name, opt);
    if (opt.dry_run) {
        std::cout << cfg.dump();
        return ok;
    }
    const fs::path out = opt.out.empty() ? fs::path("vesp-out") / cmd.name : fs::path(opt.out);
    fs::create_directories(out);
    const Context ctx{cfg, out, !opt.no_svg};
    Outcome o;
    std::string error;
    try {
        o = cmd.run(ctx);
    } catch (const ConfigError&) {
        throw;
    } catch (const NumericalAbort& e) {
        o.code = numerical_abort;
        error = e.what();
    } catch (const NonconvergenceError& e) {
        o.code = numerical_abort;
        error = e.what();
    }
    json report{{"tool", "vesp"},
                {"version", kVersion},
                {"fftw", std::string(fftw_version)},
                {"command", cmd.name},
                {"config", config_json(cfg)},
                {"pass", o.code == ok},
                {"exit_code", o.code}};
    if (!error.empty()) report["error"] = error;
    report["summary"] = o.summary;
    ctx.write("report.json", report.dump(2) + "\n");
    if (!error.empty()) std::fprintf(stderr, "%s: numerical abort: %s\n", cmd.name.c_str(), error.c_str());
    return o.code;
}

std::string schema_for(const Command& c) {
    return Config(c.schema).schema_text("vesp " + c.name + " configuration (flat key = value; defaults shown)");
}

}  // namespace

int main(int argc, char** argv) {
    Options opt;
    std::string schema_out;
    const std::vector<Command> commands{lp_check_command(opt.corrupt_cutoff), bony_check_command(),
                                        estimates_command(),         linear_spectrum_command(),
                                        simulate_command(),                   sweep_command(),
                                        gen_data_command()};

    CLI::App app{"vesp: dyadic analysis, linear models and the viscoelastic solver"};
    app.require_subcommand(1);
    std::vector<std::pair<CLI::App*, const Command*>> subs;
    for (const auto& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", opt.config, "flat key = value config file")->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "output directory (default vesp-out/<command>)");
        sub->add_option("--seed", opt.seed, "override the seed");
        sub->add_option("--grid", opt.grid, "override the points per dimension");
        sub->add_option("--mu", opt.mu, "override the viscosity");
        sub->add_flag("--dry-run", opt.dry_run, "print the resolved config and exit");
        sub->add_flag("--no-svg", opt.no_svg, "skip the SVG plots");
        if (c.name == "estimates")
            sub->add_option("--which", opt.which, "estimate family")
                ->check(CLI::IsMember({"transport", "momentum", "mixed", "product"}));
        if (c.name == "lp-check") sub->add_option("--corrupt-cutoff", opt.corrupt_cutoff)->group("");
        sub->footer("\n" + schema_for(c));
        subs.emplace_back(sub, &c);
    }
    CLI::App* schema = app.add_subcommand("schema", "Write the config schema of every command");
    schema->add_option("--out", schema_out, "directory for <command>.conf files (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (schema->parsed()) {
            for (const auto& c : commands) {
                if (schema_out.empty()) {
                    std::cout << schema_for(c) << "\n";
                    continue;
                }
                fs::create_directories(schema_out);
                std::ofstream os(fs::path(schema_out) / (c.name + ".conf"));
                os << schema_for(c);
            }
            return ok;
        }
        for (const auto& [sub, c] : subs)
            if (sub->parsed()) return execute(*c, opt);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return config_error;
    } catch (const PreconditionError& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return config_error;
    } catch (const RangeError& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return config_error;
    } catch (const NumericalAbort& e) {
        std::fprintf(stderr, "numerical abort: %s\n", e.what());
        return numerical_abort;
    } catch (const NonconvergenceError& e) {
        std::fprintf(stderr, "numerical abort: %s\n", e.what());
        return numerical_abort;
    }
    return config_error;
}

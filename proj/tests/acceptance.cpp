#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vesp/besov.hpp"
#include "vesp/checks.hpp"
#include "vesp/initial_data.hpp"
#include "vesp/linear/ensembles.hpp"
#include "vesp/linear/pressure.hpp"
#include "vesp/viscoelastic/experiments.hpp"
#include "vesp/viscoelastic/reformulation.hpp"

using namespace vesp;
namespace fs = std::filesystem;
namespace ode = boost::numeric::odeint;

namespace {

constexpr double pi = std::numbers::pi;

// Pinned tolerances.
constexpr double partition_tol = 1e-12;
constexpr double bony_tol = 1e-10;
constexpr double hybrid_identity_tol = 1e-12;
constexpr double product_c_max = 1e3;
constexpr double max_spread = 10.0;
constexpr double mixed_oracle_tol = 1e-9;
constexpr double eigen_identity_tol = 1e-12;
constexpr double slow_rate_tol = 0.01;
constexpr double translation_tol = 1e-8;
constexpr double l2_drift_tol = 1e-6;
constexpr double rotation_tol = 1e-4;
constexpr double pressure_tol = 1e-9;
constexpr int pressure_iters = 60;
constexpr double curl_tol = 1e-12;
constexpr double estimate_c_max = 1e3;
constexpr double reduced_c_max = 10.0;
constexpr double div_tol = 1e-10;
constexpr double constraint_tol = 1e-6;
constexpr double min_order = 3.0;
constexpr double reform_tol = 1e-6;
constexpr double max_variation = 2.0;

// Resolution of the nonlinear criteria.
const Grid nonlinear_grid{2, 64};

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

void criterion(const std::string& id, const std::string& title, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s %s %s (%.1fs)%s\n", id.c_str(), o.pass ? "PASS" : "FAIL", title.c_str(), secs,
                o.detail.str().c_str());
    std::fflush(stdout);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double rel(const Spectrum& a, const Spectrum& b) { return l2_norm(a - b) / l2_norm(b); }
double rel(const VectorSpectrum& a, const VectorSpectrum& b) { return l2_norm(a - b) / l2_norm(b); }

Spectrum cosine(const Grid& g, int k0, int k1, double amp = 1.0) {
    const double u = g.unit();
    return forward(sample(g, [&](const Point& x) { return amp * std::cos(u * (k0 * x[0] + k1 * x[1])); }));
}

double a0_fn(double x, double y) { return std::cos(x + 2 * y) + 0.5 * std::sin(3 * x - y) + 0.25 * std::cos(4 * y); }

Spectrum smooth_data(const Grid& g) { return forward(sample(g, [](const Point& x) { return a0_fn(x[0], x[1]); })); }

VectorSpectrum constant_vector(const Grid& g, double c0, double c1) {
    auto v = make_vector<Spectrum>(g);
    v[0] = forward(sample(g, [&](const Point&) { return c0; }));
    v[1] = forward(sample(g, [&](const Point&) { return c1; }));
    return v;
}

VectorSpectrum cell_flow(const Grid& g) {
    auto v = make_vector<Spectrum>(g);
    v[0] = forward(sample(g, [](const Point& x) { return std::sin(x[0]) * std::cos(x[1]); }));
    v[1] = forward(sample(g, [](const Point& x) { return -std::cos(x[0]) * std::sin(x[1]); }));
    return v;
}

// Per-mode mixed system integrated by an adaptive Runge-Kutta-Fehlberg 7(8).
std::array<complex, 2> ode_mode(double xi, double mu, std::array<complex, 2> y0, double T) {
    using Y = std::array<double, 4>;
    Y y{y0[0].real(), y0[0].imag(), y0[1].real(), y0[1].imag()};
    auto rhs = [&](const Y& x, Y& dx, double) {
        dx[0] = -xi * x[2];
        dx[1] = -xi * x[3];
        dx[2] = -mu * xi * xi * x[2] + xi * x[0];
        dx[3] = -mu * xi * xi * x[3] + xi * x[1];
    };
    if (T > 0.0)
        ode::integrate_adaptive(ode::make_controlled(1e-12, 1e-12, ode::runge_kutta_fehlberg78<Y>()), rhs, y, 0.0, T,
                                1e-4);
    return {complex{y[0], y[1]}, complex{y[2], y[3]}};
}

double state_distance(const SimState& x, const SimState& y) {
    return std::sqrt(std::pow(l2_norm(x.a - y.a), 2) + std::pow(l2_norm(x.u - y.u), 2) +
                     std::pow(l2_norm(x.E - y.E), 2));
}

SimState small_data(double amplitude, std::uint64_t seed = 1) {
    DataSpec spec;
    spec.seed = seed;
    spec.amplitude = amplitude;
    return admissible_state(nonlinear_grid, spec);
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(VESP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

int main() {
    criterion("AC1", "Littlewood-Paley partition and Bernstein ratios", [](Outcome& o) {
        const CheckSuite s = lp_check_suite(Grid{2, 256}, {}, 1, 20);
        for (const auto& c : s.checks) {
            o.detail << " " << c.name << "=" << fmt(c.value);
            o.check(c.pass, c.name);
        }
        o.check(s.checks.at(0).value <= partition_tol, "partition tolerance");
    });

    criterion("AC2", "Bony reconstruction over 50 pairs", [](Outcome& o) {
        const CheckSuite s = bony_check_suite(Grid{2, 256}, 2, 50, bony_tol);
        o.detail << " worst=" << fmt(s.checks.at(0).value);
        o.check(s.pass(), "reconstruction");
    });

    criterion("AC3", "hybrid-norm identities", [](Outcome& o) {
        const Grid g{2, 256};
        double worst_identity = 0.0, lo = inf, hi = 0.0;
        for (int k = 0; k < 20; ++k) {
            const Spectrum f = random_spectrum(g, sub_seed(3, k), {-10, 10, default_slope(g)});
            for (double s : {0.0, 1.0, 1.5})
                for (double mu : {0.1, 1.0, 5.0})
                    worst_identity =
                        std::max(worst_identity, std::abs(hybrid_norm(f, s, 2.0, mu) / homogeneous_norm(f, s, 1.0) - 1.0));
            const double h = hybrid_norm(f, 1.0, inf, 1.0);
            const double sum = homogeneous_norm(f, 1.0) + homogeneous_norm(f, 0.0);
            lo = std::min(lo, h / sum);
            hi = std::max(hi, h / sum);
        }
        o.detail << " identity=" << fmt(worst_identity) << " two_sided=[" << fmt(lo) << "," << fmt(hi) << "]";
        o.check(worst_identity <= hybrid_identity_tol, "r = 2 identity");
        o.check(lo >= 0.5 && hi <= 1.0, "two-sided bounds");
    });

    criterion("AC4", "product estimates over three ensembles", [](Outcome& o) {
        for (ProductEstimate id : all_product_estimates()) {
            const ProductSpread p = product_spread(id, Grid{2, 64}, 4, 3, 20, product_c_max);
            o.detail << " " << estimate_name(id) << "=" << fmt(p.max_ratio) << "/" << fmt(p.spread);
            o.check(std::isfinite(p.max_ratio) && p.max_ratio <= product_c_max, estimate_name(id) + " ratio");
            o.check(p.pass(max_spread), estimate_name(id) + " spread");
        }
    });

    criterion("AC5", "mixed system modes, spectrum and damping", [](Outcome& o) {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            const double xi = 20.0 * U(rng), mu = 0.1 + 1.9 * U(rng), t = 3.0 * U(rng);
            const std::array<complex, 2> y0{complex{U(rng) - 0.5, U(rng) - 0.5}, complex{U(rng) - 0.5, U(rng) - 0.5}};
            const auto got = mixed_solve_mode({xi, y0[0], y0[1], mu}, {}, {}, {t})[0];
            const auto ref = ode_mode(xi, mu, y0, t);
            worst = std::max({worst, std::abs(got[0] - ref[0]), std::abs(got[1] - ref[1])});
        }
        double trace = 0.0, det = 0.0;
        bool boundary = true;
        double slow = 0.0;
        for (double mu : {0.1, 0.5, 1.0, 2.0, 3.0}) {
            for (double xi : {0.0, 0.3, 1.0, 1.9, 2.0, 2.1, 7.0, 50.0}) {
                const auto r = mode_eigenvalues(xi, mu);
                trace = std::max(trace, std::abs(r.slow + r.fast + mu * xi * xi) / std::max(1.0, mu * xi * xi));
                det = std::max(det, std::abs(r.slow * r.fast - xi * xi) / std::max(1.0, xi * xi));
            }
            const double b = 2.0 / mu;
            const auto tab = mixed_decay_spectrum(mu, {0.99 * b, 1.01 * b});
            boundary = boundary && tab[0].regime == MixedRegime::oscillatory && tab[1].regime == MixedRegime::overdamped;
            const double lam = mode_eigenvalues(100.0 / mu, mu).slow.real();
            slow = std::max(slow, std::abs(lam * mu + 1.0));
        }
        o.detail << " oracle=" << fmt(worst) << " trace=" << fmt(trace) << " det=" << fmt(det)
                 << " slow_rel=" << fmt(slow);
        o.check(worst <= mixed_oracle_tol, "oracle");
        o.check(trace <= eigen_identity_tol && det <= eigen_identity_tol, "eigenvalue identities");
        o.check(boundary, "regime boundary");
        o.check(slow <= slow_rate_tol, "slow rate");
    });

    criterion("AC6", "transport translation, L2 and rotation return", [](Outcome& o) {
        {
            const Grid g{2, 64};
            const double c0 = 0.3, c1 = -0.2;
            const auto run = transport_solve(smooth_data(g), steady(constant_vector(g, c0, c1)), {}, {1.0, 1e-3, 1000});
            const Spectrum exact =
                forward(sample(g, [&](const Point& x) { return a0_fn(x[0] - c0, x[1] - c1); }));
            const double e = rel(run.snapshots.back(), exact);
            o.detail << " translation=" << fmt(e);
            o.check(e <= translation_tol, "translation");
        }
        {
            const Grid g{2, 128};
            const Spectrum a0 = smooth_data(g);
            const auto run = transport_solve(a0, steady(cell_flow(g)), {}, {1.0, 5e-3, 200});
            const double drift = std::abs(l2_norm(run.snapshots.back()) - l2_norm(a0)) / l2_norm(a0);
            o.detail << " l2_drift=" << fmt(drift);
            o.check(drift <= l2_drift_tol, "L2 drift");
        }
        {
            // The time-reversed cellular flow returns every characteristic at T;
            // at T/2 the solution is compared with backward characteristics.
            const Grid g{2, 256};
            const double T = 1.0;
            const VectorSpectrum cell = cell_flow(g);
            const VelocityFn u = [&](double t) { return cell * std::cos(pi * t / T); };
            const Spectrum a0 = smooth_data(g);
            const auto run = transport_solve(a0, u, {}, {T, 1e-3, 500});
            const double back = rel(run.snapshots.back(), a0);
            const Field half = inverse(run.snapshots[1]);
            using State = std::array<double, 2>;
            auto rhs = [&](const State& x, State& dx, double t) {
                const double c = std::cos(pi * t / T);
                dx[0] = c * std::sin(x[0]) * std::cos(x[1]);
                dx[1] = -c * std::cos(x[0]) * std::sin(x[1]);
            };
            double worst = 0.0;
            const double h = g.spacing();
            for (int i = 0; i < g.n; i += 8)
                for (int j = 0; j < g.n; j += 8) {
                    State x{i * h, j * h};
                    ode::integrate_adaptive(ode::make_controlled(1e-12, 1e-12, ode::runge_kutta_dopri5<State>()), rhs,
                                            x, 0.5 * T, 0.0, -1e-3);
                    worst = std::max(worst, std::abs(half[static_cast<std::size_t>(i * g.n + j)] - a0_fn(x[0], x[1])));
                }
            o.detail << " return=" << fmt(back) << " characteristics=" << fmt(worst);
            o.check(back <= rotation_tol && worst <= rotation_tol, "rotation return");
        }
    });

    criterion("AC7", "elliptic pressure manufactured solution", [](Outcome& o) {
        const Grid g{2, 64};
        const Spectrum pi_star = cosine(g, 2, 1) + cosine(g, 0, 3, 0.5) + cosine(g, 5, -4, 0.1);
        const VectorSpectrum gp = grad(pi_star);
        for (double amp : {0.1, 0.3, 0.5}) {
            const Field a = sample(g, [&](const Point& x) { return amp * std::cos(x[0] + x[1]); });
            const auto res = elliptic_pressure_solve(a, gp + scaled(a, gp), {1e-12, pressure_iters, 0.5});
            const auto& geo = res.grad_pi[0].geo();
            double curl = 0.0;
            for (std::size_t m = 0; m < geo.radius.size(); ++m)
                curl = std::max(curl, std::abs(geo.xi[2 * m] * res.grad_pi[1][m] - geo.xi[2 * m + 1] * res.grad_pi[0][m]));
            const double e = rel(res.grad_pi, gp);
            o.detail << " a=" << amp << ":" << fmt(e) << "/" << res.iterations << "it";
            o.check(e <= pressure_tol, "recovery");
            o.check(res.iterations <= pressure_iters, "iterations");
            o.check(curl <= curl_tol * l2_norm(gp), "curl free");
        }
    });

    criterion("AC8", "linear estimate constants", [](Outcome& o) {
        EnsembleConfig c;
        for (const auto& run : {transport_ensemble, momentum_ensemble, mixed_ensemble}) {
            const EnsembleSummary e = run(c);
            o.detail << " " << e.name << "=[" << fmt(e.min_C) << "," << fmt(e.max_C) << "]";
            o.check(std::isfinite(e.max_C) && e.max_C <= estimate_c_max, e.name + " ceiling");
            o.check(e.pass(max_spread), e.name + " spread");
        }
        for (const EstimateReport& r : {transport_reduction(c), momentum_reduction(c)}) {
            o.detail << " " << r.name << "=" << fmt(r.fitted_C);
            o.check(r.pass && r.fitted_C <= reduced_c_max, r.name);
        }
    });

    criterion("AC9", "nonlinear solver on small admissible data", [](Outcome& o) {
        const SimState s0 = small_data(1e-2);
        const SimConfig cfg;
        const SimRun run = simulate(s0, cfg, {10.0, 0.01, 10});
        o.check(!run.aborted, "aborted: " + run.abort_reason);
        const DiagnosticsRow& last = run.rows.back();
        double Y_lo = inf, Y_hi = 0.0;
        for (const auto& r : run.rows)
            if (r.t >= 5.0) Y_lo = std::min(Y_lo, r.Y), Y_hi = std::max(Y_hi, r.Y);
        o.detail << " div=" << fmt(run.max_div) << " det=" << fmt(last.det) << " divET=" << fmt(last.div_ET)
                 << " compat=" << fmt(last.compat) << " Y_late_growth=" << fmt(Y_hi / Y_lo - 1.0);
        o.check(run.max_div <= div_tol, "div u");
        o.check(last.det <= constraint_tol && last.div_ET <= constraint_tol && last.compat <= constraint_tol,
                "constraints");
        o.check(Y_hi <= 1.01 * Y_lo, "Y growth trend");

        const DReformulation d = d_reformulation(run.final_state(), cfg);
        o.detail << " reform=" << fmt(d.E_residual) << "/" << fmt(d.d_residual) << "/" << fmt(d.recovery_residual);
        o.check(std::max({d.E_residual, d.d_residual, d.recovery_residual}) <= reform_tol, "reformulation");

        // dt halving around the production step; coarser steps are pre-asymptotic.
        auto final_at = [&](double dt) {
            const SimRun r = simulate(s0, cfg, {10.0, dt, 1000});
            o.check(!r.aborted, "ladder run aborted");
            return r.final_state();
        };
        const std::vector<SimState> finals{final_at(0.02), run.final_state(), final_at(0.005)};
        const double order = std::log2(state_distance(finals[0], finals[1]) / state_distance(finals[1], finals[2]));
        o.detail << " order=" << fmt(order);
        o.check(order >= min_order, "self-convergence order");
    });

    criterion("AC10", "small-data sweep constant", [](Outcome& o) {
        RunConfig rc;
        rc.T = 10.0;
        rc.dt = 0.01;
        rc.cadence = 10;
        const auto rows = small_data_sweep(nonlinear_grid, {1e-3, 3e-3, 1e-2, 3e-2}, {1, 2}, DataSpec{}, {}, rc);
        double lo = inf, hi = 0.0;
        for (const auto& r : rows) {
            o.check(!r.aborted, "aborted: " + r.abort_reason);
            lo = std::min(lo, r.ratio);
            hi = std::max(hi, r.ratio);
        }
        o.detail << " M_emp=" << fmt(hi) << " variation=" << fmt(hi / lo);
        o.check(lo > 0.0 && hi / lo <= max_variation, "variation");
    });

    criterion("AC11", "byte-identical artifacts on repeated runs", [](Outcome& o) {
        const fs::path root = fs::temp_directory_path() / "vesp_acceptance";
        fs::remove_all(root);
        fs::create_directories(root);
        const fs::path cfg = root / "sim.conf";
        std::ofstream(cfg) << "grid = 32\nq_hi = 1\nT = 0.5\ndt = 0.01\ncadence = 5\n";
        const std::vector<std::pair<std::string, std::vector<std::string>>> runs = {
            {"lp-check --grid 64", {"report.json", "lp_check.csv", "cutoffs.svg"}},
            {"bony-check --grid 64", {"report.json", "bony_check.csv"}},
            {"linear-spectrum", {"report.json", "spectrum.csv"}},
            {"estimates --which mixed --grid 16", {"report.json", "estimates.csv"}},
            {"simulate --config " + cfg.string(), {"report.json", "diagnostics.csv", "bootstrap.csv", "state_final.bin"}},
            {"gen-data", {"certificate.json", "initial.bin"}},
        };
        int compared = 0;
        for (std::size_t k = 0; k < runs.size(); ++k) {
            const auto& [args, files] = runs[k];
            const fs::path a = root / (std::to_string(k) + "a"), b = root / (std::to_string(k) + "b");
            const int ca = run_cli(args + " --out " + a.string()), cb = run_cli(args + " --out " + b.string());
            o.check(ca == 0 && cb == 0, args + " exit");
            for (const auto& f : files) {
                ++compared;
                o.check(fs::exists(a / f) && slurp(a / f) == slurp(b / f), args + " " + f);
            }
        }
        o.detail << " files=" << compared;
    });

    std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}

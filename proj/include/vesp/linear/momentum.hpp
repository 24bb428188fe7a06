#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "vesp/dyadic.hpp"
#include "vesp/linear/estimate.hpp"
#include "vesp/linear/pressure.hpp"
#include "vesp/linear/stokes.hpp"
#include "vesp/linear/transport.hpp"

namespace vesp {

using VectorSourceFn = std::function<VectorSpectrum(double)>;

struct MomentumConfig {
    double T = 1.0;
    double dt = 1e-3;
    double mu = 1.0;
    int cadence = 1;
    double b_min = 0.0;  // required lower bound on inf b; 0 means any positive value
    PressureConfig pressure{};
};

struct MomentumRun {
    TimeSeries<VectorSpectrum> u;
    TimeSeries<VectorSpectrum> grad_pi;
    double max_div = 0.0;       // largest |xi . u| over stored snapshots
    int pressure_iterations = 0;  // worst stage count
};

/// du/dt + v . grad u - mu b Delta u + b grad Pi = f, div u = 0, with b frozen
/// in time. Lawson RK4: the factor e^{mu mean(b) t Delta} is exact, the rest
/// is explicit, and the pressure is recomputed at every stage.
inline MomentumRun linearized_momentum_solve(const VectorSpectrum& u0, const VelocityFn& v, const Field& b,
                                             const VectorSourceFn& f, const MomentumConfig& cfg) {
    const Grid& g = u0.grid();
    require(b.grid() == g, "coefficient b lives on a different grid");
    require(cfg.mu > 0.0, "viscosity must be positive");
    const double binf = min_value(b);
    require(binf > 0.0 && binf >= cfg.b_min, "coefficient b must be bounded below by a positive constant");
    const Field a = b - sample(g, [](const Point&) { return 1.0; });
    const double bbar = mean(b);
    const Field bdev = b - sample(g, [bbar](const Point&) { return bbar; });
    const int steps = step_count(cfg.T, cfg.dt);
    const double h = steps > 0 ? cfg.T / steps : 0.0;
    require(cfg.cadence >= 1, "cadence must be >= 1");

    MomentumRun run;
    VectorSpectrum last_pi = make_vector<Spectrum>(g);
    auto rhs = [&](double t, const VectorSpectrum& u) {
        VectorSpectrum L = scaled(bdev, laplacian(u)) * cfg.mu;
        if (v) L -= detail::advect(inverse(v(t)), u);
        if (f) L += friedrichs(f(t), g.dealias_radius());
        const PressureResult p = elliptic_pressure_solve(a, L + laplacian(u) * (cfg.mu * bbar), cfg.pressure);
        run.pressure_iterations = std::max(run.pressure_iterations, p.iterations);
        last_pi = p.grad_pi;
        return leray(L - p.grad_pi - scaled(a, p.grad_pi));
    };
    auto E = [&](const VectorSpectrum& w, double tau) { return heat_flow(w, cfg.mu * bbar, tau); };

    VectorSpectrum u = u0;
    auto store = [&](double t) {
        rhs(t, u);  // pressure at the stored state
        run.u.push(t, u);
        run.grad_pi.push(t, last_pi);
        run.max_div = std::max(run.max_div, max_divergence(u));
    };
    store(0.0);
    for (int n = 0; n < steps; ++n) {
        const double t = n * h;
        const VectorSpectrum k1 = rhs(t, u);
        const VectorSpectrum k2 = rhs(t + 0.5 * h, E(u + k1 * (0.5 * h), 0.5 * h));
        const VectorSpectrum k3 = rhs(t + 0.5 * h, E(u, 0.5 * h) + k2 * (0.5 * h));
        const VectorSpectrum k4 = rhs(t + h, E(u, h) + E(k3, 0.5 * h) * h);
        u = E(u, h) + (E(k1, h) + E(k2 + k3, 0.5 * h) * 2.0 + k4) * (h / 6.0);
        if ((n + 1) % cfg.cadence == 0 || n + 1 == steps) store((n + 1) * h);
    }
    return run;
}

/// Smallest positive N0 with inf(1 + S_{N0} a) >= b_inf / 2.
inline int select_N0(const Field& a, int max_N0 = 30) {
    const double binf = min_value(a) + 1.0;
    require(binf > 0.0, "1 + a must be bounded below by a positive constant");
    const Spectrum as = forward(a);
    for (int N0 = 1; N0 <= max_N0; ++N0) {
        Field low = inverse(low_pass(as, N0));
        if (min_value(low) + 1.0 >= 0.5 * binf) return N0;
    }
    throw PreconditionError("no admissible N0 found");
}

struct MomentumCheckConfig {
    double s = 1.0;
    double r = 1.0;
    double alpha = 0.25;
    int N0 = 0;  // 0 selects the smallest admissible value
    double kappa = std::numeric_limits<double>::quiet_NaN();  // NaN means k = |s - 1| / alpha
    double c_max = 1e3;
};

inline void validate(const MomentumCheckConfig& c, int N) {
    require(c.alpha > 0.0 && c.alpha < 1.0, "alpha must lie in (0, 1)");
    require(c.s > 1.0 - 0.5 * N && c.s < 1.0 + 0.5 * N, "momentum estimate needs 1 - N/2 < s < 1 + N/2");
    if (c.s > 1.0) require(c.alpha < 0.5 * (c.s - 1.0), "alpha must be below (s - 1)/2 when s > 1");
    require(c.r >= 1.0, "summation index r must be >= 1");
    require(c.N0 >= 0, "N0 must be nonnegative");
}

/// lhs = ||u||_{L~^inf(B^{s-1}_{2,r})} + mu_ ||u||_{L~^1(B^{s+1}_{2,r})} + ||grad Pi||_{L~^1(B^{s-1}_{2,r})}
/// against C e^{C V} (||u0|| + A^k (int ||f|| + mu A int ||u||_{B^{s+1-alpha}_{2,r}})).
inline EstimateReport momentum_estimate_check(const MomentumRun& run, const VelocityFn& v, const Field& b,
                                              const VectorSourceFn& f, double mu, const MomentumCheckConfig& cfg) {
    require(!run.u.empty(), "empty momentum run");
    const Grid& g = b.grid();
    const int N = g.dim;
    validate(cfg, N);
    const Field a = b - sample(g, [](const Point&) { return 1.0; });
    const double binf = min_value(b);
    const double mu_low = mu * binf;
    const int N0 = cfg.N0 > 0 ? cfg.N0 : select_N0(a);
    const double k = std::abs(cfg.s - 1.0) / cfg.alpha;
    const double kappa = std::isnan(cfg.kappa) ? k : cfg.kappa;
    auto nh = [](double s, double r) { return NormSpec{s, r, 1.0, Flavor::nonhomogeneous, inf}; };

    const Spectrum as = forward(a);
    const double grad_b = besov_norm(block_profile(grad(as)), nh(0.5 * N - 1.0, 1.0));
    const double A = 1.0 + binf * std::exp2(N0 * cfg.alpha) * grad_b;
    const double a_crit = besov_norm(block_profile(as), nh(0.5 * N, 1.0));
    const double tail = besov_norm(block_profile(as - low_pass(as, N0)), nh(0.5 * N, 1.0));

    const auto& t = run.u.times;
    std::vector<double> vdot, fn, ulow;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double gv = v ? besov_norm(block_profile(grad(v(t[i]))), nh(0.5 * N, 1.0)) : 0.0;
        vdot.push_back(gv + std::exp2(2.0 * N0) * std::pow(a_crit, 2.0 / cfg.alpha));
        fn.push_back(f ? besov_norm(block_profile(f(t[i])), nh(cfg.s - 1.0, 1.0)) : 0.0);
        ulow.push_back(besov_norm(block_profile(run.u.snapshots[i]), nh(cfg.s + 1.0 - cfg.alpha, cfg.r)));
    }
    const auto V = cumulative_integral(t, vdot);
    const auto F = cumulative_integral(t, fn);
    const auto U = cumulative_integral(t, ulow);
    const auto up = profile_series(run.u);
    const auto pp = profile_series(run.grad_pi);
    NormSpec sup = nh(cfg.s - 1.0, cfg.r), one = nh(cfg.s + 1.0, cfg.r), pone = nh(cfg.s - 1.0, cfg.r);
    one.rho = 1.0;
    pone.rho = 1.0;
    const auto l1 = running_time_space_norm(up, sup);
    const auto l2 = running_time_space_norm(up, one);
    const auto l3 = running_time_space_norm(pp, pone);
    const double u0 = besov_norm(up.snapshots.front(), sup);
    const double Ak = std::pow(A, k);
    std::vector<double> lhs(t.size()), R(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        lhs[i] = l1[i] + mu_low * l2[i] + l3[i];
        R[i] = u0 + Ak * (F[i] + mu * A * U[i]);
    }

    EstimateReport rep;
    rep.name = "momentum";
    rep.c_max = cfg.c_max;
    rep.fitted_C = fit_constant([&](double C) {
        for (std::size_t i = 0; i < t.size(); ++i)
            if (lhs[i] > C * std::exp(C * V[i]) * R[i] * (1.0 + 1e-12) + 1e-300) return false;
        return true;
    });
    rep.lhs = lhs.back();
    rep.rhs_components["initial"] = u0;
    rep.rhs_components["forcing"] = Ak * F.back();
    rep.rhs_components["viscous_remainder"] = Ak * mu * A * U.back();
    const double bound = std::min(0.25 * binf, mu_low / (4.0 * mu));
    rep.info["A_T"] = A;
    rep.info["V_T"] = V.back();
    rep.info["N0"] = N0;
    rep.info["k"] = k;
    rep.info["kappa"] = kappa;
    rep.info["smallness_lhs"] = std::pow(A, kappa + 1.0) * tail;
    rep.info["smallness_bound"] = bound;
    rep.info["smallness_holds"] = std::pow(A, kappa + 1.0) * tail <= bound ? 1.0 : 0.0;
    rep.finish();
    return rep;
}

}  // namespace vesp

#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "vesp/besov.hpp"
#include "vesp/linear/estimate.hpp"
#include "vesp/multipliers.hpp"

namespace vesp {

using VelocityFn = std::function<VectorSpectrum(double)>;
using ScalarSourceFn = std::function<Spectrum(double)>;

inline VelocityFn steady(const VectorSpectrum& u) {
    return [u](double) { return u; };
}

/// Piecewise-linear interpolation of a stored velocity series.
inline VelocityFn interpolate(const TimeSeries<VectorSpectrum>& s) {
    if (s.empty()) throw PreconditionError("cannot interpolate an empty series");
    return [s](double t) {
        if (t <= s.times.front()) return s.snapshots.front();
        for (std::size_t i = 1; i < s.size(); ++i)
            if (t <= s.times[i]) {
                const double w = (t - s.times[i - 1]) / (s.times[i] - s.times[i - 1]);
                return s.snapshots[i - 1] * (1.0 - w) + s.snapshots[i] * w;
            }
        return s.snapshots.back();
    };
}

/// Pointwise max of |u(x)|.
inline double max_speed(const VectorField& u) {
    double m = 0.0;
    for (std::size_t p = 0; p < u[0].size(); ++p) {
        double s = 0.0;
        for (int j = 0; j < u.dim(); ++j) s += u[j][p] * u[j][p];
        m = std::max(m, s);
    }
    return std::sqrt(m);
}

/// Number of steps of size at most dt covering [0, T].
inline int step_count(double T, double dt) {
    require(T >= 0.0, "final time must be nonnegative");
    require(dt > 0.0, "time step must be positive");
    return static_cast<int>(std::ceil(T / dt - 1e-9));
}

struct TransportConfig {
    double T = 1.0;
    double dt = 1e-3;
    int cadence = 1;     // store every cadence-th step (and the last)
    double cfl = 0.5;    // cap on dt max|u| n / L
    double div_tol = 1e-10;
};

namespace detail {

/// u . grad a with the dealias mask, from physical velocity components.
inline Spectrum advect(const VectorField& u, const Spectrum& a) {
    const int d = u.dim();
    Field acc(a.grid());
    for (int j = 0; j < d; ++j) acc += pointwise_product(u[j], inverse(derivative(a, j)));
    return dealias(forward(acc));
}

/// u . grad w for every component of w, dealiased.
inline Components<Spectrum> advect(const VectorField& u, const Components<Spectrum>& w) {
    return map_components(w, [&](const Spectrum& s) { return advect(u, s); });
}

inline void check_velocity(const VectorSpectrum& u, const VectorField& phys, double dt, const TransportConfig& cfg) {
    const Grid& g = u.grid();
    const double scale = g.max_radius() * l2_norm(u);
    if (max_divergence(u) > cfg.div_tol * scale)
        throw PreconditionError("transport velocity is not divergence free");
    const double c = dt * max_speed(phys) * g.n / g.length;
    if (c > cfg.cfl * (1.0 + 1e-12))
        throw ConfigError("CFL number " + std::to_string(c) + " exceeds cap " + std::to_string(cfg.cfl));
}

}  // namespace detail

/// da/dt + u . grad a = g by pseudospectral RK4. The velocity is checked for
/// incompressibility and the CFL cap at every evaluation.
inline TimeSeries<Spectrum> transport_solve(const Spectrum& a0, const VelocityFn& u, const ScalarSourceFn& g,
                                            const TransportConfig& cfg) {
    const int steps = step_count(cfg.T, cfg.dt);
    const double h = steps > 0 ? cfg.T / steps : 0.0;
    require(cfg.cadence >= 1, "cadence must be >= 1");
    auto velocity = [&](double t) {
        const VectorSpectrum us = u(t);
        VectorField up = inverse(us);
        detail::check_velocity(us, up, h, cfg);
        return up;
    };
    auto rhs = [&](double t, const Spectrum& a, const VectorField& up) {
        Spectrum out = detail::advect(up, a);
        out *= -1.0;
        if (g) out += g(t);
        return out;
    };
    TimeSeries<Spectrum> out;
    Spectrum a = a0;
    out.push(0.0, a);
    for (int n = 0; n < steps; ++n) {
        const double t = n * h;
        const VectorField u0 = velocity(t);
        const VectorField uh = velocity(t + 0.5 * h);
        const VectorField u1 = velocity(t + h);
        const Spectrum k1 = rhs(t, a, u0);
        const Spectrum k2 = rhs(t + 0.5 * h, a + k1 * (0.5 * h), uh);
        const Spectrum k3 = rhs(t + 0.5 * h, a + k2 * (0.5 * h), uh);
        const Spectrum k4 = rhs(t + h, a + k3 * h, u1);
        a.axpy(h / 6.0, k1).axpy(h / 3.0, k2).axpy(h / 3.0, k3).axpy(h / 6.0, k4);
        if ((n + 1) % cfg.cadence == 0 || n + 1 == steps) out.push((n + 1) * h, a);
    }
    return out;
}

struct TransportCheckConfig {
    double s = 1.0;
    double r = 1.0;
    double c_max = 1e3;
};

/// Fits C in ||a||_{L~^inf_t(B^s_{2,r})} <= e^{C V(t)} (||a0|| + int e^{-CV} ||g||).
/// V integrates ||grad u||_{B^{N/2}_{2,r}} + ||grad u||_{L^inf} below the
/// critical index and ||grad u||_{B^{s-1}_{2,r}} above it.
inline EstimateReport transport_estimate_check(const TimeSeries<Spectrum>& run, const VelocityFn& u,
                                               const ScalarSourceFn& g, const TransportCheckConfig& cfg) {
    require(!run.empty(), "empty transport run");
    const Grid& grid = run.snapshots.front().grid();
    const int N = grid.dim;
    const double crit = 1.0 + 0.5 * N;
    if (cfg.s == crit && cfg.r != 1.0)
        throw PreconditionError("s = 1 + N/2 is only covered for r = 1");
    if (!(cfg.s > -1.0 - 0.5 * N)) throw PreconditionError("transport estimate needs s > -1 - N/2");
    const NormSpec sn{cfg.s, cfg.r, 1.0, Flavor::nonhomogeneous, inf};
    const bool low = cfg.s < crit;

    std::vector<double> vdot, gnorm;
    for (double t : run.times) {
        const VectorSpectrum us = u(t);
        const TensorSpectrum gu = grad(us);
        double val;
        if (low) {
            double linf = 0.0;
            const TensorField gp = inverse(gu);
            for (std::size_t p = 0; p < gp[0].size(); ++p) {
                double s2 = 0.0;
                for (const auto& c : gp) s2 += c[p] * c[p];
                linf = std::max(linf, std::sqrt(s2));
            }
            val = besov_norm(block_profile(gu), NormSpec{0.5 * N, cfg.r, 1.0, Flavor::nonhomogeneous, inf}) + linf;
        } else {
            val = besov_norm(block_profile(gu), NormSpec{cfg.s - 1.0, cfg.r, 1.0, Flavor::nonhomogeneous, inf});
        }
        vdot.push_back(val);
        gnorm.push_back(g ? besov_norm(block_profile(g(t)), sn) : 0.0);
    }
    const auto V = cumulative_integral(run.times, vdot);
    NormSpec tsn = sn;
    tsn.rho = inf;
    const auto lhs = running_time_space_norm(profile_series(run), tsn);
    const double a0 = besov_norm(block_profile(run.snapshots.front()), sn);

    EstimateReport rep;
    rep.name = "transport";
    rep.c_max = cfg.c_max;
    rep.fitted_C = fit_constant([&](double C) { return dominated(lhs, gronwall_bound(C, run.times, V, a0, gnorm)); });
    rep.lhs = lhs.back();
    rep.rhs_components["initial"] = a0;
    rep.rhs_components["forcing"] = cumulative_integral(run.times, gnorm).back();
    rep.info["V"] = V.back();
    rep.info["branch_low"] = low ? 1.0 : 0.0;
    rep.finish();
    return rep;
}

}  // namespace vesp

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "vesp/linear/estimate.hpp"
#include "vesp/linear/transport.hpp"

namespace vesp {

/// Real 2x2 matrix acting on (E, d) amplitudes.
struct Mat2 {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    std::array<complex, 2> operator()(const std::array<complex, 2>& y) const {
        return {a * y[0] + b * y[1], c * y[0] + d * y[1]};
    }
};

struct MixedModeState {
    double xi = 0.0;
    complex E{};
    complex d{};
    double mu = 1.0;
};

/// exp(t M) for M = [[0, -xi], [xi, -mu xi^2]].
inline Mat2 mode_exponential(double xi, double mu, double t) {
    require(xi >= 0.0 && mu > 0.0, "mode exponential needs xi >= 0 and mu > 0");
    const double tau = -0.5 * mu * xi * xi;
    const double half = 0.5 * mu * xi;
    const double delta2 = xi * xi * (half - 1.0) * (half + 1.0);
    const double z = delta2 * t * t;
    // exp(tM) = e^{tau t} (C I + S (M - tau I)).
    auto combine = [&](double C, double S) {
        const double e = std::exp(tau * t);
        return Mat2{e * (C - S * tau), -e * S * xi, e * S * xi, e * (C + S * tau)};
    };
    if (std::abs(z) < 1e-2) {
        double C = 0.0, S = 0.0, term = 1.0;
        for (int k = 0; k < 10; ++k) {
            C += term / std::tgamma(2.0 * k + 1.0);
            S += term / std::tgamma(2.0 * k + 2.0);
            term *= z;
        }
        return combine(C, t * S);
    }
    if (delta2 < 0.0) {
        const double w = std::sqrt(-delta2);
        return combine(std::cos(w * t), std::sin(w * t) / w);
    }
    // Overdamped: eigenvalues are real and well separated on this interval.
    const double dl = std::sqrt(delta2);
    const double fast = tau - dl;
    const double slow = xi * xi / fast;
    const double e1 = std::exp(slow * t), e2 = std::exp(fast * t);
    const double inv = 1.0 / (slow - fast);
    // (e1 (M - fast) - e2 (M - slow)) / (slow - fast)
    return Mat2{(e1 * (-fast) - e2 * (-slow)) * inv, (e1 - e2) * (-xi) * inv, (e1 - e2) * xi * inv,
                (e1 * (-mu * xi * xi - fast) - e2 * (-mu * xi * xi - slow)) * inv};
}

enum class MixedRegime { oscillatory, critical, overdamped };

inline std::string regime_name(MixedRegime r) {
    switch (r) {
        case MixedRegime::oscillatory: return "oscillatory";
        case MixedRegime::critical: return "critical";
        case MixedRegime::overdamped: return "overdamped";
    }
    return "?";
}

struct ModeSpectrumRow {
    double xi = 0.0;
    complex slow{};  // eigenvalue with the larger real part
    complex fast{};
    MixedRegime regime = MixedRegime::oscillatory;
};

/// Roots of lambda^2 + mu xi^2 lambda + xi^2 = 0.
inline ModeSpectrumRow mode_eigenvalues(double xi, double mu) {
    require(xi >= 0.0 && mu > 0.0, "mode eigenvalues need xi >= 0 and mu > 0");
    ModeSpectrumRow row;
    row.xi = xi;
    const double tau = -0.5 * mu * xi * xi;
    const double half = 0.5 * mu * xi;
    const double boundary = 2.0 / mu;
    if (xi == 0.0) return row;  // no dynamics
    if (std::abs(xi - boundary) <= 1e-12 * boundary) {
        row.regime = MixedRegime::critical;
        row.slow = row.fast = tau;
        return row;
    }
    const double delta2 = xi * xi * (half - 1.0) * (half + 1.0);
    if (delta2 < 0.0) {
        const double w = std::sqrt(-delta2);
        row.regime = MixedRegime::oscillatory;
        row.slow = {tau, w};
        row.fast = {tau, -w};
    } else {
        row.regime = MixedRegime::overdamped;
        const double fast = tau - std::sqrt(delta2);
        row.fast = fast;
        row.slow = xi * xi / fast;
    }
    return row;
}

inline std::vector<ModeSpectrumRow> mixed_decay_spectrum(double mu, const std::vector<double>& xi) {
    std::vector<ModeSpectrumRow> out;
    out.reserve(xi.size());
    for (double x : xi) out.push_back(mode_eigenvalues(x, mu));
    return out;
}

using ModeForcing = std::function<complex(double)>;

namespace detail {

inline constexpr std::array<double, 4> gauss_nodes{0.5 - 0.5 * 0.8611363115940526, 0.5 - 0.5 * 0.3399810435848563,
                                                   0.5 + 0.5 * 0.3399810435848563, 0.5 + 0.5 * 0.8611363115940526};
inline constexpr std::array<double, 4> gauss_weights{0.5 * 0.3478548451374538, 0.5 * 0.6521451548625461,
                                                     0.5 * 0.6521451548625461, 0.5 * 0.3478548451374538};

/// Propagator over one interval of length dt, split into substeps short
/// enough for Gauss quadrature of the Duhamel integral.
struct ModePropagator {
    Mat2 whole;
    Mat2 step;
    std::array<Mat2, 4> node;  // exp((h - sigma_j) M)
    int sub = 1;
    double h = 0.0;

    ModePropagator(double xi, double mu, double dt, bool forced) : whole(mode_exponential(xi, mu, dt)) {
        if (!forced || dt == 0.0) {
            h = dt;
            return;
        }
        const double rate = std::max({1.0, mu * xi * xi, xi});
        sub = std::max(1, static_cast<int>(std::ceil(dt * rate / 0.25)));
        h = dt / sub;
        step = mode_exponential(xi, mu, h);
        for (int j = 0; j < 4; ++j) node[j] = mode_exponential(xi, mu, h * (1.0 - gauss_nodes[j]));
    }

    /// Advances y from t0 over dt with forcing g(t) = (F(t), H(t)).
    template <class G>
    std::array<complex, 2> advance(std::array<complex, 2> y, double t0, const G& g) const {
        for (int k = 0; k < sub; ++k) {
            const double ts = t0 + k * h;
            y = step(y);
            for (int j = 0; j < 4; ++j) {
                const auto gj = node[j](g(ts + gauss_nodes[j] * h));
                y[0] += h * gauss_weights[j] * gj[0];
                y[1] += h * gauss_weights[j] * gj[1];
            }
        }
        return y;
    }
};

}  // namespace detail

/// E' = -xi d + F, d' = -mu xi^2 d + xi E + H at one frequency, sampled at
/// the given increasing times (starting at 0).
inline std::vector<std::array<complex, 2>> mixed_solve_mode(const MixedModeState& st, const ModeForcing& F,
                                                             const ModeForcing& H, const std::vector<double>& times) {
    require(st.xi >= 0.0 && st.mu > 0.0, "mode state needs xi >= 0 and mu > 0");
    const bool forced = F || H;
    auto g = [&](double t) {
        return std::array<complex, 2>{F ? F(t) : complex{}, H ? H(t) : complex{}};
    };
    std::vector<std::array<complex, 2>> out;
    std::array<complex, 2> y{st.E, st.d};
    double t = 0.0;
    for (double tk : times) {
        require(tk >= t, "mode sample times must be nondecreasing and start at 0 or later");
        if (tk > t) {
            const detail::ModePropagator p(st.xi, st.mu, tk - t, forced);
            y = forced ? p.advance(y, t, g) : p.whole(y);
            t = tk;
        }
        out.push_back(y);
    }
    return out;
}

struct MixedRun {
    TimeSeries<TensorSpectrum> E;
    TimeSeries<TensorSpectrum> d;
};

/// Solves E' + Lambda d = F, d' - mu Delta d - Lambda E = G mode by mode.
/// Forcing series, when given, must share the output clock; they are
/// interpolated linearly in time.
inline MixedRun mixed_field_solve(const TensorSpectrum& E0, const TensorSpectrum& d0, double mu,
                                  const std::vector<double>& times, const TimeSeries<TensorSpectrum>& F = {},
                                  const TimeSeries<TensorSpectrum>& G = {}) {
    require(E0.grid() == d0.grid() && E0.count() == d0.count(), "E0 and d0 must match");
    require(!times.empty() && times.front() == 0.0, "clock must start at 0");
    for (const auto* s : {&F, &G})
        if (!s->empty()) require(s->times == times, "forcing series must share the output clock");
    const bool forced = !F.empty() || !G.empty();
    const auto& geo = E0[0].geo();
    const std::size_t nc = E0.count();
    std::vector<TensorSpectrum> Es(times.size(), E0 * 0.0), ds(times.size(), d0 * 0.0);
    for (std::size_t m = 0; m < geo.radius.size(); ++m) {
        const double xi = geo.radius[m];
        std::vector<std::array<complex, 2>> y(nc);
        for (std::size_t c = 0; c < nc; ++c) {
            y[c] = {E0[c][m], d0[c][m]};
            Es[0][c][m] = y[c][0];
            ds[0][c][m] = y[c][1];
        }
        for (std::size_t k = 1; k < times.size(); ++k) {
            const double t0 = times[k - 1], dt = times[k] - t0;
            require(dt > 0.0, "clock must increase");
            const detail::ModePropagator p(xi, mu, dt, forced);
            for (std::size_t c = 0; c < nc; ++c) {
                if (forced) {
                    auto lerp = [&](const TimeSeries<TensorSpectrum>& s, double t) {
                        if (s.empty()) return complex{};
                        const double w = (t - t0) / dt;
                        return (1.0 - w) * s.snapshots[k - 1][c][m] + w * s.snapshots[k][c][m];
                    };
                    y[c] = p.advance(y[c], t0, [&](double t) {
                        return std::array<complex, 2>{lerp(F, t), lerp(G, t)};
                    });
                } else {
                    y[c] = p.whole(y[c]);
                }
                Es[k][c][m] = y[c][0];
                ds[k][c][m] = y[c][1];
            }
        }
    }
    MixedRun run;
    for (std::size_t k = 0; k < times.size(); ++k) {
        run.E.push(times[k], std::move(Es[k]));
        run.d.push(times[k], std::move(ds[k]));
    }
    return run;
}

using TensorSourceFn = std::function<TensorSpectrum(double)>;

/// The mixed system with transport by a divergence-free u on both equations,
/// by Lawson RK4 around the exact per-mode exponential.
inline MixedRun mixed_transport_solve(const TensorSpectrum& E0, const TensorSpectrum& d0, double mu,
                                      const VelocityFn& u, const TransportConfig& cfg,
                                      const TensorSourceFn& F = {}, const TensorSourceFn& G = {}) {
    require(E0.grid() == d0.grid() && E0.count() == d0.count(), "E0 and d0 must match");
    const int steps = step_count(cfg.T, cfg.dt);
    const double h = steps > 0 ? cfg.T / steps : 0.0;
    const auto& geo = E0[0].geo();
    const std::size_t nm = geo.radius.size();
    std::vector<Mat2> full(nm), half(nm);
    for (std::size_t m = 0; m < nm; ++m) {
        full[m] = mode_exponential(geo.radius[m], mu, h);
        half[m] = mode_exponential(geo.radius[m], mu, 0.5 * h);
    }
    using Pair = std::array<TensorSpectrum, 2>;
    auto expo = [&](const Pair& y, const std::vector<Mat2>& ex) {
        Pair out = y;
        for (std::size_t c = 0; c < y[0].count(); ++c)
            for (std::size_t m = 0; m < nm; ++m) {
                const auto z = ex[m]({y[0][c][m], y[1][c][m]});
                out[0][c][m] = z[0];
                out[1][c][m] = z[1];
            }
        return out;
    };
    auto axpy = [](Pair y, double s, const Pair& k) {
        y[0] += k[0] * s;
        y[1] += k[1] * s;
        return y;
    };
    auto rhs = [&](double t, const Pair& y) {
        const VectorSpectrum us = u(t);
        const VectorField up = inverse(us);
        detail::check_velocity(us, up, h, cfg);
        Pair k{detail::advect(up, y[0]) * -1.0, detail::advect(up, y[1]) * -1.0};
        if (F) k[0] += F(t);
        if (G) k[1] += G(t);
        return k;
    };
    MixedRun run;
    Pair y{E0, d0};
    run.E.push(0.0, y[0]);
    run.d.push(0.0, y[1]);
    for (int n = 0; n < steps; ++n) {
        const double t = n * h;
        const Pair k1 = rhs(t, y);
        const Pair k2 = rhs(t + 0.5 * h, expo(axpy(y, 0.5 * h, k1), half));
        const Pair k3 = rhs(t + 0.5 * h, axpy(expo(y, half), 0.5 * h, k2));
        const Pair k4 = rhs(t + h, axpy(expo(y, full), h, expo(k3, half)));
        Pair next = axpy(expo(y, full), h / 6.0, expo(k1, full));
        next = axpy(next, h / 3.0, expo(axpy(k2, 1.0, k3), half));
        y = axpy(next, h / 6.0, k4);
        if ((n + 1) % cfg.cadence == 0 || n + 1 == steps) {
            run.E.push((n + 1) * h, y[0]);
            run.d.push((n + 1) * h, y[1]);
        }
    }
    return run;
}

struct MixedCheckConfig {
    double s = 1.0;
    double mu = 1.0;
    double c_max = 1e3;
};

/// Checks ||E||_{B~^{s,inf}} + ||d||_{B^{s-1}} + mu int (||E||_{B~^{s,1}} + ||d||_{B^{s+1}})
/// <= C e^{CV} (data + mu int e^{-CV} (||F||_{B~^{s,inf}} + ||G||_{B^{s-1}})) at every snapshot.
/// Vdot holds ||grad u||_{B^{N/2}_{2,1}} on the run clock (empty: no transport).
inline EstimateReport mixed_estimate_check(const MixedRun& run, const MixedCheckConfig& cfg,
                                           const TimeSeries<TensorSpectrum>& F = {},
                                           const TimeSeries<TensorSpectrum>& G = {},
                                           const std::vector<double>& Vdot = {}) {
    require(!run.E.empty(), "empty mixed run");
    const int N = run.E.snapshots.front().grid().dim;
    require(cfg.s > 1.0 - 0.5 * N && cfg.s <= 1.0 + 0.5 * N, "mixed estimate needs 1 - N/2 < s <= 1 + N/2");
    require(cfg.mu > 0.0, "viscosity must be positive");
    const auto& t = run.E.times;
    for (const auto* s : {&F, &G})
        if (!s->empty()) require(s->times == t, "forcing series must share the run clock");
    require(Vdot.empty() || Vdot.size() == t.size(), "Vdot must share the run clock");
    const double s = cfg.s, mu = cfg.mu;
    std::vector<double> state(t.size()), diss(t.size()), forcing(t.size(), 0.0);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto& E = run.E.snapshots[i];
        const auto& d = run.d.snapshots[i];
        state[i] = hybrid_norm(E, s, inf, mu) + homogeneous_norm(d, s - 1.0);
        diss[i] = hybrid_norm(E, s, 1.0, mu) + homogeneous_norm(d, s + 1.0);
        if (!F.empty()) forcing[i] += hybrid_norm(F.snapshots[i], s, inf, mu);
        if (!G.empty()) forcing[i] += homogeneous_norm(G.snapshots[i], s - 1.0);
    }
    const auto D = cumulative_integral(t, diss);
    const auto V = Vdot.empty() ? std::vector<double>(t.size(), 0.0) : cumulative_integral(t, Vdot);
    std::vector<double> lhs(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) lhs[i] = state[i] + mu * D[i];
    std::vector<double> g(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) g[i] = mu * forcing[i];

    EstimateReport rep;
    rep.name = "mixed";
    rep.c_max = cfg.c_max;
    rep.fitted_C = fit_constant([&](double C) {
        const auto b = gronwall_bound(C, t, V, state.front(), g);
        for (std::size_t i = 0; i < t.size(); ++i)
            if (lhs[i] > C * b[i] * (1.0 + 1e-12) + 1e-300) return false;
        return true;
    });
    rep.lhs = lhs.back();
    rep.rhs_components["initial"] = state.front();
    rep.rhs_components["forcing"] = cumulative_integral(t, g).back();
    rep.info["V_T"] = V.back();
    rep.finish();
    return rep;
}

}  // namespace vesp

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "vesp/linear/stokes.hpp"
#include "vesp/linear/transport.hpp"
#include "vesp/viscoelastic/state.hpp"

namespace vesp {

/// Time derivatives of (a, u, E) and the pressure gradient used for u.
struct Tendency {
    Spectrum a;
    VectorSpectrum u;
    TensorSpectrum E;
    VectorSpectrum grad_pi;
    int pressure_iterations = 0;
};

namespace detail {

/// Grid values of a state and of its first derivatives.
struct Physical {
    Field a;
    VectorField u;
    TensorField gu;               // gu(i, j) = d_j u_i
    VectorField ga;               // d_j a
    TensorField E;
    std::vector<TensorField> gE;  // gE[l](i, j) = d_l E_ij
    VectorField lap_u;
};

inline Physical physical(const SimState& s) {
    const int d = s.grid().dim;
    Physical p;
    p.a = inverse(s.a);
    p.u = inverse(s.u);
    p.gu = inverse(grad(s.u));
    p.ga = inverse(grad(s.a));
    p.E = inverse(s.E);
    for (int l = 0; l < d; ++l)
        p.gE.push_back(inverse(map_components(s.E, [l](const Spectrum& c) { return derivative(c, l); })));
    p.lap_u = inverse(laplacian(s.u));
    return p;
}

/// Forward transform restricted to the ball |xi| <= r.
inline Spectrum cut(const Field& f, double r) { return friedrichs(forward(f), r); }

/// Pointwise x * y accumulated into acc with weight w.
inline void fma(Field& acc, const Field& x, const Field& y, double w = 1.0) {
    for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += w * x[p] * y[p];
}

/// (d_j E_ik) E_jk + d_j E_ij at every grid point.
inline Field elastic_force(const Physical& p, int i) {
    const int d = p.u.dim();
    Field x(p.a.grid());
    for (int j = 0; j < d; ++j) {
        for (int k = 0; k < d; ++k) fma(x, p.gE[j](i, k), p.E(j, k));
        x += p.gE[j](i, j);
    }
    return x;
}

/// Everything in the momentum equation except the pressure:
/// mu (1 + a) Lap u - u . grad u + (1 + a) G + f.
inline VectorSpectrum momentum_forces(const SimState& s, const Physical& p, const SimConfig& cfg, double r) {
    const Grid& g = s.grid();
    const int d = g.dim;
    auto L = make_vector<Spectrum>(g);
    for (int i = 0; i < d; ++i) {
        Field acc(g);
        fma(acc, p.a, p.lap_u[i], cfg.mu);
        for (int l = 0; l < d; ++l) fma(acc, p.u[l], p.gu(i, l), -1.0);
        const Field x = elastic_force(p, i);
        acc += x;
        fma(acc, p.a, x);
        L[i] = cut(acc, r) + friedrichs(laplacian(s.u[i]), r) * cfg.mu;
    }
    if (cfg.force) L += map_components(cfg.force(s.t), [r](const Spectrum& c) { return friedrichs(c, r); });
    return L;
}

/// -u . grad E + grad u E + grad u, restricted to |xi| <= r.
inline TensorSpectrum deformation_tendency(const Physical& p, const VectorSpectrum& u, double r) {
    const Grid& g = u.grid();
    const int d = g.dim;
    auto out = make_tensor<Spectrum>(g);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            Field acc(g);
            for (int l = 0; l < d; ++l) fma(acc, p.u[l], p.gE[l](i, j), -1.0);
            for (int k = 0; k < d; ++k) fma(acc, p.gu(i, k), p.E(k, j));
            out(i, j) = cut(acc, r) + friedrichs(derivative(u[i], j), r);
        }
    return out;
}

/// The part of Physical that the deformation equation reads.
inline Physical deformation_inputs(const VectorField& u, const TensorField& gu, const TensorSpectrum& E) {
    Physical p;
    p.u = u;
    p.gu = gu;
    p.E = inverse(E);
    for (int l = 0; l < E.dim(); ++l)
        p.gE.push_back(inverse(map_components(E, [l](const Spectrum& c) { return derivative(c, l); })));
    return p;
}

inline void check_density(const Field& a, const SimConfig& cfg) {
    const double b = 1.0 + min_value(a);
    if (b < cfg.b_min)
        throw NumericalAbort("inf(1 + a) = " + std::to_string(b) + " fell below b_min = " + std::to_string(cfg.b_min));
}

}  // namespace detail

/// Right-hand side of the (a, u, E) system with every product dealiased and
/// every tendency restricted to the Friedrichs ball.
inline Tendency rhs(const SimState& s, const SimConfig& cfg) {
    const Grid& g = s.grid();
    const int d = g.dim;
    const double r = cutoff_radius(g, cfg);
    const detail::Physical p = detail::physical(s);
    detail::check_density(p.a, cfg);

    Tendency out;
    Field adv(g);
    for (int j = 0; j < d; ++j) detail::fma(adv, p.u[j], p.ga[j], -1.0);
    out.a = detail::cut(adv, r);

    out.E = detail::deformation_tendency(p, s.u, r);

    const VectorSpectrum L = detail::momentum_forces(s, p, cfg, r);
    const PressureResult pr = elliptic_pressure_solve(p.a, L, cfg.pressure);
    out.grad_pi = pr.grad_pi;
    out.pressure_iterations = pr.iterations;
    out.u = map_components(leray(L - pr.grad_pi - scaled(p.a, pr.grad_pi)),
                           [r](const Spectrum& c) { return friedrichs(c, r); });
    return out;
}

/// Pressure gradient of a state, without the other tendencies.
inline VectorSpectrum pressure_gradient(const SimState& s, const SimConfig& cfg) {
    const double r = cutoff_radius(s.grid(), cfg);
    const detail::Physical p = detail::physical(s);
    return elliptic_pressure_solve(p.a, detail::momentum_forces(s, p, cfg, r), cfg.pressure).grad_pi;
}

/// ||div u|| / ||grad u||, zero for u = 0.
inline double div_residual(const VectorSpectrum& u) {
    const double scale = l2_norm(grad(u));
    return scale > 0.0 ? l2_norm(div(u)) / scale : 0.0;
}

namespace detail {

struct Triple {
    Spectrum a;
    VectorSpectrum u;
    TensorSpectrum E;

    Triple& operator+=(const Triple& o) {
        a += o.a;
        u += o.u;
        E += o.E;
        return *this;
    }
    friend Triple operator+(Triple x, const Triple& y) { return x += y; }
    friend Triple operator*(Triple x, double s) {
        x.a *= s;
        x.u *= s;
        x.E *= s;
        return x;
    }
};

}  // namespace detail

/// One Lawson RK4 step: e^{mu t Delta} on u is exact, the rest explicit.
/// The velocity is Leray projected at the end of the step; the pressure is
/// recomputed there when `refresh_pressure` is set.
inline SimState step(const SimState& s, double dt, const SimConfig& cfg, bool refresh_pressure = true) {
    require(dt >= 0.0, "time step must be nonnegative");
    require(cfg.mu > 0.0, "viscosity must be positive");
    if (dt == 0.0) return s;
    const Grid& g = s.grid();
    const double r = cutoff_radius(g, cfg);
    const double c = dt * max_speed(inverse(s.u)) * g.n / g.length;
    if (c > cfg.cfl * (1.0 + 1e-12))
        throw ConfigError("CFL number " + std::to_string(c) + " exceeds cap " + std::to_string(cfg.cfl));

    using detail::Triple;
    auto F = [&](double t, const Triple& y) {
        SimState st{t, y.a, y.u, y.E, {}};
        Tendency k = rhs(st, cfg);
        return Triple{std::move(k.a), k.u - laplacian(y.u) * cfg.mu, std::move(k.E)};
    };
    auto X = [&](Triple y, double tau) {
        y.u = heat_flow(y.u, cfg.mu, tau);
        return y;
    };
    const double h = dt;
    const double t = s.t;
    const Triple y{s.a, s.u, s.E};
    const Triple k1 = F(t, y);
    const Triple k2 = F(t + 0.5 * h, X(y + k1 * (0.5 * h), 0.5 * h));
    const Triple k3 = F(t + 0.5 * h, X(y, 0.5 * h) + k2 * (0.5 * h));
    const Triple k4 = F(t + h, X(y, h) + X(k3, 0.5 * h) * h);
    const Triple next = X(y, h) + (X(k1, h) + X(k2 + k3, 0.5 * h) * 2.0 + k4) * (h / 6.0);

    SimState out{t + h, next.a, map_components(leray(next.u), [r](const Spectrum& v) { return friedrichs(v, r); }),
                 next.E, s.grad_pi};
    const double dr = div_residual(out.u);
    if (dr > cfg.div_tol)
        throw NumericalAbort("divergence residual " + std::to_string(dr) + " after step");
    if (refresh_pressure) {
        detail::check_density(inverse(out.a), cfg);
        out.grad_pi = pressure_gradient(out, cfg);
    }
    return out;
}

}  // namespace vesp

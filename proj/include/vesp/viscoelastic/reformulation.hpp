#pragma once

#include "vesp/viscoelastic/diagnostics.hpp"

namespace vesp {

/// d = -Lambda^{-1} grad u with its source terms, and the residuals of the
/// damped equations satisfied by (E, d).
struct DReformulation {
    TensorSpectrum d;  // d_ij = -Lambda^{-1} d_j u_i
    TensorSpectrum H;
    TensorSpectrum R;  // R_ij = d_k u_i E_kj
    double recovery_residual = 0.0;  // ||Lambda^{-1} d_j d_ij - (u_i - mean u_i)|| / ||u - mean u||
    double E_residual = 0.0;         // E_t + u . grad E + Lambda d - R, relative
    double d_residual = 0.0;         // d_t + u . grad d - mu Lap d - Lambda E - H, relative
};

inline TensorSpectrum d_field(const VectorSpectrum& u) {
    const int d = u.dim();
    auto out = make_tensor<Spectrum>(u.grid());
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out(i, j) = riesz(u[i], j) * -1.0;
    return out;
}

inline VectorSpectrum u_from_d(const TensorSpectrum& dd) {
    const int d = dd.dim();
    auto out = make_vector<Spectrum>(dd.grid());
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out[i] += riesz(dd(i, j), j);
    return out;
}

namespace detail {

inline double ratio(double num, double den) { return den > 0.0 ? num / den : num; }

}  // namespace detail

inline DReformulation d_reformulation(const SimState& s, const SimConfig& cfg) {
    const Grid& g = s.grid();
    const int d = g.dim;
    const double r = cutoff_radius(g, cfg);
    const detail::Physical p = detail::physical(s);
    const Tendency k = rhs(s, cfg);
    using detail::cut;
    using detail::fma;

    DReformulation out;
    out.d = d_field(s.u);
    // d carries no mean mode, and mean u drifts once the density varies.
    VectorSpectrum u_osc = s.u;
    for (int i = 0; i < d; ++i) u_osc[i][0] = 0.0;
    out.recovery_residual = detail::ratio(l2_norm(u_from_d(out.d) - u_osc), l2_norm(u_osc));

    out.R = make_tensor<Spectrum>(g);
    TensorSpectrum adv_E = make_tensor<Spectrum>(g), adv_d = make_tensor<Spectrum>(g);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            Field rr(g), ae(g), ad(g);
            for (int l = 0; l < d; ++l) {
                fma(rr, p.gu(i, l), p.E(l, j));
                fma(ae, p.u[l], p.gE[l](i, j));
                fma(ad, p.u[l], inverse(derivative(out.d(i, j), l)));
            }
            out.R(i, j) = cut(rr, r);
            adv_E(i, j) = cut(ae, r);
            adv_d(i, j) = cut(ad, r);
        }

    // Lambda^{-1} d_j of the momentum terms.
    const VectorSpectrum apress = scaled(p.a, k.grad_pi);
    auto M = make_vector<Spectrum>(g);
    for (int i = 0; i < d; ++i) {
        Field acc(g);
        for (int l = 0; l < d; ++l) fma(acc, p.u[l], p.gu(i, l));
        fma(acc, p.a, p.lap_u[i], -cfg.mu);
        Field quad(g), lin(g);
        for (int l = 0; l < d; ++l) {
            for (int kk = 0; kk < d; ++kk) fma(quad, p.gE[l](i, kk), p.E(l, kk));
            lin += p.gE[l](i, l);
        }
        acc -= quad;
        fma(acc, p.a, quad, -1.0);
        fma(acc, p.a, lin, -1.0);
        M[i] = cut(acc, r) + k.grad_pi[i] + apress[i];
        if (cfg.force) M[i] -= friedrichs(cfg.force(s.t)[i], r);
    }

    out.H = make_tensor<Spectrum>(g);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            Spectrum h = adv_d(i, j) + riesz(M[i], j);
            for (int kk = 0; kk < d; ++kk) {
                Field c(g);
                for (int l = 0; l < d; ++l) {
                    fma(c, p.E(l, kk), p.gE[l](i, j));
                    fma(c, p.E(l, j), p.gE[l](i, kk), -1.0);
                }
                h -= riesz(cut(c, r), kk);
            }
            out.H(i, j) = h;
        }

    const TensorSpectrum lam_d = map_components(out.d, [](const Spectrum& c) { return lambda_pow(c, 1.0); });
    const TensorSpectrum lam_E = map_components(s.E, [](const Spectrum& c) { return lambda_pow(c, 1.0); });
    const TensorSpectrum d_dot = d_field(k.u);
    const TensorSpectrum lap_d = map_components(out.d, [](const Spectrum& c) { return laplacian(c); });

    const TensorSpectrum eres = k.E + adv_E + lam_d - out.R;
    out.E_residual = detail::ratio(l2_norm(eres),
                                   l2_norm(k.E) + l2_norm(adv_E) + l2_norm(lam_d) + l2_norm(out.R));
    const TensorSpectrum dres = d_dot + adv_d - lap_d * cfg.mu - lam_E - out.H;
    out.d_residual = detail::ratio(l2_norm(dres), l2_norm(d_dot) + l2_norm(adv_d) + cfg.mu * l2_norm(lap_d) +
                                                      l2_norm(lam_E) + l2_norm(out.H));
    return out;
}

}  // namespace vesp

#pragma once

#include <cmath>
#include <complex>

#include "vesp/field.hpp"

namespace vesp {

// --- derivatives ------------------------------------------------------------
//
// Odd symbols cannot be represented on the k = -n/2 plane of a real field, so
// every derivative-type multiplier zeroes modes that touch it.

inline Spectrum derivative(const Spectrum& s, int axis) {
    const auto& geo = s.geo();
    const int d = s.grid().dim;
    require(axis >= 0 && axis < d, "derivative axis out of range");
    return apply_symbol(s, [&](std::size_t m) {
        return geo.nyquist[m] ? complex{} : complex{0.0, geo.xi[m * d + axis]};
    });
}
inline Field derivative(const Field& f, int axis) { return inverse(derivative(forward(f), axis)); }

inline VectorSpectrum grad(const Spectrum& s) {
    const int d = s.grid().dim;
    std::vector<Spectrum> c;
    for (int j = 0; j < d; ++j) c.push_back(derivative(s, j));
    return VectorSpectrum(d, std::move(c));
}

inline Spectrum div(const VectorSpectrum& v) {
    Spectrum out(v.grid());
    for (int j = 0; j < v.dim(); ++j) out += derivative(v[j], j);
    return out;
}

/// (grad v)_{ij} = d_j v_i.
inline TensorSpectrum grad(const VectorSpectrum& v) {
    const int d = v.dim();
    std::vector<Spectrum> c;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) c.push_back(derivative(v[i], j));
    return TensorSpectrum(d, std::move(c));
}

/// Row divergence (div F)_i = d_j F_{ij}.
inline VectorSpectrum div_rows(const TensorSpectrum& t) {
    const int d = t.dim();
    auto out = make_vector<Spectrum>(t.grid());
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out[i] += derivative(t(i, j), j);
    return out;
}

/// Column divergence (div F^T)_j = d_i F_{ij}.
inline VectorSpectrum div_cols(const TensorSpectrum& t) {
    const int d = t.dim();
    auto out = make_vector<Spectrum>(t.grid());
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) out[j] += derivative(t(i, j), i);
    return out;
}

inline Spectrum laplacian(const Spectrum& s) {
    const auto& r = s.geo().radius;
    return apply_symbol(s, [&](std::size_t m) { return -r[m] * r[m]; });
}
inline VectorSpectrum laplacian(const VectorSpectrum& v) {
    return map_components(v, [](const Spectrum& s) { return laplacian(s); });
}

/// Lambda^s = |xi|^s; the zero mode is mapped to 0.
inline Spectrum lambda_pow(const Spectrum& s, double power) {
    if (power < 0.0) {
        const double norm = l2_norm(s);
        if (std::abs(s[0]) > 1e-12 * norm)
            throw PreconditionError("lambda_pow with negative power needs a mean-zero field");
    }
    const auto& r = s.geo().radius;
    return apply_symbol(s, [&](std::size_t m) { return m == 0 ? 0.0 : std::pow(r[m], power); });
}
inline Field lambda_pow(const Field& f, double power) {
    return inverse(lambda_pow(forward(f), power));
}

/// Lambda^{-1} d_j, symbol i xi_j / |xi|.
inline Spectrum riesz(const Spectrum& s, int axis) {
    const auto& geo = s.geo();
    const int d = s.grid().dim;
    return apply_symbol(s, [&](std::size_t m) {
        if (m == 0 || geo.nyquist[m]) return complex{};
        return complex{0.0, geo.xi[m * d + axis] / geo.radius[m]};
    });
}

// --- projections --------------------------------------------------------------

/// Gradient part Q = grad (-Delta)^{-1} div.
inline VectorSpectrum gradient_part(const VectorSpectrum& v) {
    const auto& geo = v[0].geo();
    const int d = v.dim();
    auto out = make_vector<Spectrum>(v.grid());
    for (std::size_t m = 1; m < geo.radius.size(); ++m) {
        if (geo.nyquist[m]) continue;
        const double* xi = &geo.xi[m * d];
        complex dot{};
        for (int j = 0; j < d; ++j) dot += xi[j] * v[j][m];
        const double r2 = geo.radius[m] * geo.radius[m];
        for (int j = 0; j < d; ++j) out[j][m] = xi[j] * dot / r2;
    }
    return out;
}

/// Leray projector P = Id - Q onto divergence-free fields.
inline VectorSpectrum leray(const VectorSpectrum& v) {
    auto q = gradient_part(v);
    auto out = v;
    const auto& geo = v[0].geo();
    for (int j = 0; j < v.dim(); ++j) {
        out[j] -= q[j];
        for (std::size_t m = 0; m < geo.radius.size(); ++m)
            if (geo.nyquist[m]) out[j][m] = 0.0;
    }
    return out;
}
inline VectorField leray(const VectorField& v) { return inverse(leray(forward(v))); }

/// Ball truncation |xi| <= n_cut.
inline Spectrum friedrichs(const Spectrum& s, double n_cut) {
    require(n_cut > 0.0, "Friedrichs radius must be positive");
    const auto& r = s.geo().radius;
    const double lim = n_cut * (1.0 + 1e-12);
    return apply_symbol(s, [&](std::size_t m) { return r[m] <= lim ? 1.0 : 0.0; });
}
inline Field friedrichs(const Field& f, double n_cut) {
    return inverse(friedrichs(forward(f), n_cut));
}
template <class S>
Components<S> friedrichs(const Components<S>& v, double n_cut) {
    return map_components(v, [n_cut](const S& s) { return friedrichs(s, n_cut); });
}

inline Spectrum dealias(const Spectrum& s) { return friedrichs(s, s.grid().dealias_radius()); }
inline Field dealias(const Field& f) { return inverse(dealias(forward(f))); }

/// Pointwise product followed by the dealias mask.
inline Spectrum dealiased_product(const Field& a, const Field& b) {
    return dealias(forward(pointwise_product(a, b)));
}

/// Largest |xi . v(xi)| over modes.
inline double max_divergence(const VectorSpectrum& v) {
    const auto& geo = v[0].geo();
    const int d = v.dim();
    double worst = 0.0;
    for (std::size_t m = 0; m < geo.radius.size(); ++m) {
        complex dot{};
        for (int j = 0; j < d; ++j) dot += geo.xi[m * d + j] * v[j][m];
        worst = std::max(worst, std::abs(dot));
    }
    return worst;
}

}  // namespace vesp

#pragma once

#include <cmath>
#include <vector>

#include "vesp/multipliers.hpp"

namespace vesp {

struct PressureConfig {
    double tol = 1e-10;  // relative to ||div L||
    int max_iter = 200;
    double a_max = 0.5;
};

struct PressureResult {
    VectorSpectrum grad_pi;
    std::vector<double> residuals;  // relative residual after each iteration
    int iterations = 0;

    /// Geometric mean contraction of the residual log.
    double contraction() const {
        if (residuals.size() < 2 || residuals.front() <= 0.0 || residuals.back() <= 0.0) return 0.0;
        return std::pow(residuals.back() / residuals.front(), 1.0 / (residuals.size() - 1));
    }
};

/// Dealiased product of a scalar field with every component of v.
inline VectorSpectrum scaled(const Field& a, const VectorSpectrum& v) {
    return map_components(v, [&](const Spectrum& s) { return dealiased_product(a, inverse(s)); });
}

/// Solves div((1 + a) grad Pi) = div L for grad Pi by the fixed point
/// grad Pi <- Q(L - a grad Pi).
inline PressureResult elliptic_pressure_solve(const Field& a, const VectorSpectrum& L, const PressureConfig& cfg = {}) {
    require(a.grid() == L.grid(), "pressure operands live on different grids");
    require(max_abs(a) <= cfg.a_max * (1.0 + 1e-12), "pressure solve needs ||a||_inf <= a_max");
    require(cfg.max_iter >= 1 && cfg.tol > 0.0, "invalid pressure solver settings");
    const Spectrum divL = div(L);
    const double scale = l2_norm(divL);
    PressureResult res;
    res.grad_pi = gradient_part(L);
    if (scale == 0.0) {
        res.iterations = 1;
        res.residuals.push_back(0.0);
        return res;
    }
    for (int k = 1; k <= cfg.max_iter; ++k) {
        const VectorSpectrum aw = scaled(a, res.grad_pi);
        const double r = l2_norm(div(res.grad_pi + aw) - divL) / scale;
        res.residuals.push_back(r);
        res.iterations = k;
        if (r <= cfg.tol) return res;
        if (k == cfg.max_iter) break;
        res.grad_pi = gradient_part(L - aw);
    }
    throw NonconvergenceError("elliptic pressure iteration did not converge", res.residuals.back(), res.iterations);
}

}  // namespace vesp

#pragma once

#include <cmath>
#include <iostream>
#include <vector>

#include "vesp/besov.hpp"
#include "vesp/multipliers.hpp"

namespace vesp {

/// Exact heat flow e^{mu t Delta} of one spectrum.
inline Spectrum heat_flow(const Spectrum& s, double mu, double t) {
    const auto& r = s.geo().radius;
    return apply_symbol(s, [&](std::size_t m) { return std::exp(-mu * r[m] * r[m] * t); });
}
inline VectorSpectrum heat_flow(const VectorSpectrum& v, double mu, double t) {
    return map_components(v, [&](const Spectrum& s) { return heat_flow(s, mu, t); });
}

struct StokesRun {
    TimeSeries<VectorSpectrum> u;
    bool projected = false;  // the datum was not divergence free and got Leray projected
};

/// Unforced Stokes flow on the torus, sampled at the given times. The
/// pressure gradient of this problem vanishes identically.
inline StokesRun stokes_heat_solve(const VectorSpectrum& u0, double mu, const std::vector<double>& times) {
    require(mu > 0.0, "viscosity must be positive");
    StokesRun run;
    VectorSpectrum v = u0;
    const double scale = u0.grid().max_radius() * l2_norm(u0);
    if (max_divergence(u0) > 1e-10 * scale) {
        std::cerr << "warning: Stokes datum is not divergence free; applying the Leray projector\n";
        v = leray(u0);
        run.projected = true;
    }
    for (double t : times) {
        require(t >= 0.0, "Stokes sample times must be nonnegative");
        run.u.push(t, heat_flow(v, mu, t));
    }
    return run;
}

/// Uniform clock 0, T/steps, ..., T.
inline std::vector<double> uniform_clock(double T, int steps) {
    require(steps >= 1, "clock needs at least one step");
    std::vector<double> t(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i) t[static_cast<std::size_t>(i)] = T * i / steps;
    return t;
}

}  // namespace vesp

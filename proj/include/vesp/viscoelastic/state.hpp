#pragma once

#include <algorithm>

#include "vesp/linear/momentum.hpp"
#include "vesp/linear/pressure.hpp"

namespace vesp {

/// Solver settings shared by the right-hand side, the stepper and the driver.
struct SimConfig {
    double mu = 1.0;
    double n_cut = 0.0;  // Friedrichs radius in |xi| units; 0 selects the dealias radius
    double b_min = 0.1;
    PressureConfig pressure{};
    double cfl = 0.5;
    double div_tol = 1e-10;   // on ||div u|| / ||grad u||
    double det_abort = 1e-2;  // max |det(I + E) - 1| before a run is abandoned
    VectorSourceFn force;     // optional body force on the momentum equation
};

/// Effective spectral radius: the Friedrichs ball inside the dealias ball.
inline double cutoff_radius(const Grid& g, const SimConfig& cfg) {
    const double r = g.dealias_radius();
    return cfg.n_cut > 0.0 ? std::min(cfg.n_cut, r) : r;
}

/// (a, u, E) with a = 1/rho - 1 and E = F - I, plus the last pressure gradient.
struct SimState {
    double t = 0.0;
    Spectrum a;
    VectorSpectrum u;
    TensorSpectrum E;
    VectorSpectrum grad_pi;

    const Grid& grid() const { return a.grid(); }
};

inline SimState rest_state(const Grid& g) {
    return {0.0, Spectrum(g), make_vector<Spectrum>(g), make_tensor<Spectrum>(g), make_vector<Spectrum>(g)};
}

/// Pi with zero mean from its gradient.
inline Spectrum pressure_field(const VectorSpectrum& grad_pi) {
    const auto& geo = grad_pi[0].geo();
    const int d = grad_pi.dim();
    Spectrum out(grad_pi.grid());
    for (std::size_t m = 1; m < geo.radius.size(); ++m) {
        if (geo.nyquist[m]) continue;
        complex acc{};
        for (int j = 0; j < d; ++j) acc += geo.xi[m * d + j] * grad_pi[j][m];
        out[m] = complex{0.0, -1.0} * acc / (geo.radius[m] * geo.radius[m]);
    }
    return out;
}

/// Applies the Friedrichs ball to every field of a state.
inline SimState project_state(SimState s, double radius) {
    s.a = friedrichs(s.a, radius);
    s.u = friedrichs(s.u, radius);
    s.E = friedrichs(s.E, radius);
    return s;
}

}  // namespace vesp

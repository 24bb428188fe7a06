#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "vesp/random.hpp"
#include "vesp/viscoelastic/diagnostics.hpp"

namespace vesp {

struct DataSpec {
    std::uint64_t seed = 1;
    double amplitude = 1e-2;
    int q_lo = 0;
    int q_hi = 2;
    double flow_time = 0.0;  // tau of the deformation flow
    int flow_steps = 64;

    void validate(const Grid& g) const {
        require(amplitude >= 0.0, "amplitude must be nonnegative");
        require(q_lo <= q_hi, "band needs q_lo <= q_hi");
        require(q_hi >= q_min(g) && q_lo <= q_max(g), "band lies outside the grid's block range");
        require(flow_time >= 0.0, "flow_time must be nonnegative");
        require(flow_steps >= 1, "flow_steps must be >= 1");
    }
    BandSpec band(const Grid& g) const { return {q_lo, q_hi, default_slope(g)}; }
};

/// Streams of one seed: velocity, density, deformation flow.
enum class DataStream : std::uint64_t { velocity = 0, density = 1, flow = 2 };

inline double velocity_norm(const VectorSpectrum& u) {
    return besov_norm(block_profile(u), NormSpec{0.5 * u.grid().dim - 1.0, 1.0, 1.0, Flavor::homogeneous, inf});
}
inline double density_norm(const Spectrum& a) {
    return besov_norm(block_profile(a), NormSpec{0.5 * a.grid().dim, 1.0, 1.0, Flavor::nonhomogeneous, inf});
}
inline double deformation_norm(const TensorSpectrum& E, double mu) {
    return besov_norm(mean_free_profile(E), NormSpec{0.5 * E.grid().dim, inf, mu, Flavor::hybrid, inf});
}

namespace detail {

inline VectorSpectrum unit_velocity(const Grid& g, const DataSpec& spec, DataStream stream) {
    VectorSpectrum u = leray(random_vector_spectrum(g, sub_seed(spec.seed, static_cast<std::uint64_t>(stream)),
                                                    spec.band(g)));
    const double n = velocity_norm(u);
    require(n > 0.0, "band holds no admissible velocity modes");
    return u * (1.0 / n);
}

}  // namespace detail

/// Divergence-free band-limited field with ||u0||_{dot B^{N/2-1}_{2,1}} = amplitude.
inline VectorSpectrum generate_velocity(const Grid& g, const DataSpec& spec) {
    spec.validate(g);
    if (spec.amplitude == 0.0) return make_vector<Spectrum>(g);
    return detail::unit_velocity(g, spec, DataStream::velocity) * spec.amplitude;
}

/// Band-limited a0 with ||a0||_{B^{N/2}_{2,1}} = amplitude and inf(1 + a0) >= b_min.
inline Spectrum generate_density(const Grid& g, const DataSpec& spec, double b_min = 0.1) {
    spec.validate(g);
    require(spec.amplitude < 1.0 - b_min, "density amplitude must stay below 1 - b_min");
    if (spec.amplitude == 0.0) return Spectrum(g);
    Spectrum a = random_spectrum(g, sub_seed(spec.seed, static_cast<std::uint64_t>(DataStream::density)), spec.band(g));
    a *= spec.amplitude / density_norm(a);
    const double b = 1.0 + min_value(inverse(a));
    if (b < b_min)
        throw PreconditionError("generated density violates inf(1 + a0) >= b_min (" + std::to_string(b) + ")");
    return a;
}

/// Constraint residuals of a generated E0.
struct Certificate {
    double det = 0.0;
    double div_ET = 0.0;
    double compat = 0.0;
    double tol = 1e-8;
    double flow_time = 0.0;
    double norm = 0.0;

    bool pass() const { return det <= tol && div_ET <= tol && compat <= tol; }
};

inline Certificate certify(const TensorSpectrum& E, double tol = 1e-8) {
    Certificate c;
    c.det = det_residual(E);
    c.div_ET = div_ET_residual(E);
    c.compat = compat_residual(E);
    c.tol = tol;
    return c;
}

struct Deformation {
    TensorSpectrum E;
    Certificate certificate;
};

/// E(tau) for E_t + v . grad E = grad v E + grad v from E = 0, by RK4 with
/// flow_steps substeps; the result inherits all three constraints.
inline TensorSpectrum deformation_flow(const VectorSpectrum& v, double tau, int steps) {
    const Grid& g = v.grid();
    require(steps >= 1, "flow_steps must be >= 1");
    TensorSpectrum E = make_tensor<Spectrum>(g);
    if (tau == 0.0) return E;
    const double r = g.dealias_radius();
    const VectorField vp = inverse(v);
    const TensorField gv = inverse(grad(v));
    auto F = [&](const TensorSpectrum& e) {
        return detail::deformation_tendency(detail::deformation_inputs(vp, gv, e), v, r);
    };
    const double h = tau / steps;
    for (int n = 0; n < steps; ++n) {
        const TensorSpectrum k1 = F(E);
        const TensorSpectrum k2 = F(E + k1 * (0.5 * h));
        const TensorSpectrum k3 = F(E + k2 * (0.5 * h));
        const TensorSpectrum k4 = F(E + k3 * h);
        E += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
    }
    return E;
}

/// Deformation generated by the flow stream of `spec` over spec.flow_time.
inline Deformation generate_deformation(const Grid& g, const DataSpec& spec, double mu = 1.0) {
    spec.validate(g);
    Deformation out;
    if (spec.flow_time == 0.0) {
        out.E = make_tensor<Spectrum>(g);
    } else {
        out.E = deformation_flow(detail::unit_velocity(g, spec, DataStream::flow), spec.flow_time, spec.flow_steps);
    }
    out.certificate = certify(out.E);
    out.certificate.flow_time = spec.flow_time;
    out.certificate.norm = deformation_norm(out.E, mu);
    if (!out.certificate.pass())
    {
        char msg[256];
        std::snprintf(msg, sizeof msg,
                      "deformation residuals (det %.2e, div E^T %.2e, compat %.2e) exceed %.1e; increase flow_steps, "
                      "refine the grid or narrow the band",
                      out.certificate.det, out.certificate.div_ET, out.certificate.compat, out.certificate.tol);
        throw NumericalAbort(msg);
    }
    return out;
}

/// Bisects tau so that ||E0||_{B~_mu^{N/2,inf}} = target within rel_tol.
inline Deformation generate_deformation_for_norm(const Grid& g, DataSpec spec, double target, double mu = 1.0,
                                                 double rel_tol = 1e-3) {
    spec.validate(g);
    require(target >= 0.0, "target norm must be nonnegative");
    if (target == 0.0) {
        spec.flow_time = 0.0;
        return generate_deformation(g, spec, mu);
    }
    const VectorSpectrum v = detail::unit_velocity(g, spec, DataStream::flow);
    auto norm_at = [&](double tau) { return deformation_norm(deformation_flow(v, tau, spec.flow_steps), mu); };
    // E ~ tau grad v at small tau gives the first bracket.
    double hi = target / norm_at(1e-6) * 1e-6;
    double lo = 0.0;
    int guard = 0;
    while (norm_at(hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (++guard > 60) throw NonconvergenceError("could not bracket the deformation time", 0.0, guard);
    }
    double tau = hi;
    for (int k = 0; k < 200; ++k) {
        const double n = norm_at(tau);
        if (std::abs(n - target) <= rel_tol * target) break;
        (n < target ? lo : hi) = tau;
        tau = 0.5 * (lo + hi);
    }
    spec.flow_time = tau;
    return generate_deformation(g, spec, mu);
}

/// Admissible (a0, u0, E0) with each component at `amplitude` in its own norm.
inline SimState admissible_state(const Grid& g, const DataSpec& spec, double mu = 1.0, double b_min = 0.1) {
    SimState s = rest_state(g);
    s.a = generate_density(g, spec, b_min);
    s.u = generate_velocity(g, spec);
    s.E = generate_deformation_for_norm(g, spec, spec.amplitude, mu).E;
    return s;
}

}  // namespace vesp

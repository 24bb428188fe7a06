#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "vesp/bony.hpp"
#include "vesp/linear/mixed.hpp"
#include "vesp/linear/momentum.hpp"
#include "vesp/linear/transport.hpp"
#include "vesp/random.hpp"

namespace vesp {

/// Leray-projected random field rescaled to max |v| = speed.
inline VectorSpectrum random_solenoidal(const Grid& g, std::uint64_t seed, const BandSpec& band, double speed) {
    VectorSpectrum v = leray(random_vector_spectrum(g, seed, band));
    const double m = max_speed(inverse(v));
    return m > 0.0 ? v * (speed / m) : v;
}

/// Fitted constants of one estimate over a seeded ensemble. Spread is the
/// ratio of the largest to the smallest positive fitted constant.
struct EnsembleSummary {
    std::string name;
    std::vector<EstimateReport> reports;
    double min_C = 0.0;
    double max_C = 0.0;
    double spread = 1.0;
    bool all_pass = true;

    void finish() {
        std::vector<double> C;
        for (const auto& r : reports) {
            all_pass = all_pass && r.pass;
            if (r.fitted_C > 0.0) C.push_back(r.fitted_C);
        }
        if (C.empty()) return;
        min_C = *std::min_element(C.begin(), C.end());
        max_C = *std::max_element(C.begin(), C.end());
        spread = max_C / min_C;
    }
    bool pass(double max_spread = 10.0) const { return all_pass && spread < max_spread; }
};

struct EnsembleConfig {
    Grid grid{2, 32};
    std::uint64_t seed = 1;
    int members = 20;
    double mu = 1.0;
    double s = 1.0;
    double T = 1.0;
    double dt = 0.01;
    double c_max = 1e3;
};

/// Random data transported by a steady random solenoidal velocity.
inline EnsembleSummary transport_ensemble(const EnsembleConfig& c) {
    EnsembleSummary out;
    out.name = "transport";
    const Grid& g = c.grid;
    for (int k = 0; k < c.members; ++k) {
        const Spectrum a0 = random_spectrum(g, sub_seed(c.seed, 2 * k), {-10, 10, -1.5});
        const VelocityFn v = steady(random_solenoidal(g, sub_seed(c.seed, 2 * k + 1), {-10, 2, -1.5}, 1.0));
        TransportConfig tc;
        tc.T = c.T;
        tc.dt = c.dt;
        out.reports.push_back(transport_estimate_check(transport_solve(a0, v, {}, tc), v, {}, {c.s, 1.0, c.c_max}));
    }
    out.finish();
    return out;
}

/// Linearized momentum with b = 1 + a, ||a||_inf = 0.1, and a steady random velocity.
inline EnsembleSummary momentum_ensemble(const EnsembleConfig& c) {
    EnsembleSummary out;
    out.name = "momentum";
    const Grid& g = c.grid;
    const Field one = sample(g, [](const Point&) { return 1.0; });
    for (int k = 0; k < c.members; ++k) {
        const VectorSpectrum u0 = random_solenoidal(g, sub_seed(c.seed, 3 * k), {-10, 10, -1.5}, 1.0);
        Field a = inverse(random_spectrum(g, sub_seed(c.seed, 3 * k + 1), {-10, 2, -1.5}));
        a *= 0.1 / max_abs(a);
        const Field b = a + one;
        const VelocityFn v = steady(random_solenoidal(g, sub_seed(c.seed, 3 * k + 2), {-10, 2, -1.5}, 0.5));
        MomentumConfig mc;
        mc.T = c.T;
        mc.dt = c.dt;
        mc.mu = c.mu;
        mc.cadence = 5;
        MomentumCheckConfig cc;
        cc.s = c.s;
        cc.c_max = c.c_max;
        out.reports.push_back(momentum_estimate_check(linearized_momentum_solve(u0, v, b, {}, mc), v, b, {}, c.mu, cc));
    }
    out.finish();
    return out;
}

/// Mixed (E, d) system with random data and a cos t modulated random forcing.
inline EnsembleSummary mixed_ensemble(const EnsembleConfig& c) {
    EnsembleSummary out;
    out.name = "mixed";
    const Grid& g = c.grid;
    const auto clock = uniform_clock(c.T, std::max(1, static_cast<int>(std::lround(c.T / c.dt))));
    for (int k = 0; k < c.members; ++k) {
        const TensorSpectrum E0 = random_tensor_spectrum(g, sub_seed(c.seed, 3 * k), {-10, 10, -1.5});
        const TensorSpectrum d0 = random_tensor_spectrum(g, sub_seed(c.seed, 3 * k + 1), {-10, 10, -1.5});
        const TensorSpectrum shape = random_tensor_spectrum(g, sub_seed(c.seed, 3 * k + 2), {-10, 3, -1.5});
        TimeSeries<TensorSpectrum> F;
        for (double t : clock) F.push(t, shape * std::cos(t));
        const auto run = mixed_field_solve(E0, d0, c.mu, clock, F);
        out.reports.push_back(mixed_estimate_check(run, {c.s, c.mu, c.c_max}, F));
    }
    out.finish();
    return out;
}

/// Constant-coefficient reduction of the transport estimate: v = 0.
inline EstimateReport transport_reduction(const EnsembleConfig& c) {
    const Spectrum a0 = random_spectrum(c.grid, sub_seed(c.seed, 0), {-10, 10, -1.5});
    const VelocityFn zero = steady(make_vector<Spectrum>(c.grid));
    TransportConfig tc;
    tc.T = c.T;
    tc.dt = c.dt;
    EstimateReport rep = transport_estimate_check(transport_solve(a0, zero, {}, tc), zero, {}, {c.s, 1.0, c.c_max});
    rep.name = "transport_v0";
    return rep;
}

/// Constant-coefficient reduction of the momentum estimate: b = 1, v = 0.
inline EstimateReport momentum_reduction(const EnsembleConfig& c) {
    const VectorSpectrum u0 = random_solenoidal(c.grid, sub_seed(c.seed, 1), {-10, 10, -1.5}, 1.0);
    const Field b = sample(c.grid, [](const Point&) { return 1.0; });
    MomentumConfig mc;
    mc.T = c.T;
    mc.dt = c.dt;
    mc.mu = c.mu;
    MomentumCheckConfig cc;
    cc.s = c.s;
    cc.c_max = c.c_max;
    EstimateReport rep =
        momentum_estimate_check(linearized_momentum_solve(u0, {}, b, {}, mc), {}, b, {}, c.mu, cc);
    rep.name = "momentum_a0";
    return rep;
}

/// One product estimate over several independent ensembles. Spread compares
/// the per-ensemble max ratios.
struct ProductSpread {
    ProductEstimate id = ProductEstimate::moser;
    std::vector<ProductEstimateReport> ensembles;
    double max_ratio = 0.0;
    double spread = 1.0;
    bool all_pass = true;

    bool pass(double max_spread = 10.0) const { return all_pass && spread < max_spread; }
};

inline ProductSpread product_spread(ProductEstimate id, const Grid& g, std::uint64_t seed, int ensembles,
                                    int members, double c_max = 1e3) {
    require(ensembles >= 1, "need at least one ensemble");
    ProductSpread out;
    out.id = id;
    double lo = inf, hi = 0.0;
    for (int e = 0; e < ensembles; ++e) {
        Ensemble ens{g, sub_seed(seed, static_cast<std::uint64_t>(e)), members, {-100, 100, -1.5}};
        out.ensembles.push_back(product_estimate_harness(default_params(id, g.dim), ens, c_max));
        const auto& r = out.ensembles.back();
        out.all_pass = out.all_pass && r.pass && !r.samples.empty();
        lo = std::min(lo, r.max_ratio);
        hi = std::max(hi, r.max_ratio);
    }
    out.max_ratio = hi;
    out.spread = lo > 0.0 ? hi / lo : inf;
    return out;
}

}  // namespace vesp

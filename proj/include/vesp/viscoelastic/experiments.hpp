#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "vesp/initial_data.hpp"
#include "vesp/linear/estimate.hpp"
#include "vesp/linear/momentum.hpp"
#include "vesp/viscoelastic/simulate.hpp"

namespace vesp {

// --- small-data sweep -----------------------------------------------------------

struct SweepRow {
    std::uint64_t seed = 0;
    double amplitude = 0.0;
    double alpha = 0.0;
    double max_Y = 0.0;
    double ratio = 0.0;  // max_t Y / alpha, 0 for zero data
    double max_det = 0.0;
    bool aborted = false;
    std::string abort_reason;
};

/// Runs every (seed, amplitude) pair from admissible data and records the
/// empirical constant M = max_t Y / alpha.
inline std::vector<SweepRow> small_data_sweep(const Grid& g, const std::vector<double>& amplitudes,
                                              const std::vector<std::uint64_t>& seeds, DataSpec base,
                                              const SimConfig& cfg, RunConfig rc) {
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
        require(amplitudes[i] >= 0.0, "sweep amplitudes must be nonnegative");
        if (i > 0) require(amplitudes[i] > amplitudes[i - 1], "sweep amplitudes must ascend");
    }
    rc.store_states = false;
    std::vector<SweepRow> out;
    for (std::uint64_t seed : seeds)
        for (double amp : amplitudes) {
            SweepRow row;
            row.seed = seed;
            row.amplitude = amp;
            base.seed = seed;
            base.amplitude = amp;
            if (amp > 0.0) {
                const SimState s0 = admissible_state(g, base, cfg.mu, cfg.b_min);
                row.alpha = alpha(s0, cfg.mu);
                const SimRun run = simulate(s0, cfg, rc);
                for (const auto& r : run.rows) {
                    row.max_Y = std::max(row.max_Y, r.Y);
                    row.max_det = std::max(row.max_det, r.det);
                }
                row.ratio = row.alpha > 0.0 ? row.max_Y / row.alpha : 0.0;
                row.aborted = run.aborted;
                row.abort_reason = run.abort_reason;
            }
            out.push_back(row);
        }
    return out;
}

// --- bootstrap monitor ----------------------------------------------------------

struct BootstrapConfig {
    double C = 1.0;         // the unknown constant of the smallness condition
    double lambda = 1.0;
    double U0 = std::numeric_limits<double>::quiet_NaN();  // NaN: ||u0||_{B^{N/2-1}_{2,1}}
    double alpha = 0.25;    // the Bernstein loss exponent of the momentum estimate
    double kappa = std::numeric_limits<double>::quiet_NaN();  // NaN: |N/2 - 1| / alpha
    int N0 = 0;             // 0 selects the smallest admissible value
};

struct BootstrapCondition {
    std::string name;
    std::vector<double> lhs, bound;
    std::vector<bool> holds;
    double min_margin = inf;  // smallest bound - lhs
};

struct BootstrapReport {
    std::vector<double> times;
    std::vector<BootstrapCondition> conditions;
    int N0 = 0;
    double first_violation = std::numeric_limits<double>::quiet_NaN();

    bool all_hold() const { return std::isnan(first_violation); }
};

/// Evaluates the four bootstrap bounds along the stored states of a run:
/// a and E stay within 2 and 6 times their data, the high-frequency part of a
/// stays small, and u - u_L (u_L the Stokes flow of u0) stays below lambda U0.
inline BootstrapReport bootstrap_monitor(const SimRun& run, const SimConfig& cfg, const BootstrapConfig& bc = {}) {
    require(!run.states.empty(), "bootstrap monitor needs stored states");
    const auto& S = run.states;
    const Grid& g = S.snapshots.front().grid();
    const int N = g.dim;
    auto nh = [](double s, double rho = inf) { return NormSpec{s, 1.0, 1.0, Flavor::nonhomogeneous, rho}; };
    const SimState& s0 = S.snapshots.front();
    const Field a0 = inverse(s0.a);
    const double binf = 1.0 + min_value(a0);
    const double mu_low = cfg.mu * binf;

    BootstrapReport rep;
    rep.times = S.times;
    rep.N0 = bc.N0 > 0 ? bc.N0 : select_N0(a0);
    const double kappa = std::isnan(bc.kappa) ? std::abs(0.5 * N - 1.0) / bc.alpha : bc.kappa;
    const double U0 = std::isnan(bc.U0) ? besov_norm(block_profile(s0.u), nh(0.5 * N - 1.0)) : bc.U0;

    TimeSeries<Spectrum> a_s, tail_s;
    TimeSeries<TensorSpectrum> E_s;
    TimeSeries<VectorSpectrum> ubar_s, pi_s;
    const StokesRun lin = stokes_heat_solve(s0.u, cfg.mu, S.times);
    std::vector<double> grad_a;
    for (std::size_t i = 0; i < S.size(); ++i) {
        const SimState& s = S.snapshots[i];
        a_s.push(s.t, s.a);
        tail_s.push(s.t, s.a - low_pass(s.a, rep.N0));
        E_s.push(s.t, s.E);
        ubar_s.push(s.t, s.u - lin.u.snapshots[i]);
        pi_s.push(s.t, s.grad_pi);
        const double ga = besov_norm(block_profile(grad(s.a)), nh(0.5 * N - 1.0));
        grad_a.push_back(i == 0 ? ga : std::max(ga, grad_a.back()));
    }
    const auto a_run = running_time_space_norm(profile_series(a_s), nh(0.5 * N));
    const auto tail_run = running_time_space_norm(profile_series(tail_s), nh(0.5 * N));
    const auto E_run = running_time_space_norm(profile_series(E_s), nh(0.5 * N));
    const auto ub_sup = running_time_space_norm(profile_series(ubar_s), nh(0.5 * N - 1.0));
    const auto ub_one = running_time_space_norm(profile_series(ubar_s), nh(0.5 * N + 1.0, 1.0));
    const auto pi_one = running_time_space_norm(profile_series(pi_s), nh(0.5 * N - 1.0, 1.0));
    const double a0n = a_run.front();
    const double E0n = E_run.front();
    const double small = std::min(binf / (4.0 * bc.C), mu_low / (4.0 * bc.C * cfg.mu));

    BootstrapCondition c1, c2, c3, c4;
    c1.name = "density";
    c2.name = "density_tail";
    c3.name = "deformation";
    c4.name = "velocity_remainder";
    for (std::size_t i = 0; i < S.size(); ++i) {
        const double A = 1.0 + binf * std::exp2(rep.N0 * bc.alpha) * grad_a[i];
        c1.lhs.push_back(a_run[i]);
        c1.bound.push_back(2.0 * a0n);
        c2.lhs.push_back(std::pow(A, kappa + 1.0) * tail_run[i]);
        c2.bound.push_back(small);
        c3.lhs.push_back(E_run[i]);
        c3.bound.push_back(6.0 * E0n);
        c4.lhs.push_back(ub_sup[i] + mu_low * ub_one[i] + pi_one[i]);
        c4.bound.push_back(bc.lambda * U0);
    }
    for (auto* c : {&c1, &c2, &c3, &c4}) {
        for (std::size_t i = 0; i < S.size(); ++i) {
            // Relative slack absorbs round-off in the zero-data and t = 0 cases.
            const bool ok = c->lhs[i] <= c->bound[i] * (1.0 + 1e-12) + 1e-300;
            c->holds.push_back(ok);
            c->min_margin = std::min(c->min_margin, c->bound[i] - c->lhs[i]);
            if (!ok && (std::isnan(rep.first_violation) || S.times[i] < rep.first_violation))
                rep.first_violation = S.times[i];
        }
        rep.conditions.push_back(*c);
    }
    return rep;
}

// --- Friedrichs ladder -----------------------------------------------------------

struct LadderRow {
    double n_cut = 0.0;
    double next_cut = 0.0;
    double difference = 0.0;  // ||y_n(T) - y_next(T)||, y = (a, u, E)
    double relative = 0.0;
};

/// Runs the same data under each Friedrichs radius and reports Cauchy
/// differences of the terminal states between consecutive radii.
inline std::vector<LadderRow> friedrichs_ladder(const SimState& initial, SimConfig cfg, RunConfig rc,
                                                const std::vector<double>& cuts) {
    require(cuts.size() >= 2, "the ladder needs at least two radii");
    for (std::size_t i = 1; i < cuts.size(); ++i) require(cuts[i] > cuts[i - 1], "ladder radii must ascend");
    rc.store_states = false;
    std::vector<SimState> finals;
    for (double c : cuts) {
        cfg.n_cut = c;
        const SimRun run = simulate(initial, cfg, rc);
        if (run.aborted) throw NumericalAbort("ladder run at n_cut = " + std::to_string(c) + " aborted: " + run.abort_reason);
        finals.push_back(run.final_state());
    }
    auto norm = [](const SimState& s) {
        return std::sqrt(l2_norm_squared(s.a) + std::pow(l2_norm(s.u), 2) + std::pow(l2_norm(s.E), 2));
    };
    std::vector<LadderRow> out;
    for (std::size_t i = 0; i + 1 < finals.size(); ++i) {
        SimState d = finals[i + 1];
        d.a -= finals[i].a;
        d.u -= finals[i].u;
        d.E -= finals[i].E;
        LadderRow row{cuts[i], cuts[i + 1], norm(d), 0.0};
        const double ref = norm(finals[i + 1]);
        row.relative = ref > 0.0 ? row.difference / ref : 0.0;
        out.push_back(row);
    }
    return out;
}

}  // namespace vesp

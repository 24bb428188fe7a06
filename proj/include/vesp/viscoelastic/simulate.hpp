#pragma once

#include <string>
#include <vector>

#include "vesp/viscoelastic/diagnostics.hpp"

namespace vesp {

struct RunConfig {
    double T = 1.0;
    double dt = 1e-2;
    int cadence = 10;         // diagnostics every cadence-th step (and the last)
    bool store_states = true;
};

struct SimRun {
    std::vector<DiagnosticsRow> rows;
    TimeSeries<SimState> states;  // states at diagnostic times
    bool aborted = false;
    std::string abort_reason;
    double abort_time = 0.0;
    int steps = 0;
    double max_div = 0.0;         // worst div residual over all steps

    const SimState& final_state() const { return states.snapshots.back(); }
};

/// Runs the system to T. A run that leaves the admissible regime stops early
/// with `aborted` set; the rows and states up to that point are kept.
inline SimRun simulate(const SimState& initial, const SimConfig& cfg, const RunConfig& rc) {
    const Grid& g = initial.grid();
    require(rc.cadence >= 1, "cadence must be >= 1");
    const int steps = step_count(rc.T, rc.dt);
    const double h = steps > 0 ? rc.T / steps : 0.0;

    SimRun run;
    YAccumulator acc(g.dim, cfg.mu);
    SimState s = project_state(initial, cutoff_radius(g, cfg));
    s.grad_pi = pressure_gradient(s, cfg);

    auto record = [&](const SimState& st) {
        DiagnosticsRow row = invariants_report(st, cfg);
        acc.fill(row);
        run.rows.push_back(row);
        if (rc.store_states || run.states.size() < 2) {
            run.states.push(st.t, st);
        } else {
            run.states.times.back() = st.t;
            run.states.snapshots.back() = st;
        }
        if (row.det > cfg.det_abort) {
            run.aborted = true;
            run.abort_reason = "det residual " + std::to_string(row.det) + " exceeds " + std::to_string(cfg.det_abort);
            run.abort_time = st.t;
        }
    };
    acc.add(s);
    record(s);
    for (int n = 0; n < steps && !run.aborted; ++n) {
        const bool diag = (n + 1) % rc.cadence == 0 || n + 1 == steps;
        try {
            s = step(s, h, cfg, diag);
            s.t = (n + 1) * h;
        } catch (const NumericalAbort& e) {
            run.aborted = true;
            run.abort_reason = e.what();
        } catch (const NonconvergenceError& e) {
            run.aborted = true;
            run.abort_reason = e.what();
        } catch (const PreconditionError& e) {
            run.aborted = true;
            run.abort_reason = e.what();
        }
        if (run.aborted) {
            run.abort_time = n * h;
            break;
        }
        run.steps = n + 1;
        run.max_div = std::max(run.max_div, div_residual(s.u));
        acc.add(s);
        if (diag) {
            record(s);
        }
    }
    return run;
}

}  // namespace vesp

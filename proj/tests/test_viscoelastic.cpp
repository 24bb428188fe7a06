#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "vesp/initial_data.hpp"
#include "vesp/viscoelastic/experiments.hpp"
#include "vesp/viscoelastic/reformulation.hpp"

using namespace vesp;

namespace {

Spectrum wave(const Grid& g, double (*fn)(double), int k0, int k1, double amp = 1.0) {
    return forward(sample(g, [&](const Point& x) { return amp * fn(k0 * x[0] + k1 * x[1]); }));
}
double cos_(double x) { return std::cos(x); }
double sin_(double x) { return std::sin(x); }

SimState small_state(const Grid& g, double amp, std::uint64_t seed = 3) {
    DataSpec spec;
    spec.seed = seed;
    spec.amplitude = amp;
    spec.q_hi = g.n >= 64 ? 2 : 1;
    return admissible_state(g, spec);
}

double state_distance(const SimState& x, const SimState& y) {
    return std::sqrt(std::pow(l2_norm(x.a - y.a), 2) + std::pow(l2_norm(x.u - y.u), 2) +
                     std::pow(l2_norm(x.E - y.E), 2));
}

SimState run_to(const SimState& s0, const SimConfig& cfg, double T, double dt) {
    SimState s = s0;
    const int n = step_count(T, dt);
    for (int k = 0; k < n; ++k) s = step(s, T / n, cfg, false);
    return s;
}

}  // namespace

// --- rest state and trivial cases ---------------------------------------------

TEST(Rest, RightHandSideVanishes) {
    const Grid g{2, 32};
    const Tendency k = rhs(rest_state(g), {});
    EXPECT_EQ(l2_norm(k.a), 0.0);
    EXPECT_EQ(l2_norm(k.u), 0.0);
    EXPECT_EQ(l2_norm(k.E), 0.0);
    EXPECT_EQ(l2_norm(k.grad_pi), 0.0);
}

TEST(Rest, StepKeepsRestAndZeroStepIsIdentity) {
    const Grid g{2, 32};
    const SimState r = step(rest_state(g), 0.1, {});
    EXPECT_EQ(state_distance(r, rest_state(g)), 0.0);
    EXPECT_DOUBLE_EQ(r.t, 0.1);
    const SimState s = small_state(g, 1e-2);
    const SimState same = step(s, 0.0, {});
    EXPECT_EQ(state_distance(same, s), 0.0);
    EXPECT_EQ(same.t, s.t);
}

TEST(Rest, ZeroDataGivesZeroDiagnostics) {
    const Grid g{2, 32};
    const SimRun run = simulate(rest_state(g), {}, {1.0, 0.1, 2});
    ASSERT_FALSE(run.aborted);
    ASSERT_EQ(run.rows.size(), 6u);
    for (const auto& r : run.rows) {
        EXPECT_EQ(r.div_u, 0.0);
        EXPECT_EQ(r.det, 0.0);
        EXPECT_EQ(r.div_ET, 0.0);
        EXPECT_EQ(r.compat, 0.0);
        EXPECT_EQ(r.Y, 0.0);
        EXPECT_EQ(r.energy, 0.0);
    }
}

// --- right-hand side ------------------------------------------------------------

// With a = 0 and E = 0 the velocity tendency is Navier-Stokes. The oracle
// uses the Lamb form u . grad u = grad |u|^2/2 + omega (-u_2, u_1).
TEST(Rhs, ReducesToNavierStokes) {
    const Grid g{2, 32};
    const double mu = 0.7;
    SimState s = rest_state(g);
    s.u = leray(random_vector_spectrum(g, 21, {0, 2, -1.5}));
    SimConfig cfg;
    cfg.mu = mu;
    const Tendency k = rhs(s, cfg);
    const VectorField u = inverse(s.u);
    const TensorSpectrum gu = grad(s.u);
    const Field w = inverse(gu(1, 0) - gu(0, 1));
    auto lamb = make_vector<Spectrum>(g);
    lamb[0] = dealiased_product(w, u[1] * -1.0);
    lamb[1] = dealiased_product(w, u[0]);
    const VectorSpectrum oracle = laplacian(s.u) * mu - leray(lamb);
    EXPECT_LE(l2_norm(k.u - oracle), 1e-10 * l2_norm(oracle));
    EXPECT_EQ(l2_norm(k.a), 0.0);
    // E is driven by grad u alone.
    EXPECT_LE(l2_norm(k.E - grad(s.u)), 1e-14 * l2_norm(grad(s.u)));
}

// E = eps cos(x) M with u = 0: G = -eps M e_1 sin x - (eps^2/2) (M M^T) e_1 sin 2x,
// and the Leray projector keeps the second component.
TEST(Rhs, SingleModeElasticForce) {
    const Grid g{2, 32};
    const double eps = 0.05;
    const double M[2][2] = {{0.3, -0.8}, {0.6, 0.2}};
    SimState s = rest_state(g);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) s.E(i, j) = wave(g, cos_, 1, 0, eps * M[i][j]);
    const Tendency k = rhs(s, {});
    const double mmt10 = M[1][0] * M[0][0] + M[1][1] * M[0][1];
    const Spectrum expect1 = wave(g, sin_, 1, 0, -eps * M[1][0]) + wave(g, sin_, 2, 0, -0.5 * eps * eps * mmt10);
    EXPECT_LE(l2_norm(k.u[0]), 1e-14);
    EXPECT_LE(l2_norm(k.u[1] - expect1), 1e-13);
    EXPECT_EQ(l2_norm(k.a), 0.0);
    EXPECT_EQ(l2_norm(k.E), 0.0);
}

TEST(Rhs, DensityFloorIsEnforced) {
    const Grid g{2, 32};
    SimState s = rest_state(g);
    s.a = wave(g, cos_, 1, 1, 0.95);
    EXPECT_THROW(rhs(s, {}), NumericalAbort);
}

TEST(Rhs, FriedrichsBallIsInvariant) {
    const Grid g{2, 32};
    SimConfig cfg;
    cfg.n_cut = 6.0;
    const SimState s0 = project_state(small_state(g, 2e-2), cfg.n_cut);
    SimState s = s0;
    for (int k = 0; k < 5; ++k) s = step(s, 0.02, cfg);
    const auto& r = s.a.geo().radius;
    double outside = 0.0;
    for (std::size_t m = 0; m < r.size(); ++m) {
        if (r[m] <= cfg.n_cut) continue;
        outside += std::norm(s.a[m]);
        for (const auto& c : s.u) outside += std::norm(c[m]);
        for (const auto& c : s.E) outside += std::norm(c[m]);
    }
    EXPECT_EQ(outside, 0.0);
    EXPECT_GT(state_distance(s, s0), 0.0);
}

// --- stepping ---------------------------------------------------------------------

// a = 0 and E = 0 do not stay zero (grad u drives E), so convergence is
// measured against a fine-step reference of the full system.
TEST(Step, FourthOrderAgainstFineReference) {
    const Grid g{2, 32};
    SimState s0 = rest_state(g);
    s0.u = leray(random_vector_spectrum(g, 5, {0, 1, -1.5}));
    s0.u *= 0.5 / max_speed(inverse(s0.u));
    SimConfig cfg;
    cfg.mu = 0.5;
    const double T = 0.5;
    const SimState ref = run_to(s0, cfg, T, 0.5 / 256);
    const double e1 = state_distance(run_to(s0, cfg, T, 0.5 / 16), ref);
    const double e2 = state_distance(run_to(s0, cfg, T, 0.5 / 32), ref);
    const double order = std::log2(e1 / e2);
    EXPECT_GE(order, 3.5) << e1 << " " << e2;
}

TEST(Step, SelfConvergenceOnAdmissibleData) {
    const Grid g{2, 32};
    const SimState s0 = small_state(g, 5e-2);
    const SimConfig cfg;
    const double T = 1.0;
    const SimState y1 = run_to(s0, cfg, T, 0.1);
    const SimState y2 = run_to(s0, cfg, T, 0.05);
    const SimState y4 = run_to(s0, cfg, T, 0.025);
    const double order = std::log2(state_distance(y1, y2) / state_distance(y2, y4));
    EXPECT_GE(order, 3.0);
}

TEST(Step, CflCapIsEnforced) {
    const Grid g{2, 32};
    SimState s = rest_state(g);
    s.u = leray(random_vector_spectrum(g, 5, {0, 1, -1.5}));
    s.u *= 10.0 / max_speed(inverse(s.u));
    EXPECT_THROW(step(s, 0.1, {}), ConfigError);
}

// --- invariants -----------------------------------------------------------------

TEST(Invariants, ZeroDeformation) {
    const Grid g{2, 32};
    const DiagnosticsRow r = invariants_report(rest_state(g), {});
    EXPECT_EQ(r.det, 0.0);
    EXPECT_EQ(r.div_ET, 0.0);
    EXPECT_EQ(r.compat, 0.0);
}

TEST(Invariants, ConstantStretchHasKnownDeterminant) {
    const Grid g{2, 16};
    auto E = make_tensor<Spectrum>(g);
    E(0, 0) = forward(sample(g, [](const Point&) { return 1.0; }));
    E(0, 1) = forward(sample(g, [](const Point&) { return 0.5; }));
    // det [[2, 0.5], [0, 1]] = 2
    EXPECT_NEAR(det_residual(E), 1.0, 1e-14);
    EXPECT_LE(div_ET_residual(E), 1e-14);
    EXPECT_LE(compat_residual(E), 1e-14);
}

TEST(Invariants, GeneratedDeformationIsAdmissibleAndTransposeIsNot) {
    const Grid g{2, 64};
    DataSpec spec;
    spec.amplitude = 1e-2;
    const Deformation d = generate_deformation_for_norm(g, spec, 5e-2);
    const SimState s{0.0, Spectrum(g), make_vector<Spectrum>(g), d.E, make_vector<Spectrum>(g)};
    const DiagnosticsRow r = invariants_report(s, {});
    EXPECT_LE(r.det, 1e-8);
    EXPECT_LE(r.div_ET, 1e-8);
    EXPECT_LE(r.compat, 1e-8);

    auto Et = d.E;
    std::swap(Et(0, 1), Et(1, 0));
    EXPECT_GT(compat_residual(Et), 1e3 * r.compat);
    EXPECT_GT(div_ET_residual(Et), 1e3 * r.div_ET);
}

// --- runs -----------------------------------------------------------------------

TEST(Simulate, SmallDataKeepsConstraints) {
    const Grid g{2, 32};
    const SimRun run = simulate(small_state(g, 1e-2), {}, {2.0, 0.02, 10});
    ASSERT_FALSE(run.aborted) << run.abort_reason;
    EXPECT_EQ(run.steps, 100);
    EXPECT_LE(run.max_div, 1e-10);
    for (const auto& r : run.rows) {
        EXPECT_LE(r.det, 1e-6);
        EXPECT_LE(r.div_ET, 1e-6);
        EXPECT_LE(r.compat, 1e-6);
    }
    for (std::size_t i = 1; i < run.rows.size(); ++i) EXPECT_GE(run.rows[i].Y, run.rows[i - 1].Y);
    EXPECT_LE(run.rows.back().Y, 3.0 * alpha(run.states.snapshots.front(), 1.0));
}

// Kinetic plus elastic energy dissipates at rate mu ||grad u||^2 for any a.
TEST(Simulate, EnergyIsNonincreasing) {
    const Grid g{2, 32};
    const SimRun run = simulate(small_state(g, 3e-2), {}, {1.0, 0.01, 1});
    ASSERT_FALSE(run.aborted);
    const double e0 = run.rows.front().energy;
    EXPECT_GT(e0, 0.0);
    for (std::size_t i = 1; i < run.rows.size(); ++i)
        EXPECT_LE(run.rows[i].energy - run.rows[i - 1].energy, 1e-10 * e0);
    EXPECT_LT(run.rows.back().energy, e0);
}

TEST(Simulate, DeterminantAbortLeavesMarker) {
    const Grid g{2, 32};
    SimConfig cfg;
    cfg.det_abort = 1e-14;
    const SimRun run = simulate(small_state(g, 3e-2), cfg, {1.0, 0.05, 1});
    EXPECT_TRUE(run.aborted);
    EXPECT_NE(run.abort_reason.find("det residual"), std::string::npos);
    EXPECT_LT(run.steps, 20);
    EXPECT_FALSE(run.rows.empty());
}

TEST(Simulate, StateStorageCanBeDropped) {
    const Grid g{2, 32};
    RunConfig rc{0.5, 0.05, 2, false};
    const SimRun run = simulate(small_state(g, 1e-2), {}, rc);
    ASSERT_EQ(run.states.size(), 2u);
    EXPECT_DOUBLE_EQ(run.final_state().t, 0.5);
    EXPECT_EQ(run.rows.size(), 6u);
}

// --- d reformulation ---------------------------------------------------------------

TEST(Reformulation, SingleModeSymbolIdentity) {
    const Grid g{2, 32};
    SimState s = rest_state(g);
    s.u[0] = wave(g, sin_, 0, 2, 0.1);
    const DReformulation d = d_reformulation(s, {});
    EXPECT_EQ(l2_norm(d.R), 0.0);
    EXPECT_LE(d.E_residual, 1e-12);
    EXPECT_LE(d.recovery_residual, 1e-12);
    // Lambda d = -grad u exactly.
    auto lam = map_components(d.d, [](const Spectrum& c) { return lambda_pow(c, 1.0); });
    EXPECT_LE(l2_norm(lam + grad(s.u)), 1e-14);
}

TEST(Reformulation, RestStateIsZero) {
    const Grid g{2, 32};
    const DReformulation d = d_reformulation(rest_state(g), {});
    EXPECT_EQ(l2_norm(d.d), 0.0);
    EXPECT_EQ(l2_norm(d.H), 0.0);
    EXPECT_EQ(l2_norm(d.R), 0.0);
    EXPECT_EQ(d.E_residual, 0.0);
    EXPECT_EQ(d.d_residual, 0.0);
}

TEST(Reformulation, AdmissibleStateSatisfiesDampedSystem) {
    const Grid g{2, 64};
    const SimState s = small_state(g, 2e-2, 8);
    const DReformulation d = d_reformulation(s, {});
    EXPECT_LE(d.recovery_residual, 1e-10);
    EXPECT_LE(d.E_residual, 1e-8);
    EXPECT_LE(d.d_residual, 1e-6);
    EXPECT_GT(l2_norm(d.H), 0.0);
}

TEST(Reformulation, BrokenCompatibilityShowsInDResidual) {
    const Grid g{2, 64};
    SimState s = small_state(g, 2e-2, 8);
    std::swap(s.E(0, 1), s.E(1, 0));
    const DReformulation d = d_reformulation(s, {});
    EXPECT_LE(d.E_residual, 1e-8);
    EXPECT_GT(d.d_residual, 1e-3);
}

// --- sweep, bootstrap, ladder ----------------------------------------------------------

TEST(Sweep, ZeroAmplitudeHasZeroRatioAndSeedsAgree) {
    const Grid g{2, 32};
    DataSpec base;
    base.q_hi = 1;
    const auto rows = small_data_sweep(g, {0.0, 1e-2}, {1, 2}, base, {}, {2.0, 0.02, 20});
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0].ratio, 0.0);
    EXPECT_EQ(rows[2].ratio, 0.0);
    EXPECT_FALSE(rows[1].aborted);
    EXPECT_GT(rows[1].ratio, 0.0);
    EXPECT_NEAR(rows[1].ratio / rows[3].ratio, 1.0, 0.5);
    EXPECT_THROW(small_data_sweep(g, {1e-2, 1e-3}, {1}, DataSpec{}, {}, {}), PreconditionError);
}

TEST(Bootstrap, ZeroDataHoldsTrivially) {
    const Grid g{2, 32};
    const SimRun run = simulate(rest_state(g), {}, {0.5, 0.05, 2});
    const BootstrapReport rep = bootstrap_monitor(run, {});
    EXPECT_TRUE(rep.all_hold());
    ASSERT_EQ(rep.conditions.size(), 4u);
    for (const auto& c : rep.conditions)
        for (bool h : c.holds) EXPECT_TRUE(h);
}

TEST(Bootstrap, SmallDataHoldsAndTightBoundIsReported) {
    const Grid g{2, 32};
    const SimRun run = simulate(small_state(g, 1e-2), {}, {2.0, 0.02, 10});
    const BootstrapReport rep = bootstrap_monitor(run, {});
    EXPECT_TRUE(rep.all_hold());
    for (const auto& c : rep.conditions) EXPECT_GE(c.min_margin, 0.0) << c.name;
    EXPECT_GE(rep.N0, 1);

    BootstrapConfig tight;
    tight.lambda = 1e-6;
    const BootstrapReport r2 = bootstrap_monitor(run, {}, tight);
    EXPECT_FALSE(r2.all_hold());
    EXPECT_GT(r2.first_violation, 0.0);
}

TEST(Ladder, CauchyDifferencesShrink) {
    const Grid g{2, 64};
    const SimState s0 = small_state(g, 5e-2);
    const auto rows = friedrichs_ladder(s0, {}, {0.5, 0.01, 50}, {4.0, 8.0, 16.0});
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_GT(rows[0].difference, 0.0);
    EXPECT_LT(rows[1].difference, rows[0].difference);
}

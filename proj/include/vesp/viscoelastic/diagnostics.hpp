#pragma once

#include <cmath>
#include <vector>

#include "vesp/besov.hpp"
#include "vesp/viscoelastic/dynamics.hpp"

namespace vesp {

/// One line of the run log. The norm columns hold running time-space values
/// in runs and instantaneous values in a single-state report.
struct DiagnosticsRow {
    double t = 0.0;
    double div_u = 0.0;    // ||div u|| / ||grad u||
    double det = 0.0;      // max |det(I + E) - 1|
    double div_ET = 0.0;   // ||div E^T||
    double compat = 0.0;   // ||d_m E_ij - d_j E_im - E_lj d_l E_im + E_lm d_l E_ij||
    double a_norm = 0.0;   // a in B~_mu^{N/2, inf}
    double u_norm = 0.0;   // u in dot B^{N/2 - 1}_{2,1}
    double u_diss = 0.0;   // u in dot B^{N/2 + 1}_{2,1}, integrated in time for runs
    double E_norm = 0.0;   // E in B~_mu^{N/2, inf}
    double Y = 0.0;
    double kinetic = 0.0;  // (1/2) int |u|^2 / (1 + a)
    double energy = 0.0;   // kinetic + int tr E + (1/2) int |E|^2
};

/// Norms entering the small-data functional.
struct YSpecs {
    NormSpec a, u, u_diss, E;
};

inline YSpecs y_specs(int dim, double mu) {
    const double h = 0.5 * dim;
    return {NormSpec{h, inf, mu, Flavor::hybrid, inf}, NormSpec{h - 1.0, 1.0, 1.0, Flavor::homogeneous, inf},
            NormSpec{h + 1.0, 1.0, 1.0, Flavor::homogeneous, 1.0}, NormSpec{h, inf, mu, Flavor::hybrid, inf}};
}

/// Block profile of the mean-free part; homogeneous blocks never see the mean.
template <class S>
BlockProfile mean_free_profile(S s) {
    if constexpr (std::is_same_v<S, Spectrum>) {
        s[0] = 0.0;
    } else {
        for (auto& c : s) c[0] = 0.0;
    }
    return block_profile(s);
}

inline double det_residual(const TensorField& E) {
    const int d = E.dim();
    double m = 0.0;
    for (std::size_t p = 0; p < E[0].size(); ++p) {
        auto F = [&](int i, int j) { return E(i, j)[p] + (i == j ? 1.0 : 0.0); };
        double det;
        if (d == 2) {
            det = F(0, 0) * F(1, 1) - F(0, 1) * F(1, 0);
        } else {
            det = F(0, 0) * (F(1, 1) * F(2, 2) - F(1, 2) * F(2, 1)) - F(0, 1) * (F(1, 0) * F(2, 2) - F(1, 2) * F(2, 0)) +
                  F(0, 2) * (F(1, 0) * F(2, 1) - F(1, 1) * F(2, 0));
        }
        m = std::max(m, std::abs(det - 1.0));
    }
    return m;
}

inline double det_residual(const TensorSpectrum& E) { return det_residual(inverse(E)); }

inline double div_ET_residual(const TensorSpectrum& E) { return l2_norm(div_cols(E)); }

/// L^2 norm, from grid values, of the curl-type compatibility defect of E.
inline double compat_residual(const TensorSpectrum& E) {
    const Grid& g = E.grid();
    const int d = g.dim;
    const TensorField Ep = inverse(E);
    std::vector<TensorField> gE;
    for (int l = 0; l < d; ++l)
        gE.push_back(inverse(map_components(E, [l](const Spectrum& c) { return derivative(c, l); })));
    double acc = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int m = 0; m < d; ++m) {
                if (m == j) continue;
                for (std::size_t p = 0; p < Ep[0].size(); ++p) {
                    double v = gE[m](i, j)[p] - gE[j](i, m)[p];
                    for (int l = 0; l < d; ++l) v -= Ep(l, j)[p] * gE[l](i, m)[p] - Ep(l, m)[p] * gE[l](i, j)[p];
                    acc += v * v;
                }
            }
    return std::sqrt(acc * g.cell_volume());
}

inline double kinetic_energy(const SimState& s) {
    const Field a = inverse(s.a);
    const VectorField u = inverse(s.u);
    double acc = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) {
        double q = 0.0;
        for (const auto& c : u) q += c[p] * c[p];
        acc += 0.5 * q / (1.0 + a[p]);
    }
    return acc * s.grid().cell_volume();
}

/// Kinetic plus elastic energy; the elastic part is (1/2) int |I + E|^2 up to
/// the constant N |Omega| / 2.
inline double total_energy(const SimState& s) {
    const Grid& g = s.grid();
    double el = 0.0;
    for (int i = 0; i < g.dim; ++i) el += std::real(s.E(i, i)[0]) * std::sqrt(g.volume());
    for (const auto& c : s.E) el += 0.5 * l2_norm_squared(c);
    return kinetic_energy(s) + el;
}

/// Constraint residuals and instantaneous norms of one state.
inline DiagnosticsRow invariants_report(const SimState& s, const SimConfig& cfg) {
    const YSpecs ys = y_specs(s.grid().dim, cfg.mu);
    DiagnosticsRow row;
    row.t = s.t;
    row.div_u = div_residual(s.u);
    row.det = det_residual(s.E);
    row.div_ET = div_ET_residual(s.E);
    row.compat = compat_residual(s.E);
    row.a_norm = besov_norm(mean_free_profile(s.a), ys.a);
    row.u_norm = besov_norm(mean_free_profile(s.u), ys.u);
    NormSpec sd = ys.u_diss;
    sd.rho = inf;
    row.u_diss = besov_norm(mean_free_profile(s.u), sd);
    row.E_norm = besov_norm(mean_free_profile(s.E), ys.E);
    row.Y = row.a_norm + row.u_norm + row.E_norm;
    row.kinetic = kinetic_energy(s);
    row.energy = total_energy(s);
    return row;
}

/// Running Chemin-Lerner sup norm: each block keeps its largest value so far.
class RunningSup {
public:
    explicit RunningSup(NormSpec spec) : spec_(spec) {}
    void add(const BlockProfile& p) {
        const auto t = detail::terms(p, spec_);
        if (sup_.empty()) {
            coef_.resize(t.size());
            sup_.assign(t.size(), 0.0);
        }
        for (std::size_t k = 0; k < t.size(); ++k) {
            coef_[k] = t[k].coef;
            sup_[k] = std::max(sup_[k], t[k].value);
        }
    }
    double value() const {
        std::vector<double> v(sup_.size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = coef_[k] * sup_[k];
        return lr_sum(v, detail::outer_exponent(spec_));
    }

private:
    NormSpec spec_;
    std::vector<double> coef_, sup_;
};

/// Y(t) accumulated along a trajectory, one state at a time.
class YAccumulator {
public:
    YAccumulator(int dim, double mu)
        : specs_(y_specs(dim, mu)), a_(specs_.a), u_(specs_.u), E_(specs_.E) {}

    void add(const SimState& s) {
        a_.add(mean_free_profile(s.a));
        const BlockProfile pu = mean_free_profile(s.u);
        u_.add(pu);
        NormSpec sd = specs_.u_diss;
        sd.rho = inf;
        const double diss = besov_norm(pu, sd);
        if (has_last_) diss_ += 0.5 * (s.t - last_t_) * (diss + last_diss_);
        has_last_ = true;
        last_t_ = s.t;
        last_diss_ = diss;
        E_.add(mean_free_profile(s.E));
    }
    void fill(DiagnosticsRow& row) const {
        row.a_norm = a_.value();
        row.u_norm = u_.value();
        row.u_diss = diss_;
        row.E_norm = E_.value();
        row.Y = row.a_norm + row.u_norm + row.u_diss + row.E_norm;
    }

private:
    YSpecs specs_;
    RunningSup a_, u_, E_;
    double diss_ = 0.0;
    bool has_last_ = false;
    double last_t_ = 0.0, last_diss_ = 0.0;
};

/// alpha = ||a0||_{B~^{N/2,inf}} + ||u0||_{dot B^{N/2-1}_{2,1}} + ||E0||_{B~^{N/2,inf}}.
inline double alpha(const SimState& s, double mu) {
    const YSpecs ys = y_specs(s.grid().dim, mu);
    return besov_norm(mean_free_profile(s.a), ys.a) + besov_norm(mean_free_profile(s.u), ys.u) +
           besov_norm(mean_free_profile(s.E), ys.E);
}

}  // namespace vesp

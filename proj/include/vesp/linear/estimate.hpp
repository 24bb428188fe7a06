#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "vesp/besov.hpp"

namespace vesp {

/// Outcome of one a-priori estimate check with an empirically fitted constant.
struct EstimateReport {
    std::string name;
    double lhs = 0.0;
    std::map<std::string, double> rhs_components;
    double ratio = 0.0;     // lhs / sum(rhs_components), 0 when the sum vanishes
    double fitted_C = 0.0;  // smallest C making the inequality hold on every snapshot
    double c_max = 1e3;
    bool pass = false;
    std::map<std::string, double> info;

    void finish() {
        double sum = 0.0;
        for (const auto& [k, v] : rhs_components) sum += v;
        ratio = sum > 0.0 ? lhs / sum : 0.0;
        pass = std::isfinite(fitted_C) && fitted_C <= c_max;
    }
};

/// Smallest C in [0, 1e12] with holds(C) true, assuming holds is monotone in
/// C. Returns +inf when no such C exists.
inline double fit_constant(const std::function<bool(double)>& holds) {
    if (holds(0.0)) return 0.0;
    double hi = 1e-12;
    while (!holds(hi)) {
        hi *= 4.0;
        if (hi > 1e12) return inf;
    }
    double lo = hi / 4.0;
    if (hi == 1e-12) lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-10 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (holds(mid) ? hi : lo) = mid;
    }
    return hi;
}

/// Cumulative trapezoid integral of g on the clock t.
inline std::vector<double> cumulative_integral(const std::vector<double>& t, const std::vector<double>& g) {
    std::vector<double> out(t.size(), 0.0);
    for (std::size_t i = 1; i < t.size(); ++i) out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (g[i - 1] + g[i]);
    return out;
}

/// Running Chemin-Lerner norm over [0, t_i] for every snapshot i.
inline std::vector<double> running_time_space_norm(const ProfileSeries& s, const NormSpec& spec) {
    std::vector<double> out;
    ProfileSeries head;
    for (std::size_t i = 0; i < s.size(); ++i) {
        head.push(s.times[i], s.snapshots[i]);
        if (!std::isinf(spec.rho) && head.size() < 2) {
            out.push_back(0.0);
            continue;
        }
        out.push_back(time_space_norm(head, spec));
    }
    return out;
}

/// Gronwall-form bound e^{C V(t)} (R0 + int_0^t e^{-C V} g) on the series clock.
inline std::vector<double> gronwall_bound(double C, const std::vector<double>& t, const std::vector<double>& V,
                                          double R0, const std::vector<double>& g) {
    std::vector<double> integrand(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) integrand[i] = std::exp(-C * V[i]) * g[i];
    const auto acc = cumulative_integral(t, integrand);
    std::vector<double> out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = std::exp(C * V[i]) * (R0 + acc[i]);
    return out;
}

inline bool dominated(const std::vector<double>& lhs, const std::vector<double>& rhs) {
    for (std::size_t i = 0; i < lhs.size(); ++i)
        if (lhs[i] > rhs[i] * (1.0 + 1e-12) + 1e-300) return false;
    return true;
}

}  // namespace vesp

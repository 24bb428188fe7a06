#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "vesp/dyadic.hpp"

namespace vesp {

inline constexpr double inf = std::numeric_limits<double>::infinity();

/// L^2 norms of the dyadic blocks of one field (or of a vector/tensor of
/// fields, blocks combined in l^2 over components).
struct BlockProfile {
    int q_min = 0;
    int q_max = -1;
    std::vector<double> block;  // ||Delta_q f||, q = q_min..q_max
    double low = 0.0;           // ||S_0 f|| (nonhomogeneous low block)
    double mean = 0.0;          // ||mean part||
    double l2 = 0.0;            // ||f||

    double at(int q) const {
        if (q < q_min || q > q_max) return 0.0;
        return block[static_cast<std::size_t>(q - q_min)];
    }
};

namespace detail {

inline void accumulate_profile(const Spectrum& s, const BlockTable& t, std::vector<double>& blk,
                               double& low, double& mean, double& l2) {
    const auto& w = s.geo().weight;
    for (std::size_t m = 0; m < s.size(); ++m) {
        const double e = w[m] * std::norm(s[m]);
        l2 += e;
        low += t.chi0[m] * t.chi0[m] * e;
        if (m == 0) {
            mean += e;
            continue;
        }
        const auto i = static_cast<std::size_t>(t.lo[m] - t.qmin);
        if (i < blk.size()) blk[i] += t.w_lo[m] * t.w_lo[m] * e;
        if (i + 1 < blk.size()) blk[i + 1] += t.w_hi[m] * t.w_hi[m] * e;
    }
}

}  // namespace detail

template <class It>
BlockProfile block_profile(It first, It last, const CutoffFamily& fam = {}) {
    BlockProfile p;
    if (first == last) return p;
    const auto t = block_table(first->grid(), fam);
    p.q_min = t->qmin;
    p.q_max = t->qmax;
    std::vector<double> blk(static_cast<std::size_t>(t->qmax - t->qmin + 1), 0.0);
    double low = 0.0, mean = 0.0, l2 = 0.0;
    for (auto it = first; it != last; ++it) detail::accumulate_profile(*it, *t, blk, low, mean, l2);
    for (double& b : blk) b = std::sqrt(b);
    p.block = std::move(blk);
    p.low = std::sqrt(low);
    p.mean = std::sqrt(mean);
    p.l2 = std::sqrt(l2);
    return p;
}

inline BlockProfile block_profile(const Spectrum& s, const CutoffFamily& fam = {}) {
    return block_profile(&s, &s + 1, fam);
}
inline BlockProfile block_profile(const Components<Spectrum>& v, const CutoffFamily& fam = {}) {
    return block_profile(v.begin(), v.end(), fam);
}
inline BlockProfile block_profile(const Field& f) { return block_profile(forward(f)); }
inline BlockProfile block_profile(const Components<Field>& v) { return block_profile(forward(v)); }

/// Which norm to evaluate. r and rho may be infinite.
struct NormSpec {
    double s = 0.0;
    double r = 1.0;
    double mu = 1.0;
    Flavor flavor = Flavor::homogeneous;
    double rho = inf;
};

inline std::string flavor_name(Flavor f) {
    switch (f) {
        case Flavor::nonhomogeneous: return "nonhomogeneous";
        case Flavor::homogeneous: return "homogeneous";
        case Flavor::hybrid: return "hybrid";
    }
    return "?";
}

/// l^r norm of a finite nonnegative sequence.
inline double lr_sum(const std::vector<double>& v, double r) {
    if (v.empty()) return 0.0;
    if (std::isinf(r)) return *std::max_element(v.begin(), v.end());
    if (r == 1.0) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const double top = *std::max_element(v.begin(), v.end());
    if (top == 0.0) return 0.0;
    double s = 0.0;
    for (double x : v) s += std::pow(x / top, r);
    return top * std::pow(s, 1.0 / r);
}

namespace detail {

/// One term of a block sum: coefficient times the block norm, indexed so that
/// series of profiles can be combined block by block.
struct Term {
    double coef;
    double value;
};

inline void require_mean_zero(const BlockProfile& p) {
    if (p.mean > 1e-10 * p.l2)
        throw PreconditionError("homogeneous and hybrid norms need a mean-zero field");
}

inline void validate(const NormSpec& spec) {
    if (!(spec.r >= 1.0)) throw PreconditionError("summation index r must be >= 1");
    if (!(spec.rho >= 1.0)) throw PreconditionError("time exponent rho must be >= 1");
    if (spec.flavor == Flavor::hybrid && !(spec.mu > 0.0))
        throw PreconditionError("hybrid norms need mu > 0");
}

inline std::vector<Term> terms(const BlockProfile& p, const NormSpec& spec) {
    std::vector<Term> out;
    if (spec.flavor == Flavor::nonhomogeneous) {
        out.push_back({std::exp2(-spec.s), p.low});
        for (int q = std::max(0, p.q_min); q <= p.q_max; ++q)
            out.push_back({std::exp2(q * spec.s), p.at(q)});
        return out;
    }
    require_mean_zero(p);
    for (int q = p.q_min; q <= p.q_max; ++q) {
        double c = std::exp2(q * spec.s);
        if (spec.flavor == Flavor::hybrid) {
            const double e = std::isinf(spec.r) ? 1.0 : 1.0 - 2.0 / spec.r;
            c *= std::pow(std::max(spec.mu, std::exp2(-q)), e);
        }
        out.push_back({c, p.at(q)});
    }
    return out;
}

/// Hybrid norms are l^1 sums whatever r is; r only enters the weight.
inline double outer_exponent(const NormSpec& spec) {
    return spec.flavor == Flavor::hybrid ? 1.0 : spec.r;
}

}  // namespace detail

inline double besov_norm(const BlockProfile& p, const NormSpec& spec) {
    detail::validate(spec);
    std::vector<double> v;
    for (const auto& t : detail::terms(p, spec)) v.push_back(t.coef * t.value);
    return lr_sum(v, detail::outer_exponent(spec));
}

template <class F>
double besov_norm(const F& f, const NormSpec& spec) {
    return besov_norm(block_profile(f), spec);
}

/// Sum over q of 2^{qs} max{mu, 2^{-q}}^{1-2/r} ||Delta_q f||.
template <class F>
double hybrid_norm(const F& f, double s, double r, double mu) {
    return besov_norm(block_profile(f), NormSpec{s, r, mu, Flavor::hybrid, inf});
}

template <class F>
double homogeneous_norm(const F& f, double s, double r = 1.0) {
    return besov_norm(block_profile(f), NormSpec{s, r, 1.0, Flavor::homogeneous, inf});
}

template <class F>
double nonhomogeneous_norm(const F& f, double s, double r = 1.0) {
    return besov_norm(block_profile(f), NormSpec{s, r, 1.0, Flavor::nonhomogeneous, inf});
}

/// Snapshots of one quantity at increasing times.
template <class T>
struct TimeSeries {
    std::vector<double> times;
    std::vector<T> snapshots;

    void push(double t, T value) {
        if (!times.empty() && !(t > times.back()))
            throw PreconditionError("time series timestamps must increase");
        times.push_back(t);
        snapshots.push_back(std::move(value));
    }
    std::size_t size() const { return times.size(); }
    bool empty() const { return times.empty(); }
};

using ProfileSeries = TimeSeries<BlockProfile>;

template <class T>
ProfileSeries profile_series(const TimeSeries<T>& s) {
    ProfileSeries out;
    for (std::size_t i = 0; i < s.size(); ++i) out.push(s.times[i], block_profile(s.snapshots[i]));
    return out;
}

/// Restriction of a series to timestamps <= T.
template <class T>
TimeSeries<T> truncate(const TimeSeries<T>& s, double T_end) {
    TimeSeries<T> out;
    for (std::size_t i = 0; i < s.size() && s.times[i] <= T_end; ++i)
        out.push(s.times[i], s.snapshots[i]);
    return out;
}

/// (int_0^T g^rho dt)^{1/rho} by the trapezoid rule, or sup g for rho = inf.
inline double time_norm(const std::vector<double>& t, const std::vector<double>& g, double rho) {
    if (std::isinf(rho)) return g.empty() ? 0.0 : *std::max_element(g.begin(), g.end());
    if (t.size() < 2) throw PreconditionError("time integrals need at least two snapshots");
    double acc = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i)
        acc += 0.5 * (t[i] - t[i - 1]) * (std::pow(g[i - 1], rho) + std::pow(g[i], rho));
    return std::pow(acc, 1.0 / rho);
}

/// Chemin-Lerner norm: each block is measured in L^rho in time before the
/// sum over blocks.
inline double time_space_norm(const ProfileSeries& series, const NormSpec& spec) {
    detail::validate(spec);
    if (series.empty()) return 0.0;
    if (!std::isinf(spec.rho) && series.size() < 2)
        throw PreconditionError("time integrals need at least two snapshots");
    std::vector<std::vector<detail::Term>> per_time;
    for (const auto& p : series.snapshots) per_time.push_back(detail::terms(p, spec));
    const std::size_t nterms = per_time.front().size();
    std::vector<double> v(nterms);
    std::vector<double> g(series.size());
    for (std::size_t k = 0; k < nterms; ++k) {
        for (std::size_t i = 0; i < series.size(); ++i) g[i] = per_time[i][k].value;
        v[k] = per_time.front()[k].coef * time_norm(series.times, g, spec.rho);
    }
    return lr_sum(v, detail::outer_exponent(spec));
}

template <class T>
double time_space_norm(const TimeSeries<T>& series, const NormSpec& spec) {
    return time_space_norm(profile_series(series), spec);
}

/// Plain time integral of a scalar sampled on the series clock.
inline double integrate(const std::vector<double>& t, const std::vector<double>& g) {
    double acc = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) acc += 0.5 * (t[i] - t[i - 1]) * (g[i - 1] + g[i]);
    return acc;
}

}  // namespace vesp

#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "vesp/field.hpp"

namespace vesp {

/// Smooth radial cutoffs: chi equals 1 on [0, 3/4] and 0 beyond 4/3,
/// phi(r) = chi(r/2) - chi(r) lives on [3/4, 8/3] and equals 1 on [4/3, 3/2].
///
/// `distortion` is a test hook: a nonzero value rescales phi and breaks the
/// partition of unity on purpose.
struct CutoffFamily {
    static constexpr double inner = 0.75;
    static constexpr double outer = 4.0 / 3.0;
    double distortion = 0.0;

    static double smoothstep(double t) {
        if (t <= 0.0) return 0.0;
        if (t >= 1.0) return 1.0;
        const double a = std::exp(-1.0 / t);
        const double b = std::exp(-1.0 / (1.0 - t));
        return a / (a + b);
    }
    double chi(double r) const { return 1.0 - smoothstep((r - inner) / (outer - inner)); }
    double phi(double r) const { return (chi(0.5 * r) - chi(r)) * (1.0 + distortion); }

    /// chi(2^{-q} r) and phi(2^{-q} r).
    double chi_q(double r, int q) const { return chi(std::ldexp(r, -q)); }
    double phi_q(double r, int q) const { return phi(std::ldexp(r, -q)); }

    bool operator==(const CutoffFamily&) const = default;
};

/// Homogeneous block range of a grid: blocks q_min..q_max are the ones whose
/// annulus meets a nonzero grid wavevector.
inline int q_min(const Grid& g) {
    return static_cast<int>(std::floor(std::log2(g.unit() * 3.0 / 8.0) + 1e-12)) + 1;
}
inline int q_max(const Grid& g) {
    return static_cast<int>(std::ceil(std::log2(g.max_radius() * 4.0 / 3.0) - 1e-12)) - 1;
}

/// Per-mode block membership. A nonzero mode meets at most two consecutive
/// blocks, lo and lo + 1.
struct BlockTable {
    Grid grid;
    CutoffFamily family;
    int qmin = 0;
    int qmax = 0;
    std::vector<int> lo;
    std::vector<double> w_lo, w_hi;
    std::vector<double> chi0;  // chi(|xi|), the nonhomogeneous low block S_0

    BlockTable(const Grid& g, const CutoffFamily& fam)
        : grid(g), family(fam), qmin(q_min(g)), qmax(q_max(g)) {
        const auto geo = geometry(g);
        const std::size_t m = g.modes();
        lo.assign(m, qmin);
        w_lo.assign(m, 0.0);
        w_hi.assign(m, 0.0);
        chi0.assign(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double r = geo->radius[i];
            chi0[i] = fam.chi(r);
            if (i == 0) continue;
            const int q = static_cast<int>(std::floor(std::log2(r * 3.0 / 8.0))) + 1;
            lo[i] = q;
            w_lo[i] = fam.phi_q(r, q);
            w_hi[i] = fam.phi_q(r, q + 1);
        }
    }

    /// phi_q at mode i.
    double weight(std::size_t i, int q) const {
        if (i == 0) return 0.0;
        if (q == lo[i]) return w_lo[i];
        if (q == lo[i] + 1) return w_hi[i];
        return 0.0;
    }
};

inline std::shared_ptr<const BlockTable> block_table(const Grid& g, const CutoffFamily& fam = {}) {
    static std::mutex mtx;
    static std::map<std::tuple<int, int, double, double, double>, std::shared_ptr<const BlockTable>>
        cache;
    g.validate();
    const auto key = std::make_tuple(g.dim, g.n, g.length, g.dealias_fraction, fam.distortion);
    std::lock_guard lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto t = std::make_shared<const BlockTable>(g, fam);
    cache.emplace(key, t);
    return t;
}

/// The cutoff multipliers evaluated at every mode of a grid.
struct CutoffValues {
    int qmin = 0;
    int qmax = 0;
    std::vector<double> chi;               // chi(xi / 2^{qmin}) per mode
    std::vector<std::vector<double>> phi;  // phi_q per mode, q = qmin..qmax
};

inline CutoffValues dyadic_cutoffs(const Grid& g, const CutoffFamily& fam = {}) {
    const auto geo = geometry(g);
    CutoffValues out;
    out.qmin = q_min(g);
    out.qmax = q_max(g);
    out.chi.resize(g.modes());
    for (std::size_t i = 0; i < g.modes(); ++i) out.chi[i] = fam.chi_q(geo->radius[i], out.qmin);
    for (int q = out.qmin; q <= out.qmax; ++q) {
        std::vector<double> v(g.modes());
        for (std::size_t i = 0; i < g.modes(); ++i) v[i] = fam.phi_q(geo->radius[i], q);
        out.phi.push_back(std::move(v));
    }
    return out;
}

inline void check_block_index(const Grid& g, int q) {
    if (q < q_min(g) || q > q_max(g))
        throw RangeError("dyadic index " + std::to_string(q) + " outside [" +
                         std::to_string(q_min(g)) + ", " + std::to_string(q_max(g)) + "]");
}

inline Spectrum dyadic_block(const Spectrum& s, int q, const CutoffFamily& fam = {}) {
    check_block_index(s.grid(), q);
    const auto t = block_table(s.grid(), fam);
    return apply_symbol(s, [&](std::size_t m) { return t->weight(m, q); });
}
inline Field dyadic_block(const Field& f, int q, const CutoffFamily& fam = {}) {
    return inverse(dyadic_block(forward(f), q, fam));
}

/// S_q = chi(2^{-q} xi); keeps the mean mode.
inline Spectrum low_pass(const Spectrum& s, int q, const CutoffFamily& fam = {}) {
    const auto& r = s.geo().radius;
    return apply_symbol(s, [&](std::size_t m) { return fam.chi_q(r[m], q); });
}
inline Field low_pass(const Field& f, int q, const CutoffFamily& fam = {}) {
    return inverse(low_pass(forward(f), q, fam));
}

enum class Flavor { nonhomogeneous, homogeneous, hybrid };

/// Blocks of a field. Homogeneous: low_block is the mean, blocks run over
/// q_min..q_max. Nonhomogeneous: low_block is S_0 f, blocks run over
/// max(0, q_min)..q_max.
struct DyadicDecomposition {
    int q_min = 0;
    int q_max = 0;
    Field low_block;
    std::vector<Field> blocks;

    const Field& block(int q) const {
        if (q < q_min || q > q_max) throw RangeError("block index out of range");
        return blocks[static_cast<std::size_t>(q - q_min)];
    }
    Field sum() const {
        Field acc = low_block;
        for (const auto& b : blocks) acc += b;
        return acc;
    }
};

inline DyadicDecomposition decompose(const Field& f, Flavor flavor = Flavor::homogeneous,
                                     const CutoffFamily& fam = {}) {
    const Grid& g = f.grid();
    const auto s = forward(f);
    const auto t = block_table(g, fam);
    DyadicDecomposition out;
    out.q_max = t->qmax;
    if (flavor == Flavor::nonhomogeneous) {
        out.q_min = std::max(0, t->qmin);
        out.low_block = inverse(apply_symbol(s, [&](std::size_t m) { return t->chi0[m]; }));
    } else {
        out.q_min = t->qmin;
        out.low_block = Field(g);
        const double avg = mean(s);
        for (auto& v : out.low_block.values()) v = avg;
    }
    for (int q = out.q_min; q <= out.q_max; ++q)
        out.blocks.push_back(inverse(apply_symbol(s, [&](std::size_t m) { return t->weight(m, q); })));
    return out;
}

}  // namespace vesp
